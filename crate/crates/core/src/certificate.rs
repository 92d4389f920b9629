//! Verified perfect parallelepipeds.
//!
//! A [`Certificate`] carries all 13 lengths plus derived data. Only the edges
//! and minor diagonals are trusted by [`Certificate::verify`]; every other
//! field is a claim recomputed from those six numbers with exact integer
//! arithmetic. The coordinates are advisory and never consulted.
//!
//! Two encodings exist:
//!
//! * one JSON object per line with fields `edges`, `minor_diagonals`,
//!   `major_diagonals`, `body_diagonals`, `cosines`, `gram_det` (decimal
//!   string), `primitive` and `coords_approx`;
//! * a flat comma-separated line of the 13 lengths in the order
//!   `x1,x2,x3,d12,d13,d23,D12,D13,D23,m1,m2,m3,m4`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{gcd, is_perfect_square};
use crate::assembly::{self, classify, BodyDiagonals, CandidateTriple, Decision, ExactCosine};
use crate::error::{Error, Result};

/// Column header for the comma-separated encoding.
pub const CSV_HEADER: &str = "x1,x2,x3,d12,d13,d23,D12,D13,D23,m1,m2,m3,m4";

const FACES: [&str; 3] = ["12", "13", "23"];
const FIELD_NAMES: [&str; 13] = [
    "x1", "x2", "x3", "d12", "d13", "d23", "D12", "D13", "D23", "m1", "m2", "m3", "m4",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub edges: [i64; 3],
    pub minor_diagonals: [i64; 3],
    pub major_diagonals: [i64; 3],
    pub body_diagonals: [i64; 4],
    pub cosines: [ExactCosine; 3],
    #[serde(with = "decimal_i128")]
    pub gram_det: i128,
    pub primitive: bool,
    pub coords_approx: [[f64; 3]; 3],
}

/// Why a certificate failed verification.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Invalid {
    #[error("parse: {0}")]
    Parse(String),
    #[error("length {field} is not positive")]
    NonPositiveLength { field: &'static str },
    #[error("face {face}: diagonal is not a nondegenerate minor diagonal")]
    MinorDiagonal { face: &'static str },
    #[error("face {face}: cosine does not match edges and minor diagonal")]
    Cosine { face: &'static str },
    #[error("face {face}: major diagonal identity fails")]
    MajorDiagonal { face: &'static str },
    #[error("body-diagonal identity fails for m{index}")]
    BodyDiagonal { index: usize },
    #[error("not realizable: gram_det = {det} <= 0")]
    NotRealizable { det: i128 },
    #[error("gram_det claimed {claimed}, recomputed {actual}")]
    GramDeterminant { claimed: i128, actual: i128 },
    #[error("primitive flag {claimed} does not match gcd of edges")]
    PrimitiveFlag { claimed: bool },
    #[error("arithmetic overflow: lengths too large to check exactly")]
    Overflow,
}

fn sq(v: i64) -> Result<i128, Invalid> {
    (v as i128).checked_mul(v as i128).ok_or(Invalid::Overflow)
}

/// Signed sum of squared lengths, exactly.
fn combo(terms: &[(i128, i128)]) -> Result<i128, Invalid> {
    terms.iter().try_fold(0i128, |acc, &(coef, value)| {
        coef.checked_mul(value)
            .and_then(|t| acc.checked_add(t))
            .ok_or(Invalid::Overflow)
    })
}

/// Everything implied by three edges and three minor diagonals.
///
/// Fields that fail to be integral are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub edges: [i64; 3],
    pub minor_diagonals: [i64; 3],
    pub major_diagonals: [Option<i64>; 3],
    pub body_diagonal_squares: [i128; 4],
    pub body_diagonals: [Option<i64>; 4],
    pub cosines: [ExactCosine; 3],
    pub gram_det: i128,
}

fn faces(edges: [i64; 3], minors: [i64; 3]) -> [(i64, i64, i64); 3] {
    [
        (edges[0], edges[1], minors[0]),
        (edges[0], edges[2], minors[1]),
        (edges[1], edges[2], minors[2]),
    ]
}

fn body_squares(edges: [i64; 3], minors: [i64; 3]) -> Result<[i128; 4], Invalid> {
    let [a, b, c] = [sq(edges[0])?, sq(edges[1])?, sq(edges[2])?];
    let [p, q, r] = [sq(minors[0])?, sq(minors[1])?, sq(minors[2])?];
    Ok([
        combo(&[(-1, a), (1, b), (1, c), (1, p), (1, q), (-1, r)])?,
        combo(&[(1, a), (-1, b), (1, c), (1, p), (-1, q), (1, r)])?,
        combo(&[(1, a), (1, b), (-1, c), (-1, p), (1, q), (1, r)])?,
        combo(&[(3, a), (3, b), (3, c), (-1, p), (-1, q), (-1, r)])?,
    ])
}

/// Checks positivity and the minor-diagonal convention on each face.
fn check_faces(edges: [i64; 3], minors: [i64; 3]) -> Result<[ExactCosine; 3], Invalid> {
    for (i, &v) in edges.iter().chain(&minors).enumerate() {
        if v <= 0 {
            return Err(Invalid::NonPositiveLength {
                field: FIELD_NAMES[i],
            });
        }
    }
    let mut cosines = [ExactCosine { num: 0, den: 1 }; 3];
    for (k, (xi, xj, d)) in faces(edges, minors).into_iter().enumerate() {
        let num = combo(&[(1, sq(xi)?), (1, sq(xj)?), (-1, sq(d)?)])?;
        let den = combo(&[(2 * xi as i128, xj as i128)])?;
        if !(0 <= num && num < den) {
            return Err(Invalid::MinorDiagonal { face: FACES[k] });
        }
        let (num, den) = (i64::try_from(num), i64::try_from(den));
        let (Ok(num), Ok(den)) = (num, den) else {
            return Err(Invalid::Overflow);
        };
        cosines[k] = ExactCosine { num, den };
    }
    Ok(cosines)
}

fn isqrt_claim(v: i128) -> Option<i64> {
    is_perfect_square(v).and_then(|r| i64::try_from(r).ok())
}

/// Recomputes every derived quantity from edges and minor diagonals.
pub fn reconstruct(edges: [i64; 3], minors: [i64; 3]) -> Result<Reconstruction, Invalid> {
    let cosines = check_faces(edges, minors)?;
    let mut majors = [None; 3];
    for (k, (xi, xj, d)) in faces(edges, minors).into_iter().enumerate() {
        let major_sq = combo(&[(2, sq(xi)?), (2, sq(xj)?), (-1, sq(d)?)])?;
        majors[k] = isqrt_claim(major_sq);
    }
    let body_diagonal_squares = body_squares(edges, minors)?;
    let body_diagonals = body_diagonal_squares.map(|s| if s > 0 { isqrt_claim(s) } else { None });
    let gram_det = assembly::doubled_gram_det(edges, minors).map_err(|_| Invalid::Overflow)?;
    Ok(Reconstruction {
        edges,
        minor_diagonals: minors,
        major_diagonals: majors,
        body_diagonal_squares,
        body_diagonals,
        cosines,
        gram_det,
    })
}

impl Reconstruction {
    /// The certificate these lengths define, if they define one.
    pub fn into_certificate(self) -> Result<Certificate, Invalid> {
        let mut majors = [0; 3];
        for (k, m) in self.major_diagonals.iter().enumerate() {
            majors[k] = m.ok_or(Invalid::MajorDiagonal { face: FACES[k] })?;
        }
        let mut body = [0; 4];
        for (k, m) in self.body_diagonals.iter().enumerate() {
            body[k] = m.ok_or(Invalid::BodyDiagonal { index: k + 1 })?;
        }
        if classify(self.gram_det) != Decision::Realizable {
            return Err(Invalid::NotRealizable { det: self.gram_det });
        }
        let coords = assembly::embed_unchecked(self.edges.map(|e| e as f64), self.cosines);
        Ok(Certificate {
            edges: self.edges,
            minor_diagonals: self.minor_diagonals,
            major_diagonals: majors,
            body_diagonals: body,
            cosines: self.cosines,
            gram_det: self.gram_det,
            primitive: edges_gcd(self.edges) == 1,
            coords_approx: coords.map(|v| v.map(round_significant)),
        })
    }
}

fn edges_gcd(edges: [i64; 3]) -> u64 {
    edges.iter().fold(0, |g, &e| gcd(g, e.unsigned_abs()))
}

/// Rounds to 15 significant decimal digits.
fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

impl Certificate {
    /// Packages a triple that survived every filter.
    pub fn build(t: &CandidateTriple, b: &BodyDiagonals) -> Result<Self> {
        t.validate()?;
        let r = assembly::realizability(t)?;
        if r.decision != Decision::Realizable {
            return Err(Error::Contract(format!(
                "{t} is not realizable (det M = {})",
                r.det
            )));
        }
        if assembly::body_diagonals(t).as_ref() != Some(b) {
            return Err(Error::Contract(format!(
                "{b:?} are not the body diagonals of {t}"
            )));
        }
        let cosines = t.cosines();
        let coords = assembly::embed_unchecked(t.edges().map(f64::from), cosines);
        Ok(Self {
            edges: t.edges().map(i64::from),
            minor_diagonals: t.minor_diagonals().map(i64::from),
            major_diagonals: t.major_diagonals().map(i64::from),
            body_diagonals: b.as_array().map(i64::from),
            cosines,
            gram_det: r.det,
            primitive: edges_gcd(t.edges().map(i64::from)) == 1,
            coords_approx: coords.map(|v| v.map(round_significant)),
        })
    }

    /// Reconstructs a certificate from edges and minor diagonals alone.
    pub fn from_minors(edges: [i64; 3], minors: [i64; 3]) -> Result<Self, Invalid> {
        reconstruct(edges, minors)?.into_certificate()
    }

    /// `gcd(x1, x2, x3) == 1`.
    pub fn is_primitive(&self) -> bool {
        edges_gcd(self.edges) == 1
    }

    /// Lengths in CSV order.
    pub fn lengths(&self) -> [i64; 13] {
        let mut out = [0; 13];
        out[..3].copy_from_slice(&self.edges);
        out[3..6].copy_from_slice(&self.minor_diagonals);
        out[6..9].copy_from_slice(&self.major_diagonals);
        out[9..].copy_from_slice(&self.body_diagonals);
        out
    }

    /// Exact check of every claim against edges and minor diagonals.
    pub fn verify(&self) -> Result<(), Invalid> {
        for (i, &v) in self.lengths().iter().enumerate() {
            if v <= 0 {
                return Err(Invalid::NonPositiveLength {
                    field: FIELD_NAMES[i],
                });
            }
        }
        let cosines = check_faces(self.edges, self.minor_diagonals)?;
        for k in 0..3 {
            if self.cosines[k] != cosines[k] {
                return Err(Invalid::Cosine { face: FACES[k] });
            }
        }
        for (k, (xi, xj, d)) in faces(self.edges, self.minor_diagonals)
            .into_iter()
            .enumerate()
        {
            let want = combo(&[(2, sq(xi)?), (2, sq(xj)?), (-1, sq(d)?)])?;
            if sq(self.major_diagonals[k])? != want {
                return Err(Invalid::MajorDiagonal { face: FACES[k] });
            }
        }
        let body = body_squares(self.edges, self.minor_diagonals)?;
        for (k, (&m, &want)) in self.body_diagonals.iter().zip(&body).enumerate() {
            if sq(m)? != want {
                return Err(Invalid::BodyDiagonal { index: k + 1 });
            }
        }
        let det = assembly::doubled_gram_det(self.edges, self.minor_diagonals)
            .map_err(|_| Invalid::Overflow)?;
        if det <= 0 {
            return Err(Invalid::NotRealizable { det });
        }
        if self.gram_det != det {
            return Err(Invalid::GramDeterminant {
                claimed: self.gram_det,
                actual: det,
            });
        }
        if self.primitive != self.is_primitive() {
            return Err(Invalid::PrimitiveFlag {
                claimed: self.primitive,
            });
        }
        Ok(())
    }

    /// Largest relative error between the lengths spanned by
    /// `coords_approx` and the integer lengths.
    pub fn embedding_error(&self) -> f64 {
        let spanned = assembly::spanned_lengths(&self.coords_approx);
        spanned
            .iter()
            .zip(self.lengths())
            .map(|(&got, want)| ((got - want as f64) / want as f64).abs())
            .fold(0.0, f64::max)
    }

    /// All lengths multiplied by `k`.
    pub fn scaled(&self, k: i64) -> Self {
        let k2 = k * k;
        let edges = self.edges.map(|v| v * k);
        let cosines = self.cosines.map(|c| ExactCosine {
            num: c.num * k2,
            den: c.den * k2,
        });
        let coords = assembly::embed_unchecked(edges.map(|e| e as f64), cosines);
        Self {
            edges,
            minor_diagonals: self.minor_diagonals.map(|v| v * k),
            major_diagonals: self.major_diagonals.map(|v| v * k),
            body_diagonals: self.body_diagonals.map(|v| v * k),
            cosines,
            gram_det: self.gram_det * (k2 as i128).pow(3),
            primitive: edges_gcd(edges) == 1,
            coords_approx: coords.map(|v| v.map(round_significant)),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self, Invalid> {
        serde_json::from_str(line).map_err(|e| Invalid::Parse(e.to_string()))
    }

    pub fn to_csv_line(&self) -> String {
        let l = self.lengths().map(|v| v.to_string());
        l.join(",")
    }

    /// Parses the 13 lengths; derived fields are recomputed from edges and
    /// minor diagonals, so only the length identities remain to be checked.
    pub fn from_csv_line(line: &str) -> Result<Self, Invalid> {
        let values: Vec<i64> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<i64>()
                    .map_err(|e| Invalid::Parse(format!("{f:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let Ok(l) = <[i64; 13]>::try_from(values.as_slice()) else {
            return Err(Invalid::Parse(format!(
                "expected 13 comma-separated lengths, got {}",
                values.len()
            )));
        };
        let edges = [l[0], l[1], l[2]];
        let minors = [l[3], l[4], l[5]];
        let cosines = check_faces(edges, minors)?;
        let gram_det = assembly::doubled_gram_det(edges, minors).map_err(|_| Invalid::Overflow)?;
        let coords = if gram_det > 0 {
            assembly::embed_unchecked(edges.map(|e| e as f64), cosines)
                .map(|v| v.map(round_significant))
        } else {
            [[0.0; 3]; 3]
        };
        Ok(Self {
            edges,
            minor_diagonals: minors,
            major_diagonals: [l[6], l[7], l[8]],
            body_diagonals: [l[9], l[10], l[11], l[12]],
            cosines,
            gram_det,
            primitive: edges_gcd(edges) == 1,
            coords_approx: coords,
        })
    }

    /// Parses either encoding, chosen by the first character.
    pub fn parse_record(line: &str) -> Result<Self, Invalid> {
        let line = line.trim();
        if line.starts_with('{') {
            Self::from_json_line(line)
        } else {
            Self::from_csv_line(line)
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x1, x2, x3] = self.edges;
        let [d12, d13, d23] = self.minor_diagonals;
        let [e12, e13, e23] = self.major_diagonals;
        let [m1, m2, m3, m4] = self.body_diagonals;
        write!(
            f,
            "edges {x1} {x2} {x3}; minor {d12} {d13} {d23}; major {e12} {e13} {e23}; body {m1} {m2} {m3} {m4}"
        )
    }
}

mod decimal_i128 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &i128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i128, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
