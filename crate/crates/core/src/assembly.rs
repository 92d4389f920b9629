//! Edge-matched triples of perfect parallelograms and the filters applied to
//! them: the four body-diagonal conditions and exact realizability in R^3.
//!
//! Notation: edges `x1 >= x2 >= x3`, minor face diagonals `dij`, and
//! `qij = xi^2 + xj^2 - dij^2`, which is twice the dot product of the edge
//! vectors `i` and `j`. The matrix `M` with diagonal `2 xi^2` and
//! off-diagonal `qij` is twice the Gram matrix of the edge vectors, so a
//! nondegenerate parallelepiped exists exactly when `det M > 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{square_root_i64, sym3_det};
use crate::error::{Error, Result};
use crate::parallelogram::{major_diagonal, ParallelogramIndex};

/// Three edges and the minor diagonals of the three faces they span.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateTriple {
    pub x1: u32,
    pub x2: u32,
    pub x3: u32,
    pub d12: u32,
    pub d13: u32,
    pub d23: u32,
}

impl fmt::Display for CandidateTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}; {}, {}, {})",
            self.x1, self.x2, self.x3, self.d12, self.d13, self.d23
        )
    }
}

/// `num / den` with `num = xi^2 + xj^2 - dij^2` and `den = 2 xi xj`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactCosine {
    pub num: i64,
    pub den: i64,
}

impl ExactCosine {
    pub fn new(xi: i64, xj: i64, dij: i64) -> Self {
        Self {
            num: xi * xi + xj * xj - dij * dij,
            den: 2 * xi * xj,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `sqrt(1 - c^2)`, with `1 - c^2` formed exactly before rounding.
    pub fn sine(self) -> f64 {
        let (n, d) = (self.num as i128, self.den as i128);
        (((d - n) * (d + n)) as f64).sqrt() / self.den as f64
    }

    /// Face angle in degrees, for display.
    pub fn degrees(self) -> f64 {
        self.to_f64().acos().to_degrees()
    }
}

/// Integer body-diagonal lengths; `mi` has edge `i` entering negatively and
/// `m4` is the all-positive diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BodyDiagonals {
    pub m1: u32,
    pub m2: u32,
    pub m3: u32,
    pub m4: u32,
}

impl BodyDiagonals {
    pub fn as_array(&self) -> [u32; 4] {
        [self.m1, self.m2, self.m3, self.m4]
    }
}

impl CandidateTriple {
    /// Checked constructor for triples from outside the search.
    pub fn new(x1: u32, x2: u32, x3: u32, d12: u32, d13: u32, d23: u32) -> Result<Self> {
        let t = Self {
            x1,
            x2,
            x3,
            d12,
            d13,
            d23,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn edges(&self) -> [u32; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn minor_diagonals(&self) -> [u32; 3] {
        [self.d12, self.d13, self.d23]
    }

    fn faces(&self) -> [(u32, u32, u32); 3] {
        [
            (self.x1, self.x2, self.d12),
            (self.x1, self.x3, self.d13),
            (self.x2, self.x3, self.d23),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x1 >= self.x2 && self.x2 >= self.x3 && self.x3 >= 1) {
            return Err(Error::Contract(format!(
                "edges of {self} are not in canonical order"
            )));
        }
        for (xi, xj, d) in self.faces() {
            let c = ExactCosine::new(xi as i64, xj as i64, d as i64);
            if !(0 <= c.num && c.num < c.den) {
                return Err(Error::Contract(format!(
                    "face ({xi}, {xj}) of {self} has diagonal {d}, which is not a nondegenerate minor diagonal"
                )));
            }
            if major_diagonal(xi, xj, d).is_none() {
                return Err(Error::Contract(format!(
                    "face ({xi}, {xj}, {d}) of {self} is not a perfect parallelogram"
                )));
            }
        }
        Ok(())
    }

    /// `[c12, c13, c23]`.
    pub fn cosines(&self) -> [ExactCosine; 3] {
        self.faces()
            .map(|(xi, xj, d)| ExactCosine::new(xi as i64, xj as i64, d as i64))
    }

    /// `[D12, D13, D23]`.
    pub fn major_diagonals(&self) -> [u32; 3] {
        self.faces().map(|(xi, xj, d)| {
            major_diagonal(xi, xj, d).expect("triple face is not a perfect parallelogram")
        })
    }

    /// Squared body-diagonal lengths `[m1^2, m2^2, m3^2, m4^2]`, possibly
    /// negative or non-square.
    #[inline]
    pub fn body_diagonal_squares(&self) -> [i64; 4] {
        let sq = |v: u32| (v as i64) * (v as i64);
        let (a, b, c) = (sq(self.x1), sq(self.x2), sq(self.x3));
        let (p, q, r) = (sq(self.d12), sq(self.d13), sq(self.d23));
        [
            -a + b + c + p + q - r,
            a - b + c + p - q + r,
            a + b - c - p + q + r,
            3 * (a + b + c) - p - q - r,
        ]
    }

    pub fn scaled(&self, k: u32) -> Self {
        Self {
            x1: self.x1 * k,
            x2: self.x2 * k,
            x3: self.x3 * k,
            d12: self.d12 * k,
            d13: self.d13 * k,
            d23: self.d23 * k,
        }
    }
}

/// Every canonical triple with largest edge exactly `x1`, ordered by `x2`,
/// `x3`, then `d12`, `d13`, `d23`.
///
/// Yields nothing when `x1` lies outside the index.
pub fn assemble(index: &ParallelogramIndex, x1: u32) -> impl Iterator<Item = CandidateTriple> + '_ {
    let top = if x1 <= index.max_edge() { x1 } else { 0 };
    (1..=top).flat_map(move |x2| {
        let l12 = index.minors(x1, x2);
        let x3_top = if l12.is_empty() { 0 } else { x2 };
        (1..=x3_top).flat_map(move |x3| {
            let l13 = index.minors(x1, x3);
            let l23 = if l13.is_empty() {
                &[][..]
            } else {
                index.minors(x2, x3)
            };
            l12.iter().flat_map(move |&d12| {
                l13.iter().flat_map(move |&d13| {
                    l23.iter().map(move |&d23| CandidateTriple {
                        x1,
                        x2,
                        x3,
                        d12,
                        d13,
                        d23,
                    })
                })
            })
        })
    })
}

/// How many of the four body-diagonal conditions hold (each: strictly
/// positive and a perfect square).
#[inline]
pub fn conditions_met(squares: &[i64; 4]) -> u8 {
    squares
        .iter()
        .filter(|&&s| s > 0 && square_root_i64(s).is_some())
        .count() as u8
}

/// The four body diagonals when all of them are positive integers.
pub fn body_diagonals(t: &CandidateTriple) -> Option<BodyDiagonals> {
    let [s1, s2, s3, s4] = t.body_diagonal_squares();
    let root = |s: i64| {
        if s > 0 {
            square_root_i64(s).map(|r| r as u32)
        } else {
            None
        }
    };
    Some(BodyDiagonals {
        m1: root(s1)?,
        m2: root(s2)?,
        m3: root(s3)?,
        m4: root(s4)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Realizable,
    Degenerate,
    NonRealizable,
}

/// Outcome of the realizability test with `det M` as witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Realizability {
    pub decision: Decision,
    pub det: i128,
}

/// `det M` for edges and minor diagonals of any size; fails on overflow.
pub fn doubled_gram_det(edges: [i64; 3], minors: [i64; 3]) -> Result<i128> {
    let overflow = || Error::Overflow("doubled Gram matrix entries");
    let sq = |v: i64| (v as i128).checked_mul(v as i128).ok_or_else(overflow);
    let [a, b, c] = [sq(edges[0])?, sq(edges[1])?, sq(edges[2])?];
    let [p, q, r] = [sq(minors[0])?, sq(minors[1])?, sq(minors[2])?];
    let off = |u: i128, v: i128, d: i128| {
        u.checked_add(v)
            .and_then(|s| s.checked_sub(d))
            .ok_or_else(overflow)
    };
    let two = |u: i128| u.checked_mul(2).ok_or_else(overflow);
    sym3_det(
        two(a)?,
        two(b)?,
        two(c)?,
        off(a, b, p)?,
        off(a, c, q)?,
        off(b, c, r)?,
    )
}

pub fn classify(det: i128) -> Decision {
    match det.signum() {
        1 => Decision::Realizable,
        0 => Decision::Degenerate,
        _ => Decision::NonRealizable,
    }
}

/// Decides whether the triple spans a nondegenerate parallelepiped in R^3.
///
/// The two leading minors of `M` are positive for any valid triple
/// (`2 x1^2 > 0` and `4 x1^2 x2^2 > q12^2` since `0 <= q12 < 2 x1 x2`), so
/// positive definiteness reduces to `det M > 0`.
pub fn realizability(t: &CandidateTriple) -> Result<Realizability> {
    let edges = t.edges().map(i64::from);
    let minors = t.minor_diagonals().map(i64::from);
    let det = doubled_gram_det(edges, minors)?;
    Ok(Realizability {
        decision: classify(det),
        det,
    })
}

/// Edge vectors `[u, v, w]` realizing the triple, in floating point.
///
/// `u` lies along the first axis and `v` in the first coordinate plane.
pub fn embed(t: &CandidateTriple) -> Result<[[f64; 3]; 3]> {
    let r = realizability(t)?;
    if r.decision != Decision::Realizable {
        return Err(Error::Contract(format!(
            "cannot embed {t}: det M = {}",
            r.det
        )));
    }
    Ok(embed_unchecked(t.edges().map(f64::from), t.cosines()))
}

pub(crate) fn embed_unchecked(edges: [f64; 3], cosines: [ExactCosine; 3]) -> [[f64; 3]; 3] {
    let [x1, x2, x3] = edges;
    let [c12, c13, c23] = cosines;
    let (s12, s13) = (c12.sine(), c13.sine());
    let (c12, c13, c23) = (c12.to_f64(), c13.to_f64(), c23.to_f64());
    let rho = (c23 - c12 * c13) / (s12 * s13);
    let u = [x1, 0.0, 0.0];
    let v = [x2 * c12, x2 * s12, 0.0];
    let w = [
        x3 * c13,
        x3 * rho * s13,
        x3 * (1.0 - rho * rho).sqrt() * s13,
    ];
    [u, v, w]
}

/// The 13 lengths spanned by edge vectors, in certificate order:
/// edges, minor diagonals `|u-v|, |u-w|, |v-w|`, major diagonals
/// `|u+v|, |u+w|, |v+w|`, then body diagonals `m1..m4`.
pub fn spanned_lengths(coords: &[[f64; 3]; 3]) -> [f64; 13] {
    let [u, v, w] = coords;
    let comb = |a: f64, b: f64, c: f64| {
        let p = [0, 1, 2].map(|k| a * u[k] + b * v[k] + c * w[k]);
        (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
    };
    [
        comb(1.0, 0.0, 0.0),
        comb(0.0, 1.0, 0.0),
        comb(0.0, 0.0, 1.0),
        comb(1.0, -1.0, 0.0),
        comb(1.0, 0.0, -1.0),
        comb(0.0, 1.0, -1.0),
        comb(1.0, 1.0, 0.0),
        comb(1.0, 0.0, 1.0),
        comb(0.0, 1.0, 1.0),
        comb(-1.0, 1.0, 1.0),
        comb(1.0, -1.0, 1.0),
        comb(1.0, 1.0, -1.0),
        comb(1.0, 1.0, 1.0),
    ]
}
