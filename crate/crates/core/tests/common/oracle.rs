//! Naive brute-force reference for the search funnel.
//!
//! Shares no code with the library: no pair index, no residue prefilter,
//! its own square test and a full Leibniz determinant.

#![allow(dead_code)]

pub type Triple = [u64; 6];

pub fn is_square(n: i128) -> Option<u64> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r as u64)
}

/// `xi^2 + xj^2 - d^2` lies in `[0, 2 xi xj)` and the major diagonal is integral.
pub fn is_perfect_face(xi: u64, xj: u64, d: u64) -> bool {
    let (a, b, d) = (xi as i128, xj as i128, d as i128);
    let q = a * a + b * b - d * d;
    0 <= q && q < 2 * a * b && is_square(2 * a * a + 2 * b * b - d * d).is_some()
}

/// Every `(x1, x2, d_minor, d_major)` with `x2 <= x1 <= max_edge`, ascending.
pub fn parallelograms(max_edge: u64) -> Vec<[u64; 4]> {
    let mut out = Vec::new();
    for x1 in 1..=max_edge {
        for x2 in 1..=x1 {
            for d in 1..x1 + x2 {
                if is_perfect_face(x1, x2, d) {
                    let (a, b, d2) = ((x1 * x1) as i128, (x2 * x2) as i128, (d * d) as i128);
                    out.push([x1, x2, d, is_square(2 * a + 2 * b - d2).unwrap()]);
                }
            }
        }
    }
    out
}

fn det3(m: [[i128; 3]; 3]) -> i128 {
    m[0][0] * m[1][1] * m[2][2] + m[0][1] * m[1][2] * m[2][0] + m[0][2] * m[1][0] * m[2][1]
        - m[0][2] * m[1][1] * m[2][0]
        - m[0][0] * m[1][2] * m[2][1]
        - m[0][1] * m[1][0] * m[2][2]
}

pub fn body_squares(t: &Triple) -> [i128; 4] {
    let s = t.map(|v| (v as i128) * (v as i128));
    let (a, b, c, p, q, r) = (s[0], s[1], s[2], s[3], s[4], s[5]);
    [
        -a + b + c + p + q - r,
        a - b + c + p - q + r,
        a + b - c - p + q + r,
        3 * (a + b + c) - p - q - r,
    ]
}

/// Determinant of twice the Gram matrix of the edge vectors.
pub fn gram_det(t: &Triple) -> i128 {
    let s = t.map(|v| (v as i128) * (v as i128));
    let (a, b, c, p, q, r) = (s[0], s[1], s[2], s[3], s[4], s[5]);
    det3([
        [2 * a, a + b - p, a + c - q],
        [a + b - p, 2 * b, b + c - r],
        [a + c - q, b + c - r, 2 * c],
    ])
}

pub struct OracleRun {
    pub triples: Vec<Triple>,
    pub all_four: Vec<Triple>,
    pub realizable: Vec<Triple>,
}

/// Canonical triples with largest edge in `[min_x1, max_x1]`, with the
/// all-four and realizable subsets.
pub fn search(min_x1: u64, max_x1: u64, keep_all_triples: bool) -> OracleRun {
    let mut run = OracleRun {
        triples: Vec::new(),
        all_four: Vec::new(),
        realizable: Vec::new(),
    };
    for x1 in min_x1..=max_x1 {
        for x2 in 1..=x1 {
            for x3 in 1..=x2 {
                for d12 in 1..x1 + x2 {
                    if !is_perfect_face(x1, x2, d12) {
                        continue;
                    }
                    for d13 in 1..x1 + x3 {
                        if !is_perfect_face(x1, x3, d13) {
                            continue;
                        }
                        for d23 in 1..x2 + x3 {
                            if !is_perfect_face(x2, x3, d23) {
                                continue;
                            }
                            let t = [x1, x2, x3, d12, d13, d23];
                            if keep_all_triples {
                                run.triples.push(t);
                            }
                            if body_squares(&t)
                                .iter()
                                .all(|&s| s > 0 && is_square(s).is_some())
                            {
                                run.all_four.push(t);
                                if gram_det(&t) > 0 {
                                    run.realizable.push(t);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    run
}
