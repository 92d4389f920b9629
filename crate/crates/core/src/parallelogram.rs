//! Perfect parallelograms and the pair index used to join them.
//!
//! A parallelogram with edges `x1 >= x2` and minor diagonal `d` has major
//! diagonal `D` with `D^2 = 2 x1^2 + 2 x2^2 - d^2`. Restricting `d` to
//! `x1 - x2 < d <= sqrt(x1^2 + x2^2)` picks out the minor diagonal and drops
//! the collinear case. Rectangles appear once, with `d == D`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{isqrt_u64, square_root_u64, MAX_EDGE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PerfectParallelogram {
    pub x1: u32,
    pub x2: u32,
    pub d_minor: u32,
    pub d_major: u32,
}

impl PerfectParallelogram {
    pub fn is_rectangle(&self) -> bool {
        self.d_minor == self.d_major
    }
}

impl fmt::Display for PerfectParallelogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            self.x1, self.x2, self.d_minor, self.d_major
        )
    }
}

/// Major diagonal for edges `x1, x2` and minor diagonal `d`, if it is an integer.
#[inline]
pub fn major_diagonal(x1: u32, x2: u32, d: u32) -> Option<u32> {
    let (a, b, d) = (x1 as u64, x2 as u64, d as u64);
    let s = 2 * (a * a + b * b);
    s.checked_sub(d * d)
        .and_then(square_root_u64)
        .map(|r| r as u32)
}

fn minors_of_pair(x1: u32, x2: u32, out: &mut Vec<u32>) {
    let (a, b) = (x1 as u64, x2 as u64);
    let half = a * a + b * b;
    let sum = 2 * half;
    let lo = a - b + 1;
    let hi = isqrt_u64(half);
    for d in lo..=hi {
        if square_root_u64(sum - d * d).is_some() {
            out.push(d as u32);
        }
    }
}

/// Every perfect parallelogram with edges `x1 >= x2`, ascending by minor diagonal.
pub fn enumerate_pair(x1: u32, x2: u32) -> Result<Vec<PerfectParallelogram>> {
    if x2 == 0 || x2 > x1 {
        return Err(Error::Usage(format!(
            "parallelogram edges must satisfy 1 <= x2 <= x1, got x1={x1} x2={x2}"
        )));
    }
    if x1 > MAX_EDGE {
        return Err(Error::Budget(x1));
    }
    let mut minors = Vec::new();
    minors_of_pair(x1, x2, &mut minors);
    Ok(minors
        .into_iter()
        .map(|d| PerfectParallelogram {
            x1,
            x2,
            d_minor: d,
            d_major: major_diagonal(x1, x2, d).expect("minor admitted without integer major"),
        })
        .collect())
}

/// Minor diagonals of every perfect parallelogram on each edge pair `a >= b`,
/// for `min_edge <= b <= a <= max_edge`.
///
/// Pairs are laid out in triangular order (`a` ascending, then `b`
/// ascending) and their diagonal lists are stored back to back in one buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelogramIndex {
    max_edge: u32,
    min_edge: u32,
    offsets: Vec<u32>,
    minors: Vec<u32>,
}

#[inline]
fn slot(a: u32, b: u32) -> usize {
    let a = a as usize;
    a * (a - 1) / 2 + b as usize - 1
}

impl ParallelogramIndex {
    pub fn max_edge(&self) -> u32 {
        self.max_edge
    }

    pub fn min_edge(&self) -> u32 {
        self.min_edge
    }

    /// Minor diagonals on edges `a`, `b` (either order), ascending.
    ///
    /// Pairs outside the covered range yield an empty slice.
    #[inline]
    pub fn minors(&self, a: u32, b: u32) -> &[u32] {
        let (a, b) = if a >= b { (a, b) } else { (b, a) };
        if b < self.min_edge || a > self.max_edge {
            return &[];
        }
        let s = slot(a, b);
        &self.minors[self.offsets[s] as usize..self.offsets[s + 1] as usize]
    }

    /// Number of parallelograms in the index.
    pub fn len(&self) -> usize {
        self.minors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minors.is_empty()
    }

    /// Heap bytes held by the index.
    pub fn footprint_bytes(&self) -> usize {
        (self.offsets.capacity() + self.minors.capacity()) * std::mem::size_of::<u32>()
    }

    /// All parallelograms in ascending `(x1, x2, d_minor)` order.
    pub fn iter(&self) -> impl Iterator<Item = PerfectParallelogram> + '_ {
        (1..=self.max_edge).flat_map(move |a| {
            (self.min_edge..=a).flat_map(move |b| {
                self.minors(a, b)
                    .iter()
                    .map(move |&d| PerfectParallelogram {
                        x1: a,
                        x2: b,
                        d_minor: d,
                        d_major: major_diagonal(a, b, d)
                            .expect("indexed minor without integer major"),
                    })
            })
        })
    }
}

/// Builds the index over `min_edge <= x2 <= x1 <= max_edge`.
///
/// Rows are computed in parallel on the current rayon pool; the result does
/// not depend on the number of threads.
pub fn enumerate_range(max_edge: u32, min_edge: u32) -> Result<ParallelogramIndex> {
    if min_edge == 0 || min_edge > max_edge {
        return Err(Error::Usage(format!(
            "edge range must satisfy 1 <= min_edge <= max_edge, got min_edge={min_edge} max_edge={max_edge}"
        )));
    }
    if max_edge > MAX_EDGE {
        return Err(Error::Budget(max_edge));
    }

    // Per x1: cumulative list lengths for x2 = 1..=x1 and the concatenated minors.
    let rows: Vec<(Vec<u32>, Vec<u32>)> = (1..=max_edge)
        .into_par_iter()
        .map(|a| {
            let mut ends = Vec::with_capacity(a as usize);
            let mut minors = Vec::new();
            for b in 1..=a {
                if b >= min_edge {
                    minors_of_pair(a, b, &mut minors);
                }
                ends.push(minors.len() as u32);
            }
            (ends, minors)
        })
        .collect();

    let slots = slot(max_edge, max_edge) + 1;
    let total: usize = rows.iter().map(|(_, m)| m.len()).sum();
    if total > u32::MAX as usize {
        return Err(Error::Budget(max_edge));
    }
    let mut offsets = Vec::with_capacity(slots + 1);
    let mut minors = Vec::with_capacity(total);
    offsets.push(0u32);
    for (ends, row) in rows {
        let base = minors.len() as u32;
        offsets.extend(ends.iter().map(|&e| base + e));
        minors.extend_from_slice(&row);
    }
    debug_assert_eq!(offsets.len(), slots + 1);

    Ok(ParallelogramIndex {
        max_edge,
        min_edge,
        offsets,
        minors,
    })
}
