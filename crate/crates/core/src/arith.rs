//! Exact integer primitives: square roots, square detection and small
//! symmetric determinants.
//!
//! Everything here is exact. Overflow is reported as [`Error::Overflow`],
//! never wrapped and never retried in floating point.

use crate::error::{Error, Result};

/// Largest edge length the search accepts.
///
/// The doubled Gram determinant of a triple with edges at most `N` is bounded
/// by `8 N^6`, which stays below `i128::MAX` with a wide margin at `N = 10^5`.
pub const MAX_EDGE: u32 = 100_000;

/// `⌊√n⌋`.
#[inline]
pub fn isqrt(n: u128) -> u128 {
    n.isqrt()
}

/// `⌊√n⌋` for the 64-bit hot path.
#[inline]
pub fn isqrt_u64(n: u64) -> u64 {
    n.isqrt()
}

// Bit `r` set iff `r` is a quadratic residue modulo the table's modulus.
const fn residue_mask<const M: usize>() -> [bool; M] {
    let mut mask = [false; M];
    let mut i = 0;
    while i < M {
        mask[(i * i) % M] = true;
        i += 1;
    }
    mask
}

static QR64: [bool; 64] = residue_mask::<64>();
static QR63: [bool; 63] = residue_mask::<63>();
static QR65: [bool; 65] = residue_mask::<65>();
static QR11: [bool; 11] = residue_mask::<11>();

/// Cheap necessary condition for `n` to be a square.
///
/// Rejects about 99.4% of non-squares. Never rejects a square.
#[inline]
pub fn may_be_square(n: u64) -> bool {
    if !QR64[(n & 63) as usize] {
        return false;
    }
    // 45045 = 63 * 65 * 11
    let r = n % 45045;
    QR63[(r % 63) as usize] && QR65[(r % 65) as usize] && QR11[(r % 11) as usize]
}

/// Square root of `n` if `n` is a perfect square.
#[inline]
pub fn square_root_u64(n: u64) -> Option<u64> {
    if !may_be_square(n) {
        return None;
    }
    let r = isqrt_u64(n);
    (r * r == n).then_some(r)
}

/// Square root of `n` if `n` is a nonnegative perfect square.
#[inline]
pub fn is_perfect_square(n: i128) -> Option<u128> {
    if n < 0 {
        return None;
    }
    let n = n as u128;
    if let Ok(small) = u64::try_from(n) {
        return square_root_u64(small).map(u128::from);
    }
    if !QR64[(n & 63) as usize] || !QR63[(n % 63) as usize] || !QR65[(n % 65) as usize] {
        return None;
    }
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Same as [`is_perfect_square`] for values known to fit in `i64`.
#[inline]
pub fn square_root_i64(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    square_root_u64(n as u64).map(|r| r as i64)
}

fn mul3(a: i128, b: i128, c: i128) -> Option<i128> {
    a.checked_mul(b)?.checked_mul(c)
}

/// Determinant of the symmetric matrix
///
/// ```text
/// | m11 m12 m13 |
/// | m12 m22 m23 |
/// | m13 m23 m33 |
/// ```
///
/// computed exactly; fails with [`Error::Overflow`] instead of wrapping.
pub fn sym3_det(m11: i128, m22: i128, m33: i128, m12: i128, m13: i128, m23: i128) -> Result<i128> {
    let overflow = || Error::Overflow("symmetric 3x3 determinant");
    let diag = mul3(m11, m22, m33).ok_or_else(overflow)?;
    let cross = mul3(m12, m13, m23)
        .and_then(|t| t.checked_mul(2))
        .ok_or_else(overflow)?;
    let r1 = mul3(m11, m23, m23).ok_or_else(overflow)?;
    let r2 = mul3(m22, m13, m13).ok_or_else(overflow)?;
    let r3 = mul3(m33, m12, m12).ok_or_else(overflow)?;
    diag.checked_add(cross)
        .and_then(|s| s.checked_sub(r1))
        .and_then(|s| s.checked_sub(r2))
        .and_then(|s| s.checked_sub(r3))
        .ok_or_else(overflow)
}

/// Greatest common divisor of two nonnegative integers.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
