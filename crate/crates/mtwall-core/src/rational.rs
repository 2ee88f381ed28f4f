//! Exact rational positions on edges.
//!
//! Positions are `num_rational::Ratio<i128>`. The helpers here use checked
//! arithmetic so that an overflow surfaces as [`Error::Overflow`] rather than
//! a wrapped value.

use crate::{Error, Result};
use alloc::format;
use alloc::string::String;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};

/// Exact rational number.
pub type Q = num_rational::Ratio<i128>;

/// Builds `n/d` in lowest terms. Panics if `d == 0`.
pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

/// Checked `a + b`.
pub fn add(a: &Q, b: &Q) -> Result<Q> {
    a.checked_add(b).ok_or(Error::Overflow)
}

/// Checked `a - b`.
pub fn sub(a: &Q, b: &Q) -> Result<Q> {
    a.checked_sub(b).ok_or(Error::Overflow)
}

/// Checked `a * b`.
pub fn mul(a: &Q, b: &Q) -> Result<Q> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

/// Checked `a / b`; division by zero is reported as overflow.
pub fn div(a: &Q, b: &Q) -> Result<Q> {
    a.checked_div(b).ok_or(Error::Overflow)
}

/// Checked `a * k` for an integer `k`.
pub fn mul_int(a: &Q, k: i128) -> Result<Q> {
    mul(a, &Q::from_integer(k))
}

/// Checked `(j + s) / k`, the inverse of one affine branch of the flow.
pub fn branch_inverse(j: usize, s: &Q, k: usize) -> Result<Q> {
    let num = add(&Q::from_integer(j as i128), s)?;
    div(&num, &Q::from_integer(k as i128))
}

/// `1 - s`.
pub fn flip(s: &Q) -> Q {
    Q::one() - s
}

/// True iff `0 < s < 1`.
pub fn is_interior(s: &Q) -> bool {
    *s > Q::zero() && *s < Q::one()
}

/// Formats as `"num/den"` (always with a denominator).
pub fn to_string(s: &Q) -> String {
    format!("{}/{}", s.numer(), s.denom())
}

/// Parses `"num/den"` or an integer.
pub fn parse(text: &str) -> Result<Q> {
    let bad = || Error::Structural(format!("bad rational {text:?}"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(text.trim().parse().map_err(|_| bad())?)),
    }
}

/// Lossy conversion for metric computations.
pub fn to_f64(s: &Q) -> f64 {
    *s.numer() as f64 / *s.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let x = q(6, -8);
        assert_eq!(to_string(&x), "-3/4");
        assert_eq!(parse("-3/4").unwrap(), x);
        assert_eq!(parse("2").unwrap(), q(2, 1));
        assert!(parse("1/0").is_err());
    }

    #[test]
    fn branch() {
        assert_eq!(branch_inverse(1, &q(1, 2), 2).unwrap(), q(3, 4));
        assert!(is_interior(&q(1, 3)));
        assert!(!is_interior(&q(1, 1)));
    }
}
