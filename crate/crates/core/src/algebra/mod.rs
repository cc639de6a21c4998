//! Exact arithmetic: arbitrary-precision rationals, multivariate polynomials
//! over symbolic weight variables, and the combinatorial helpers used by the
//! counting engine. No floating point anywhere on the counting path.

mod comb;
mod poly;

pub use comb::{binom2, factorial, multinomial};
pub use poly::{Mono, Poly, RingElem, VarSet, MAX_VARS};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `a`, `-a` or `a/b` into an exact rational.
pub fn rational_from_str(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Decimal rendering of an exact rational, rounded half-up at `digits`
/// fractional digits. Used for report output; never feeds back into counting.
pub fn decimal_string(r: &Rational, digits: usize) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let abs = r.abs();
    let scale = BigInt::from(10u32).pow(digits as u32);
    // round(|r| * 10^digits)
    let scaled = (abs * Rational::from_integer(scale)
        + Rational::new(BigInt::from(1), BigInt::from(2)))
    .floor()
    .to_integer();
    let s = scaled.to_string();
    if digits == 0 {
        return format!("{sign}{s}");
    }
    let (int_part, frac_part) = if s.len() > digits {
        let (i, f) = s.split_at(s.len() - digits);
        (i.to_string(), f.to_string())
    } else {
        ("0".to_string(), format!("{:0>width$}", s, width = digits))
    };
    format!("{sign}{int_part}.{frac_part}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(rational_from_str("3/2").unwrap(), rat(3, 2));
        assert_eq!(rational_from_str("-1").unwrap(), rat_int(-1));
        assert_eq!(rational_from_str(" 7 / 4 ").unwrap(), rat(7, 4));
        assert!(rational_from_str("1/0").is_none());
        assert!(rational_from_str("x").is_none());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&rat(1, 2), 3), "0.500");
        assert_eq!(decimal_string(&rat(-1, 3), 6), "-0.333333");
        assert_eq!(decimal_string(&rat(2, 3), 6), "0.666667");
        assert_eq!(decimal_string(&rat_int(25), 2), "25.00");
        assert_eq!(decimal_string(&rat(1, 8), 0), "0");
    }
}
