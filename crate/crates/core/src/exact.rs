//! Exact integer and rational helpers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact nonnegative integer of arbitrary magnitude.
pub type ExactCount = BigUint;

/// Exact rational, always kept in lowest terms by `num-rational`.
pub type ExactRatio = BigRational;

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

/// `n!` when it fits in 64 bits (n ≤ 20).
pub fn factorial_u64(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, i| acc.checked_mul(i))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn ratio_from_count(c: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(c.clone()))
}

/// Renders a rational as `"num/den"`, the den always present.
pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"a/b"`, an integer, or a finite decimal such as `"0.35"` into an exact rational.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse rational {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    // Scale so that both parts fit comfortably before dividing.
    let (n, d) = (r.numer(), r.denom());
    let shift = (n.bits().max(d.bits()) as i64 - 60).max(0) as usize;
    let nf = (n.abs() >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    let df = (d >> shift).to_string().parse::<f64>().unwrap_or(f64::NAN);
    let v = nf / df;
    if n.is_negative() { -v } else { v }
}

/// Converts an integral rational to a count, `None` if it is negative or fractional.
pub fn ratio_to_count(r: &BigRational) -> Option<BigUint> {
    if !r.is_integer() || r.is_negative() {
        return None;
    }
    r.numer().to_biguint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigUint::one());
        assert_eq!(factorial(20), BigUint::from(2_432_902_008_176_640_000u64));
        assert_eq!(factorial_u64(20), Some(2_432_902_008_176_640_000));
        assert_eq!(factorial_u64(21), None);
        assert_eq!(factorial(25).to_string(), "15511210043330985984000000");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 4), BigUint::zero());
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_ratio("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_ratio("0.4").unwrap(), ratio(2, 5));
        assert_eq!(parse_ratio("3").unwrap(), ratio(3, 1));
        assert_eq!(parse_ratio(".25").unwrap(), ratio(1, 4));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
        assert_eq!(ratio_string(&ratio(6, 3)), "2/1");
    }

    #[test]
    fn to_f64() {
        assert!((ratio_to_f64(&ratio(1, 3)) - 1.0 / 3.0).abs() < 1e-15);
        let big = BigRational::new(BigInt::from(factorial(30)), BigInt::from(factorial(29)));
        assert!((ratio_to_f64(&big) - 30.0).abs() < 1e-9);
    }
}
