//! Scalar abstraction shared by the exact (rational) and floating-point
//! enumeration paths.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

pub trait Field: Clone + Num + PartialOrd + std::fmt::Debug {
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;

    fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Field for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_positive(&self) -> bool {
        // floating branches below this weight carry only rounding noise
        *self > 1e-15
    }
}

impl Field for BigRational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Shorthand for an exact rational `num/den`.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::ratio(num, den)
}

/// Exact rational equal to a decimal string such as `"0.37"`.
pub fn rational_from_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().ok()?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}
