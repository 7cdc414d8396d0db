//! Exact rational helpers shared by the engines and the exporters.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Lossy conversion for reporting; exact values stay exact everywhere else.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Integer power that accepts negative exponents. `0^0 = 1`; `0^k` for `k < 0`
/// has no value and returns `None`.
pub fn pow(base: &Rational, exp: i64) -> Option<Rational> {
    if exp == 0 {
        return Some(Rational::one());
    }
    if base.is_zero() {
        return if exp > 0 { Some(Rational::zero()) } else { None };
    }
    let mag = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    Some(if exp > 0 { mag } else { mag.recip() })
}

/// Parses `"3"`, `"3/4"`, `"-3/4"` or a finite decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, fracpart)) = s.split_once('.') {
        if fracpart.is_empty() || !fracpart.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if whole_abs.is_empty() { "0" } else { whole_abs }, fracpart);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fracpart.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// JSON shape for exact values: numerator and denominator as decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub num: String,
    pub den: String,
    pub approx: f64,
}

impl From<&Rational> for ExactValue {
    fn from(r: &Rational) -> Self {
        ExactValue {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            approx: to_f64(r),
        }
    }
}

impl ExactValue {
    pub fn to_rational(&self) -> Result<Rational> {
        parse(&format!("{}/{}", self.num, self.den))
    }
}

/// Serde adapter storing a rational as its `"n/d"` string.
pub mod as_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}
