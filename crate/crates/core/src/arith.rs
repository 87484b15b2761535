//! Exact rational helpers, exponents, and the float formatting used in reports.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational; the canonical scalar everywhere.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `p/q`, an integer, or a finite decimal literal such as `0.25`.
pub fn parse_rational(s: &str) -> std::result::Result<Q, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((int, frac)) = s.split_once('.') {
        if s.contains('/') {
            return Err(format!("`{s}` mixes decimal and fraction syntax"));
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac.is_empty())
        {
            return Err(format!("`{s}` is not a decimal literal"));
        }
        let digits = format!("{int_digits}{frac}");
        let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|e| e.to_string())?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let v = Q::new(numer, denom);
        return Ok(if neg { -v } else { v });
    }
    if let Some((_, d)) = s.split_once('/') {
        if d.trim().trim_start_matches('+').chars().all(|c| c == '0') {
            return Err(format!("`{s}` has a zero denominator"));
        }
    }
    Q::from_str(s).map_err(|_| format!("`{s}` is not a rational"))
}

/// Formats a float with 12 significant digits, `%.12g` style.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Lp exponent: a rational `p ≥ 1` or `∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exponent {
    Finite(Q),
    Infinity,
}

impl Exponent {
    pub fn finite(p: Q) -> Result<Self> {
        if p < Q::one() {
            return Err(Error::InvalidExponent(format!("p = {p} is below 1")));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn one() -> Self {
        Exponent::Finite(Q::one())
    }

    pub fn two() -> Self {
        Exponent::Finite(qi(2))
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(&self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::one(),
            Exponent::Finite(p) if p.is_one() => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - Q::one())),
        }
    }

    pub fn is_two(&self) -> bool {
        matches!(self, Exponent::Finite(p) if *p == qi(2))
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Exponent::Infinity => f64::INFINITY,
            Exponent::Finite(p) => to_f64(p),
        }
    }

    /// Integer value of a finite exponent, when it has one.
    pub fn as_integer(&self) -> Option<u32> {
        match self {
            Exponent::Finite(p) if p.is_integer() => p.to_integer().to_u32(),
            _ => None,
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" | "Inf" => Ok(Exponent::Infinity),
            other => {
                let p = parse_rational(other).map_err(Error::InvalidExponent)?;
                Exponent::finite(p)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// An exact companion to a float norm value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactNorm {
    /// The norm itself (p = 1 and p = ∞).
    Value(Q),
    /// The square of the norm (p = 2).
    Squared(Q),
}

/// A norm-like quantity: always a float, plus an exact form when one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct NormValue {
    pub approx: f64,
    pub exact: Option<ExactNorm>,
}

impl NormValue {
    pub fn exact_value(&self) -> Option<&Q> {
        match &self.exact {
            Some(ExactNorm::Value(v)) => Some(v),
            _ => None,
        }
    }

    pub fn exact_squared(&self) -> Option<Q> {
        match &self.exact {
            Some(ExactNorm::Value(v)) => Some(v * v),
            Some(ExactNorm::Squared(s)) => Some(s.clone()),
            None => None,
        }
    }
}

/// `(Σ wᵢ·|vᵢ|^p)^{1/p}` for weights `wᵢ ≥ 0`; `max |vᵢ|` over `wᵢ > 0` for `p = ∞`.
pub fn weighted_norm(values: &[Q], weights: &[Q], p: &Exponent) -> NormValue {
    debug_assert_eq!(values.len(), weights.len());
    match p {
        Exponent::Infinity => {
            let m = values
                .iter()
                .zip(weights)
                .filter(|(_, w)| w.is_positive())
                .map(|(v, _)| v.abs())
                .max()
                .unwrap_or_else(Q::zero);
            NormValue {
                approx: to_f64(&m),
                exact: Some(ExactNorm::Value(m)),
            }
        }
        Exponent::Finite(pq) => {
            if let Some(k) = p.as_integer() {
                let sum: Q = values.iter().zip(weights).map(|(v, w)| w * v.abs().pow(k as i32)).sum();
                let approx = to_f64(&sum).powf(1.0 / k as f64);
                let exact = match k {
                    1 => Some(ExactNorm::Value(sum)),
                    2 => Some(ExactNorm::Squared(sum)),
                    _ => None,
                };
                NormValue { approx, exact }
            } else {
                let pf = to_f64(pq);
                let sum: f64 = values
                    .iter()
                    .zip(weights)
                    .map(|(v, w)| to_f64(w) * to_f64(&v.abs()).powf(pf))
                    .sum();
                NormValue {
                    approx: sum.powf(1.0 / pf),
                    exact: None,
                }
            }
        }
    }
}
