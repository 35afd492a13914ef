//! Numeric backends.
//!
//! [`Q`] (arbitrary precision rationals) is used wherever ties decide the
//! answer; `f64` is used for transport and optimisation. Float comparisons
//! that must decide equality go through [`Scalar::approx_eq`], which is exact
//! for `Q` and uses [`FLOAT_TOL`] for `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Exact rational scalar.
pub type Q = BigRational;

/// Equality tolerance for float-mode comparisons of coordinates.
pub const FLOAT_TOL: f64 = 1e-9;

/// Denominator cap used when float inputs are turned into rationals.
pub const RATIONAL_DENOMINATOR_CAP: i64 = 1_000_000;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when comparisons are exact.
    const EXACT: bool;

    /// Converts a finite float. Rationals are rounded to the nearest fraction
    /// with denominator at most [`RATIONAL_DENOMINATOR_CAP`].
    fn from_f64(v: f64) -> Result<Self>;

    fn from_i64(v: i64) -> Self;

    /// Nearest value to an exact rational.
    fn from_q(q: &Q) -> Self;

    fn to_f64(&self) -> f64;

    /// Equality up to the backend's tolerance.
    fn approx_eq(&self, other: &Self) -> bool;

    /// `self^p` for a real exponent. Exact backends accept only integer `p`.
    fn powf(&self, p: f64) -> Result<Self>;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(v))
        }
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_q(q: &Q) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOL
    }

    fn powf(&self, p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(*self)
        } else if p == 2.0 {
            Ok(self * self)
        } else {
            Ok(f64::powf(*self, p))
        }
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Scalar for Q {
    const EXACT: bool = true;

    fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite(v));
        }
        Ok(limit_denominator(&exact_rational(v)?, RATIONAL_DENOMINATOR_CAP))
    }

    fn from_i64(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }

    fn from_q(q: &Q) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn powf(&self, p: f64) -> Result<Self> {
        if p.fract() != 0.0 || p < 0.0 || p > u32::MAX as f64 {
            return Err(Error::NonIntegerExponent(p));
        }
        Ok(num_traits::pow::Pow::pow(self, p as u32))
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

/// The exact value of a finite float as a rational.
pub fn exact_rational(v: f64) -> Result<Q> {
    Q::from_float(v).ok_or(Error::NonFinite(v))
}

/// Closest fraction to `x` whose denominator does not exceed `max_den`
/// (continued-fraction convergents plus the best semiconvergent).
pub fn limit_denominator(x: &Q, max_den: i64) -> Q {
    let max_den = BigInt::from(max_den);
    if x.denom() <= &max_den {
        return x.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (
        BigInt::zero(),
        BigInt::one(),
        BigInt::one(),
        BigInt::zero(),
    );
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    loop {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = (&max_den - &q0).div_floor(&q1);
    let semi = Q::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let conv = Q::new(p1, q1);
    if Signed::abs(&(&semi - x)) <= Signed::abs(&(&conv - x)) {
        semi
    } else {
        conv
    }
}

/// Converts a float slice into rationals with the denominator cap.
pub fn rationalize(values: &[f64]) -> Result<Vec<Q>> {
    values.iter().map(|&v| Q::from_f64(v)).collect()
}

/// Parses an exact rational literal such as `"3"`, `"-7/2"` or `"0.125"`.
pub fn parse_rational(text: &str) -> Result<Q> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad rational '{text}'")))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad rational '{text}'")))?;
        if den.is_zero() {
            return Err(Error::Input(format!("zero denominator in '{text}'")));
        }
        return Ok(Q::new(num, den));
    }
    if let Ok(int) = text.parse::<BigInt>() {
        return Ok(Q::from_integer(int));
    }
    parse_decimal(text)
}

/// Exact value of a decimal literal such as `"-1.25e-3"`.
pub fn parse_decimal(text: &str) -> Result<Q> {
    let bad = || Error::Input(format!("bad number '{text}'"));
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(k) => (&text[..k], text[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if scale >= 0 {
        Q::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

/// Decimal text for a rational with a terminating expansion, `None`
/// otherwise.
pub fn format_decimal(q: &Q) -> Option<String> {
    let mut den = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = q * Q::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = Signed::abs(scaled.numer()).to_string();
    let sign = if q.is_negative() { "-" } else { "" };
    if places == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    Some(format!("{sign}{int}.{frac}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn decimal_inputs_become_short_fractions() {
        assert_eq!(Q::from_f64(0.1).unwrap(), q(1, 10));
        assert_eq!(Q::from_f64(-2.5).unwrap(), q(-5, 2));
        assert_eq!(Q::from_f64(3.0).unwrap(), q(3, 1));
        assert_eq!(Q::from_f64(1.0 / 3.0).unwrap(), q(1, 3));
    }

    #[test]
    fn denominator_cap_is_respected() {
        let v = Q::from_f64(std::f64::consts::PI).unwrap();
        assert!(v.denom() <= &BigInt::from(RATIONAL_DENOMINATOR_CAP));
        assert!((Scalar::to_f64(&v) - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn decimals_parse_and_print_exactly() {
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("-1.25e-1").unwrap(), q(-1, 8));
        assert_eq!(parse_rational("2E2").unwrap(), q(200, 1));
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("inf").is_err());
        assert_eq!(format_decimal(&q(-1, 8)).unwrap(), "-0.125");
        assert_eq!(format_decimal(&q(7, 1)).unwrap(), "7");
        assert_eq!(format_decimal(&q(1, 20)).unwrap(), "0.05");
        assert!(format_decimal(&q(1, 3)).is_none());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(Q::from_f64(f64::NAN).is_err());
        assert!(f64::from_f64(f64::INFINITY).is_err());
    }

    #[test]
    fn rational_power_needs_integer_exponent() {
        assert_eq!(q(3, 2).powf(2.0).unwrap(), q(9, 4));
        assert!(q(3, 2).powf(1.5).is_err());
    }

    #[test]
    fn parse_literals() {
        assert_eq!(parse_rational("-7/2").unwrap(), q(-7, 2));
        assert_eq!(parse_rational("12").unwrap(), q(12, 1));
        assert_eq!(parse_rational("0.125").unwrap(), q(1, 8));
        assert!(parse_rational("1/0").is_err());
    }
}
