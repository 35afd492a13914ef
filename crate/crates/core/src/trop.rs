//! Max-plus extended scalars.

use std::fmt;

use crate::scalar::Scalar;
use crate::Result;

/// An element of `R ∪ {-inf}` under `⊞ = max` and `⊙ = +`.
///
/// `-inf` is its own variant. It is never represented by a large negative
/// float, so identities like `-inf ⊙ a = -inf` hold by construction. The
/// derived order puts `NegInf` below every real value.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub enum Trop<T> {
    NegInf,
    Real(T),
}

impl<T: Scalar> Trop<T> {
    pub fn real(v: T) -> Self {
        Trop::Real(v)
    }

    /// Parses a float, mapping `-inf` to [`Trop::NegInf`]. NaN and `+inf` are rejected.
    pub fn from_f64(v: f64) -> Result<Self> {
        if v == f64::NEG_INFINITY {
            Ok(Trop::NegInf)
        } else {
            Ok(Trop::Real(T::from_f64(v)?))
        }
    }

    pub fn zero() -> Self {
        Trop::Real(T::zero())
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Trop::Real(_))
    }

    pub fn as_real(&self) -> Option<&T> {
        match self {
            Trop::Real(v) => Some(v),
            Trop::NegInf => None,
        }
    }

    /// Tropical addition `max(a, b)`; `-inf` is the identity.
    pub fn oplus(&self, other: &Self) -> Self {
        match (self, other) {
            (Trop::NegInf, b) => b.clone(),
            (a, Trop::NegInf) => a.clone(),
            (Trop::Real(a), Trop::Real(b)) => Trop::Real(T::max_of(a.clone(), b.clone())),
        }
    }

    /// Tropical multiplication `a + b`; `-inf` absorbs.
    pub fn otimes(&self, other: &Self) -> Self {
        match (self, other) {
            (Trop::Real(a), Trop::Real(b)) => Trop::Real(a.clone() + b.clone()),
            _ => Trop::NegInf,
        }
    }

    /// `self ⊙ x` for a real `x`.
    pub fn shift(&self, x: &T) -> Self {
        match self {
            Trop::Real(a) => Trop::Real(a.clone() + x.clone()),
            Trop::NegInf => Trop::NegInf,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Trop::Real(v) => v.to_f64(),
            Trop::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn map<U: Scalar>(&self, f: impl FnOnce(&T) -> Result<U>) -> Result<Trop<U>> {
        match self {
            Trop::Real(v) => Ok(Trop::Real(f(v)?)),
            Trop::NegInf => Ok(Trop::NegInf),
        }
    }
}

impl<T: Scalar> fmt::Display for Trop<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trop::Real(v) => write!(f, "{v}"),
            Trop::NegInf => write!(f, "-inf"),
        }
    }
}

/// Tropical sum of an iterator; `-inf` for an empty one.
pub fn trop_sum<T: Scalar>(items: impl IntoIterator<Item = Trop<T>>) -> Trop<T> {
    items
        .into_iter()
        .fold(Trop::NegInf, |acc, v| acc.oplus(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    fn r(v: i64) -> Trop<Q> {
        Trop::Real(Q::from_i64(v))
    }

    #[test]
    fn neg_inf_is_absorbing_and_identity() {
        let a = r(3);
        assert_eq!(Trop::NegInf.otimes(&a), Trop::NegInf);
        assert_eq!(a.otimes(&Trop::NegInf), Trop::NegInf);
        assert_eq!(Trop::NegInf.oplus(&a), a);
        assert_eq!(a.oplus(&Trop::NegInf), a);
        assert_eq!(Trop::<Q>::NegInf.oplus(&Trop::NegInf), Trop::NegInf);
    }

    #[test]
    fn zero_is_multiplicative_identity() {
        assert_eq!(Trop::<Q>::zero().otimes(&r(-4)), r(-4));
        assert_eq!(r(2).oplus(&r(5)), r(5));
        assert_eq!(r(2).otimes(&r(5)), r(7));
    }

    #[test]
    fn order_puts_neg_inf_first() {
        assert!(Trop::NegInf < r(-1_000_000));
        assert_eq!(trop_sum(vec![r(1), Trop::NegInf, r(-2)]), r(1));
        assert_eq!(trop_sum(Vec::<Trop<Q>>::new()), Trop::NegInf);
    }

    #[test]
    fn float_parsing_rejects_nan() {
        assert!(Trop::<f64>::from_f64(f64::NAN).is_err());
        assert!(Trop::<f64>::from_f64(f64::INFINITY).is_err());
        assert_eq!(Trop::<f64>::from_f64(f64::NEG_INFINITY).unwrap(), Trop::NegInf);
    }
}
