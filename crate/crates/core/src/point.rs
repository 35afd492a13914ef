//! Points of the tropical projective torus, the tropical metric, and
//! tropical segments and hulls.

use crate::scalar::Scalar;
use crate::{Error, Result};

/// A point of `TPT^n = R^n / R·(1,…,1)`, stored by its representative with
/// first coordinate zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TropPoint<T> {
    coords: Vec<T>,
}

impl<T: Scalar> TropPoint<T> {
    /// Canonicalises a raw coordinate vector by subtracting its first entry.
    pub fn new(raw: Vec<T>) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::TooFewCoordinates(raw.len()));
        }
        let base = raw[0].clone();
        let coords = raw.into_iter().map(|v| v - base.clone()).collect();
        Ok(Self { coords })
    }

    pub fn from_f64s(raw: &[f64]) -> Result<Self> {
        Self::new(
            raw.iter()
                .map(|&v| T::from_f64(v))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn from_i64s(raw: &[i64]) -> Result<Self> {
        Self::new(raw.iter().map(|&v| T::from_i64(v)).collect())
    }

    /// The tropical origin `(0,…,0)`.
    pub fn origin(dim: usize) -> Result<Self> {
        Self::new(vec![T::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    /// Coordinates after dropping the leading zero: the chart `TPT^n → R^{n-1}`.
    pub fn chart(&self) -> &[T] {
        &self.coords[1..]
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.coords.iter().map(Scalar::to_f64).collect()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|c| c.approx_eq(&T::zero()))
    }

    /// Projective equality: exact for rationals, within [`crate::scalar::FLOAT_TOL`] for floats.
    pub fn equivalent(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.approx_eq(b))
    }

    /// Representative `x - v` for a raw vector `v` of the same length.
    pub fn sub_raw(&self, v: &[T]) -> Result<Self> {
        check_dim(self.dim(), v.len())?;
        Self::new(
            self.coords
                .iter()
                .zip(v)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        )
    }

    /// Representative `x + v` for a raw vector `v` of the same length.
    pub fn add_raw(&self, v: &[T]) -> Result<Self> {
        check_dim(self.dim(), v.len())?;
        Self::new(
            self.coords
                .iter()
                .zip(v)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        )
    }

    pub fn convert<U: Scalar>(&self) -> Result<TropPoint<U>> {
        TropPoint::from_f64s(&self.to_f64s())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `max_i (x_i - y_i) - min_i (x_i - y_i)` on raw coordinate vectors.
pub fn metric_raw<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    check_dim(x.len(), y.len())?;
    if x.is_empty() {
        return Err(Error::Empty("coordinate vector"));
    }
    let mut diffs = x.iter().zip(y).map(|(a, b)| a.clone() - b.clone());
    let first = diffs.next().expect("nonempty");
    let (lo, hi) = diffs.fold((first.clone(), first), |(lo, hi), d| {
        (T::min_of(lo, d.clone()), T::max_of(hi, d))
    });
    Ok(hi - lo)
}

/// The tropical (generalised Hilbert projective) metric.
pub fn trop_metric<T: Scalar>(x: &TropPoint<T>, y: &TropPoint<T>) -> Result<T> {
    metric_raw(x.coords(), y.coords())
}

/// `max_k (alphas[k] ⊙ points[k])`, canonicalised.
pub fn trop_combination<T: Scalar>(points: &[TropPoint<T>], alphas: &[T]) -> Result<TropPoint<T>> {
    if points.is_empty() {
        return Err(Error::Empty("generator list"));
    }
    check_dim(points.len(), alphas.len())?;
    let dim = points[0].dim();
    let mut acc: Vec<Option<T>> = vec![None; dim];
    for (p, a) in points.iter().zip(alphas) {
        check_dim(dim, p.dim())?;
        for (slot, c) in acc.iter_mut().zip(p.coords()) {
            let v = c.clone() + a.clone();
            *slot = Some(match slot.take() {
                Some(cur) => T::max_of(cur, v),
                None => v,
            });
        }
    }
    TropPoint::new(acc.into_iter().map(|v| v.expect("nonempty")).collect())
}

/// Breakpoints of the tropical segment from `a` to `b`, in order from `a` to
/// `b`. Consecutive vertices are joined by ordinary straight pieces.
pub fn segment_vertices<T: Scalar>(a: &TropPoint<T>, b: &TropPoint<T>) -> Result<Vec<TropPoint<T>>> {
    check_dim(a.dim(), b.dim())?;
    // max(alpha + a, b): alpha large gives a, alpha small gives b; the
    // breakpoints sit at alpha = b_i - a_i.
    let mut alphas: Vec<T> = a
        .coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| y.clone() - x.clone())
        .collect();
    alphas.sort_by(|p, q| q.partial_cmp(p).expect("finite"));
    let mut out: Vec<TropPoint<T>> = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let p = trop_combination(&[a.clone(), b.clone()], &[alpha, T::zero()])?;
        if out.last().is_none_or(|q| !q.equivalent(&p)) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Finite generating set of a tropical convex hull, deduplicated up to
/// projective equivalence.
#[derive(Clone, Debug, PartialEq)]
pub struct TropHull<T> {
    generators: Vec<TropPoint<T>>,
}

impl<T: Scalar> TropHull<T> {
    pub fn new(points: Vec<TropPoint<T>>) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("generator list"))?;
        let dim = first.dim();
        let mut generators: Vec<TropPoint<T>> = Vec::with_capacity(points.len());
        for p in points {
            check_dim(dim, p.dim())?;
            if !generators.iter().any(|g| g.equivalent(&p)) {
                generators.push(p);
            }
        }
        Ok(Self { generators })
    }

    pub fn generators(&self) -> &[TropPoint<T>] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    /// Membership by residuation against the generator matrix.
    pub fn contains(&self, y: &TropPoint<T>) -> Result<bool> {
        check_dim(self.dim(), y.dim())?;
        // Greatest alphas with alpha_k + g_k <= y; y is in the hull iff the
        // combination with those alphas reproduces y.
        let alphas: Vec<T> = self
            .generators
            .iter()
            .map(|g| {
                g.coords()
                    .iter()
                    .zip(y.coords())
                    .map(|(gi, yi)| yi.clone() - gi.clone())
                    .reduce(T::min_of)
                    .expect("dim >= 2")
            })
            .collect();
        Ok(trop_combination(&self.generators, &alphas)?.equivalent(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    fn p(v: &[i64]) -> TropPoint<Q> {
        TropPoint::from_i64s(v).unwrap()
    }

    fn pf(v: &[f64]) -> TropPoint<f64> {
        TropPoint::from_f64s(v).unwrap()
    }

    /// Brute force over index pairs: `max_{i,j} x_i - y_i - x_j + y_j`.
    fn double_max(x: &[Q], y: &[Q]) -> Q {
        let mut best = Q::from_i64(0);
        for i in 0..x.len() {
            for j in 0..x.len() {
                let v = x[i].clone() - y[i].clone() - x[j].clone() + y[j].clone();
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(p(&[3, 5, 4]).coords(), p(&[0, 2, 1]).coords());
        assert_eq!(p(&[0, 2, 1]).coords(), &[Q::from_i64(0), Q::from_i64(2), Q::from_i64(1)]);
        assert!(p(&[-1, -1, -1]).is_origin());
        assert!(matches!(
            TropPoint::<Q>::from_i64s(&[4]),
            Err(Error::TooFewCoordinates(1))
        ));
        assert!(TropPoint::<f64>::from_f64s(&[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn metric_examples() {
        assert_eq!(trop_metric(&p(&[0, 0, 0]), &p(&[0, 0, 0])).unwrap(), Q::from_i64(0));
        let x = p(&[0, 2, 3]);
        let y = p(&[0, 1, -1]);
        let d = trop_metric(&x, &y).unwrap();
        assert_eq!(d, double_max(x.coords(), y.coords()));
        assert_eq!(d, Q::from_i64(4));
        assert_eq!(trop_metric(&p(&[0, 5, 5]), &p(&[3, 8, 8])).unwrap(), Q::from_i64(0));
        assert!(trop_metric(&p(&[0, 1]), &p(&[0, 1, 2])).is_err());
    }

    #[test]
    fn combination_examples() {
        let cols = [p(&[2, -2, 1]), p(&[0, 2, 3]), p(&[0, 1, -1])];
        let zero = vec![Q::from_i64(0); 3];
        // the first column is stored as (0,-4,-1); alpha 2 restores the raw column
        let raw = vec![Q::from_i64(2), Q::from_i64(0), Q::from_i64(0)];
        assert_eq!(trop_combination(&cols, &raw).unwrap(), p(&[0, 0, 1]));
        assert_eq!(trop_combination(&cols, &zero).unwrap(), p(&[0, 2, 3]));
        assert_eq!(trop_combination(&cols[..1], &zero[..1]).unwrap(), cols[0]);

        let a = pf(&[2.0, -2.0, 1.0]);
        let b = pf(&[0.0, 2.0, 3.0]);
        let got = trop_combination(&[a, b.clone()], &[-1e6, 0.0]).unwrap();
        assert!(got.equivalent(&b));
        assert!(trop_combination::<Q>(&[], &[]).is_err());
    }

    #[test]
    fn segment_runs_from_a_to_b() {
        let a = p(&[0, 0, 0]);
        let b = p(&[0, 2, 1]);
        let verts = segment_vertices(&a, &b).unwrap();
        assert_eq!(verts.first().unwrap(), &a);
        assert_eq!(verts.last().unwrap(), &b);
        // (0,0,0) -> (0,1,0) -> (0,2,1)
        assert_eq!(verts, vec![a, p(&[0, 1, 0]), b]);
    }

    #[test]
    fn hull_dedups_and_contains_generators() {
        let hull = TropHull::new(vec![p(&[0, 1, 2]), p(&[5, 6, 7]), p(&[0, 0, 0])]).unwrap();
        assert_eq!(hull.generators().len(), 2);
        let single = TropHull::new(vec![p(&[0, 3, 1])]).unwrap();
        assert_eq!(single.generators(), &[p(&[0, 3, 1])]);
        assert!(single.contains(&p(&[1, 4, 2])).unwrap());
        assert!(!single.contains(&p(&[0, 0, 0])).unwrap());
        let mid = trop_combination(hull.generators(), &[Q::from_i64(-1), Q::from_i64(0)]).unwrap();
        assert!(hull.contains(&mid).unwrap());
    }
}
