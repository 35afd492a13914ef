//! Finitely supported probability measures on a torus, couplings, and
//! pushforwards through tropical maps.

use crate::matrix::TropMatrix;
use crate::point::{check_dim, trop_metric, TropPoint};
use crate::scalar::Scalar;
use crate::simple::SimpleProjection;
use crate::{Error, Result};

/// A map between tori that measures can be pushed through.
pub trait TropMap<T: Scalar> {
    fn source_dim(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn map_point(&self, x: &TropPoint<T>) -> Result<TropPoint<T>>;
}

impl<T: Scalar> TropMap<T> for TropMatrix<T> {
    fn source_dim(&self) -> usize {
        self.cols()
    }
    fn target_dim(&self) -> usize {
        self.rows()
    }
    fn map_point(&self, x: &TropPoint<T>) -> Result<TropPoint<T>> {
        self.apply(x)
    }
}

impl<T: Scalar> TropMap<T> for SimpleProjection<T> {
    fn source_dim(&self) -> usize {
        self.cols()
    }
    fn target_dim(&self) -> usize {
        self.rows()
    }
    fn map_point(&self, x: &TropPoint<T>) -> Result<TropPoint<T>> {
        self.apply(x)
    }
}

/// Support points with positive weights summing to one. Equivalent points
/// are merged (within the backend tolerance in float mode).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T = f64> {
    dim: usize,
    support: Vec<TropPoint<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Validates, merges duplicates (keeping first-occurrence order) and
    /// renormalises the weights to sum to one.
    pub fn new(points: Vec<TropPoint<T>>, weights: Vec<T>) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("measure support"))?;
        let dim = first.dim();
        check_dim(points.len(), weights.len())?;
        let mut total = T::zero();
        for w in &weights {
            if w.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) || !w.to_f64().is_finite() {
                return Err(Error::InvalidWeights(format!("weight {w} is not a positive finite number")));
            }
            total = total + w.clone();
        }
        let mut support: Vec<TropPoint<T>> = Vec::with_capacity(points.len());
        let mut merged: Vec<T> = Vec::with_capacity(points.len());
        for (p, w) in points.into_iter().zip(weights) {
            check_dim(dim, p.dim())?;
            match support.iter().position(|q| q.equivalent(&p)) {
                Some(k) => merged[k] = merged[k].clone() + w,
                None => {
                    support.push(p);
                    merged.push(w);
                }
            }
        }
        let weights = merged.into_iter().map(|w| w / total.clone()).collect();
        Ok(Self { dim, support, weights })
    }

    pub fn uniform(points: Vec<TropPoint<T>>) -> Result<Self> {
        let weights = vec![T::one(); points.len()];
        Self::new(points, weights)
    }

    pub fn dirac(x: TropPoint<T>) -> Self {
        Self {
            dim: x.dim(),
            support: vec![x],
            weights: vec![T::one()],
        }
    }

    pub fn from_f64(points: &[Vec<f64>], weights: Option<&[f64]>) -> Result<Self> {
        let pts = points
            .iter()
            .map(|p| TropPoint::from_f64s(p))
            .collect::<Result<Vec<_>>>()?;
        match weights {
            Some(w) => Self::new(pts, w.iter().map(|&v| T::from_f64(v)).collect::<Result<Vec<_>>>()?),
            None => Self::uniform(pts),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[TropPoint<T>] {
        &self.support
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&TropPoint<T>, &T)> {
        self.support.iter().zip(&self.weights)
    }

    /// True when every atom of `uniform(support)` has the same weight.
    pub fn is_uniform(&self) -> bool {
        self.weights.iter().all(|w| w.approx_eq(&self.weights[0]))
    }

    pub fn convert<U: Scalar>(&self) -> Result<DiscreteMeasure<U>> {
        let pts = self
            .support
            .iter()
            .map(TropPoint::convert)
            .collect::<Result<Vec<_>>>()?;
        let ws = self
            .weights
            .iter()
            .map(|w| U::from_f64(w.to_f64()))
            .collect::<Result<Vec<_>>>()?;
        DiscreteMeasure::new(pts, ws)
    }

    /// Equality as measures: same atoms with weights within `tol`.
    pub fn same_measure(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self.atoms().all(|(p, w)| {
                other
                    .atoms()
                    .any(|(q, v)| q.equivalent(p) && (w.to_f64() - v.to_f64()).abs() <= tol)
            })
    }

    pub fn max_weight_error(&self) -> f64 {
        let s: f64 = self.weights.iter().map(Scalar::to_f64).sum();
        (s - 1.0).abs()
    }
}

/// Pushforward of `nu` through `map`, together with the index of the image
/// atom of each source atom.
pub fn pushforward_indexed<T: Scalar, F: TropMap<T> + ?Sized>(
    map: &F,
    nu: &DiscreteMeasure<T>,
) -> Result<(DiscreteMeasure<T>, Vec<usize>)> {
    check_dim(map.source_dim(), nu.dim())?;
    let mut support: Vec<TropPoint<T>> = Vec::new();
    let mut weights: Vec<T> = Vec::new();
    let mut index = Vec::with_capacity(nu.len());
    for (x, w) in nu.atoms() {
        let y = map.map_point(x)?;
        match support.iter().position(|q| q.equivalent(&y)) {
            Some(k) => {
                weights[k] = weights[k].clone() + w.clone();
                index.push(k);
            }
            None => {
                index.push(support.len());
                support.push(y);
                weights.push(w.clone());
            }
        }
    }
    let dim = map.target_dim();
    Ok((DiscreteMeasure { dim, support, weights }, index))
}

pub fn pushforward<T: Scalar, F: TropMap<T> + ?Sized>(map: &F, nu: &DiscreteMeasure<T>) -> Result<DiscreteMeasure<T>> {
    Ok(pushforward_indexed(map, nu)?.0)
}

/// A transport plan: `mass[i][j]` moves from atom `i` of the first measure
/// to atom `j` of the second.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling<T = f64> {
    pub mass: Vec<Vec<T>>,
}

impl<T: Scalar> Coupling<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            mass: vec![vec![T::zero(); cols]; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.mass.len()
    }

    pub fn cols(&self) -> usize {
        self.mass.first().map_or(0, Vec::len)
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.mass
            .iter()
            .map(|r| r.iter().cloned().fold(T::zero(), |a, b| a + b))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        (0..self.cols())
            .map(|j| self.mass.iter().fold(T::zero(), |a, r| a + r[j].clone()))
            .collect()
    }

    /// Marginals match and masses are nonnegative, within `tol`.
    pub fn is_coupling_of(&self, mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, tol: f64) -> bool {
        let close = |a: &[T], b: &[T]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x.to_f64() - y.to_f64()).abs() <= tol)
        };
        self.rows() == mu.len()
            && self.cols() == nu.len()
            && self.mass.iter().flatten().all(|v| v.to_f64() >= -tol)
            && close(&self.row_sums(), mu.weights())
            && close(&self.col_sums(), nu.weights())
    }

    /// `Σ π_ij d(x_i, y_j)^p`.
    pub fn cost(&self, mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, p: f64) -> Result<T> {
        let mut total = T::zero();
        for (i, row) in self.mass.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v != T::zero() {
                    let c = trop_metric(&mu.support()[i], &nu.support()[j])?.powf(p)?;
                    total = total + v.clone() * c;
                }
            }
        }
        Ok(total)
    }

    /// `(i, j, mass)` for strictly positive entries, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.mass.iter().enumerate().flat_map(|(i, r)| {
            r.iter()
                .enumerate()
                .filter(|(_, v)| **v > T::zero())
                .map(move |(j, v)| (i, j, v))
        })
    }

    pub fn transpose(&self) -> Self {
        Self {
            mass: (0..self.cols())
                .map(|j| self.mass.iter().map(|r| r[j].clone()).collect())
                .collect(),
        }
    }
}
