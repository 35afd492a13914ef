//! Simple projections `TPT^n → TPT^m` (at most one real entry per column)
//! and the splitting `x ↦ (Mx, x - z^x)` onto base times zero fibre.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::matrix::TropMatrix;
use crate::point::{check_dim, metric_raw, trop_metric, TropPoint};
use crate::scalar::Scalar;
use crate::trop::Trop;
use crate::{Error, Result};

/// Column → row assignment of a simple projection: `rows[j]` is the row that
/// owns column `j`, or `None` when the column is unused.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Structure {
    pub m: usize,
    pub rows: Vec<Option<usize>>,
}

impl Structure {
    /// Validates that every row owns at least one column and `n > m`.
    pub fn new(m: usize, rows: Vec<Option<usize>>) -> Result<Self> {
        let n = rows.len();
        if n <= m {
            return Err(Error::DimensionOrder { m, n });
        }
        let mut seen = vec![false; m];
        for r in rows.iter().flatten() {
            if *r >= m {
                return Err(Error::NotSimpleProjection(format!("row {r} out of range")));
            }
            seen[*r] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::NotSimpleProjection(format!("row {} owns no column", i + 1)));
        }
        Ok(Self { m, rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// `J_i` for every row, columns ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.m];
        for (j, r) in self.rows.iter().enumerate() {
            if let Some(r) = r {
                out[*r].push(j);
            }
        }
        out
    }

    /// Number of valid structures for given `m < n`:
    /// maps `[n] → [m] ∪ {unused}` whose image covers `[m]`.
    pub fn count(m: usize, n: usize) -> u128 {
        // inclusion–exclusion over rows left empty
        let mut total: i128 = 0;
        let mut binom: i128 = 1;
        for k in 0..=m {
            let term = binom * ((m - k + 1) as i128).pow(n as u32);
            total += if k % 2 == 0 { term } else { -term };
            binom = binom * (m - k) as i128 / (k + 1) as i128;
        }
        total as u128
    }

    /// All valid structures in lexicographic order of `rows` (unused first).
    pub fn enumerate(m: usize, n: usize) -> Vec<Structure> {
        let mut out = Vec::new();
        let mut code = vec![0usize; n];
        loop {
            let rows: Vec<Option<usize>> = code.iter().map(|&c| c.checked_sub(1)).collect();
            if let Ok(s) = Structure::new(m, rows) {
                out.push(s);
            }
            let mut k = n;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                code[k] += 1;
                if code[k] <= m {
                    break;
                }
                code[k] = 0;
            }
        }
    }
}

/// A simple projection stored as disjoint column blocks `J_i` with offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleProjection<T> {
    structure: Structure,
    /// `offsets[j]` is `M_{rows[j], j}`; zero for unused columns.
    offsets: Vec<T>,
}

impl<T: Scalar> SimpleProjection<T> {
    pub fn new(structure: Structure, offsets: Vec<T>) -> Result<Self> {
        check_dim(structure.n(), offsets.len())?;
        let offsets = offsets
            .into_iter()
            .zip(&structure.rows)
            .map(|(v, r)| if r.is_some() { v } else { T::zero() })
            .collect();
        Ok(Self { structure, offsets })
    }

    /// Builds from blocks `J_i` (0-based) and a map of offsets keyed `(i, j)`.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>], offsets: &BTreeMap<(usize, usize), T>) -> Result<Self> {
        let mut rows = vec![None; n];
        for (i, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::NotSimpleProjection(format!("J_{} is empty", i + 1)));
            }
            for &j in block {
                if j >= n {
                    return Err(Error::NotSimpleProjection(format!("column {} out of range", j + 1)));
                }
                if rows[j].replace(i).is_some() {
                    return Err(Error::NotSimpleProjection(format!("column {} used twice", j + 1)));
                }
            }
        }
        let structure = Structure::new(blocks.len(), rows)?;
        let offs = (0..n)
            .map(|j| match structure.rows[j] {
                Some(i) => offsets.get(&(i, j)).cloned().unwrap_or_else(T::zero),
                None => T::zero(),
            })
            .collect();
        Self::new(structure, offs)
    }

    pub fn from_matrix(mat: &TropMatrix<T>) -> Result<Self> {
        let mut rows = vec![None; mat.cols()];
        let mut offsets = vec![T::zero(); mat.cols()];
        for j in 0..mat.cols() {
            let real = mat.real_rows_of_column(j);
            if real.len() > 1 {
                return Err(Error::NotSimpleProjection(format!(
                    "column {} has {} real entries",
                    j + 1,
                    real.len()
                )));
            }
            if let Some(&i) = real.first() {
                rows[j] = Some(i);
                offsets[j] = mat.real(i, j).expect("real").clone();
            }
        }
        Self::new(Structure::new(mat.rows(), rows)?, offsets)
    }

    pub fn to_matrix(&self) -> TropMatrix<T> {
        let (m, n) = (self.rows(), self.cols());
        let mut entries = vec![Trop::NegInf; m * n];
        for (j, r) in self.structure.rows.iter().enumerate() {
            if let Some(i) = r {
                entries[i * n + j] = Trop::Real(self.offsets[j].clone());
            }
        }
        TropMatrix::new(m, n, entries).expect("every row owns a column")
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }

    pub fn rows(&self) -> usize {
        self.structure.m
    }

    pub fn cols(&self) -> usize {
        self.structure.n()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        self.structure.blocks()
    }

    pub fn owner(&self, j: usize) -> Option<usize> {
        self.structure.rows[j]
    }

    pub fn convert<U: Scalar>(&self) -> Result<SimpleProjection<U>> {
        let offsets = self
            .offsets
            .iter()
            .map(|v| U::from_f64(v.to_f64()))
            .collect::<Result<Vec<_>>>()?;
        SimpleProjection::new(self.structure.clone(), offsets)
    }

    /// `(Mx)_i = max_{j ∈ J_i} (M_ij + x_j)`, not canonicalised.
    pub fn apply_raw(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.cols(), x.len())?;
        let mut out: Vec<Option<T>> = vec![None; self.rows()];
        for (j, r) in self.structure.rows.iter().enumerate() {
            if let Some(i) = r {
                let v = self.offsets[j].clone() + x[j].clone();
                out[*i] = Some(match out[*i].take() {
                    Some(cur) => T::max_of(cur, v),
                    None => v,
                });
            }
        }
        Ok(out.into_iter().map(|v| v.expect("row owns a column")).collect())
    }

    pub fn apply(&self, x: &TropPoint<T>) -> Result<TropPoint<T>> {
        TropPoint::new(self.apply_raw(x.coords())?)
    }

    /// `z_j = (Mx)_i - max_k (Mx)_k` for `j ∈ J_i`, zero on unused columns.
    pub fn z_vector(&self, x: &TropPoint<T>) -> Result<Vec<T>> {
        let mx = self.apply_raw(x.coords())?;
        let top = mx.iter().cloned().reduce(T::max_of).expect("m >= 1");
        Ok(self
            .structure
            .rows
            .iter()
            .map(|r| match r {
                Some(i) => mx[*i].clone() - top.clone(),
                None => T::zero(),
            })
            .collect())
    }

    pub fn in_zero_fibre(&self, u: &TropPoint<T>) -> Result<bool> {
        Ok(self.apply(u)?.is_origin())
    }

    /// `x ↦ (Mx, x - z^x)`.
    pub fn split(&self, x: &TropPoint<T>) -> Result<SplitPoint<T>> {
        let z = self.z_vector(x)?;
        Ok(SplitPoint {
            base: self.apply(x)?,
            fibre_part: x.sub_raw(&z)?,
        })
    }

    /// Inverse of [`split`](Self::split): `w + u` with `w_j = y_i - max_k y_k`
    /// on `J_i` and zero elsewhere.
    pub fn unsplit(&self, y: &TropPoint<T>, u: &TropPoint<T>) -> Result<TropPoint<T>> {
        check_dim(self.rows(), y.dim())?;
        check_dim(self.cols(), u.dim())?;
        if !self.in_zero_fibre(u)? {
            return Err(Error::NotInZeroFibre);
        }
        let top = y.coords().iter().cloned().reduce(T::max_of).expect("m >= 2");
        let w: Vec<T> = self
            .structure
            .rows
            .iter()
            .map(|r| match r {
                Some(i) => y.coords()[*i].clone() - top.clone(),
                None => T::zero(),
            })
            .collect();
        u.add_raw(&w)
    }

    /// `(lower, upper)` of
    /// `½ d(Mx1, Mx2) + ¼ d(x1 - z¹, x2 - z²) <= d(x1, x2) <= d(Mx1, Mx2) + d(x1 - z¹, x2 - z²)`.
    pub fn metric_split_bounds(&self, x1: &TropPoint<T>, x2: &TropPoint<T>) -> Result<(bool, bool)> {
        let (s1, s2) = (self.split(x1)?, self.split(x2)?);
        let base = trop_metric(&s1.base, &s2.base)?;
        let fibre = trop_metric(&s1.fibre_part, &s2.fibre_part)?;
        let whole = trop_metric(x1, x2)?;
        let half = T::one() / T::from_i64(2);
        let quarter = T::one() / T::from_i64(4);
        let le = |a: &T, b: &T| a <= b || a.approx_eq(b);
        let lower = half * base.clone() + quarter * fibre.clone();
        let upper = base + fibre;
        Ok((le(&lower, &whole), le(&whole, &upper)))
    }

    /// `d(z¹, z²) == d(Mx1, Mx2)`.
    pub fn z_metric_identity(&self, x1: &TropPoint<T>, x2: &TropPoint<T>) -> Result<bool> {
        let lhs = metric_raw(&self.z_vector(x1)?, &self.z_vector(x2)?)?;
        let rhs = trop_metric(&self.apply(x1)?, &self.apply(x2)?)?;
        Ok(lhs.approx_eq(&rhs))
    }
}

/// True when every column has at most one real entry and `n > m`.
pub fn is_simple_projection<T: Scalar>(mat: &TropMatrix<T>) -> Result<bool> {
    if mat.cols() <= mat.rows() {
        return Err(Error::DimensionOrder {
            m: mat.rows(),
            n: mat.cols(),
        });
    }
    Ok((0..mat.cols()).all(|j| mat.real_rows_of_column(j).len() <= 1))
}

/// Image of a point under the splitting map.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPoint<T> {
    pub base: TropPoint<T>,
    pub fibre_part: TropPoint<T>,
}

impl<T: Scalar> SplitPoint<T> {
    pub fn equivalent(&self, other: &Self) -> bool {
        self.base.equivalent(&other.base) && self.fibre_part.equivalent(&other.fibre_part)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    const NEG: f64 = f64::NEG_INFINITY;

    fn p(v: &[i64]) -> TropPoint<Q> {
        TropPoint::from_i64s(v).unwrap()
    }

    fn basic() -> SimpleProjection<Q> {
        let m = TropMatrix::from_f64_rows(&[vec![0.0, NEG, NEG], vec![NEG, 0.0, NEG]]).unwrap();
        SimpleProjection::from_matrix(&m).unwrap()
    }

    #[test]
    fn recognises_simple_matrices() {
        let m = TropMatrix::<Q>::from_f64_rows(&[vec![0.0, NEG, NEG], vec![NEG, 0.0, NEG]]).unwrap();
        assert!(is_simple_projection(&m).unwrap());
        let dense = TropMatrix::<Q>::from_f64_rows(&[vec![0.0, 2.0, 1.0], vec![0.0, -5.0, -1.0]]).unwrap();
        assert!(!is_simple_projection(&dense).unwrap());
        let square = TropMatrix::<Q>::from_f64_rows(&[vec![2.0, 0.0, 0.0], vec![-2.0, 2.0, 1.0], vec![1.0, 3.0, -1.0]])
            .unwrap();
        assert!(is_simple_projection(&square).is_err());
        assert_eq!(basic().to_matrix(), m);
    }

    #[test]
    fn z_vector_and_split() {
        let proj = basic();
        let x = p(&[0, 3, 7]);
        assert_eq!(proj.z_vector(&x).unwrap(), vec![Q::from_i64(-3), Q::from_i64(0), Q::from_i64(0)]);
        let s = proj.split(&x).unwrap();
        assert_eq!(s.base, p(&[0, 3]));
        assert_eq!(s.fibre_part, p(&[0, 0, 4]));
        assert!(proj.in_zero_fibre(&s.fibre_part).unwrap());
    }

    #[test]
    fn unsplit_inverts_split() {
        let proj = basic();
        let back = proj.unsplit(&p(&[0, 3]), &p(&[0, 0, 4])).unwrap();
        assert_eq!(back, p(&[0, 3, 7]));
        let u = p(&[0, 0, 9]);
        assert_eq!(proj.unsplit(&p(&[0, 0]), &u).unwrap(), u);
        assert!(matches!(proj.unsplit(&p(&[0, 0]), &p(&[0, 1, 0])), Err(Error::NotInZeroFibre)));
    }

    #[test]
    fn metric_relations_on_examples() {
        let proj = basic();
        let (x1, x2) = (p(&[0, 3, 7]), p(&[0, 0, 0]));
        assert!(proj.z_metric_identity(&x1, &x2).unwrap());
        assert_eq!(proj.metric_split_bounds(&x1, &x1).unwrap(), (true, true));
        assert_eq!(proj.metric_split_bounds(&x1, &x2).unwrap(), (true, true));
    }

    #[test]
    fn structure_counts() {
        for (m, n) in [(1, 2), (2, 3), (2, 4), (3, 5)] {
            assert_eq!(Structure::enumerate(m, n).len() as u128, Structure::count(m, n));
        }
        assert_eq!(Structure::count(1, 2), 3);
        assert!(Structure::new(2, vec![Some(0), Some(0), None]).is_err());
    }

    #[test]
    fn blocks_roundtrip() {
        let mut offs = BTreeMap::new();
        offs.insert((0, 2), Q::from_i64(5));
        let proj = SimpleProjection::<Q>::from_blocks(4, &[vec![0, 2], vec![3]], &offs).unwrap();
        assert_eq!(proj.blocks(), vec![vec![0, 2], vec![3]]);
        assert_eq!(proj.offsets()[2], Q::from_i64(5));
        assert_eq!(SimpleProjection::from_matrix(&proj.to_matrix()).unwrap(), proj);
        assert!(SimpleProjection::<Q>::from_blocks(3, &[vec![0], vec![0]], &BTreeMap::new()).is_err());
    }
}
