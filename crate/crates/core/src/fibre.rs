//! Type cells and fibres of tropical matrix maps.
//!
//! A fibre `{x : Mx ~ y}` is read off the principal solution `x̂` of `Mx <= y`.
//! With `T_i` the columns tight at row `i`, a point lies in the fibre iff
//! `x <= x̂` (after shifting so `Mx = y`) and the tight set it attains hits
//! every `T_i`. Maximal cells therefore correspond to minimal hitting sets
//! `I` of the `T_i`, and the cell for `I` is `{x_j = x̂_j (j ∈ I), x_k <= x̂_k}`
//! of dimension `n - |I|`. Each cell is also produced as the type cell of its
//! generic type cut by the difference equations that force `Mx ~ y`, and the
//! two descriptions are checked against each other in the tests.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::matrix::{Membership, TropMatrix, TypeLabel};
use crate::point::{check_dim, TropPoint};
use crate::poly::{Constraint, HRep, PolyCell};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Closed type cell `X_S`: for `i ∈ S_j`, `M_ij + x_j >= M_ik + x_k` for all `k`.
/// Labels that ask a row to attain its maximum through a `-inf` entry give
/// an explicitly empty cell.
pub fn type_cell<T: Scalar>(m: &TropMatrix<T>, s: &TypeLabel) -> PolyCell<T> {
    let n = m.cols();
    assert_eq!(s.len(), n, "label length must equal the column count");
    let mut cell = PolyCell::universe(n - 1).with_label(s.clone());
    for (j, rows) in s.sets().iter().enumerate() {
        for &i in rows {
            let Some(a) = m.real(i, j) else {
                return PolyCell::empty(n - 1).with_label(s.clone());
            };
            for k in (0..n).filter(|&k| k != j) {
                if let Some(b) = m.real(i, k) {
                    cell.push_le(Constraint::difference(n, k, j, a.clone() - b.clone()));
                }
            }
        }
    }
    cell
}

/// `X_S ∩ B^S_y`, with the difference equations written against reference
/// row `r`: for `i ∈ S_j` and `r ∈ S_k`,
/// `x_j - x_k = M_rk - M_ij + y_i - y_r`.
///
/// `S` must cover every row. Any reference row gives the same set.
pub fn fibre_cell<T: Scalar>(
    m: &TropMatrix<T>,
    y: &TropPoint<T>,
    s: &TypeLabel,
    reference: usize,
) -> Result<PolyCell<T>> {
    check_dim(m.rows(), y.dim())?;
    if !s.covers(m.rows()) {
        return Err(Error::Input("fibre cells need a covering type".into()));
    }
    let n = m.cols();
    let mut cell = type_cell(m, s);
    if cell.is_empty() {
        return Ok(cell);
    }
    let k = (0..n)
        .find(|&k| s.sets()[k].contains(&reference))
        .expect("covering label");
    let mrk = m.real(reference, k).expect("type cell checked reality").clone();
    let yr = y.coords()[reference].clone();
    for (j, rows) in s.sets().iter().enumerate() {
        for &i in rows {
            if i == reference && j == k {
                continue;
            }
            let mij = m.real(i, j).expect("type cell checked reality").clone();
            let rhs = mrk.clone() - mij + y.coords()[i].clone() - yr.clone();
            cell.push_eq(Constraint::difference(n, j, k, rhs));
        }
    }
    Ok(cell)
}

/// One maximal cell of a fibre.
#[derive(Clone, Debug)]
pub struct FibreCell<T> {
    /// Generic type of the cell.
    pub label: TypeLabel,
    /// Columns pinned to the principal solution (a minimal hitting set).
    pub pinned: Vec<usize>,
    pub cell: PolyCell<T>,
    /// Affine dimension, computed by exact rank on the H-representation.
    pub dim: usize,
}

/// The maximal cells of `{x : Mx ~ y}`. Empty when `y` is not in the image.
#[derive(Clone, Debug)]
pub struct FibreComplex<T> {
    pub target: TropPoint<T>,
    /// Principal solution scaled so that `M x̂ = y` exactly; `None` for
    /// columns with no real entry.
    pub principal: Vec<Option<T>>,
    pub cells: Vec<FibreCell<T>>,
}

impl<T: Scalar> FibreComplex<T> {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Direct membership test: `x <= x̂` after normalising to `Mx = y`, with
    /// every row attained somewhere.
    pub fn contains(&self, m: &TropMatrix<T>, x: &TropPoint<T>) -> Result<bool> {
        if self.is_empty() {
            return Ok(false);
        }
        Ok(m.apply(x)?.equivalent(&self.target))
    }

    /// Index of the first cell containing `x`.
    pub fn locate(&self, x: &TropPoint<T>) -> Option<usize> {
        self.cells.iter().position(|c| c.cell.contains_point(x))
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.cells.iter().map(|c| c.dim).max()
    }
}

/// Tight column sets `T_i = {j : x̂_j + M_ij = y_i}`.
fn tight_sets<T: Scalar>(m: &TropMatrix<T>, y: &[T], xhat: &[Option<T>]) -> Vec<BTreeSet<usize>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .filter(|&j| match (m.real(i, j), &xhat[j]) {
                    (Some(a), Some(x)) => (a.clone() + x.clone()).approx_eq(&y[i]),
                    _ => false,
                })
                .collect()
        })
        .collect()
}

/// Inclusion-minimal sets meeting every `T_i`, in increasing bitmask order.
fn minimal_hitting_sets(tight: &[BTreeSet<usize>], n: usize) -> Result<Vec<Vec<usize>>> {
    if n > 20 {
        return Err(Error::TooLarge(format!("fibre enumeration over {n} columns")));
    }
    let masks: Vec<u32> = tight
        .iter()
        .map(|t| t.iter().fold(0u32, |acc, &j| acc | (1 << j)))
        .collect();
    let hits = |s: u32| masks.iter().all(|&t| t & s != 0);
    let mut out = Vec::new();
    for s in 1u32..(1u32 << n) {
        if hits(s) && (0..n).all(|j| s & (1 << j) == 0 || !hits(s & !(1 << j))) {
            out.push((0..n).filter(|&j| s & (1 << j) != 0).collect());
        }
    }
    Ok(out)
}

/// Maximal cells of the fibre of `M` over `y`.
pub fn fibre_at<T: Scalar>(m: &TropMatrix<T>, y: &TropPoint<T>) -> Result<FibreComplex<T>> {
    check_dim(m.rows(), y.dim())?;
    let principal = m.principal_solution(y.coords())?;
    if let Membership::Outside { .. } = m.image_contains(y)? {
        return Ok(FibreComplex {
            target: y.clone(),
            principal,
            cells: Vec::new(),
        });
    }
    let tight = tight_sets(m, y.coords(), &principal);
    let mut cells = Vec::new();
    for pinned in minimal_hitting_sets(&tight, m.cols())? {
        let sets: Vec<BTreeSet<usize>> = (0..m.cols())
            .map(|j| {
                if pinned.contains(&j) {
                    (0..m.rows()).filter(|&i| tight[i].contains(&j)).collect()
                } else {
                    BTreeSet::new()
                }
            })
            .collect();
        let label = TypeLabel::new(sets);
        let cell = fibre_cell(m, y, &label, 0)?;
        let dim = cell.dim()?;
        cells.push(FibreCell { label, pinned, cell, dim });
    }
    Ok(FibreComplex {
        target: y.clone(),
        principal,
        cells,
    })
}

/// A target whose fibre has a cell of dimension at least `n - m + 1`, for a
/// matrix with a column real in two or more rows: that column is set to 0
/// and every other column pushed down by the separation bound, so the rows
/// it reaches are attained only there. `None` for simple projections.
pub fn non_simple_target<T: Scalar>(m: &TropMatrix<T>) -> Result<Option<TropPoint<T>>> {
    let Some(j) = (0..m.cols()).find(|&j| m.real_rows_of_column(j).len() >= 2) else {
        return Ok(None);
    };
    let low = -m.separation_bound();
    let x: Vec<T> = (0..m.cols()).map(|k| if k == j { T::zero() } else { low.clone() }).collect();
    Ok(Some(m.apply(&TropPoint::new(x)?)?))
}

/// Full-dimensional type cells, one per row→column assignment whose cell has
/// dimension `n - 1`. Their labels are partitions of the rows.
pub fn maximal_type_cells<T: Scalar>(m: &TropMatrix<T>, limit: usize) -> Result<Vec<PolyCell<T>>> {
    let (rows, n) = (m.rows(), m.cols());
    let choices: Vec<Vec<usize>> = (0..rows)
        .map(|i| (0..n).filter(|&j| m.real(i, j).is_some()).collect())
        .collect();
    let total = choices
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
        .unwrap_or(usize::MAX);
    if total > limit {
        return Err(Error::TooLarge(format!("{total} row assignments exceed limit {limit}")));
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; rows];
    loop {
        let assignment: Vec<usize> = idx.iter().enumerate().map(|(i, &k)| choices[i][k]).collect();
        let cell = type_cell(m, &TypeLabel::from_assignment(&assignment, n));
        if !cell.is_empty() && cell.dim()? == n - 1 {
            out.push(cell);
        }
        let mut r = rows;
        loop {
            if r == 0 {
                return Ok(out);
            }
            r -= 1;
            idx[r] += 1;
            if idx[r] < choices[r].len() {
                break;
            }
            idx[r] = 0;
        }
    }
}

/// JSON view of a cell.
#[derive(Clone, Debug, Serialize)]
pub struct CellDump {
    /// 1-based row sets per column.
    pub label: Vec<Vec<usize>>,
    pub label_text: String,
    pub dim: usize,
    pub hrep: HRep,
}

impl CellDump {
    pub fn new<T: Scalar>(cell: &PolyCell<T>, dim: usize) -> Self {
        let label = cell.label().cloned().unwrap_or_else(|| TypeLabel::new(Vec::new()));
        Self {
            label: label.to_one_based(),
            label_text: label.to_string(),
            dim,
            hrep: cell.to_hrep(),
        }
    }
}
