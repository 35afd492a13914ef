//! Convex polyhedra in quotient coordinates and the exact linear algebra
//! behind them.
//!
//! Points of `TPT^n` are written with `x_0 := 0`, so a cell lives in
//! `R^{n-1}` with variable `k` standing for torus coordinate `k + 1`. All
//! routines are generic over [`Scalar`], but they are only reliable over
//! exact rationals: feasibility and dimension decide ties.

use rand::Rng;
use serde::Serialize;

use crate::matrix::TypeLabel;
use crate::point::TropPoint;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// `coeffs · x (= or <=) rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn eval(&self, x: &[T]) -> T {
        dot(&self.coeffs, x)
    }

    /// `x_a - x_b` in torus coordinates `0..n`, moved to quotient variables.
    pub fn difference(n: usize, a: usize, b: usize, rhs: T) -> Self {
        let mut coeffs = vec![T::zero(); n - 1];
        if a != 0 {
            coeffs[a - 1] = coeffs[a - 1].clone() + T::one();
        }
        if b != 0 {
            coeffs[b - 1] = coeffs[b - 1].clone() - T::one();
        }
        Self { coeffs, rhs }
    }

    fn negated(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
            rhs: -self.rhs.clone(),
        }
    }

    /// True when every coefficient is zero.
    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(|c| *c == T::zero())
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Result of [`linprog`].
#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Infeasible,
    Unbounded,
    Optimal { value: T, point: Vec<T> },
}

/// Maximises `objective · x` over `{x : eq rows hold, ineq rows hold}` with
/// `x` free, by two-phase tableau simplex under Bland's rule.
pub fn linprog<T: Scalar>(
    vars: usize,
    objective: &[T],
    equalities: &[Constraint<T>],
    inequalities: &[Constraint<T>],
) -> LpOutcome<T> {
    simplex(vars, objective, equalities, inequalities, true)
}

/// As [`linprog`], with `x >= 0`.
pub fn linprog_nonneg<T: Scalar>(
    vars: usize,
    objective: &[T],
    equalities: &[Constraint<T>],
    inequalities: &[Constraint<T>],
) -> LpOutcome<T> {
    simplex(vars, objective, equalities, inequalities, false)
}

fn simplex<T: Scalar>(
    vars: usize,
    objective: &[T],
    equalities: &[Constraint<T>],
    inequalities: &[Constraint<T>],
    free: bool,
) -> LpOutcome<T> {
    let neg = if free { vars } else { 0 };
    let n_ub = inequalities.len();
    let rows: Vec<(&Constraint<T>, Option<usize>)> = inequalities
        .iter()
        .enumerate()
        .map(|(k, c)| (c, Some(k)))
        .chain(equalities.iter().map(|c| (c, None)))
        .collect();
    let n_rows = rows.len();
    // columns: x+ (vars) | x- (neg) | slacks (n_ub) | artificials (n_rows) | rhs
    let n_struct = vars + neg + n_ub;
    let n_cols = n_struct + n_rows;
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(n_rows);
    for (r, (c, slack)) in rows.iter().enumerate() {
        let mut row = vec![T::zero(); n_cols + 1];
        for k in 0..vars {
            row[k] = c.coeffs[k].clone();
            if free {
                row[vars + k] = -c.coeffs[k].clone();
            }
        }
        if let Some(s) = slack {
            row[vars + neg + s] = T::one();
        }
        row[n_cols] = c.rhs.clone();
        if c.rhs < T::zero() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[n_struct + r] = T::one();
        tab.push(row);
    }
    let mut t = Tableau {
        rows: tab,
        basis: (n_struct..n_cols).collect(),
        width: n_cols,
    };

    let mut phase1 = vec![T::zero(); n_cols];
    for c in phase1.iter_mut().skip(n_struct) {
        *c = -T::one();
    }
    let all: Vec<bool> = vec![true; n_cols];
    if t.maximize(&phase1, &all).is_err() {
        unreachable!("phase one is bounded");
    }
    let infeas = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n_struct)
        .fold(T::zero(), |acc, (r, _)| acc + t.rows[r][n_cols].clone());
    if infeas > T::zero() && !infeas.approx_eq(&T::zero()) {
        return LpOutcome::Infeasible;
    }
    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n_struct {
            match (0..n_struct).find(|&j| t.rows[r][j] != T::zero()) {
                Some(j) => {
                    t.pivot(r, j);
                    r += 1;
                }
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                }
            }
        } else {
            r += 1;
        }
    }

    let mut phase2 = vec![T::zero(); n_cols];
    for k in 0..vars {
        phase2[k] = objective[k].clone();
        if free {
            phase2[vars + k] = -objective[k].clone();
        }
    }
    let allowed: Vec<bool> = (0..n_cols).map(|j| j < n_struct).collect();
    if t.maximize(&phase2, &allowed).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut values = vec![T::zero(); n_cols];
    for (r, &b) in t.basis.iter().enumerate() {
        values[b] = t.rows[r][n_cols].clone();
    }
    let point: Vec<T> = (0..vars)
        .map(|k| {
            if free {
                values[k].clone() - values[vars + k].clone()
            } else {
                values[k].clone()
            }
        })
        .collect();
    LpOutcome::Optimal {
        value: dot(objective, &point),
        point,
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    width: usize,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r || row[c] == T::zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if *pv != T::zero() {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule. `Err(())` means unbounded.
    fn maximize(&mut self, cost: &[T], allowed: &[bool]) -> std::result::Result<(), ()> {
        let rhs = self.width;
        loop {
            // reduced cost d_j = c_j - c_B · column_j
            let entering = (0..self.width).filter(|&j| allowed[j]).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .fold(T::zero(), |acc, (row, &b)| acc + cost[b].clone() * row[j].clone());
                let d = cost[j].clone() - z;
                d > T::zero() && !d.approx_eq(&T::zero())
            });
            let Some(c) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, T)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[c] > T::zero() && !row[c].approx_eq(&T::zero()) {
                    let ratio = row[rhs].clone() / row[c].clone();
                    let better = match &best {
                        None => true,
                        Some((br, bv)) => {
                            ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br])
                        }
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(()),
            }
        }
    }
}

/// Rank of a list of row vectors by exact Gaussian elimination.
pub fn rank<T: Scalar>(rows: &[Vec<T>]) -> usize {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].approx_eq(&T::zero())) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        let prow = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            if row[c] == T::zero() {
                continue;
            }
            let f = row[c].clone() / pivot.clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
        rank += 1;
    }
    rank
}

/// A convex polyhedron `{x ∈ R^vars : E x = e, A x <= a}`, optionally tagged
/// with the type it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCell<T> {
    vars: usize,
    equalities: Vec<Constraint<T>>,
    inequalities: Vec<Constraint<T>>,
    label: Option<TypeLabel>,
}

impl<T: Scalar> PolyCell<T> {
    /// The whole space `R^vars`.
    pub fn universe(vars: usize) -> Self {
        Self {
            vars,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            label: None,
        }
    }

    /// An explicitly empty cell (`0 <= -1`).
    pub fn empty(vars: usize) -> Self {
        let mut c = Self::universe(vars);
        c.inequalities.push(Constraint {
            coeffs: vec![T::zero(); vars],
            rhs: -T::one(),
        });
        c
    }

    pub fn with_label(mut self, label: TypeLabel) -> Self {
        self.label = Some(label);
        self
    }

    pub fn label(&self) -> Option<&TypeLabel> {
        self.label.as_ref()
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn equalities(&self) -> &[Constraint<T>] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Constraint<T>] {
        &self.inequalities
    }

    pub fn push_eq(&mut self, c: Constraint<T>) {
        debug_assert_eq!(c.coeffs.len(), self.vars);
        self.equalities.push(c);
    }

    pub fn push_le(&mut self, c: Constraint<T>) {
        debug_assert_eq!(c.coeffs.len(), self.vars);
        self.inequalities.push(c);
    }

    /// Intersection of the two constraint systems. The label is kept from `self`.
    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.equalities.extend(other.equalities.iter().cloned());
        out.inequalities.extend(other.inequalities.iter().cloned());
        out
    }

    /// Exact membership of a point given in quotient coordinates.
    pub fn contains(&self, x: &[T]) -> bool {
        self.equalities.iter().all(|c| c.eval(x).approx_eq(&c.rhs))
            && self.inequalities.iter().all(|c| {
                let v = c.eval(x);
                v <= c.rhs || v.approx_eq(&c.rhs)
            })
    }

    pub fn contains_point(&self, p: &TropPoint<T>) -> bool {
        p.dim() == self.vars + 1 && self.contains(p.chart())
    }

    pub fn optimize(&self, objective: &[T]) -> LpOutcome<T> {
        linprog(self.vars, objective, &self.equalities, &self.inequalities)
    }

    pub fn feasible_point(&self) -> Option<Vec<T>> {
        match self.optimize(&vec![T::zero(); self.vars]) {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        if self.vars == 0 {
            return !self.contains(&[]);
        }
        self.feasible_point().is_none()
    }

    /// Inequalities that hold with equality on the whole (nonempty) cell.
    pub fn implicit_equalities(&self) -> Vec<usize> {
        (0..self.inequalities.len())
            .filter(|&k| {
                let c = &self.inequalities[k];
                if c.is_trivial() {
                    return c.rhs.approx_eq(&T::zero());
                }
                let neg: Vec<T> = c.coeffs.iter().map(|v| -v.clone()).collect();
                match self.optimize(&neg) {
                    LpOutcome::Optimal { value, .. } => (-value).approx_eq(&c.rhs),
                    _ => false,
                }
            })
            .collect()
    }

    /// Dimension of the affine hull.
    pub fn dim(&self) -> Result<usize> {
        if self.is_empty() {
            return Err(Error::EmptyCell);
        }
        let mut rows: Vec<Vec<T>> = self.equalities.iter().map(|c| c.coeffs.clone()).collect();
        rows.extend(
            self.implicit_equalities()
                .into_iter()
                .map(|k| self.inequalities[k].coeffs.clone()),
        );
        Ok(self.vars - rank(&rows))
    }

    /// `other ⊆ self`, decided by maximising each constraint of `self` over `other`.
    pub fn contains_cell(&self, other: &Self) -> bool {
        if other.is_empty() {
            return true;
        }
        let bounded_by = |c: &Constraint<T>| match other.optimize(&c.coeffs) {
            LpOutcome::Optimal { value, .. } => value <= c.rhs || value.approx_eq(&c.rhs),
            LpOutcome::Unbounded => false,
            LpOutcome::Infeasible => true,
        };
        self.inequalities.iter().all(bounded_by)
            && self
                .equalities
                .iter()
                .all(|c| bounded_by(c) && bounded_by(&c.negated()))
    }

    pub fn same_set(&self, other: &Self) -> bool {
        self.contains_cell(other) && other.contains_cell(self)
    }

    /// Points of the cell: LP vertices of the cell cut by a box around a
    /// feasible point, and random convex combinations of them.
    pub fn sample_points<R: Rng>(&self, count: usize, rng: &mut R) -> Result<Vec<Vec<T>>> {
        let seed = self.feasible_point().ok_or(Error::EmptyCell)?;
        if self.vars == 0 {
            return Ok(vec![Vec::new(); count]);
        }
        let scale = seed
            .iter()
            .chain(self.inequalities.iter().map(|c| &c.rhs))
            .chain(self.equalities.iter().map(|c| &c.rhs))
            .map(|v| v.abs())
            .fold(T::one(), T::max_of);
        let radius = scale * T::from_i64(4) + T::one();
        let mut boxed = self.clone();
        for k in 0..self.vars {
            let mut up = vec![T::zero(); self.vars];
            up[k] = T::one();
            let down: Vec<T> = up.iter().map(|v| -v.clone()).collect();
            boxed.push_le(Constraint { coeffs: up, rhs: radius.clone() });
            boxed.push_le(Constraint { coeffs: down, rhs: radius.clone() });
        }
        let mut corners = vec![seed];
        for _ in 0..(2 * self.vars + 2) {
            let obj: Vec<T> = (0..self.vars).map(|_| T::from_i64(rng.gen_range(-5..=5))).collect();
            if let LpOutcome::Optimal { point, .. } = boxed.optimize(&obj) {
                corners.push(point);
            }
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let weights: Vec<T> = corners.iter().map(|_| T::from_i64(rng.gen_range(1..=20))).collect();
            let total = weights.iter().cloned().fold(T::zero(), |a, b| a + b);
            let mut p = vec![T::zero(); self.vars];
            for (c, w) in corners.iter().zip(&weights) {
                for (pk, ck) in p.iter_mut().zip(c) {
                    *pk = pk.clone() + w.clone() * ck.clone();
                }
            }
            out.push(p.into_iter().map(|v| v / total.clone()).collect());
        }
        Ok(out)
    }

    /// Serialisable H-representation with float coefficients.
    pub fn to_hrep(&self) -> HRep {
        let conv = |cs: &[Constraint<T>]| {
            cs.iter()
                .map(|c| HRow {
                    coeffs: c.coeffs.iter().map(Scalar::to_f64).collect(),
                    rhs: c.rhs.to_f64(),
                    exact: c.rhs.to_string(),
                })
                .collect()
        };
        HRep {
            vars: self.vars,
            equalities: conv(&self.equalities),
            inequalities: conv(&self.inequalities),
        }
    }

    /// Polygon of a 2-variable cell clipped to `[-r, r]^2`, as float vertices
    /// in counter-clockwise order. Empty when the clipped cell is empty;
    /// lower-dimensional cells come out as degenerate polygons.
    pub fn clip_polygon_2d(&self, r: f64) -> Vec<[f64; 2]> {
        assert_eq!(self.vars, 2, "plane cells only");
        let mut poly = vec![[-r, -r], [r, -r], [r, r], [-r, r]];
        let mut halfplanes: Vec<([f64; 2], f64)> = Vec::new();
        for c in &self.inequalities {
            halfplanes.push(([c.coeffs[0].to_f64(), c.coeffs[1].to_f64()], c.rhs.to_f64()));
        }
        for c in &self.equalities {
            let a = [c.coeffs[0].to_f64(), c.coeffs[1].to_f64()];
            halfplanes.push((a, c.rhs.to_f64()));
            halfplanes.push(([-a[0], -a[1]], -c.rhs.to_f64()));
        }
        for (a, b) in halfplanes {
            poly = clip_halfplane(&poly, a, b);
            if poly.is_empty() {
                break;
            }
        }
        poly
    }
}

fn clip_halfplane(poly: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    const EPS: f64 = 1e-9;
    let side = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - b;
    let mut out = Vec::new();
    for k in 0..poly.len() {
        let cur = poly[k];
        let next = poly[(k + 1) % poly.len()];
        let (sc, sn) = (side(&cur), side(&next));
        if sc <= EPS {
            out.push(cur);
        }
        if (sc < -EPS && sn > EPS) || (sc > EPS && sn < -EPS) {
            let t = sc / (sc - sn);
            out.push([cur[0] + t * (next[0] - cur[0]), cur[1] + t * (next[1] - cur[1])]);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct HRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    /// Exact right-hand side.
    pub exact: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HRep {
    pub vars: usize,
    pub equalities: Vec<HRow>,
    pub inequalities: Vec<HRow>,
}
