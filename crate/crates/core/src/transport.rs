//! Exact discrete optimal transport with the tropical ground metric.
//!
//! Transportation simplex on the dense cost matrix: north-west corner start,
//! potentials from the basis tree, Dantzig pricing, and Bland's rule once a
//! run of degenerate pivots shows up. Works over `f64` and over exact
//! rationals (integer `p` only).

use std::collections::VecDeque;

use crate::measure::{Coupling, DiscreteMeasure};
use crate::point::{check_dim, trop_metric};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Optimal transport between two measures.
#[derive(Clone, Debug)]
pub struct Transport<T = f64> {
    /// `cost^(1/p)`.
    pub value: f64,
    /// Optimal `Σ π_ij d_ij^p`, in the backend's arithmetic.
    pub cost: T,
    pub plan: Coupling<T>,
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `d(x_i, y_j)^p` for all pairs.
pub fn cost_matrix<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, p: f64) -> Result<Vec<Vec<T>>> {
    check_dim(mu.dim(), nu.dim())?;
    check_exponent(p)?;
    mu.support()
        .iter()
        .map(|x| {
            nu.support()
                .iter()
                .map(|y| trop_metric(x, y)?.powf(p))
                .collect()
        })
        .collect()
}

/// `W_p(mu, nu)` and an optimal coupling.
pub fn wasserstein<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, p: f64) -> Result<Transport<T>> {
    let costs = cost_matrix(mu, nu, p)?;
    let plan = solve_transport(mu.weights(), nu.weights(), &costs);
    let cost = plan_cost(&plan, &costs);
    Ok(Transport {
        value: root(cost.to_f64(), p),
        cost,
        plan,
    })
}

pub fn root(cost: f64, p: f64) -> f64 {
    let c = cost.max(0.0);
    if p == 1.0 {
        c
    } else {
        c.powf(1.0 / p)
    }
}

pub fn plan_cost<T: Scalar>(plan: &Coupling<T>, costs: &[Vec<T>]) -> T {
    let mut total = T::zero();
    for (row, crow) in plan.mass.iter().zip(costs) {
        for (v, c) in row.iter().zip(crow) {
            if *v != T::zero() {
                total = total + v.clone() * c.clone();
            }
        }
    }
    total
}

/// Minimum-cost plan for supplies `a`, demands `b` (equal totals) and a
/// dense cost matrix.
pub fn solve_transport<T: Scalar>(a: &[T], b: &[T], costs: &[Vec<T>]) -> Coupling<T> {
    let (m, n) = (a.len(), b.len());
    let mut flow = vec![vec![T::zero(); n]; m];
    let mut basic = vec![vec![false; n]; m];

    // north-west corner, always m + n - 1 basic cells
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let q = T::min_of(ra[i].clone(), rb[j].clone());
        let q = if q < T::zero() { T::zero() } else { q };
        flow[i][j] = q.clone();
        basic[i][j] = true;
        ra[i] = ra[i].clone() - q.clone();
        rb[j] = rb[j].clone() - q;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }

    let scale = costs
        .iter()
        .flatten()
        .map(|c| c.to_f64().abs())
        .fold(1.0, f64::max);
    let eps = if T::EXACT { 0.0 } else { 1e-12 * scale };
    let mut degenerate_streak = 0usize;
    let max_iter = 50 * (m * n + m + n) + 1000;
    for _ in 0..max_iter {
        let (u, v) = potentials(&basic, costs);
        let bland = degenerate_streak > m + n;
        let mut entering: Option<(usize, usize, T)> = None;
        'scan: for i in 0..m {
            for j in 0..n {
                if basic[i][j] {
                    continue;
                }
                let r = costs[i][j].clone() - u[i].clone() - v[j].clone();
                if r.to_f64() < -eps && (T::EXACT || r < T::zero()) {
                    let better = entering.as_ref().is_none_or(|(_, _, best)| r < *best);
                    if better {
                        entering = Some((i, j, r));
                        if bland {
                            break 'scan;
                        }
                    }
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            break;
        };
        let cycle = tree_path(&basic, ei, ej);
        // cycle[k] alternates -, +, -, ... starting at the cell next to column ej
        let mut leave: Option<(usize, usize)> = None;
        let mut theta: Option<T> = None;
        for (k, &(ci, cj)) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                let f = flow[ci][cj].clone();
                let take = match &theta {
                    None => true,
                    Some(t) => f < *t || (f == *t && (ci, cj) < leave.expect("set with theta")),
                };
                if take {
                    theta = Some(f);
                    leave = Some((ci, cj));
                }
            }
        }
        let theta = theta.expect("cycle has a minus cell");
        let theta = if theta < T::zero() { T::zero() } else { theta };
        if theta == T::zero() || theta.to_f64() <= eps {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        flow[ei][ej] = theta.clone();
        for (k, &(ci, cj)) in cycle.iter().enumerate() {
            let f = flow[ci][cj].clone();
            flow[ci][cj] = if k % 2 == 0 { f - theta.clone() } else { f + theta.clone() };
            if !T::EXACT && flow[ci][cj] < T::zero() {
                flow[ci][cj] = T::zero();
            }
        }
        let (li, lj) = leave.expect("leaving cell");
        basic[ei][ej] = true;
        basic[li][lj] = false;
        flow[li][lj] = T::zero();
    }
    Coupling { mass: flow }
}

/// Dual potentials with `u_0 = 0` and `u_i + v_j = c_ij` on basic cells.
fn potentials<T: Scalar>(basic: &[Vec<bool>], costs: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let (m, n) = (basic.len(), basic[0].len());
    let mut u: Vec<Option<T>> = vec![None; m];
    let mut v: Vec<Option<T>> = vec![None; n];
    u[0] = Some(T::zero());
    let mut queue = VecDeque::from([(true, 0usize)]);
    while let Some((is_row, k)) = queue.pop_front() {
        if is_row {
            let ui = u[k].clone().expect("visited");
            for j in 0..n {
                if basic[k][j] && v[j].is_none() {
                    v[j] = Some(costs[k][j].clone() - ui.clone());
                    queue.push_back((false, j));
                }
            }
        } else {
            let vj = v[k].clone().expect("visited");
            for i in 0..m {
                if basic[i][k] && u[i].is_none() {
                    u[i] = Some(costs[i][k].clone() - vj.clone());
                    queue.push_back((true, i));
                }
            }
        }
    }
    (
        u.into_iter().map(|x| x.unwrap_or_else(T::zero)).collect(),
        v.into_iter().map(|x| x.unwrap_or_else(T::zero)).collect(),
    )
}

/// Basic cells on the tree path from column `col` back to row `row`, in
/// that order. Its first cell touches `col`.
fn tree_path(basic: &[Vec<bool>], row: usize, col: usize) -> Vec<(usize, usize)> {
    let (m, n) = (basic.len(), basic[0].len());
    // nodes: rows 0..m, columns m..m+n; BFS from the row node
    let mut parent: Vec<Option<usize>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    seen[row] = true;
    let mut queue = VecDeque::from([row]);
    while let Some(node) = queue.pop_front() {
        if node == m + col {
            break;
        }
        let neighbours: Vec<usize> = if node < m {
            (0..n).filter(|&j| basic[node][j]).map(|j| m + j).collect()
        } else {
            (0..m).filter(|&i| basic[i][node - m]).collect()
        };
        for nb in neighbours {
            if !seen[nb] {
                seen[nb] = true;
                parent[nb] = Some(node);
                queue.push_back(nb);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = m + col;
    while let Some(p) = parent[node] {
        let cell = if node < m { (node, p - m) } else { (p, node - m) };
        path.push(cell);
        node = p;
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::TropPoint;
    use crate::Q;

    fn pt(v: &[f64]) -> TropPoint<f64> {
        TropPoint::from_f64s(v).unwrap()
    }

    #[test]
    fn dirac_pair_is_metric() {
        let x = pt(&[0.0, 2.0, 3.0]);
        let y = pt(&[0.0, 1.0, -1.0]);
        let t = wasserstein(&DiscreteMeasure::dirac(x), &DiscreteMeasure::dirac(y), 2.0).unwrap();
        assert!((t.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let mu = DiscreteMeasure::uniform(vec![pt(&[0.0, 1.0, 2.0]), pt(&[0.0, -3.0, 1.0])]).unwrap();
        assert_eq!(wasserstein(&mu, &mu, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn two_atom_pairing() {
        let mu = DiscreteMeasure::uniform(vec![pt(&[0.0, 0.0, 0.0]), pt(&[0.0, 4.0, 0.0])]).unwrap();
        let nu = DiscreteMeasure::uniform(vec![pt(&[0.0, 1.0, 0.0]), pt(&[0.0, 5.0, 0.0])]).unwrap();
        let t = wasserstein(&mu, &nu, 1.0).unwrap();
        assert!((t.value - 1.0).abs() < 1e-12, "{}", t.value);
        assert!(t.plan.is_coupling_of(&mu, &nu, 1e-12));
    }

    #[test]
    fn rational_mode_needs_integer_p() {
        let x = TropPoint::<Q>::from_i64s(&[0, 1]).unwrap();
        let mu = DiscreteMeasure::dirac(x.clone());
        assert!(wasserstein(&mu, &mu, 1.5).is_err());
        assert_eq!(wasserstein(&mu, &mu, 2.0).unwrap().cost, Q::from_i64(0));
        assert!(wasserstein(&mu, &mu, 0.5).is_err());
    }

    #[test]
    fn handles_degenerate_marginals() {
        let a = vec![0.5, 0.5];
        let b = vec![0.5, 0.5];
        let costs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let plan = solve_transport(&a, &b, &costs);
        assert_eq!(plan_cost(&plan, &costs), 0.0);
    }
}
