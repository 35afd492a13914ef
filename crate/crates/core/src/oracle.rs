//! Reference transport solver for tests: permutations for equal-size
//! uniform measures, otherwise the transport LP solved in exact rationals.

use crate::measure::DiscreteMeasure;
use crate::poly::{linprog_nonneg, Constraint, LpOutcome};
use crate::scalar::{exact_rational, Scalar, Q};
use crate::transport::{cost_matrix, root};
use crate::{Error, Result};

/// Largest support accepted on either side.
pub const MAX_ATOMS: usize = 6;

/// Exact optimum of the transport problem with cost `d^p`, as `W_p`.
pub fn brute_wasserstein(mu: &DiscreteMeasure<f64>, nu: &DiscreteMeasure<f64>, p: f64) -> Result<f64> {
    Ok(root(brute_cost(mu, nu, p)?, p))
}

/// Exact optimal cost `min Σ π_ij d_ij^p`.
pub fn brute_cost(mu: &DiscreteMeasure<f64>, nu: &DiscreteMeasure<f64>, p: f64) -> Result<f64> {
    if mu.len() > MAX_ATOMS || nu.len() > MAX_ATOMS {
        return Err(Error::TooLarge(format!(
            "{} x {} atoms, limit {MAX_ATOMS}",
            mu.len(),
            nu.len()
        )));
    }
    let costs = cost_matrix(mu, nu, p)?;
    if mu.len() == nu.len() && mu.is_uniform() && nu.is_uniform() {
        return Ok(best_permutation(&costs) / mu.len() as f64);
    }
    exact_lp(mu.weights(), nu.weights(), &costs)
}

/// Minimum of `Σ_i costs[i][σ(i)]` over all permutations σ.
pub fn best_permutation(costs: &[Vec<f64>]) -> f64 {
    fn go(costs: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == costs.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..costs.len() {
            if !used[j] {
                used[j] = true;
                go(costs, row + 1, used, acc + costs[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(costs, 0, &mut vec![false; costs.len()], 0.0, &mut best);
    best
}

/// Transport LP over the exact values of the float inputs. Marginals are
/// renormalised exactly so the program is feasible.
fn exact_lp(a: &[f64], b: &[f64], costs: &[Vec<f64>]) -> Result<f64> {
    let exact = |v: &[f64]| -> Result<Vec<Q>> {
        let xs = v.iter().map(|&x| exact_rational(x)).collect::<Result<Vec<_>>>()?;
        let total = xs.iter().cloned().fold(Q::from_i64(0), |s, x| s + x);
        Ok(xs.into_iter().map(|x| x / total.clone()).collect())
    };
    let (qa, qb) = (exact(a)?, exact(b)?);
    let (m, n) = (a.len(), b.len());
    let vars = m * n;
    let mut eqs = Vec::with_capacity(m + n);
    for (i, ai) in qa.iter().enumerate() {
        let mut coeffs = vec![Q::from_i64(0); vars];
        for j in 0..n {
            coeffs[i * n + j] = Q::from_i64(1);
        }
        eqs.push(Constraint { coeffs, rhs: ai.clone() });
    }
    for (j, bj) in qb.iter().enumerate() {
        let mut coeffs = vec![Q::from_i64(0); vars];
        for i in 0..m {
            coeffs[i * n + j] = Q::from_i64(1);
        }
        eqs.push(Constraint { coeffs, rhs: bj.clone() });
    }
    let objective = costs
        .iter()
        .flatten()
        .map(|&c| exact_rational(c).map(|q| -q))
        .collect::<Result<Vec<_>>>()?;
    match linprog_nonneg(vars, &objective, &eqs, &[]) {
        LpOutcome::Optimal { value, .. } => Ok((-value).to_f64()),
        other => Err(Error::Certificate(format!("transport LP returned {other:?}"))),
    }
}
