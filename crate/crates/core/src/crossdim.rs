//! Distances between measures on tori of different dimensions.
//!
//! `W⁻(μ, ν)` is the infimum over simple projections `P` of `W_p(μ, P_*ν)`.
//! The search runs over column structures (which row owns each column) and,
//! for each structure, over the real offsets:
//!
//! 1. an exact zero test: anchor one atom of `ν` on an atom of `μ`, then
//!    assign the remaining atoms depth first, checking each partial
//!    assignment by the alternating method for two-sided max-plus systems;
//! 2. if no structure admits zero, multi-start descent on the offsets using
//!    subgradients read off the optimal plan, coordinate moves and refits.
//!
//! Every reported value is an upper bound on the true infimum and the exact
//! minimum over what was explored. `W⁺` is then certified by gluing the
//! optimal plan along the splitting of `ν`, which produces a measure `α` on
//! the big torus with `P_*α = μ` at the same transport cost.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::measure::{pushforward_indexed, Coupling, DiscreteMeasure};
use crate::point::{trop_metric, TropPoint};
use crate::scalar::Scalar;
use crate::simple::{SimpleProjection, Structure};
use crate::transport::{check_exponent, root, wasserstein, Transport};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureMode {
    /// Exhaustive when the structure count is at most `max_structures`,
    /// local search otherwise.
    Auto,
    Exhaustive,
    LocalSearch,
}

#[derive(Clone, Debug)]
pub struct SearchSpec {
    pub mode: StructureMode,
    /// Exhaustive threshold, and the evaluation cap of local search.
    pub max_structures: usize,
    /// Descent starts per structure.
    pub restarts: usize,
    /// Descent iterations per start.
    pub budget: usize,
    pub seed: u64,
    /// Values at or below this count as zero.
    pub tolerance: f64,
    /// Cap on partial assignments tried by the zero test, per structure.
    pub zero_nodes: usize,
    /// Structures evaluated per parallel batch.
    pub chunk: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            mode: StructureMode::Auto,
            max_structures: 2000,
            restarts: 10,
            budget: 200,
            seed: 0,
            tolerance: 1e-9,
            zero_nodes: 400,
            chunk: 32,
        }
    }
}

/// Output of a cross-dimensional computation.
#[derive(Clone, Debug)]
pub struct CrossDimResult {
    /// `W_p(μ, β)` for the reported projection.
    pub w_minus: f64,
    /// `W_p(μ, β)^p`.
    pub cost: f64,
    pub projection: SimpleProjection<f64>,
    /// `β = P_*ν`.
    pub beta: DiscreteMeasure<f64>,
    /// Optimal plan between `μ` and `β`.
    pub coupling: Coupling<f64>,
    pub structures_explored: usize,
    pub exhaustive: bool,
    /// True when some descent stopped on its iteration budget.
    pub budget_exhausted: bool,
    pub tolerance: f64,
    pub certificate: Option<Certificate>,
}

impl CrossDimResult {
    /// `W⁺` when a certificate is attached.
    pub fn w_plus(&self) -> Option<f64> {
        self.certificate.as_ref().map(|c| c.w_plus)
    }
}

/// Glued embedding of `μ` into the big torus.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// `α` with `P_*α = μ`.
    pub alpha: DiscreteMeasure<f64>,
    /// Coupling of `α` and `ν` built by the gluing.
    pub pi_n: Coupling<f64>,
    /// Cost of the plan between `μ` and `β`.
    pub cost_m: f64,
    /// Cost of `pi_n`.
    pub cost_n: f64,
    /// `|cost_n - cost_m|`.
    pub gap: f64,
    /// `W_p(α, ν)`, solved independently.
    pub w_plus: f64,
    /// `P_*α` equals `μ` within 1e-9.
    pub pushforward_matches: bool,
}

struct Problem<'a> {
    mu: &'a DiscreteMeasure<f64>,
    nu: &'a DiscreteMeasure<f64>,
    p: f64,
    tolerance: f64,
    /// Spread of all coordinates; scales steps and random starts.
    scale: f64,
}

#[derive(Clone, Debug)]
struct Eval {
    structure: Structure,
    offsets: Vec<f64>,
    cost: f64,
    exhausted: bool,
}

impl Eval {
    fn key(&self, tol: f64) -> (f64, &Structure) {
        (if self.cost <= tol { 0.0 } else { self.cost }, &self.structure)
    }
}

fn better(a: &Eval, b: &Eval, tol: f64) -> bool {
    let (ka, kb) = (a.key(tol), b.key(tol));
    ka.0 < kb.0 || (ka.0 == kb.0 && ka.1 < kb.1)
}

fn check_inputs(mu: &DiscreteMeasure<f64>, nu: &DiscreteMeasure<f64>, p: f64) -> Result<()> {
    check_exponent(p)?;
    if mu.dim() >= nu.dim() {
        return Err(Error::DimensionOrder { m: mu.dim(), n: nu.dim() });
    }
    Ok(())
}

fn spread(mu: &DiscreteMeasure<f64>, nu: &DiscreteMeasure<f64>) -> f64 {
    let all = mu
        .support()
        .iter()
        .chain(nu.support())
        .flat_map(|x| x.coords().iter().copied());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (hi - lo).max(0.0) + 1.0
}

fn structure_seed(seed: u64, s: &Structure) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((s.m as u64).to_le_bytes());
    for r in &s.rows {
        h.update(r.map_or(0u64, |v| v as u64 + 1).to_le_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

impl Problem<'_> {
    fn transport(&self, proj: &SimpleProjection<f64>) -> Result<(Transport<f64>, DiscreteMeasure<f64>, Vec<usize>)> {
        let (beta, index) = pushforward_indexed(proj, self.nu)?;
        let t = wasserstein(self.mu, &beta, self.p)?;
        Ok((t, beta, index))
    }

    fn cost(&self, s: &Structure, offsets: &[f64]) -> Result<f64> {
        let proj = SimpleProjection::new(s.clone(), offsets.to_vec())?;
        Ok(self.transport(&proj)?.0.cost)
    }

    /// Offsets sending atom `k` of `ν` exactly onto atom `a` of `μ`.
    fn anchor(&self, s: &Structure, k: usize, a: usize) -> Vec<f64> {
        let x = self.nu.support()[k].coords();
        let y = self.mu.support()[a].coords();
        s.rows
            .iter()
            .enumerate()
            .map(|(j, r)| r.map_or(0.0, |i| y[i] - x[j]))
            .collect()
    }

    fn heaviest_nu_atom(&self) -> usize {
        let w = self.nu.weights();
        (0..w.len()).fold(0, |best, k| if w[k] > w[best] { k } else { best })
    }

    /// Exact zero test for one structure.
    fn zero_search(&self, s: &Structure, node_cap: usize) -> Option<Vec<f64>> {
        let k0 = self.heaviest_nu_atom();
        let mut order: Vec<usize> = vec![k0];
        order.extend((0..self.nu.len()).filter(|&k| k != k0));
        let mut nodes = 0usize;
        for a0 in 0..self.mu.len() {
            if self.nu.weights()[k0] > self.mu.weights()[a0] + 1e-9 {
                continue;
            }
            let start = self.anchor(s, k0, a0);
            let mut remaining: Vec<f64> = self.mu.weights().to_vec();
            remaining[a0] -= self.nu.weights()[k0];
            let mut sigma = vec![a0];
            if let Some(m) = self.assign(s, &order, &mut sigma, &mut remaining, start, &mut nodes, node_cap) {
                return Some(m);
            }
            if nodes >= node_cap {
                break;
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        &self,
        s: &Structure,
        order: &[usize],
        sigma: &mut Vec<usize>,
        remaining: &mut Vec<f64>,
        offsets: Vec<f64>,
        nodes: &mut usize,
        cap: usize,
    ) -> Option<Vec<f64>> {
        if sigma.len() == order.len() {
            return Some(offsets);
        }
        let k = order[sigma.len()];
        let wk = self.nu.weights()[k];
        let image = apply_structure(s, &offsets, self.nu.support()[k].coords());
        let mut cands: Vec<(f64, usize)> = (0..self.mu.len())
            .filter(|&a| remaining[a] >= wk - 1e-9)
            .map(|a| (raw_metric(&image, self.mu.support()[a].coords()), a))
            .collect();
        cands.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (_, a) in cands {
            if *nodes >= cap {
                return None;
            }
            *nodes += 1;
            sigma.push(a);
            let pairs: Vec<(&[f64], &[f64])> = order[..sigma.len()]
                .iter()
                .zip(sigma.iter())
                .map(|(&kk, &aa)| (self.nu.support()[kk].coords(), self.mu.support()[aa].coords()))
                .collect();
            if let Some(next) = alternating(s, &pairs, &offsets, 4000) {
                remaining[a] -= wk;
                if let Some(found) = self.assign(s, order, sigma, remaining, next, nodes, cap) {
                    return Some(found);
                }
                remaining[a] += wk;
            }
            sigma.pop();
        }
        None
    }

    /// Subgradient of the transport cost with respect to the offsets.
    fn subgradient(
        &self,
        s: &Structure,
        offsets: &[f64],
        t: &Transport<f64>,
        beta: &DiscreteMeasure<f64>,
        index: &[usize],
    ) -> Vec<f64> {
        let mut g = vec![0.0; offsets.len()];
        for (k, (x, wk)) in self.nu.atoms().enumerate() {
            let b = index[k];
            let wb = beta.weights()[b];
            let (z, active) = apply_with_argmax(s, offsets, x.coords());
            for (a, row) in t.plan.mass.iter().enumerate() {
                let mass = row[b] * wk / wb;
                if mass <= 0.0 {
                    continue;
                }
                let y = self.mu.support()[a].coords();
                let diff: Vec<f64> = z.iter().zip(y).map(|(zi, yi)| zi - yi).collect();
                let imax = argmax(&diff);
                let imin = argmin(&diff);
                let d = diff[imax] - diff[imin];
                if d <= 0.0 {
                    continue;
                }
                let factor = mass * self.p * if self.p == 1.0 { 1.0 } else { d.powf(self.p - 1.0) };
                g[active[imax]] += factor;
                g[active[imin]] -= factor;
            }
        }
        g
    }

    /// Assignment `ν`-atom → `μ`-atom carrying the most mass in the plan.
    fn plan_assignment(&self, t: &Transport<f64>, index: &[usize]) -> Vec<usize> {
        index
            .iter()
            .map(|&b| {
                let col: Vec<f64> = t.plan.mass.iter().map(|r| r[b]).collect();
                argmax(&col)
            })
            .collect()
    }

    /// Multi-start descent for one structure.
    fn optimize(&self, s: &Structure, spec: &SearchSpec) -> Result<Eval> {
        let mut rng = ChaCha8Rng::seed_from_u64(structure_seed(spec.seed, s));
        let k0 = self.heaviest_nu_atom();
        let mut starts: Vec<Vec<f64>> = (0..self.mu.len()).map(|a| self.anchor(s, k0, a)).collect();
        starts.truncate(spec.restarts.saturating_sub(1).max(1));
        if starts.len() < spec.restarts {
            starts.push(vec![0.0; s.n()]);
        }
        while starts.len() < spec.restarts {
            let r = self.scale;
            starts.push((0..s.n()).map(|_| rng.gen_range(-r..=r)).collect());
        }
        let mut best: Option<Eval> = None;
        for start in starts {
            let e = self.descend(s, start, spec)?;
            let replace = best.as_ref().is_none_or(|b| e.cost < b.cost);
            let exhausted = e.exhausted || best.as_ref().is_some_and(|b| b.exhausted);
            if replace {
                best = Some(Eval { exhausted, ..e });
            } else if let Some(b) = best.as_mut() {
                b.exhausted = exhausted;
            }
            if best.as_ref().is_some_and(|b| b.cost <= self.tolerance) {
                break;
            }
        }
        Ok(best.expect("at least one start"))
    }

    fn descend(&self, s: &Structure, start: Vec<f64>, spec: &SearchSpec) -> Result<Eval> {
        let used: Vec<usize> = (0..s.n()).filter(|&j| s.rows[j].is_some()).collect();
        let mut offsets = start;
        let mut proj = SimpleProjection::new(s.clone(), offsets.clone())?;
        let (mut t, mut beta, mut index) = self.transport(&proj)?;
        let mut step = self.scale / 4.0;
        let min_step = 1e-10 * self.scale;
        let mut exhausted = true;
        for _ in 0..spec.budget {
            if t.cost <= self.tolerance {
                exhausted = false;
                break;
            }
            let mut candidates: Vec<Vec<f64>> = Vec::new();
            let g = self.subgradient(s, &offsets, &t, &beta, &index);
            let gnorm = g.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if gnorm > 0.0 {
                candidates.push(offsets.iter().zip(&g).map(|(o, gi)| o - step * gi / gnorm).collect());
            }
            let sigma = self.plan_assignment(&t, &index);
            let pairs: Vec<(&[f64], &[f64])> = sigma
                .iter()
                .enumerate()
                .map(|(k, &a)| (self.nu.support()[k].coords(), self.mu.support()[a].coords()))
                .collect();
            if let Some(refit) = alternating(s, &pairs, &offsets, 200) {
                candidates.push(refit);
            }
            for &j in &used {
                for sign in [1.0, -1.0] {
                    let mut c = offsets.clone();
                    c[j] += sign * step;
                    candidates.push(c);
                }
            }
            let mut moved = false;
            for c in candidates {
                let cp = SimpleProjection::new(s.clone(), c.clone())?;
                let (ct, cb, ci) = self.transport(&cp)?;
                if ct.cost < t.cost - 1e-15 * (1.0 + t.cost) {
                    offsets = c;
                    proj = cp;
                    t = ct;
                    beta = cb;
                    index = ci;
                    moved = true;
                    break;
                }
            }
            if moved {
                step = (step * 1.5).min(self.scale);
            } else {
                step /= 2.0;
                if step < min_step {
                    exhausted = false;
                    break;
                }
            }
        }
        let _ = proj;
        Ok(Eval {
            structure: s.clone(),
            offsets,
            cost: t.cost,
            exhausted,
        })
    }

    fn zero_eval(&self, s: &Structure, spec: &SearchSpec) -> Result<Option<Eval>> {
        if let Some(offsets) = self.zero_search(s, spec.zero_nodes) {
            let cost = self.cost(s, &offsets)?;
            if cost <= self.tolerance {
                return Ok(Some(Eval {
                    structure: s.clone(),
                    offsets,
                    cost,
                    exhausted: false,
                }));
            }
        }
        Ok(None)
    }

    fn full_eval(&self, s: &Structure, spec: &SearchSpec) -> Result<Eval> {
        match self.zero_eval(s, spec)? {
            Some(e) => Ok(e),
            None => self.optimize(s, spec),
        }
    }
}

fn raw_metric(a: &[f64], b: &[f64]) -> f64 {
    let (lo, hi) = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
    hi - lo
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, k| if v[k] > v[b] { k } else { b })
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, k| if v[k] < v[b] { k } else { b })
}

fn apply_structure(s: &Structure, offsets: &[f64], x: &[f64]) -> Vec<f64> {
    apply_with_argmax(s, offsets, x).0
}

/// `(Px)_i` together with the lowest column attaining each row maximum.
fn apply_with_argmax(s: &Structure, offsets: &[f64], x: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut val = vec![f64::NEG_INFINITY; s.m];
    let mut arg = vec![usize::MAX; s.m];
    for (j, r) in s.rows.iter().enumerate() {
        if let Some(i) = *r {
            let v = offsets[j] + x[j];
            if v > val[i] {
                val[i] = v;
                arg[i] = j;
            }
        }
    }
    (val, arg)
}

/// Alternating method for `P x_k ~ y_k` (all pairs) in the offsets, started
/// from `start`. Returns the greatest solution below `start`, or `None` when
/// every offset has dropped below its start (then no solution exists there)
/// or the iteration cap is hit.
fn alternating(s: &Structure, pairs: &[(&[f64], &[f64])], start: &[f64], max_iter: usize) -> Option<Vec<f64>> {
    const EPS: f64 = 1e-12;
    let used: Vec<usize> = (0..s.n()).filter(|&j| s.rows[j].is_some()).collect();
    let mut cur = start.to_vec();
    for _ in 0..max_iter {
        let lambdas: Vec<f64> = pairs
            .iter()
            .map(|(x, y)| {
                let img = apply_structure(s, &cur, x);
                img.iter().zip(y.iter()).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min)
            })
            .collect();
        let mut next = cur.clone();
        for &j in &used {
            let i = s.rows[j].expect("used");
            next[j] = pairs
                .iter()
                .zip(&lambdas)
                .map(|((x, y), l)| y[i] + l - x[j])
                .fold(f64::INFINITY, f64::min);
        }
        if used.iter().all(|&j| next[j] < start[j] - 1e-9) {
            return None;
        }
        let stable = used.iter().all(|&j| (next[j] - cur[j]).abs() <= EPS);
        cur = next;
        if stable {
            let ok = pairs.iter().all(|(x, y)| {
                let img = apply_structure(s, &cur, x);
                let d: Vec<f64> = img.iter().zip(y.iter()).map(|(a, b)| a - b).collect();
                let (lo, hi) = d.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
                hi - lo <= 1e-9
            });
            return ok.then_some(cur);
        }
    }
    None
}

/// Closed-form projection sending `x` onto `y`: column `i` owned by row `i`
/// with offset `y_i - x_i`, remaining columns unused.
pub fn dirac_projection(y: &TropPoint<f64>, x: &TropPoint<f64>) -> Result<SimpleProjection<f64>> {
    let (m, n) = (y.dim(), x.dim());
    let rows = (0..n).map(|j| (j < m).then_some(j)).collect();
    let s = Structure::new(m, rows)?;
    let offsets = (0..n)
        .map(|j| if j < m { y.coords()[j] - x.coords()[j] } else { 0.0 })
        .collect();
    SimpleProjection::new(s, offsets)
}

/// The structures searched for given dimensions, in lexicographic order,
/// and whether the search is exhaustive.
fn candidate_structures(m: usize, n: usize, spec: &SearchSpec) -> Result<Option<Vec<Structure>>> {
    let count = Structure::count(m, n);
    let fits = count <= spec.max_structures as u128;
    match spec.mode {
        StructureMode::Exhaustive if !fits => Err(Error::TooLarge(format!(
            "{count} structures exceed max_structures = {}",
            spec.max_structures
        ))),
        StructureMode::Exhaustive => Ok(Some(Structure::enumerate(m, n))),
        StructureMode::Auto if fits => Ok(Some(Structure::enumerate(m, n))),
        _ => Ok(None),
    }
}

fn finish(problem: &Problem<'_>, best: Eval, explored: usize, exhaustive: bool, exhausted: bool) -> Result<CrossDimResult> {
    let proj = SimpleProjection::new(best.structure, best.offsets)?;
    let (t, beta, _) = problem.transport(&proj)?;
    Ok(CrossDimResult {
        w_minus: t.value,
        cost: t.cost,
        projection: proj,
        beta,
        coupling: t.plan,
        structures_explored: explored,
        exhaustive,
        budget_exhausted: exhausted,
        tolerance: problem.tolerance,
        certificate: None,
    })
}

/// Exhaustive search over a given structure list.
pub fn w_minus_over(
    mu: &DiscreteMeasure<f64>,
    nu: &DiscreteMeasure<f64>,
    p: f64,
    spec: &SearchSpec,
    structures: &[Structure],
) -> Result<CrossDimResult> {
    check_inputs(mu, nu, p)?;
    if structures.is_empty() {
        return Err(Error::Empty("structure list"));
    }
    let mut sorted = structures.to_vec();
    sorted.sort();
    sorted.dedup();
    let problem = Problem {
        mu,
        nu,
        p,
        tolerance: spec.tolerance,
        scale: spread(mu, nu),
    };
    let chunk = spec.chunk.max(1);
    // pass 1: exact zero test, stop at the first batch that finds one
    let mut explored = 0;
    for batch in sorted.chunks(chunk) {
        explored += batch.len();
        let hits: Vec<Option<Eval>> = batch
            .par_iter()
            .map(|s| problem.zero_eval(s, spec))
            .collect::<Result<Vec<_>>>()?;
        if let Some(best) = hits.into_iter().flatten().next() {
            return finish(&problem, best, explored, true, false);
        }
    }
    // pass 2: descent on every structure
    let evals: Vec<Eval> = sorted
        .par_iter()
        .map(|s| problem.optimize(s, spec))
        .collect::<Result<Vec<_>>>()?;
    let exhausted = evals.iter().any(|e| e.exhausted);
    let best = evals
        .into_iter()
        .reduce(|a, b| if better(&b, &a, spec.tolerance) { b } else { a })
        .expect("nonempty");
    finish(&problem, best, sorted.len(), true, exhausted)
}

/// `W⁻_p(μ, ν)` by structure search plus offset optimisation.
pub fn w_minus(mu: &DiscreteMeasure<f64>, nu: &DiscreteMeasure<f64>, p: f64, spec: &SearchSpec) -> Result<CrossDimResult> {
    check_inputs(mu, nu, p)?;
    if mu.dim() < 2 {
        return Err(Error::TooFewCoordinates(mu.dim()));
    }
    match candidate_structures(mu.dim(), nu.dim(), spec)? {
        Some(all) => w_minus_over(mu, nu, p, spec, &all),
        None => local_search(mu, nu, p, spec),
    }
}

fn neighbours(s: &Structure) -> Vec<Structure> {
    let n = s.n();
    let mut out = Vec::new();
    for j in 0..n {
        for target in std::iter::once(None).chain((0..s.m).map(Some)) {
            if target != s.rows[j] {
                let mut rows = s.rows.clone();
                rows[j] = target;
                if let Ok(t) = Structure::new(s.m, rows) {
                    out.push(t);
                }
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if s.rows[a] != s.rows[b] {
                let mut rows = s.rows.clone();
                rows.swap(a, b);
                if let Ok(t) = Structure::new(s.m, rows) {
                    out.push(t);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn local_search(mu: &DiscreteMeasure<f64>, nu: &DiscreteMeasure<f64>, p: f64, spec: &SearchSpec) -> Result<CrossDimResult> {
    let (m, n) = (mu.dim(), nu.dim());
    let problem = Problem {
        mu,
        nu,
        p,
        tolerance: spec.tolerance,
        scale: spread(mu, nu),
    };
    let cap = spec.max_structures.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut cache: HashMap<Structure, Eval> = HashMap::new();
    let mut order: Vec<Structure> = Vec::new();
    let eval_batch = |batch: &[Structure], cache: &mut HashMap<Structure, Eval>, order: &mut Vec<Structure>| -> Result<()> {
        let fresh: Vec<Structure> = batch.iter().filter(|s| !cache.contains_key(*s)).cloned().collect();
        let evals: Vec<Eval> = fresh
            .par_iter()
            .map(|s| problem.full_eval(s, spec))
            .collect::<Result<Vec<_>>>()?;
        for e in evals {
            order.push(e.structure.clone());
            cache.insert(e.structure.clone(), e);
        }
        Ok(())
    };
    // seeds: the coordinate-deleting structure plus random ones
    let mut seeds: Vec<Structure> = vec![Structure::new(m, (0..n).map(|j| (j < m).then_some(j)).collect())?];
    let seed_count = (cap / 8).clamp(1, 4);
    while seeds.len() < seed_count + 1 {
        seeds.push(crate::random::structure(&mut rng, m, n));
    }
    seeds.truncate(cap);
    eval_batch(&seeds, &mut cache, &mut order)?;
    let best_of = |cache: &HashMap<Structure, Eval>| -> Eval {
        cache
            .values()
            .cloned()
            .reduce(|a, b| if better(&b, &a, spec.tolerance) { b } else { a })
            .expect("nonempty")
    };
    let mut best = best_of(&cache);
    while best.cost > spec.tolerance && cache.len() < cap {
        let mut nb: Vec<Structure> = neighbours(&best.structure)
            .into_iter()
            .filter(|s| !cache.contains_key(s))
            .collect();
        if nb.is_empty() {
            break;
        }
        nb.truncate(cap - cache.len());
        let mut improved = false;
        for batch in nb.chunks(spec.chunk.max(1)) {
            eval_batch(batch, &mut cache, &mut order)?;
            let cand = best_of(&cache);
            if better(&cand, &best, spec.tolerance) {
                best = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    let exhausted = cache.values().any(|e| e.exhausted);
    finish(&problem, best, cache.len(), false, exhausted)
}

/// `W⁺` with its gluing certificate.
pub fn w_plus(mu: &DiscreteMeasure<f64>, nu: &DiscreteMeasure<f64>, p: f64, spec: &SearchSpec) -> Result<CrossDimResult> {
    let mut r = w_minus(mu, nu, p, spec)?;
    r.certificate = Some(glue(&r.projection, mu, nu, &r.coupling, p)?);
    Ok(r)
}

/// Builds `α` on the big torus from the optimal plan between `μ` and
/// `β = P_*ν`: mass `π(a, b)·ν_k / β_b` goes to the point that splits as
/// (atom `a` of `μ`, fibre part of atom `k` of `ν`), paired with atom `k`.
pub fn glue(
    proj: &SimpleProjection<f64>,
    mu: &DiscreteMeasure<f64>,
    nu: &DiscreteMeasure<f64>,
    plan: &Coupling<f64>,
    p: f64,
) -> Result<Certificate> {
    let (beta, index) = pushforward_indexed(proj, nu)?;
    if plan.rows() != mu.len() || plan.cols() != beta.len() {
        return Err(Error::Certificate("plan does not match the pushforward".into()));
    }
    let mut points: Vec<TropPoint<f64>> = Vec::new();
    let mut pi_rows: Vec<Vec<f64>> = Vec::new();
    let mut cost_n = 0.0;
    for (k, (x, wk)) in nu.atoms().enumerate() {
        let b = index[k];
        let wb = beta.weights()[b];
        let u = proj.split(x)?.fibre_part;
        for (a, y) in mu.support().iter().enumerate() {
            let mass = plan.mass[a][b] * wk / wb;
            if mass <= 0.0 {
                continue;
            }
            let point = proj.unsplit(y, &u)?;
            cost_n += mass * Scalar::powf(&trop_metric(&point, x)?, p)?;
            let slot = match points.iter().position(|q| q.equivalent(&point)) {
                Some(s) => s,
                None => {
                    points.push(point);
                    pi_rows.push(vec![0.0; nu.len()]);
                    points.len() - 1
                }
            };
            pi_rows[slot][k] += mass;
        }
    }
    let weights: Vec<f64> = pi_rows.iter().map(|r| r.iter().sum()).collect();
    let alpha = DiscreteMeasure::new(points, weights)?;
    if alpha.len() != pi_rows.len() {
        return Err(Error::Certificate("glued atoms merged unexpectedly".into()));
    }
    let pi_n = Coupling { mass: pi_rows };
    let costs_m = crate::transport::cost_matrix(mu, &beta, p)?;
    let cost_m = crate::transport::plan_cost(plan, &costs_m);
    let w_plus = wasserstein(&alpha, nu, p)?.value;
    let pushed = crate::measure::pushforward(proj, &alpha)?;
    Ok(Certificate {
        pushforward_matches: pushed.same_measure(mu, 1e-9),
        gap: (cost_n - cost_m).abs(),
        alpha,
        pi_n,
        cost_m,
        cost_n,
        w_plus,
    })
}

/// Exact minimum over a frozen family of projections.
pub fn w_family(
    mu: &DiscreteMeasure<f64>,
    nu: &DiscreteMeasure<f64>,
    p: f64,
    family: &[SimpleProjection<f64>],
) -> Result<CrossDimResult> {
    check_inputs(mu, nu, p)?;
    let mut best: Option<(f64, usize, Transport<f64>, DiscreteMeasure<f64>)> = None;
    for (idx, proj) in family.iter().enumerate() {
        let (beta, _) = pushforward_indexed(proj, nu)?;
        let t = wasserstein(mu, &beta, p)?;
        if best.as_ref().is_none_or(|b| t.cost < b.0) {
            best = Some((t.cost, idx, t, beta));
        }
    }
    let (_, idx, t, beta) = best.ok_or(Error::Empty("projection family"))?;
    let proj = family[idx].clone();
    let certificate = glue(&proj, mu, nu, &t.plan, p)?;
    Ok(CrossDimResult {
        w_minus: t.value,
        cost: t.cost,
        projection: proj,
        beta,
        coupling: t.plan,
        structures_explored: family.len(),
        exhaustive: true,
        budget_exhausted: false,
        tolerance: 0.0,
        certificate: Some(certificate),
    })
}

/// Uniform empirical measures of the two samples, then [`w_plus`].
pub fn estimate_from_samples(
    xs: &[TropPoint<f64>],
    ys: &[TropPoint<f64>],
    p: f64,
    spec: &SearchSpec,
) -> Result<CrossDimResult> {
    let mu = DiscreteMeasure::uniform(xs.to_vec())?;
    let nu = DiscreteMeasure::uniform(ys.to_vec())?;
    w_plus(&mu, &nu, p, spec)
}

/// `root(cost, p)` re-exported for reporting.
pub fn value_of(cost: f64, p: f64) -> f64 {
    root(cost, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn pt(v: &[f64]) -> TropPoint<f64> {
        TropPoint::from_f64s(v).unwrap()
    }

    #[test]
    fn dirac_closed_form() {
        let y = pt(&[0.0, 1.5]);
        let x = pt(&[0.0, -2.0, 7.0]);
        let proj = dirac_projection(&y, &x).unwrap();
        assert!(proj.apply(&x).unwrap().equivalent(&y));
        let r = w_plus(&DiscreteMeasure::dirac(y), &DiscreteMeasure::dirac(x.clone()), 2.0, &SearchSpec::default()).unwrap();
        assert!(r.w_minus <= 1e-9);
        let cert = r.certificate.unwrap();
        assert_eq!(cert.alpha.len(), 1);
        assert!(cert.w_plus <= 1e-9);
    }

    #[test]
    fn coordinate_deletion_is_found() {
        let nu = DiscreteMeasure::uniform(vec![pt(&[0.0, 1.0, -50.0]), pt(&[0.0, 3.0, -50.0])]).unwrap();
        let mu = DiscreteMeasure::uniform(vec![pt(&[0.0, 1.0]), pt(&[0.0, 3.0])]).unwrap();
        let r = w_minus(&mu, &nu, 1.0, &SearchSpec::default()).unwrap();
        assert!(r.w_minus <= 1e-9, "{}", r.w_minus);
    }

    #[test]
    fn planted_projection_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let proj: SimpleProjection<f64> = random::simple_projection(&mut rng, 2, 4, 3);
            let nu: DiscreteMeasure<f64> = random::measure(&mut rng, 4, 5, 4, true);
            let mu = crate::measure::pushforward(&proj, &nu).unwrap();
            let r = w_plus(&mu, &nu, 2.0, &SearchSpec::default()).unwrap();
            assert!(r.w_minus <= 1e-6, "{}", r.w_minus);
            assert!(r.certificate.unwrap().w_plus <= 1e-6);
        }
    }

    #[test]
    fn certificate_matches_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = SearchSpec {
            restarts: 2,
            budget: 10,
            ..SearchSpec::default()
        };
        for p in [1.0, 2.0] {
            let mu: DiscreteMeasure<f64> = random::measure(&mut rng, 2, 4, 3, false);
            let nu: DiscreteMeasure<f64> = random::measure(&mut rng, 3, 5, 3, false);
            let r = w_plus(&mu, &nu, p, &spec).unwrap();
            let c = r.certificate.as_ref().unwrap();
            assert!(c.gap <= 1e-9);
            assert!(c.pushforward_matches);
            assert!((c.w_plus - r.w_minus).abs() <= 1e-8, "{} vs {}", c.w_plus, r.w_minus);
        }
    }

    #[test]
    fn rejects_bad_dimension_order() {
        let a = DiscreteMeasure::dirac(pt(&[0.0, 1.0, 2.0]));
        let b = DiscreteMeasure::dirac(pt(&[0.0, 1.0]));
        assert!(matches!(w_minus(&a, &b, 1.0, &SearchSpec::default()), Err(Error::DimensionOrder { .. })));
        assert!(matches!(w_minus(&a, &a, 1.0, &SearchSpec::default()), Err(Error::DimensionOrder { .. })));
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mu: DiscreteMeasure<f64> = random::measure(&mut rng, 2, 3, 3, true);
        let nu: DiscreteMeasure<f64> = random::measure(&mut rng, 3, 4, 3, true);
        let spec = SearchSpec {
            restarts: 3,
            budget: 20,
            seed: 5,
            ..SearchSpec::default()
        };
        let a = w_minus(&mu, &nu, 2.0, &spec).unwrap();
        let b = w_minus(&mu, &nu, 2.0, &spec).unwrap();
        assert_eq!(a.w_minus.to_bits(), b.w_minus.to_bits());
        assert_eq!(a.projection, b.projection);
    }
}
