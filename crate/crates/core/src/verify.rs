//! Randomised property suites.
//!
//! Each suite draws its instances from a seeded generator, so a report is
//! reproducible from `(seed, trials)`. Geometric suites run in exact
//! rational arithmetic; transport suites run in floats with the tolerances
//! given on each function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::crossdim::{dirac_projection, w_family, w_plus, SearchSpec};
use crate::fibre::{fibre_at, non_simple_target};
use crate::matrix::{Membership, TropMatrix};
use crate::measure::{pushforward, pushforward_indexed, Coupling, DiscreteMeasure};
use crate::point::{trop_metric, TropPoint};
use crate::simple::SimpleProjection;
use crate::transport::wasserstein;
use crate::tree::{cophenetic_vector, parse_newick, random_tree, MissingLength};
use crate::{oracle, random, Result, Q};

/// Outcome of one suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub trials: usize,
    pub passed: usize,
    /// The first few failures.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.trials
    }
}

const KEPT_FAILURES: usize = 5;

type Check = std::result::Result<(), String>;

fn run<F>(name: &'static str, seed: u64, trials: usize, mut trial: F) -> SuiteReport
where
    F: FnMut(&mut ChaCha8Rng) -> Result<Check>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = 0;
    let mut failures = Vec::new();
    for t in 0..trials {
        let outcome = match trial(&mut rng) {
            Ok(c) => c,
            Err(e) => Err(format!("error: {e}")),
        };
        match outcome {
            Ok(()) => passed += 1,
            Err(msg) if failures.len() < KEPT_FAILURES => failures.push(format!("trial {t}: {msg}")),
            Err(_) => {}
        }
    }
    SuiteReport {
        name,
        trials,
        passed,
        failures,
    }
}

/// Random measure with `1..=max_atoms` atoms; uniform weights when asked,
/// otherwise decided by a coin.
fn any_measure(rng: &mut ChaCha8Rng, dim: usize, max_atoms: usize, range: i64, uniform: Option<bool>) -> DiscreteMeasure<f64> {
    let atoms = rng.gen_range(1..=max_atoms);
    let uniform = uniform.unwrap_or_else(|| rng.gen_bool(0.5));
    random::measure(rng, dim, atoms, range, uniform)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `d(Mx, My) <= d(x, y)` for random matrices with `-inf` entries.
pub fn matrix_maps_are_non_expansive(seed: u64, trials: usize, max_dim: usize) -> SuiteReport {
    run("matrix maps are non-expansive", seed, trials, |rng| {
        let (m, n) = (rng.gen_range(2..=max_dim), rng.gen_range(2..=max_dim));
        let mat: TropMatrix<Q> = random::matrix(rng, m, n, 0.3, 5);
        let x: TropPoint<Q> = random::point(rng, n, 5);
        let y: TropPoint<Q> = random::point(rng, n, 5);
        let (dx, dy) = (trop_metric(&x, &y)?, trop_metric(&mat.apply(&x)?, &mat.apply(&y)?)?);
        Ok(check(dy <= dx, || format!("d(Mx,My) = {dy} > d(x,y) = {dx}")))
    })
}

/// Surjective matrices map the explicit witness onto the target; for the
/// others residuation rejects the spike target of a row with no dedicated
/// column.
pub fn surjectivity_is_decided_constructively(seed: u64, trials: usize) -> SuiteReport {
    run("surjectivity is decided constructively", seed, trials, |rng| {
        let (m, n) = (rng.gen_range(2..=5), rng.gen_range(2..=6));
        let density = [0.3, 0.5, 0.7][rng.gen_range(0..3)];
        let mat: TropMatrix<Q> = random::matrix(rng, m, n, density, 4);
        match mat.surjectivity_columns() {
            Ok(_) => {
                let y: TropPoint<Q> = random::point(rng, m, 50);
                let x = mat.surjectivity_witness(&y)?;
                Ok(check(mat.apply(&x)?.equivalent(&y), || "witness misses the target".into()))
            }
            Err(row) => {
                let spike = TropPoint::new(mat.spike_target(row))?;
                Ok(check(
                    matches!(mat.image_contains(&spike)?, Membership::Outside { .. }),
                    || format!("spike target of row {} lies in the image", row + 1),
                ))
            }
        }
    })
}

/// Cells of `fibre_at(M, Mx)` contain `x`, and points sampled from every
/// cell map to the target.
pub fn fibre_cells_map_to_the_target(seed: u64, trials: usize) -> SuiteReport {
    run("fibre cells map to the target", seed, trials, |rng| {
        let (m, n) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let mat: TropMatrix<Q> = random::matrix(rng, m, n, 0.25, 3);
        let x: TropPoint<Q> = random::point(rng, n, 3);
        let y = mat.apply(&x)?;
        let fibre = fibre_at(&mat, &y)?;
        if fibre.locate(&x).is_none() {
            return Ok(Err("x is in no cell of its own fibre".into()));
        }
        for cell in &fibre.cells {
            for chart in cell.cell.sample_points(3, rng)? {
                let mut raw = vec![Q::from_integer(0.into())];
                raw.extend(chart);
                let p = TropPoint::new(raw)?;
                if !mat.apply(&p)?.equivalent(&y) {
                    return Ok(Err(format!("sample of cell {} leaves the fibre", cell.label)));
                }
            }
        }
        Ok(Ok(()))
    })
}

/// Every maximal fibre cell of a simple projection has dimension `n - m`.
pub fn simple_fibres_have_constant_dimension(seed: u64, trials: usize, max_n: usize) -> SuiteReport {
    run("simple fibres have constant dimension", seed, trials, |rng| {
        let n = rng.gen_range(3..=max_n);
        let m = rng.gen_range(2..n);
        let proj: SimpleProjection<Q> = random::simple_projection(rng, m, n, 5);
        let y: TropPoint<Q> = random::point(rng, m, 5);
        let fibre = fibre_at(&proj.to_matrix(), &y)?;
        if fibre.is_empty() {
            return Ok(Err("empty fibre".into()));
        }
        let dims: Vec<usize> = fibre.cells.iter().map(|c| c.dim).collect();
        Ok(check(dims.iter().all(|&d| d == n - m), || format!("cell dimensions {dims:?}, expected {}", n - m)))
    })
}

/// Matrices with a column real in two rows have some fibre with a maximal
/// cell of dimension other than `n - m`.
pub fn non_simple_fibres_vary_in_dimension(seed: u64, trials: usize, max_n: usize) -> SuiteReport {
    run("non-simple fibres vary in dimension", seed, trials, |rng| {
        let m = rng.gen_range(2..=(max_n - 1).min(4));
        let n = rng.gen_range(m + 1..=max_n);
        let mat: TropMatrix<Q> = random::non_simple_matrix(rng, m, n, 4);
        let y = non_simple_target(&mat)?.expect("non-simple");
        let fibre = fibre_at(&mat, &y)?;
        let dims: Vec<usize> = fibre.cells.iter().map(|c| c.dim).collect();
        Ok(check(dims.iter().any(|&d| d != n - m), || format!("all cells have dimension {}", n - m)))
    })
}

/// `unsplit ∘ split` and `split ∘ unsplit` are identities, and the metric
/// bounds and z-vector identity hold.
pub fn split_is_a_homeomorphism(seed: u64, trials: usize) -> SuiteReport {
    run("split is a homeomorphism", seed, trials, |rng| {
        let n = rng.gen_range(3..=7);
        let m = rng.gen_range(2..n);
        let proj: SimpleProjection<Q> = random::simple_projection(rng, m, n, 5);
        let x1: TropPoint<Q> = random::point(rng, n, 6);
        let x2: TropPoint<Q> = random::point(rng, n, 6);
        let s = proj.split(&x1)?;
        if !proj.unsplit(&s.base, &s.fibre_part)?.equivalent(&x1) {
            return Ok(Err("unsplit(split(x)) != x".into()));
        }
        let y: TropPoint<Q> = random::point(rng, m, 6);
        let u = proj.split(&x2)?.fibre_part;
        let back = proj.split(&proj.unsplit(&y, &u)?)?;
        if !back.base.equivalent(&y) || !back.fibre_part.equivalent(&u) {
            return Ok(Err("split(unsplit(y, u)) != (y, u)".into()));
        }
        let (lower, upper) = proj.metric_split_bounds(&x1, &x2)?;
        if !(lower && upper) {
            return Ok(Err(format!("metric bounds fail: lower {lower}, upper {upper}")));
        }
        Ok(check(proj.z_metric_identity(&x1, &x2)?, || "z-vector identity fails".into()))
    })
}

/// `W_p(Mμ, Mν) <= W_p(μ, ν)`, with the pushed plan a coupling of the
/// images whose cost is no larger.
pub fn pushforward_is_non_expansive(seed: u64, trials: usize) -> SuiteReport {
    run("pushforward is non-expansive", seed, trials, |rng| {
        let (m, n) = (rng.gen_range(2..=4), rng.gen_range(2..=5));
        let p = [1.0, 2.0][rng.gen_range(0..2)];
        let mat: TropMatrix<f64> = random::matrix(rng, m, n, 0.3, 4);
        let mu = any_measure(rng, n, 5, 4, Some(false));
        let nu = any_measure(rng, n, 5, 4, Some(false));
        let t = wasserstein(&mu, &nu, p)?;
        let (pm, im) = pushforward_indexed(&mat, &mu)?;
        let (pn, inn) = pushforward_indexed(&mat, &nu)?;
        let mut pushed = Coupling::zeros(pm.len(), pn.len());
        for (a, b, w) in t.plan.entries() {
            pushed.mass[im[a]][inn[b]] += *w;
        }
        if !pushed.is_coupling_of(&pm, &pn, 1e-9) {
            return Ok(Err("pushed plan is not a coupling".into()));
        }
        let image_cost = pushed.cost(&pm, &pn, p)?;
        let image = wasserstein(&pm, &pn, p)?;
        Ok(check(image_cost <= t.cost + 1e-9 && image.value <= t.value + 1e-9, || {
            format!("image W = {}, source W = {}", image.value, t.value)
        }))
    })
}

/// The transportation simplex agrees with exhaustive reference solutions.
pub fn transport_matches_reference(seed: u64, trials: usize) -> SuiteReport {
    run("transport matches reference", seed, trials, |rng| {
        let n = rng.gen_range(2..=5);
        let p = [1.0, 2.0][rng.gen_range(0..2)];
        let (ka, kb) = if rng.gen_bool(0.5) {
            let k = rng.gen_range(1..=oracle::MAX_ATOMS);
            (k, k)
        } else {
            (rng.gen_range(1..=oracle::MAX_ATOMS), rng.gen_range(1..=oracle::MAX_ATOMS))
        };
        let uniform = rng.gen_bool(0.5);
        let mu: DiscreteMeasure<f64> = random::measure(rng, n, ka, 5, uniform);
        let nu: DiscreteMeasure<f64> = random::measure(rng, n, kb, 5, uniform);
        let t = wasserstein(&mu, &nu, p)?;
        let reference = oracle::brute_wasserstein(&mu, &nu, p)?;
        Ok(check((t.value - reference).abs() <= 1e-9, || {
            format!("simplex {} vs reference {reference}", t.value)
        }))
    })
}

/// Reduced search for suites that check certificates rather than
/// optimality.
pub fn quick_spec(seed: u64) -> SearchSpec {
    SearchSpec {
        max_structures: 12,
        restarts: 2,
        budget: 10,
        seed,
        ..SearchSpec::default()
    }
}

/// Default structure cap with a short descent; the exact zero test still
/// runs on every structure.
pub fn zero_spec(seed: u64) -> SearchSpec {
    SearchSpec {
        restarts: 2,
        budget: 10,
        seed,
        ..SearchSpec::default()
    }
}

/// The glued plan reproduces the optimal cost and `P_*α = μ`, so the two
/// reported distances agree.
pub fn gluing_certificate_closes_the_gap(seed: u64, trials: usize, max_atoms: usize, spec: &SearchSpec) -> SuiteReport {
    run("gluing certificate closes the gap", seed, trials, |rng| {
        let n = rng.gen_range(3..=6);
        let m = rng.gen_range(2..n);
        let p = [1.0, 2.0][rng.gen_range(0..2)];
        let mu = any_measure(rng, m, max_atoms, 4, None);
        let nu = any_measure(rng, n, max_atoms, 4, None);
        let r = w_plus(&mu, &nu, p, spec)?;
        let c = r.certificate.as_ref().expect("w_plus attaches a certificate");
        if c.gap > 1e-9 {
            return Ok(Err(format!("cost gap {}", c.gap)));
        }
        if !c.pushforward_matches {
            return Ok(Err("P_*alpha differs from mu".into()));
        }
        Ok(check((c.w_plus - r.w_minus).abs() <= 1e-8, || {
            format!("w_plus {} vs w_minus {}", c.w_plus, r.w_minus)
        }))
    })
}

/// Measures pushed forward by a hidden simple projection are at distance 0.
pub fn planted_projections_are_recovered(seed: u64, trials: usize, spec: &SearchSpec) -> SuiteReport {
    run("planted projections are recovered", seed, trials, |rng| {
        let n = rng.gen_range(3..=5);
        let m = rng.gen_range(2..n);
        let proj: SimpleProjection<f64> = random::simple_projection(rng, m, n, 3);
        let nu = any_measure(rng, n, 6, 3, None);
        let mu = pushforward(&proj, &nu)?;
        let p = [1.0, 2.0][rng.gen_range(0..2)];
        let r = w_plus(&mu, &nu, p, spec)?;
        let wp = r.w_plus().unwrap_or(f64::INFINITY);
        Ok(check(r.w_minus <= 1e-6 && wp <= 1e-6, || format!("w_minus {}, w_plus {wp}", r.w_minus)))
    })
}

/// Two Dirac measures are at distance 0, found by the search and given by
/// the closed-form projection.
pub fn dirac_pairs_are_at_distance_zero(seed: u64, trials: usize, spec: &SearchSpec) -> SuiteReport {
    run("dirac pairs are at distance zero", seed, trials, |rng| {
        let n = rng.gen_range(3..=6);
        let m = rng.gen_range(2..n);
        let y: TropPoint<f64> = random::point(rng, m, 10);
        let x: TropPoint<f64> = random::point(rng, n, 10);
        if !dirac_projection(&y, &x)?.apply(&x)?.equivalent(&y) {
            return Ok(Err("closed form misses".into()));
        }
        let r = w_plus(&DiscreteMeasure::dirac(y), &DiscreteMeasure::dirac(x), 2.0, spec)?;
        let wp = r.w_plus().unwrap_or(f64::INFINITY);
        Ok(check(r.w_minus <= 1e-9 && wp <= 1e-9, || format!("w_minus {}, w_plus {wp}", r.w_minus)))
    })
}

/// Over a frozen projection family both distances are 1-Lipschitz in each
/// argument for `W_p`.
pub fn frozen_family_is_lipschitz(seed: u64, trials: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (m, n) = (2, 4);
    let family: Vec<SimpleProjection<f64>> = (0..4).map(|_| random::simple_projection(&mut rng, m, n, 3)).collect();
    run("frozen family is lipschitz", seed, trials, |rng| {
        let p = [1.0, 2.0][rng.gen_range(0..2)];
        let mu1 = any_measure(rng, m, 5, 4, Some(false));
        let mu2 = any_measure(rng, m, 5, 4, Some(false));
        let nu1 = any_measure(rng, n, 5, 4, Some(false));
        let nu2 = any_measure(rng, n, 5, 4, Some(false));
        let a = w_family(&mu1, &nu1, p, &family)?;
        let b = w_family(&mu2, &nu2, p, &family)?;
        let bound = wasserstein(&mu1, &mu2, p)?.value + wasserstein(&nu1, &nu2, p)?.value + 1e-8;
        let minus = (a.w_minus - b.w_minus).abs();
        let plus = (a.w_plus().expect("certified") - b.w_plus().expect("certified")).abs();
        Ok(check(minus <= bound && plus <= bound, || {
            format!("differences {minus}, {plus} exceed {bound}")
        }))
    })
}

/// Random ultrametric trees satisfy the exact three-point condition and
/// survive a Newick round trip.
pub fn ultrametric_trees_satisfy_three_point(seed: u64, trials: usize) -> SuiteReport {
    run("ultrametric trees satisfy three-point", seed, trials, |rng| {
        let leaves = rng.gen_range(3..=9);
        let t = random_tree(rng, leaves, true);
        let cv = cophenetic_vector(&t)?;
        if !cv.three_point() || !t.is_ultrametric(0.0)? {
            return Ok(Err(format!("{} fails", t.to_newick()?)));
        }
        let back = parse_newick(&t.to_newick()?, MissingLength::Reject)?;
        Ok(check(t.isomorphic(&back)? && cophenetic_vector(&back)? == cv, || {
            "round trip changes the tree".into()
        }))
    })
}

/// All suites with `trials` each. Suites with heavier instances run a
/// tenth of the trials, at least one.
pub fn run_all(seed: u64, trials: usize) -> Vec<SuiteReport> {
    let heavy = (trials / 10).max(1);
    let quick = quick_spec(seed);
    let zero = zero_spec(seed);
    let s = |k: u64| seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(k);
    vec![
        matrix_maps_are_non_expansive(s(1), trials, 8),
        surjectivity_is_decided_constructively(s(2), trials),
        fibre_cells_map_to_the_target(s(3), heavy),
        simple_fibres_have_constant_dimension(s(4), heavy, 6),
        non_simple_fibres_vary_in_dimension(s(5), heavy, 6),
        split_is_a_homeomorphism(s(6), trials),
        pushforward_is_non_expansive(s(7), trials),
        transport_matches_reference(s(8), trials),
        gluing_certificate_closes_the_gap(s(9), heavy, 8, &quick),
        planted_projections_are_recovered(s(10), heavy, &zero),
        dirac_pairs_are_at_distance_zero(s(11), heavy, &SearchSpec { seed, ..SearchSpec::default() }),
        frozen_family_is_lipschitz(s(12), trials),
        ultrametric_trees_satisfy_three_point(s(13), trials),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke_run_passes() {
        for r in run_all(1, 10) {
            assert!(r.ok(), "{}: {:?}", r.name, r.failures);
        }
    }
}
