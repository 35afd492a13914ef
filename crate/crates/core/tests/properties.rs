use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tropwass::measure::pushforward;
use tropwass::oracle::{brute_wasserstein, MAX_ATOMS};
use tropwass::point::metric_raw;
use tropwass::random;
use tropwass::transport::wasserstein;
use tropwass::tree::{cophenetic_vector, parse_newick, random_tree, MissingLength};
use tropwass::{trop_metric, TropPoint, Q};

const TOL: f64 = 1e-9;

fn quarters(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-40i64..=40, n)
}

fn exact(v: &[i64]) -> TropPoint<Q> {
    TropPoint::new(v.iter().map(|&k| Q::new(k.into(), 4.into())).collect()).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_axioms_hold_exactly(
        (a, b, c) in (2usize..7).prop_flat_map(|n| (quarters(n), quarters(n), quarters(n)))
    ) {
        let (x, y, z) = (exact(&a), exact(&b), exact(&c));
        let dxy = trop_metric(&x, &y).unwrap();
        prop_assert_eq!(dxy.clone(), trop_metric(&y, &x).unwrap());
        prop_assert!(dxy >= Q::from_integer(0.into()));
        prop_assert_eq!(dxy == Q::from_integer(0.into()), x.equivalent(&y));
        prop_assert!(dxy <= trop_metric(&x, &z).unwrap() + trop_metric(&z, &y).unwrap());
    }

    #[test]
    fn metric_equals_double_max(
        (a, b) in (2usize..7).prop_flat_map(|n| (quarters(n), quarters(n)))
    ) {
        let x: Vec<f64> = a.iter().map(|&k| k as f64 / 4.0).collect();
        let y: Vec<f64> = b.iter().map(|&k| k as f64 / 4.0).collect();
        let mut best = f64::NEG_INFINITY;
        for i in 0..x.len() {
            for j in 0..x.len() {
                best = best.max(x[i] - y[i] - x[j] + y[j]);
            }
        }
        prop_assert!((metric_raw(&x, &y).unwrap() - best).abs() < TOL);
    }

    #[test]
    fn matrix_maps_do_not_expand(seed in any::<u64>(), m in 2usize..6, n in 2usize..6) {
        let mut r = rng(seed);
        let mat = random::matrix::<f64, _>(&mut r, m, n, 0.3, 10);
        let x = random::point::<f64, _>(&mut r, n, 10);
        let y = random::point::<f64, _>(&mut r, n, 10);
        let d = trop_metric(&mat.apply(&x).unwrap(), &mat.apply(&y).unwrap()).unwrap();
        prop_assert!(d <= trop_metric(&x, &y).unwrap() + TOL);
    }

    #[test]
    fn split_round_trips(seed in any::<u64>(), m in 2usize..5, extra in 1usize..4) {
        let mut r = rng(seed);
        let n = m + extra;
        let proj = random::simple_projection::<Q, _>(&mut r, m, n, 10);
        let x = random::point::<Q, _>(&mut r, n, 10);
        let s = proj.split(&x).unwrap();
        prop_assert!(proj.in_zero_fibre(&s.fibre_part).unwrap());
        prop_assert_eq!(proj.apply(&x).unwrap(), s.base.clone());
        prop_assert!(proj.unsplit(&s.base, &s.fibre_part).unwrap().equivalent(&x));
    }

    #[test]
    fn transport_agrees_with_enumeration(seed in any::<u64>(), n in 2usize..5, p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let mut r = rng(seed);
        let atoms = 1 + (seed as usize % MAX_ATOMS);
        let mu = random::measure::<f64, _>(&mut r, n, atoms, 8, true);
        let nu = random::measure::<f64, _>(&mut r, n, atoms, 8, true);
        let fast = wasserstein(&mu, &nu, p).unwrap().value;
        let slow = brute_wasserstein(&mu, &nu, p).unwrap();
        prop_assert!((fast - slow).abs() < 1e-7, "{} vs {}", fast, slow);
    }

    #[test]
    fn pushforward_does_not_expand_distance(seed in any::<u64>(), m in 2usize..4, extra in 1usize..3) {
        let mut r = rng(seed);
        let n = m + extra;
        let mat = random::matrix::<f64, _>(&mut r, m, n, 0.0, 6);
        let a = random::measure::<f64, _>(&mut r, n, 4, 6, false);
        let b = random::measure::<f64, _>(&mut r, n, 3, 6, false);
        let before = wasserstein(&a, &b, 2.0).unwrap().value;
        let after = wasserstein(&pushforward(&mat, &a).unwrap(), &pushforward(&mat, &b).unwrap(), 2.0).unwrap().value;
        prop_assert!(after <= before + 1e-7);
    }

    #[test]
    fn newick_round_trips(seed in any::<u64>(), leaves in 3usize..9, ultrametric in any::<bool>()) {
        let tree = random_tree(&mut rng(seed), leaves, ultrametric);
        let text = tree.to_newick().unwrap();
        let back = parse_newick(&text, MissingLength::Reject).unwrap();
        prop_assert!(tree.isomorphic(&back).unwrap());
        prop_assert_eq!(cophenetic_vector(&tree).unwrap().distances, cophenetic_vector(&back).unwrap().distances);
        if ultrametric {
            prop_assert!(cophenetic_vector(&tree).unwrap().three_point());
        }
    }
}
