//! Hand-computed values.

use tropwass::crossdim::{w_minus, SearchSpec};
use tropwass::matrix::Membership;
use tropwass::transport::wasserstein;
use tropwass::tree::{cophenetic_vector, parse_newick, MissingLength};
use tropwass::{trop_metric, DiscreteMeasure, TropMatrix, TropPoint, TypeLabel, Q};

fn q(v: &[i64]) -> TropPoint<Q> {
    TropPoint::from_i64s(v).unwrap()
}

fn f(v: &[f64]) -> TropPoint<f64> {
    TropPoint::from_f64s(v).unwrap()
}

fn int(k: i64) -> Q {
    Q::from_integer(k.into())
}

#[test]
fn metric_values() {
    assert_eq!(trop_metric(&q(&[0, 0, 0]), &q(&[0, 1, 2])).unwrap(), int(2));
    assert_eq!(trop_metric(&q(&[0, 3, -1]), &q(&[0, 0, 0])).unwrap(), int(4));
    // same class, different representatives
    assert_eq!(trop_metric(&q(&[5, 6, 7]), &q(&[0, 1, 2])).unwrap(), int(0));
}

#[test]
fn two_point_line_transport() {
    let mu = DiscreteMeasure::uniform(vec![f(&[0.0, 0.0]), f(&[0.0, 2.0])]).unwrap();
    let nu = DiscreteMeasure::uniform(vec![f(&[0.0, 1.0]), f(&[0.0, 3.0])]).unwrap();
    assert!((wasserstein(&mu, &nu, 1.0).unwrap().value - 1.0).abs() < 1e-12);
    assert!((wasserstein(&mu, &nu, 2.0).unwrap().value - 1.0).abs() < 1e-12);
}

#[test]
fn dirac_transport_is_the_metric() {
    let a = f(&[0.0, 1.5, -2.0]);
    let b = f(&[0.0, -1.0, 4.0]);
    let w = wasserstein(&DiscreteMeasure::dirac(a.clone()), &DiscreteMeasure::dirac(b.clone()), 3.0).unwrap();
    assert!((w.value - trop_metric(&a, &b).unwrap()).abs() < 1e-12);
}

#[test]
fn bounded_image_vertices() {
    let m = TropMatrix::<Q>::from_f64_rows(&[vec![2.0, 0.0, 0.0], vec![-2.0, 2.0, 1.0], vec![1.0, 3.0, -1.0]]).unwrap();
    let charts: Vec<Vec<Q>> = m
        .image_vertices()
        .unwrap()
        .generators()
        .iter()
        .map(|v| v.chart().to_vec())
        .collect();
    assert_eq!(charts, vec![vec![int(-4), int(-1)], vec![int(2), int(3)], vec![int(1), int(-1)]]);
}

#[test]
fn residuation_decides_membership() {
    let neg = f64::NEG_INFINITY;
    let m = TropMatrix::<Q>::from_f64_rows(&[vec![0.0, 1.0, neg], vec![neg, neg, 0.0]]).unwrap();
    assert!(m.is_surjective());
    let y = q(&[0, 7]);
    match m.image_contains(&y).unwrap() {
        Membership::Inside { witness } => assert!(m.apply(&witness).unwrap().equivalent(&y)),
        Membership::Outside { .. } => panic!("surjective map misses a point"),
    }
    let w = m.surjectivity_witness(&y).unwrap();
    assert!(m.apply(&w).unwrap().equivalent(&y));

    // every column meets both rows, so (0, K) with K large is unreachable
    let full = TropMatrix::<Q>::from_f64_rows(&[vec![0.0, 0.0, 0.0], vec![0.0, 1.0, 2.0]]).unwrap();
    assert_eq!(full.surjectivity_columns(), Err(0));
    let spike = TropPoint::new(full.spike_target(0)).unwrap();
    assert!(matches!(full.image_contains(&spike).unwrap(), Membership::Outside { .. }));
}

#[test]
fn type_of_generic_point() {
    let m = TropMatrix::<Q>::from_f64_rows(&[vec![0.0, 2.0, 1.0], vec![0.0, -5.0, -1.0]]).unwrap();
    // row 0 attains its max at column 0 (0 + 10), row 1 at column 0 too
    let t = m.type_of(&q(&[10, 0, 0])).unwrap();
    assert_eq!(t, TypeLabel::from_lists(&[&[0, 1], &[], &[]]));
    assert_eq!(m.apply(&q(&[10, 0, 0])).unwrap(), q(&[10, 10]));
}

#[test]
fn cophenetic_of_small_tree() {
    let t = parse_newick("((A:1,B:1):2,C:3);", MissingLength::Reject).unwrap();
    let c = cophenetic_vector(&t).unwrap();
    assert_eq!(c.labels, vec!["A", "B", "C"]);
    assert_eq!(c.distances, vec![int(2), int(6), int(6)]);
    assert!(c.three_point());
    assert!(t.is_ultrametric(0.0).unwrap());
}

#[test]
fn coordinate_deletion_has_zero_cross_distance() {
    let nu = DiscreteMeasure::uniform(vec![f(&[0.0, 1.0, 2.0]), f(&[0.0, -1.0, 5.0])]).unwrap();
    let mu = DiscreteMeasure::uniform(vec![f(&[0.0, 1.0]), f(&[0.0, -1.0])]).unwrap();
    let r = w_minus(&mu, &nu, 2.0, &SearchSpec::default()).unwrap();
    assert!(r.w_minus < 1e-9, "{}", r.w_minus);
    assert!(r.exhaustive);
}
