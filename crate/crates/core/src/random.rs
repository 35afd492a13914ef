//! Random instances for property suites and benchmarks.
//!
//! Values are multiples of 1/4 so that float and rational runs see the same
//! numbers exactly.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::matrix::TropMatrix;
use crate::measure::DiscreteMeasure;
use crate::point::TropPoint;
use crate::scalar::Scalar;
use crate::simple::{SimpleProjection, Structure};
use crate::trop::Trop;

/// A multiple of 1/4 in `[-range, range]`.
pub fn quarter<T: Scalar, R: Rng>(rng: &mut R, range: i64) -> T {
    T::from_i64(rng.gen_range(-4 * range..=4 * range)) / T::from_i64(4)
}

pub fn point<T: Scalar, R: Rng>(rng: &mut R, n: usize, range: i64) -> TropPoint<T> {
    TropPoint::new((0..n).map(|_| quarter(rng, range)).collect()).expect("n >= 2")
}

/// Matrix whose entries are `-inf` with probability `neg_inf`; each row
/// keeps at least one real entry.
pub fn matrix<T: Scalar, R: Rng>(rng: &mut R, m: usize, n: usize, neg_inf: f64, range: i64) -> TropMatrix<T> {
    let mut rows: Vec<Vec<Trop<T>>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if rng.gen_bool(neg_inf) {
                        Trop::NegInf
                    } else {
                        Trop::Real(quarter(rng, range))
                    }
                })
                .collect()
        })
        .collect();
    for row in rows.iter_mut() {
        if row.iter().all(|e| !e.is_real()) {
            let j = rng.gen_range(0..n);
            row[j] = Trop::Real(quarter(rng, range));
        }
    }
    TropMatrix::from_rows(rows).expect("rows fixed up")
}

/// A uniformly random valid structure for `m < n`.
pub fn structure<R: Rng>(rng: &mut R, m: usize, n: usize) -> Structure {
    loop {
        let mut rows: Vec<Option<usize>> = (0..n)
            .map(|_| {
                let r = rng.gen_range(0..=m);
                r.checked_sub(1)
            })
            .collect();
        // give every row a column when a cheap fix is possible
        let mut cols: Vec<usize> = (0..n).collect();
        cols.shuffle(rng);
        for (i, &j) in cols.iter().take(m).enumerate() {
            if !rows.contains(&Some(i)) {
                rows[j] = Some(i);
            }
        }
        if let Ok(s) = Structure::new(m, rows) {
            return s;
        }
    }
}

pub fn simple_projection<T: Scalar, R: Rng>(rng: &mut R, m: usize, n: usize, range: i64) -> SimpleProjection<T> {
    let s = structure(rng, m, n);
    let offsets = (0..n).map(|_| quarter(rng, range)).collect();
    SimpleProjection::new(s, offsets).expect("valid structure")
}

/// A matrix with some column real in at least two rows (`m >= 2`).
pub fn non_simple_matrix<T: Scalar, R: Rng>(rng: &mut R, m: usize, n: usize, range: i64) -> TropMatrix<T> {
    assert!(m >= 2);
    loop {
        let mat = matrix(rng, m, n, 0.5, range);
        if (0..n).any(|j| mat.real_rows_of_column(j).len() >= 2) {
            return mat;
        }
    }
}

/// `atoms` random points with uniform or random weights.
pub fn measure<T: Scalar, R: Rng>(rng: &mut R, n: usize, atoms: usize, range: i64, uniform: bool) -> DiscreteMeasure<T> {
    let pts = (0..atoms).map(|_| point(rng, n, range)).collect();
    if uniform {
        DiscreteMeasure::uniform(pts).expect("nonempty")
    } else {
        let ws = (0..atoms).map(|_| T::from_i64(rng.gen_range(1..=9))).collect();
        DiscreteMeasure::new(pts, ws).expect("positive weights")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_respect_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = rng.gen_range(1..4);
            let n = rng.gen_range(m + 1..7);
            let s = structure(&mut rng, m, n);
            assert!(s.blocks().iter().all(|b| !b.is_empty()));
            let mat: TropMatrix<Q> = matrix(&mut rng, 3, 4, 0.7, 5);
            assert!((0..3).all(|i| mat.row(i).iter().any(Trop::is_real)));
        }
        let mat: TropMatrix<Q> = non_simple_matrix(&mut rng, 2, 4, 3);
        assert!((0..4).any(|j| mat.real_rows_of_column(j).len() >= 2));
    }
}
