//! Tropical matrix maps `TPT^n → TPT^m`.

use std::collections::BTreeSet;
use std::fmt;

use crate::point::{check_dim, TropHull, TropPoint};
use crate::scalar::{Scalar, Q};
use crate::trop::Trop;
use crate::{Error, Result};

/// An `m × n` max-plus matrix with at least one real entry in every row.
#[derive(Clone, Debug, PartialEq)]
pub struct TropMatrix<T> {
    m: usize,
    n: usize,
    entries: Vec<Trop<T>>,
}

impl<T: Scalar> TropMatrix<T> {
    /// Row-major constructor. Rejects rows made only of `-inf`.
    pub fn new(m: usize, n: usize, entries: Vec<Trop<T>>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Empty("matrix"));
        }
        check_dim(m * n, entries.len())?;
        let out = Self { m, n, entries };
        for i in 0..m {
            if !out.row(i).iter().any(Trop::is_real) {
                return Err(Error::DegenerateRow(i));
            }
        }
        Ok(out)
    }

    pub fn from_rows(rows: Vec<Vec<Trop<T>>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        for r in &rows {
            check_dim(n, r.len())?;
        }
        Self::new(m, n, rows.into_iter().flatten().collect())
    }

    /// Float rows with `f64::NEG_INFINITY` marking `-inf`.
    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Trop::from_f64(v)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Tropical identity: `0` on the diagonal, `-inf` elsewhere.
    pub fn identity(n: usize) -> Result<Self> {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { Trop::zero() } else { Trop::NegInf })
            .collect();
        Self::new(n, n, entries)
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Trop<T> {
        &self.entries[i * self.n + j]
    }

    pub fn real(&self, i: usize, j: usize) -> Option<&T> {
        self.get(i, j).as_real()
    }

    pub fn row(&self, i: usize) -> &[Trop<T>] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<Trop<T>> {
        (0..self.m).map(|i| self.get(i, j).clone()).collect()
    }

    /// Rows in which column `j` is real.
    pub fn real_rows_of_column(&self, j: usize) -> Vec<usize> {
        (0..self.m).filter(|&i| self.get(i, j).is_real()).collect()
    }

    pub fn has_neg_inf(&self) -> bool {
        self.entries.iter().any(|e| !e.is_real())
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|i| self.row(i).iter().map(Trop::to_f64).collect())
            .collect()
    }

    pub fn convert<U: Scalar>(&self) -> Result<TropMatrix<U>> {
        TropMatrix::from_f64_rows(&self.to_f64_rows())
    }

    /// `(Mx)_i = max_j (M_ij + x_j)` on a raw vector, without canonicalising.
    pub fn apply_raw(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.n, x.len())?;
        Ok((0..self.m)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .filter_map(|(e, xj)| e.as_real().map(|a| a.clone() + xj.clone()))
                    .reduce(T::max_of)
                    .expect("non-degenerate row")
            })
            .collect())
    }

    pub fn apply(&self, x: &TropPoint<T>) -> Result<TropPoint<T>> {
        TropPoint::new(self.apply_raw(x.coords())?)
    }

    /// Generators of the image: the distinct canonical columns. Only defined
    /// for real matrices, where the image is their tropical convex hull.
    pub fn image_vertices(&self) -> Result<TropHull<T>> {
        if self.has_neg_inf() {
            return Err(Error::InfiniteEntries);
        }
        let cols = (0..self.n)
            .map(|j| {
                TropPoint::new(
                    self.column(j)
                        .into_iter()
                        .map(|e| e.as_real().expect("real matrix").clone())
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        TropHull::new(cols)
    }

    /// Principal solution `x̂_j = min_{i: M_ij real} (y_i - M_ij)` of `Mx <= y`.
    /// `None` marks columns with no real entry.
    pub fn principal_solution(&self, y: &[T]) -> Result<Vec<Option<T>>> {
        check_dim(self.m, y.len())?;
        Ok((0..self.n)
            .map(|j| {
                (0..self.m)
                    .filter_map(|i| self.real(i, j).map(|a| y[i].clone() - a.clone()))
                    .reduce(T::min_of)
            })
            .collect())
    }

    /// Decides `y ∈ image(M)` by residuation.
    pub fn image_contains(&self, y: &TropPoint<T>) -> Result<Membership<T>> {
        let xhat = self.principal_solution(y.coords())?;
        let uncovered: Vec<usize> = (0..self.m)
            .filter(|&i| {
                !(0..self.n).any(|j| match (self.real(i, j), &xhat[j]) {
                    (Some(a), Some(x)) => (a.clone() + x.clone()).approx_eq(&y.coords()[i]),
                    _ => false,
                })
            })
            .collect();
        if !uncovered.is_empty() {
            return Ok(Membership::Outside {
                uncovered_rows: uncovered,
            });
        }
        // Columns without real entries do not influence Mx; any finite value works.
        let filler = xhat
            .iter()
            .flatten()
            .cloned()
            .reduce(T::min_of)
            .unwrap_or_else(T::zero);
        let witness = TropPoint::new(xhat.into_iter().map(|v| v.unwrap_or(filler.clone())).collect())?;
        debug_assert!(self.apply(&witness)?.equivalent(y));
        Ok(Membership::Inside { witness })
    }

    /// For each row `i`, the first column real at `i` and `-inf` elsewhere.
    pub fn surjectivity_columns(&self) -> std::result::Result<Vec<usize>, usize> {
        (0..self.m)
            .map(|i| {
                (0..self.n)
                    .find(|&j| self.real_rows_of_column(j) == [i])
                    .ok_or(i)
            })
            .collect()
    }

    pub fn is_surjective(&self) -> bool {
        self.surjectivity_columns().is_ok()
    }

    /// A constant strictly larger than every difference of two real entries.
    pub fn separation_bound(&self) -> T {
        let reals: Vec<&T> = self.entries.iter().filter_map(Trop::as_real).collect();
        let hi = reals.iter().map(|v| (*v).clone()).reduce(T::max_of).expect("non-degenerate");
        let lo = reals.iter().map(|v| (*v).clone()).reduce(T::min_of).expect("non-degenerate");
        hi - lo + T::one()
    }

    /// Explicit preimage of `y` for a surjective matrix. Each row's dedicated
    /// column carries `y_i - M_{i,c(i)}`; every other column is pushed below
    /// all of them by the separation bound so it never attains a row maximum.
    pub fn surjectivity_witness(&self, y: &TropPoint<T>) -> Result<TropPoint<T>> {
        check_dim(self.m, y.dim())?;
        let dedicated = self.surjectivity_columns().map_err(Error::NotSurjective)?;
        let bound = self.separation_bound();
        let mut x: Vec<Option<T>> = vec![None; self.n];
        for (i, &c) in dedicated.iter().enumerate() {
            let v = y.coords()[i].clone() - self.real(i, c).expect("dedicated column").clone();
            x[c] = Some(v);
        }
        let floor = dedicated
            .iter()
            .map(|&c| x[c].clone().expect("set above") - bound.clone())
            .reduce(T::min_of)
            .expect("m >= 1");
        let witness = TropPoint::new(x.into_iter().map(|v| v.unwrap_or(floor.clone())).collect())?;
        let image = self.apply(&witness)?;
        if !image.equivalent(y) {
            return Err(Error::WitnessFailed(format!(
                "apply(M, x) = {:?}, expected {:?}",
                image.to_f64s(),
                y.to_f64s()
            )));
        }
        Ok(witness)
    }

    /// The raw target `(0,…,K,…,0)` with `K` at row `i` and `K` beyond the
    /// separation bound. It lies outside the image whenever row `i` has no
    /// dedicated column.
    pub fn spike_target(&self, i: usize) -> Vec<T> {
        let mut v = vec![T::zero(); self.m];
        v[i] = self.separation_bound();
        v
    }

    /// Type of `x`: `S_j` holds the rows whose maximum is attained through column `j`.
    ///
    /// In float mode a near tie (within tolerance but not exact) is rejected
    /// as a degenerate point.
    pub fn type_of(&self, x: &TropPoint<T>) -> Result<TypeLabel> {
        check_dim(self.n, x.dim())?;
        let mx = self.apply_raw(x.coords())?;
        let mut sets = vec![BTreeSet::new(); self.n];
        for (i, best) in mx.iter().enumerate() {
            for (j, set) in sets.iter_mut().enumerate() {
                if let Some(a) = self.real(i, j) {
                    let v = a.clone() + x.coords()[j].clone();
                    if v == *best {
                        set.insert(i);
                    } else if !T::EXACT && v.approx_eq(best) {
                        return Err(Error::DegeneratePoint { row: i });
                    }
                }
            }
        }
        Ok(TypeLabel::new(sets))
    }
}

impl TropMatrix<f64> {
    /// Rationalised copy (denominator cap 10^6) for polyhedral work.
    pub fn to_rational(&self) -> Result<TropMatrix<Q>> {
        self.convert()
    }
}

impl<T: Scalar> fmt::Display for TropMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.m {
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Outcome of an image membership test.
#[derive(Clone, Debug, PartialEq)]
pub enum Membership<T> {
    /// `apply(M, witness) ~ y`.
    Inside { witness: TropPoint<T> },
    /// Rows where the principal solution falls strictly short of `y`.
    Outside { uncovered_rows: Vec<usize> },
}

impl<T> Membership<T> {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside { .. })
    }
}

/// A type `(S_1, …, S_n)`; rows and columns are 0-based internally and
/// printed 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeLabel {
    sets: Vec<BTreeSet<usize>>,
}

impl TypeLabel {
    pub fn new(sets: Vec<BTreeSet<usize>>) -> Self {
        Self { sets }
    }

    /// Builds a label from 0-based row lists per column.
    pub fn from_lists(lists: &[&[usize]]) -> Self {
        Self::new(lists.iter().map(|l| l.iter().copied().collect()).collect())
    }

    /// The partition type with `S_j = σ^{-1}(j)` for a row → column assignment.
    pub fn from_assignment(assignment: &[usize], n: usize) -> Self {
        let mut sets = vec![BTreeSet::new(); n];
        for (i, &j) in assignment.iter().enumerate() {
            sets[j].insert(i);
        }
        Self::new(sets)
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn covers(&self, m: usize) -> bool {
        (0..m).all(|i| self.sets.iter().any(|s| s.contains(&i)))
    }

    /// Every row lies in exactly one `S_j`.
    pub fn is_partition(&self, m: usize) -> bool {
        (0..m).all(|i| self.sets.iter().filter(|s| s.contains(&i)).count() == 1)
            && self.sets.iter().flatten().all(|&i| i < m)
    }

    /// Columns with nonempty `S_j`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.sets.len()).filter(|&j| !self.sets[j].is_empty()).collect()
    }

    /// Componentwise union.
    pub fn union(&self, other: &Self) -> Self {
        Self::new(
            self.sets
                .iter()
                .zip(&other.sets)
                .map(|(a, b)| a.union(b).copied().collect())
                .collect(),
        )
    }

    /// `S_j ⊆ T_j` for every `j`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.sets.len() == other.sets.len()
            && self.sets.iter().zip(&other.sets).all(|(a, b)| a.is_subset(b))
    }

    /// 1-based row lists, for serialisation.
    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.sets
            .iter()
            .map(|s| s.iter().map(|i| i + 1).collect())
            .collect()
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .sets
            .iter()
            .map(|s| {
                if s.is_empty() {
                    "∅".to_string()
                } else {
                    let items: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
                    format!("{{{}}}", items.join(","))
                }
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NEG: f64 = f64::NEG_INFINITY;

    fn mq(rows: &[Vec<f64>]) -> TropMatrix<Q> {
        TropMatrix::from_f64_rows(rows).unwrap()
    }

    fn p(v: &[i64]) -> TropPoint<Q> {
        TropPoint::from_i64s(v).unwrap()
    }

    fn example_bounded() -> TropMatrix<Q> {
        mq(&[vec![2.0, 0.0, 0.0], vec![-2.0, 2.0, 1.0], vec![1.0, 3.0, -1.0]])
    }

    /// Generic 2x3 matrix [[a,b,c],[d,e,f]] with a-b=-2, a-c=-1, d-e=5, d-f=1.
    fn example_generic() -> TropMatrix<Q> {
        mq(&[vec![0.0, 2.0, 1.0], vec![0.0, -5.0, -1.0]])
    }

    #[test]
    fn degenerate_rows_rejected() {
        assert!(matches!(
            TropMatrix::<Q>::from_f64_rows(&[vec![0.0, 1.0], vec![NEG, NEG]]),
            Err(Error::DegenerateRow(1))
        ));
    }

    #[test]
    fn apply_examples() {
        // Row maxima of M + 0 are (2, 2, 3).
        assert_eq!(example_bounded().apply(&p(&[0, 0, 0])).unwrap(), p(&[0, 0, 1]));
        let id = TropMatrix::<Q>::identity(4).unwrap();
        let x = p(&[0, 3, -2, 7]);
        assert_eq!(id.apply(&x).unwrap(), x);
        assert!(example_bounded().apply(&p(&[0, 1])).is_err());
    }

    #[test]
    fn image_vertices_of_bounded_example() {
        let hull = example_bounded().image_vertices().unwrap();
        let charts: Vec<Vec<Q>> = hull.generators().iter().map(|g| g.chart().to_vec()).collect();
        let expect = vec![
            vec![Q::from_i64(-4), Q::from_i64(-1)],
            vec![Q::from_i64(2), Q::from_i64(3)],
            vec![Q::from_i64(1), Q::from_i64(-1)],
        ];
        assert_eq!(charts, expect);
        let dup = mq(&[vec![0.0, 1.0, 0.0], vec![1.0, 2.0, 1.0]]);
        assert_eq!(dup.image_vertices().unwrap().generators().len(), 1);
        assert!(matches!(
            TropMatrix::<Q>::identity(3).unwrap().image_vertices(),
            Err(Error::InfiniteEntries)
        ));
    }

    #[test]
    fn membership_by_residuation() {
        let m = example_bounded();
        let far = p(&[0, 10, 10]);
        assert!(matches!(m.image_contains(&far).unwrap(), Membership::Outside { .. }));
        let y = m.apply(&p(&[0, 4, -3])).unwrap();
        match m.image_contains(&y).unwrap() {
            Membership::Inside { witness } => assert_eq!(m.apply(&witness).unwrap(), y),
            other => panic!("expected member, got {other:?}"),
        }
        let id = TropMatrix::<Q>::identity(3).unwrap();
        let y = p(&[0, -5, 2]);
        assert_eq!(id.image_contains(&y).unwrap(), Membership::Inside { witness: y.clone() });
    }

    #[test]
    fn surjectivity_examples() {
        let s = mq(&[vec![0.0, NEG, NEG], vec![NEG, 0.0, NEG]]);
        assert!(s.is_surjective());
        assert!(!example_bounded().is_surjective());
        // Column 1 serves row 1, but row 2's only real column is real in row 1 too.
        let t = mq(&[vec![0.0, 0.0], vec![NEG, 0.0]]);
        assert_eq!(t.surjectivity_columns(), Err(1));
    }

    #[test]
    fn surjectivity_witness_examples() {
        let s = mq(&[vec![0.0, NEG, NEG], vec![NEG, 0.0, NEG]]);
        let x = s.surjectivity_witness(&p(&[0, 7])).unwrap();
        assert_eq!(x.coords()[1], Q::from_i64(7));
        assert_eq!(s.apply(&x).unwrap(), p(&[0, 7]));
        let x0 = s.surjectivity_witness(&p(&[0, 0])).unwrap();
        assert_eq!(s.apply(&x0).unwrap(), p(&[0, 0]));
        assert!(matches!(
            example_bounded().surjectivity_witness(&p(&[0, 0, 0])),
            Err(Error::NotSurjective(_))
        ));
    }

    #[test]
    fn witness_handles_negative_targets_with_shared_columns() {
        // Column 3 is real in both rows; a strongly negative target must still
        // keep it below the dedicated columns.
        let s = mq(&[vec![0.0, NEG, 5.0], vec![NEG, 1.0, 4.0]]);
        let y = p(&[0, -100]);
        let x = s.surjectivity_witness(&y).unwrap();
        assert_eq!(s.apply(&x).unwrap(), y);
        let y = p(&[0, 100]);
        assert_eq!(s.apply(&s.surjectivity_witness(&y).unwrap()).unwrap(), y);
    }

    #[test]
    fn spike_target_is_outside_for_failing_row() {
        let t = mq(&[vec![0.0, 0.0], vec![NEG, 0.0]]);
        let spike = TropPoint::new(t.spike_target(1)).unwrap();
        assert!(!t.image_contains(&spike).unwrap().is_inside());
    }

    #[test]
    fn types_on_generic_example() {
        let m = example_generic();
        assert_eq!(
            m.type_of(&p(&[0, -20, -20])).unwrap(),
            TypeLabel::from_lists(&[&[0, 1], &[], &[]])
        );
        let t = m.type_of(&p(&[0, 0, -10])).unwrap();
        assert_eq!(t, TypeLabel::from_lists(&[&[1], &[0], &[]]));
        assert_eq!(t.to_string(), "({2}, {1}, ∅)");
        let id = TropMatrix::<Q>::identity(3).unwrap();
        assert_eq!(
            id.type_of(&p(&[0, 5, -1])).unwrap(),
            TypeLabel::from_lists(&[&[0], &[1], &[2]])
        );
    }

    #[test]
    fn float_near_ties_are_degenerate() {
        let m = TropMatrix::<f64>::from_f64_rows(&[vec![0.0, 0.0]]).unwrap();
        let x = TropPoint::from_f64s(&[0.0, 1e-12]).unwrap();
        assert!(matches!(m.type_of(&x), Err(Error::DegeneratePoint { row: 0 })));
        let exact_tie = TropPoint::from_f64s(&[0.0, 0.0]).unwrap();
        assert_eq!(m.type_of(&exact_tie).unwrap(), TypeLabel::from_lists(&[&[0], &[0]]));
    }
}
