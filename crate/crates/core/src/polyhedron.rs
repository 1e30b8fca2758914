//! H-representation polyhedra: finite systems of non-strict inequalities
//! `a . x <= b` over the rationals.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::arith::{primitive_scale, QVector, Rational};
use crate::elim::Eliminator;
use crate::error::{check_dim, Result};
use crate::projection::lift_along;

/// One inequality `a . x <= b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IneqRow {
    pub a: QVector,
    pub b: Rational,
}

impl IneqRow {
    pub fn new(a: QVector, b: Rational) -> Self {
        IneqRow { a, b }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn value(&self, x: &QVector) -> Rational {
        self.a.dot(x)
    }

    pub fn satisfied_by(&self, x: &QVector) -> bool {
        self.value(x) <= self.b
    }

    /// `0 <= b` with `b >= 0`: holds everywhere.
    pub fn is_vacuous(&self) -> bool {
        self.a.is_zero() && !self.b.is_negative()
    }

    /// `0 <= b` with `b < 0`: holds nowhere.
    pub fn is_contradiction(&self) -> bool {
        self.a.is_zero() && self.b.is_negative()
    }

    /// Positive factor bringing `(a, b)` jointly to coprime integers.
    pub(crate) fn primitive_factor(&self) -> Option<Rational> {
        let mut all: Vec<Rational> = self.a.entries().to_vec();
        all.push(self.b.clone());
        primitive_scale(&all)
    }

    pub(crate) fn scaled(&self, s: &Rational) -> IneqRow {
        IneqRow::new(self.a.scaled(s), &self.b * s)
    }

    /// The same half-space with coprime integer coefficients.
    pub fn normalized(&self) -> IneqRow {
        match self.primitive_factor() {
            Some(s) => self.scaled(&s),
            None => self.clone(),
        }
    }

    fn canonical_cmp(&self, other: &IneqRow) -> Ordering {
        self.a.cmp(&other.a).then_with(|| self.b.cmp(&other.b))
    }
}

/// Removes every implicit equality written as a row together with its exact
/// negation, substituting it into the other rows through its first nonzero
/// coordinate. The result is feasible iff the input is.
fn substitute_equalities(rows: &[IneqRow]) -> Vec<IneqRow> {
    let mut rows: Vec<IneqRow> = rows
        .iter()
        .filter(|r| !r.is_vacuous())
        .map(IneqRow::normalized)
        .collect();
    loop {
        if rows.iter().any(IneqRow::is_contradiction) {
            return rows;
        }
        let present: std::collections::HashSet<&IneqRow> = rows.iter().collect();
        let Some(eq) = rows
            .iter()
            .find(|r| present.contains(&IneqRow::new(r.a.scaled(&-Rational::one()), -&r.b)))
            .cloned()
        else {
            return rows;
        };
        let neg = IneqRow::new(eq.a.scaled(&-Rational::one()), -&eq.b);
        let j = (0..eq.dim()).find(|&j| !eq.a[j].is_zero()).expect("contradictions handled above");
        let mut next = Vec::with_capacity(rows.len());
        for r in rows {
            if r == eq || r == neg {
                continue;
            }
            let r = if r.a[j].is_zero() {
                r
            } else {
                let c = -(&r.a[j] / &eq.a[j]);
                IneqRow::new(r.a.add_scaled(&c, &eq.a), &r.b + &c * &eq.b)
            };
            if !r.is_vacuous() {
                next.push(r.normalized());
            }
        }
        next.sort_by(IneqRow::canonical_cmp);
        next.dedup();
        rows = next;
    }
}

/// Index sets of rows by the sign of `a . xi`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignPartition {
    pub k_plus: Vec<usize>,
    pub k_minus: Vec<usize>,
    pub k_zero: Vec<usize>,
}

impl SignPartition {
    pub(crate) fn of_rows(rows: &[IneqRow], xi: &QVector) -> Self {
        let mut part = SignPartition::default();
        for (k, row) in rows.iter().enumerate() {
            let v = row.value(xi);
            if v.is_positive() {
                part.k_plus.push(k);
            } else if v.is_negative() {
                part.k_minus.push(k);
            } else {
                part.k_zero.push(k);
            }
        }
        part
    }
}

/// Brings rows to canonical form: each scaled to coprime integers (the
/// payload is rescaled alongside), vacuous rows dropped, sorted by `(a, b)`,
/// exact duplicates merged keeping the first payload.
pub(crate) fn canonicalize<T>(
    rows: Vec<(IneqRow, T)>,
    mut rescale: impl FnMut(&mut T, &Rational),
) -> Vec<(IneqRow, T)> {
    let mut out: Vec<(IneqRow, T)> = rows
        .into_iter()
        .filter_map(|(row, mut payload)| {
            if row.is_vacuous() {
                return None;
            }
            let s = row.primitive_factor()?;
            rescale(&mut payload, &s);
            Some((row.scaled(&s), payload))
        })
        .collect();
    out.sort_by(|x, y| x.0.canonical_cmp(&y.0));
    out.dedup_by(|later, earlier| later.0 == earlier.0);
    out
}

/// Exact least upper bound of a linear functional over a polyhedron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Supremum {
    Empty,
    Unbounded,
    Finite(Rational),
}

/// A polyhedron `{x : a_k . x <= b_k for all k}` in `dim` dimensions. No rows
/// means the whole space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HPolyhedron {
    dim: usize,
    rows: Vec<IneqRow>,
}

impl HPolyhedron {
    /// Rows are kept verbatim and in the given order; certificates refer to
    /// them by position. Use [`HPolyhedron::normalize_rows`] for the
    /// canonical form.
    pub fn new(dim: usize, rows: Vec<IneqRow>) -> Result<Self> {
        for row in &rows {
            check_dim(dim, row.dim())?;
        }
        Ok(HPolyhedron { dim, rows })
    }

    pub fn whole_space(dim: usize) -> Self {
        HPolyhedron {
            dim,
            rows: Vec::new(),
        }
    }

    /// Integer literal rows `(a, b)`, for tests and examples.
    pub fn from_i64(dim: usize, rows: &[(&[i64], i64)]) -> Self {
        let rows = rows
            .iter()
            .map(|(a, b)| IneqRow::new(QVector::from_i64(a), crate::arith::int(*b)))
            .collect();
        HPolyhedron::new(dim, rows).expect("row length matches dim")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[IneqRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty_system(&self) -> bool {
        self.rows.is_empty()
    }

    /// All bounds zero: the set is a cone.
    pub fn is_cone(&self) -> bool {
        self.rows.iter().all(|r| r.b.is_zero())
    }

    pub fn contains(&self, x: &QVector) -> Result<bool> {
        check_dim(self.dim, x.dim())?;
        Ok(self.rows.iter().all(|r| r.satisfied_by(x)))
    }

    pub fn normalize_rows(&self) -> HPolyhedron {
        let rows = canonicalize(self.rows.iter().map(|r| (r.clone(), ())).collect(), |_, _| {});
        HPolyhedron {
            dim: self.dim,
            rows: rows.into_iter().map(|(r, _)| r).collect(),
        }
    }

    pub fn intersect(&self, other: &HPolyhedron) -> Result<HPolyhedron> {
        check_dim(self.dim, other.dim)?;
        let rows = self.rows.iter().chain(&other.rows).cloned().collect();
        Ok(HPolyhedron {
            dim: self.dim,
            rows,
        }
        .normalize_rows())
    }

    pub fn sign_partition(&self, xi: &QVector) -> Result<SignPartition> {
        check_dim(self.dim, xi.dim())?;
        Ok(SignPartition::of_rows(&self.rows, xi))
    }

    /// True iff no rational point satisfies every row.
    pub fn is_empty(&self) -> bool {
        let rows = substitute_equalities(&self.rows);
        let mut elim = Eliminator::new(self.dim, &rows, false);
        loop {
            if elim.has_contradiction() {
                return true;
            }
            let Some(j) = elim.cheapest_coordinate() else {
                return false;
            };
            elim.step(&QVector::unit(self.dim, j));
        }
    }

    /// A point of the polyhedron, found by eliminating every coordinate and
    /// back-substituting through the eliminations; `None` iff empty.
    pub fn feasible_point(&self) -> Option<QVector> {
        let mut elim = Eliminator::new(self.dim, &self.rows, false);
        let mut stages: Vec<(Vec<IneqRow>, QVector)> = Vec::new();
        loop {
            if elim.has_contradiction() {
                return None;
            }
            let Some(j) = elim.cheapest_coordinate() else {
                break;
            };
            let xi = QVector::unit(self.dim, j);
            stages.push((elim.current_rows(), xi.clone()));
            elim.step(&xi);
        }
        let mut x = QVector::zeros(self.dim);
        for (rows, xi) in stages.iter().rev() {
            x = lift_along(rows, xi, &x);
        }
        debug_assert!(self.rows.iter().all(|r| r.satisfied_by(&x)));
        Some(x)
    }

    /// Exact supremum of `c . x` over the polyhedron. Adds a coordinate `z`
    /// tied to `c . x` and eliminates every original coordinate; what
    /// remains is an interval for `z`.
    pub fn maximize(&self, c: &QVector) -> Result<Supremum> {
        check_dim(self.dim, c.dim())?;
        Ok(supremum(self.dim, &self.rows, c))
    }

    /// Drops rows implied by the remaining ones, testing rows in order
    /// against the rows still kept. Output rows are a subset of the input's,
    /// in input order.
    pub fn remove_redundancy(&self) -> HPolyhedron {
        let keep = irredundant_mask(self.dim, &self.rows);
        HPolyhedron {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .zip(keep)
                .filter_map(|(r, k)| k.then(|| r.clone()))
                .collect(),
        }
    }
}

fn supremum(dim: usize, rows: &[IneqRow], c: &QVector) -> Supremum {
    let lift = |a: &QVector, z: Rational| {
        let mut e = a.entries().to_vec();
        e.push(z);
        QVector::new(e)
    };
    let mut system: Vec<IneqRow> = rows
        .iter()
        .map(|r| IneqRow::new(lift(&r.a, Rational::zero()), r.b.clone()))
        .collect();
    system.push(IneqRow::new(lift(c, -Rational::one()), Rational::zero()));
    system.push(IneqRow::new(lift(&c.scaled(&-Rational::one()), Rational::one()), Rational::zero()));

    let mut elim = Eliminator::new(dim + 1, &system, false);
    loop {
        if elim.has_contradiction() {
            return Supremum::Empty;
        }
        match elim.cheapest_coordinate_below(dim) {
            Some(j) => {
                elim.step(&QVector::unit(dim + 1, j));
            }
            None => break,
        }
    }
    let mut upper: Option<Rational> = None;
    let mut lower: Option<Rational> = None;
    for row in elim.current_rows() {
        let coeff = &row.a[dim];
        if coeff.is_positive() {
            let v = &row.b / coeff;
            if upper.as_ref().map_or(true, |u| v < *u) {
                upper = Some(v);
            }
        } else if coeff.is_negative() {
            let v = &row.b / coeff;
            if lower.as_ref().map_or(true, |l| v > *l) {
                lower = Some(v);
            }
        }
    }
    match (lower, upper) {
        (Some(l), Some(u)) if l > u => Supremum::Empty,
        (_, Some(u)) => Supremum::Finite(u),
        (_, None) => Supremum::Unbounded,
    }
}

/// `keep[k]` is false for rows found redundant, scanning in order.
pub(crate) fn irredundant_mask(dim: usize, rows: &[IneqRow]) -> Vec<bool> {
    let mut keep = vec![true; rows.len()];
    for k in 0..rows.len() {
        let others: Vec<IneqRow> = rows
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k && keep[i])
            .map(|(_, r)| r.clone())
            .collect();
        let redundant = match supremum(dim, &others, &rows[k].a) {
            Supremum::Empty => true,
            Supremum::Unbounded => false,
            Supremum::Finite(s) => s <= rows[k].b,
        };
        if redundant {
            keep[k] = false;
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ratio};

    #[test]
    fn equality_pairs_are_substituted() {
        // x + y = 1 with x >= 2, y >= 0 is empty; relaxing to y >= -2 is not
        let base: [(&[i64], i64); 3] = [(&[1, 1], 1), (&[-1, -1], -1), (&[-1, 0], -2)];
        let mut rows = base.to_vec();
        rows.push((&[0, -1], 0));
        let p = HPolyhedron::from_i64(2, &rows);
        assert!(p.is_empty());
        assert!(p.feasible_point().is_none());
        let mut rows = base.to_vec();
        rows.push((&[0, -1], 2));
        let q = HPolyhedron::from_i64(2, &rows);
        assert!(!q.is_empty());
        assert!(q.contains(&q.feasible_point().unwrap()).unwrap());
        // x = 0 alone leaves nothing behind
        assert!(substitute_equalities(HPolyhedron::from_i64(1, &[(&[1], 0), (&[-1], 0)]).rows()).is_empty());
    }

    fn unit_square() -> HPolyhedron {
        HPolyhedron::from_i64(
            2,
            &[(&[1, 0], 1), (&[-1, 0], 0), (&[0, 1], 1), (&[0, -1], 0)],
        )
    }

    fn pt(v: &[i64]) -> QVector {
        QVector::from_i64(v)
    }

    #[test]
    fn contains_examples() {
        assert!(HPolyhedron::whole_space(3).contains(&pt(&[7, -2, 0])).unwrap());
        let seg = HPolyhedron::from_i64(1, &[(&[1], 1), (&[-1], 0)]);
        assert!(seg.contains(&QVector::new(vec![ratio(1, 2)])).unwrap());
        assert!(!seg.contains(&pt(&[2])).unwrap());
        assert!(unit_square().contains(&pt(&[1, 1])).unwrap());
        assert!(seg.contains(&pt(&[1, 1])).is_err());
    }

    #[test]
    fn normalize_examples() {
        let p = HPolyhedron::from_i64(2, &[(&[2, 0], 2)]);
        assert_eq!(p.normalize_rows(), HPolyhedron::from_i64(2, &[(&[1, 0], 1)]));
        let p = HPolyhedron::from_i64(2, &[(&[1, 0], 1), (&[1, 0], 1)]);
        assert_eq!(p.normalize_rows().len(), 1);
        let p = HPolyhedron::from_i64(2, &[(&[0, 0], 5), (&[0, 1], 0)]);
        assert_eq!(p.normalize_rows(), HPolyhedron::from_i64(2, &[(&[0, 1], 0)]));
        // contradictions survive as the marker 0 <= -1
        let p = HPolyhedron::from_i64(2, &[(&[0, 0], -7)]);
        assert_eq!(p.normalize_rows(), HPolyhedron::from_i64(2, &[(&[0, 0], -1)]));
        // rational rows clear denominators jointly with the bound
        let p = HPolyhedron::new(1, vec![IneqRow::new(QVector::new(vec![ratio(1, 2)]), ratio(1, 3))])
            .unwrap();
        assert_eq!(p.normalize_rows(), HPolyhedron::from_i64(1, &[(&[3], 2)]));
    }

    #[test]
    fn intersect_examples() {
        let p = HPolyhedron::from_i64(1, &[(&[1], 1)]);
        assert_eq!(p.intersect(&HPolyhedron::whole_space(1)).unwrap(), p);
        let q = HPolyhedron::from_i64(1, &[(&[-1], 0)]);
        assert_eq!(
            p.intersect(&q).unwrap(),
            HPolyhedron::from_i64(1, &[(&[-1], 0), (&[1], 1)])
        );
        let a = HPolyhedron::from_i64(1, &[(&[1], 0)]);
        assert_eq!(
            a.intersect(&p).unwrap().remove_redundancy(),
            HPolyhedron::from_i64(1, &[(&[1], 0)])
        );
        assert!(p.intersect(&HPolyhedron::whole_space(2)).is_err());
    }

    #[test]
    fn sign_partition_examples() {
        let part = unit_square().sign_partition(&pt(&[0, 1])).unwrap();
        assert_eq!(part.k_plus, vec![2]);
        assert_eq!(part.k_minus, vec![3]);
        assert_eq!(part.k_zero, vec![0, 1]);
        let part = unit_square().sign_partition(&pt(&[0, 0])).unwrap();
        assert_eq!(part.k_zero, vec![0, 1, 2, 3]);
        assert_eq!(
            HPolyhedron::whole_space(2).sign_partition(&pt(&[1, 0])).unwrap(),
            SignPartition::default()
        );
    }

    #[test]
    fn emptiness_examples() {
        assert!(!HPolyhedron::whole_space(2).is_empty());
        assert!(HPolyhedron::from_i64(1, &[(&[1], -1), (&[-1], 0)]).is_empty());
        let p = HPolyhedron::from_i64(1, &[(&[1], 0), (&[-1], 0)]);
        assert_eq!(p.feasible_point(), Some(pt(&[0])));
        assert!(HPolyhedron::from_i64(0, &[(&[], -1)]).is_empty());
        assert!(!HPolyhedron::from_i64(0, &[(&[], 0)]).is_empty());
    }

    #[test]
    fn feasible_point_lies_inside() {
        let tri = HPolyhedron::from_i64(2, &[(&[-1, 0], -1), (&[0, -1], -1), (&[1, 1], 3)]);
        let x = tri.feasible_point().unwrap();
        assert!(tri.contains(&x).unwrap());
    }

    #[test]
    fn maximize_examples() {
        let sq = unit_square();
        assert_eq!(sq.maximize(&pt(&[1, 1])).unwrap(), Supremum::Finite(int(2)));
        assert_eq!(sq.maximize(&pt(&[-1, 0])).unwrap(), Supremum::Finite(int(0)));
        let half = HPolyhedron::from_i64(2, &[(&[1, 0], 1)]);
        assert_eq!(half.maximize(&pt(&[0, 1])).unwrap(), Supremum::Unbounded);
        let empty = HPolyhedron::from_i64(1, &[(&[1], -1), (&[-1], 0)]);
        assert_eq!(empty.maximize(&pt(&[1])).unwrap(), Supremum::Empty);
        let tri = HPolyhedron::from_i64(2, &[(&[-2, 0], 0), (&[0, -1], 0), (&[2, 3], 1)]);
        assert_eq!(tri.maximize(&pt(&[1, 0])).unwrap(), Supremum::Finite(ratio(1, 2)));
    }

    fn grid_equal(p: &HPolyhedron, q: &HPolyhedron, lo: i64, hi: i64) -> bool {
        let mut pts = vec![vec![]];
        for _ in 0..p.dim() {
            pts = pts
                .into_iter()
                .flat_map(|v: Vec<i64>| (lo..=hi).map(move |c| [v.clone(), vec![c]].concat()))
                .collect();
        }
        pts.iter()
            .all(|v| p.contains(&pt(v)).unwrap() == q.contains(&pt(v)).unwrap())
    }

    #[test]
    fn redundancy_examples() {
        let p = HPolyhedron::from_i64(1, &[(&[1], 0), (&[1], 1)]);
        let r = p.remove_redundancy();
        assert_eq!(r, HPolyhedron::from_i64(1, &[(&[1], 0)]));
        assert!(grid_equal(&p, &r, -2, 2));

        let sq = unit_square();
        assert_eq!(sq.remove_redundancy(), sq);
        // each row has a witness that only it excludes
        assert!(!sq.contains(&pt(&[2, 0])).unwrap());
        assert!(HPolyhedron::from_i64(2, &[(&[-1, 0], 0), (&[0, 1], 1), (&[0, -1], 0)])
            .contains(&pt(&[2, 0]))
            .unwrap());

        assert_eq!(HPolyhedron::whole_space(2).remove_redundancy(), HPolyhedron::whole_space(2));
    }

    #[test]
    fn redundancy_keeps_one_of_duplicates() {
        let p = HPolyhedron::from_i64(1, &[(&[1], 1), (&[2], 2), (&[-1], 0)]);
        let r = p.remove_redundancy();
        assert_eq!(r.len(), 2);
        assert!(grid_equal(&p, &r, -3, 3));
    }

    #[test]
    fn redundancy_on_empty_system_keeps_membership() {
        let p = HPolyhedron::from_i64(1, &[(&[1], -1), (&[-1], 0), (&[1], 5)]);
        let r = p.remove_redundancy();
        assert!(r.is_empty());
        assert!(grid_equal(&p, &r, -3, 3));
    }
}
