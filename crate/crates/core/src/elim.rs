//! Iterated direction elimination with multiplier tracking.
//!
//! Every row carries the nonnegative multipliers expressing it over a fixed
//! set of base rows. After `k` eliminations the multiplier vectors live in
//! the cone `{l >= 0 : l^T (A xi_i) = 0, i = 1..k}`, and the projection is
//! cut out by the extreme rays of that cone alone. A combined row is kept
//! only if its support passes the algebraic extremality test: the base rows
//! in the support, restricted to the eliminated directions, have rank
//! `|support| - 1`. All extreme rays of the next cone arise as combinations
//! of adjacent extreme rays of the current one, so the pruning is exact.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::arith::{rank, QMatrix, QVector, Rational};
use crate::polyhedron::{irredundant_mask, IneqRow};

#[derive(Debug, Clone)]
pub(crate) struct Tracked {
    pub row: IneqRow,
    /// Multipliers over the caller's original rows, sorted by index.
    pub cert: Vec<(usize, Rational)>,
    /// Base rows with nonzero multiplier, sorted.
    support: Vec<usize>,
}

pub(crate) struct Eliminator {
    dim: usize,
    rows: Vec<Tracked>,
    base: Vec<QVector>,
    /// `base_values[i][s]` is base row `i` evaluated at the `s`-th direction.
    base_values: Vec<Vec<Rational>>,
    track_certs: bool,
}

fn scale_cert(cert: &mut [(usize, Rational)], s: &Rational) {
    for (_, c) in cert.iter_mut() {
        *c *= s;
    }
}

fn combine_certs(
    x: &[(usize, Rational)],
    c: &Rational,
    y: &[(usize, Rational)],
) -> Vec<(usize, Rational)> {
    let mut acc: BTreeMap<usize, Rational> = x.iter().cloned().collect();
    for (k, v) in y {
        *acc.entry(*k).or_insert_with(Rational::zero) += c * v;
    }
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Eliminator {
    /// Starts from `rows`, which become both the certificate origin and the
    /// pruning base. Vacuous rows are dropped; the rest are scaled to
    /// primitive form with duplicates merged.
    pub fn new(dim: usize, rows: &[IneqRow], track_certs: bool) -> Self {
        let seeded = rows
            .iter()
            .enumerate()
            .map(|(k, r)| (r.clone(), vec![(k, Rational::from_integer(1.into()))]))
            .collect();
        Self::from_tracked(dim, seeded, track_certs)
    }

    fn from_tracked(
        dim: usize,
        rows: Vec<(IneqRow, Vec<(usize, Rational)>)>,
        track_certs: bool,
    ) -> Self {
        let mut seen = std::collections::HashSet::new();
        let mut kept = Vec::new();
        for (row, mut cert) in rows {
            if row.is_vacuous() {
                continue;
            }
            let Some(s) = row.primitive_factor() else {
                continue;
            };
            let row = row.scaled(&s);
            if !seen.insert(row.clone()) {
                continue;
            }
            if track_certs {
                scale_cert(&mut cert, &s);
            } else {
                cert.clear();
            }
            kept.push((row, cert));
        }
        let mut e = Eliminator {
            dim,
            rows: Vec::new(),
            base: Vec::new(),
            base_values: Vec::new(),
            track_certs,
        };
        e.rows = kept
            .into_iter()
            .map(|(row, cert)| Tracked {
                row,
                cert,
                support: Vec::new(),
            })
            .collect();
        e.rebase();
        e
    }

    /// Makes the current rows the new pruning base.
    fn rebase(&mut self) {
        self.base = self.rows.iter().map(|t| t.row.a.clone()).collect();
        self.base_values = vec![Vec::new(); self.base.len()];
        for (i, t) in self.rows.iter_mut().enumerate() {
            t.support = vec![i];
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn has_contradiction(&self) -> bool {
        self.rows.iter().any(|t| t.row.is_contradiction())
    }

    pub fn current_rows(&self) -> Vec<IneqRow> {
        self.rows.iter().map(|t| t.row.clone()).collect()
    }

    pub fn into_tracked(self) -> Vec<Tracked> {
        self.rows
    }

    pub fn cheapest_coordinate(&self) -> Option<usize> {
        self.cheapest_coordinate_below(self.dim)
    }

    /// Coordinate `j < limit` still present in some row, minimizing the
    /// number of rows produced by eliminating it.
    pub fn cheapest_coordinate_below(&self, limit: usize) -> Option<usize> {
        (0..limit)
            .filter_map(|j| {
                let (mut pos, mut neg) = (0usize, 0usize);
                for t in &self.rows {
                    let c = &t.row.a[j];
                    if c.is_positive() {
                        pos += 1;
                    } else if c.is_negative() {
                        neg += 1;
                    }
                }
                (pos + neg > 0).then(|| (pos * neg + self.rows.len() - pos - neg, j))
            })
            .min()
            .map(|(_, j)| j)
    }

    fn is_extreme(&self, support: &[usize]) -> bool {
        let steps = self.base_values.first().map_or(0, Vec::len);
        if support.len() > steps + 1 {
            return false;
        }
        let m = QMatrix::new(
            support.len(),
            steps,
            support
                .iter()
                .flat_map(|&i| self.base_values[i].iter().cloned())
                .collect(),
        )
        .expect("support matrix shape");
        rank(&m) + 1 == support.len()
    }

    /// Eliminates `xi`. Returns false and leaves the system untouched when
    /// every row already vanishes on `xi`.
    pub fn step(&mut self, xi: &QVector) -> bool {
        let values: Vec<Rational> = self.rows.iter().map(|t| t.row.value(xi)).collect();
        if values.iter().all(Zero::is_zero) {
            return false;
        }
        for (a, vals) in self.base.iter().zip(self.base_values.iter_mut()) {
            vals.push(a.dot(xi));
        }

        let mut next: Vec<Tracked> = Vec::new();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (k, v) in values.iter().enumerate() {
            if v.is_positive() {
                plus.push(k);
            } else if v.is_negative() {
                minus.push(k);
            } else {
                next.push(self.rows[k].clone());
            }
        }

        let mut by_support: std::collections::HashSet<Vec<usize>> =
            next.iter().map(|t| t.support.clone()).collect();
        for &i in &plus {
            for &j in &minus {
                let support = union_sorted(&self.rows[i].support, &self.rows[j].support);
                if by_support.contains(&support) || !self.is_extreme(&support) {
                    continue;
                }
                let (ri, rj) = (&self.rows[i], &self.rows[j]);
                // positive since values[i] > 0 > values[j]
                let c = -(&values[i] / &values[j]);
                let row = IneqRow::new(ri.row.a.add_scaled(&c, &rj.row.a), &ri.row.b + &c * &rj.row.b);
                if row.is_vacuous() {
                    continue;
                }
                let s = row.primitive_factor().expect("nonvacuous row is nonzero");
                let mut cert = if self.track_certs {
                    combine_certs(&ri.cert, &c, &rj.cert)
                } else {
                    Vec::new()
                };
                scale_cert(&mut cert, &s);
                by_support.insert(support.clone());
                next.push(Tracked {
                    row: row.scaled(&s),
                    cert,
                    support,
                });
            }
        }
        self.rows = next;
        true
    }

    /// Removes rows implied by the others, then restarts pruning from the
    /// reduced system.
    pub fn drop_redundant(&mut self) {
        let rows = self.current_rows();
        let keep = irredundant_mask(self.dim, &rows);
        let mut k = keep.into_iter();
        self.rows.retain(|_| k.next().unwrap_or(true));
        self.rebase();
    }
}
