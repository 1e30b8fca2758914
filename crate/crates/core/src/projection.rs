//! Images and preimages of polyhedra under linear maps.
//!
//! The image of `A` under a surjective `T` is computed by eliminating the
//! directions of a kernel basis of `T` one at a time. Each elimination pairs
//! every row increasing along the direction with every row decreasing along
//! it, so all derived rows are nonnegative combinations of input rows; the
//! combination is kept as a [`Certificate`]. Once every row vanishes on the
//! kernel it factors through `T` and can be rewritten on the codomain.

use num_traits::{One, Signed, Zero};

use crate::arith::{kernel_basis, rank, right_inverse, solve_affine, QMatrix, QVector, Rational};
use crate::elim::{Eliminator, Tracked};
use crate::error::{check_dim, Error, Result};
use crate::polyhedron::{canonicalize, HPolyhedron, IneqRow, SignPartition};

/// Above this many rows the automatic mode drops redundant rows between
/// eliminations.
pub const AUTO_REDUNDANCY_THRESHOLD: usize = 100;

/// A linear map `X -> Y` given by a `dim Y x dim X` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinMap {
    pub matrix: QMatrix,
}

impl LinMap {
    pub fn new(matrix: QMatrix) -> Self {
        LinMap { matrix }
    }

    pub fn identity(n: usize) -> Self {
        LinMap::new(QMatrix::identity(n))
    }

    pub fn domain_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, x: &QVector) -> Result<QVector> {
        self.matrix.mul_vec(x)
    }

    /// `g o T` as a coefficient row on the domain.
    pub fn pull_back(&self, g: &QVector) -> Result<QVector> {
        self.matrix.vec_mul(g)
    }

    pub fn rank(&self) -> usize {
        rank(&self.matrix)
    }

    fn require_surjective(&self) -> Result<()> {
        let rk = self.rank();
        if rk < self.codomain_dim() {
            return Err(Error::NotSurjective {
                rank: rk,
                codomain: self.codomain_dim(),
            });
        }
        Ok(())
    }
}

/// Nonnegative multipliers over the rows of the input polyhedron whose
/// combination reproduces a derived row (pulled back through the map, for
/// image rows).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Certificate {
    pub multipliers: Vec<(usize, Rational)>,
    /// For image rows: the combined functional on the domain, i.e. `g o T`.
    pub functional: Option<QVector>,
}

impl Certificate {
    pub fn new(multipliers: Vec<(usize, Rational)>) -> Self {
        Certificate {
            multipliers,
            functional: None,
        }
    }

    fn rescale(&mut self, s: &Rational) {
        for (_, c) in self.multipliers.iter_mut() {
            *c *= s;
        }
        if let Some(f) = self.functional.as_mut() {
            *f = f.scaled(s);
        }
    }
}

/// A polyhedron together with one certificate per row, aligned by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certified {
    pub polyhedron: HPolyhedron,
    pub certificates: Vec<Certificate>,
}

impl Certified {
    fn from_rows(dim: usize, rows: Vec<(IneqRow, Certificate)>) -> Self {
        let rows = canonicalize(rows, |c, s| c.rescale(s));
        let (rows, certificates): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        Certified {
            polyhedron: HPolyhedron::new(dim, rows).expect("rows built with matching dim"),
            certificates,
        }
    }
}

/// One-step elimination of `xi`: the rows `f_i - (f_i(xi) / f_j(xi)) f_j`
/// for every `i` in `K+` and `j` in `K-`, plus the rows of `K0`, normalized.
/// `x` is in the result iff `x + c xi` is in `p` for some rational `c`.
pub fn eliminate_direction(p: &HPolyhedron, xi: &QVector) -> Result<Certified> {
    check_dim(p.dim(), xi.dim())?;
    if xi.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let rows = p.rows();
    let part = SignPartition::of_rows(rows, xi);
    let values: Vec<Rational> = rows.iter().map(|r| r.value(xi)).collect();

    let mut out: Vec<(IneqRow, Certificate)> = Vec::new();
    for &i in &part.k_plus {
        for &j in &part.k_minus {
            let ratio = &values[i] / &values[j];
            let h = rows[i].a.add_scaled(&-&ratio, &rows[j].a);
            let bound = &rows[i].b - &ratio * &rows[j].b;
            out.push((
                IneqRow::new(h, bound),
                Certificate::new(vec![(i, Rational::one()), (j, -ratio)]),
            ));
        }
    }
    for &k in &part.k_zero {
        out.push((rows[k].clone(), Certificate::new(vec![(k, Rational::one())])));
    }
    Ok(Certified::from_rows(p.dim(), out))
}

/// Moves `x` along `xi` into the polyhedron given by `rows`, assuming `x`
/// lies in the elimination of `xi` from it. With rows on both sides the
/// step is the largest lower limit over `K-` (first index on ties); with
/// one side only it is the tightest limit on that side.
pub(crate) fn lift_along(rows: &[IneqRow], xi: &QVector, x: &QVector) -> QVector {
    let part = SignPartition::of_rows(rows, xi);
    let limit = |k: usize| (&rows[k].b - rows[k].value(x)) / rows[k].value(xi);
    let best = |ks: &[usize], better: fn(&Rational, &Rational) -> bool| {
        let mut best: Option<Rational> = None;
        for &k in ks {
            let v = limit(k);
            if best.as_ref().map_or(true, |b| better(&v, b)) {
                best = Some(v);
            }
        }
        best
    };
    let step = if !part.k_minus.is_empty() {
        best(&part.k_minus, |v, b| v > b)
    } else if !part.k_plus.is_empty() {
        best(&part.k_plus, |v, b| v < b)
    } else {
        None
    };
    match step {
        Some(c) if !c.is_zero() => x.add_scaled(&c, xi),
        _ => x.clone(),
    }
}

/// A point `x + c xi` of `p`, for `x` in the elimination of `xi` from `p`.
pub fn lift_witness(p: &HPolyhedron, xi: &QVector, x: &QVector) -> Result<QVector> {
    check_dim(p.dim(), x.dim())?;
    let projected = eliminate_direction(p, xi)?;
    if !projected.polyhedron.contains(x)? {
        return Err(Error::PreconditionViolated(format!(
            "point {x} is not in the elimination of direction {xi}"
        )));
    }
    Ok(lift_along(p.rows(), xi, x))
}

/// Rewrites the functional `f` on the domain of a surjective `t` as `g` on
/// its codomain with `g o t = f`; requires `f` to vanish on `ker t`. The
/// bound passes through unchanged.
pub fn factor_through(t: &LinMap, f: &QVector, b: &Rational) -> Result<(QVector, Rational)> {
    check_dim(t.domain_dim(), f.dim())?;
    t.require_surjective()?;
    for (index, v) in kernel_basis(&t.matrix).iter().enumerate() {
        if !f.dot(v).is_zero() {
            return Err(Error::KernelNotContained { index });
        }
    }
    let p = right_inverse(&t.matrix)?;
    Ok((p.vec_mul(f)?, b.clone()))
}

/// When to run [`HPolyhedron::remove_redundancy`] on intermediate systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Redundancy {
    Never,
    /// Only once a system exceeds [`AUTO_REDUNDANCY_THRESHOLD`] rows.
    #[default]
    Auto,
    /// After every elimination and on the final result.
    Always,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ImageOptions {
    pub redundancy: Redundancy,
}

impl ImageOptions {
    pub fn minimized() -> Self {
        ImageOptions {
            redundancy: Redundancy::Always,
        }
    }
}

/// `T(A)` for surjective `T`, with one certificate per output row over the
/// rows of `A`.
pub fn image(t: &LinMap, a: &HPolyhedron, opts: &ImageOptions) -> Result<Certified> {
    image_with_kernel(t, a, opts, kernel_basis(&t.matrix))
}

/// As [`image`], eliminating the given basis of `ker T` in order.
pub fn image_with_kernel(
    t: &LinMap,
    a: &HPolyhedron,
    opts: &ImageOptions,
    kernel: Vec<QVector>,
) -> Result<Certified> {
    check_dim(t.domain_dim(), a.dim())?;
    t.require_surjective()?;
    for v in &kernel {
        check_dim(t.domain_dim(), v.dim())?;
    }

    let mut elim = Eliminator::new(a.dim(), a.rows(), true);
    for xi in &kernel {
        // directions on which every row vanishes change nothing
        if !elim.step(xi) {
            continue;
        }
        let prune = match opts.redundancy {
            Redundancy::Never => false,
            Redundancy::Auto => elim.len() > AUTO_REDUNDANCY_THRESHOLD,
            Redundancy::Always => true,
        };
        if prune {
            elim.drop_redundant();
        }
    }

    let right = right_inverse(&t.matrix)?;
    let mut rows = Vec::new();
    for Tracked { row, cert, .. } in elim.into_tracked() {
        debug_assert!(kernel_basis(&t.matrix).iter().all(|v| row.a.dot(v).is_zero()));
        let g = right.vec_mul(&row.a)?;
        rows.push((
            IneqRow::new(g, row.b),
            Certificate {
                multipliers: cert,
                functional: Some(row.a),
            },
        ));
    }
    let mut out = Certified::from_rows(t.codomain_dim(), rows);
    let minimize = match opts.redundancy {
        Redundancy::Never => false,
        Redundancy::Auto => out.polyhedron.len() > AUTO_REDUNDANCY_THRESHOLD,
        Redundancy::Always => true,
    };
    if minimize {
        out = minimized(out);
    }
    Ok(out)
}

fn minimized(c: Certified) -> Certified {
    let keep = crate::polyhedron::irredundant_mask(c.polyhedron.dim(), c.polyhedron.rows());
    let dim = c.polyhedron.dim();
    let (rows, certificates): (Vec<_>, Vec<_>) = c
        .polyhedron
        .rows()
        .iter()
        .cloned()
        .zip(c.certificates)
        .zip(keep)
        .filter_map(|(rc, k)| k.then_some(rc))
        .unzip();
    Certified {
        polyhedron: HPolyhedron::new(dim, rows).expect("subset of rows"),
        certificates,
    }
}

/// Image under an arbitrary map. The codomain is first restricted to the
/// range of `t` via an independent subset of its rows, where the restricted
/// map is surjective; the other coordinates are tied to that subset by
/// equality pairs. Certificates are not produced.
pub fn image_onto_range(t: &LinMap, a: &HPolyhedron, opts: &ImageOptions) -> Result<HPolyhedron> {
    check_dim(t.domain_dim(), a.dim())?;
    let m = &t.matrix;
    let (_, independent) = crate::arith::rref(&m.transpose());
    let selected: Vec<QVector> = independent.iter().map(|&r| m.row(r)).collect();
    let restricted = LinMap::new(QMatrix::from_rows(m.cols(), &selected)?);
    let inner = image(&restricted, a, opts)?.polyhedron;

    let ydim = t.codomain_dim();
    let embed = |g: &QVector| {
        let mut v = QVector::zeros(ydim).into_entries();
        for (k, &r) in independent.iter().enumerate() {
            v[r] = g[k].clone();
        }
        QVector::new(v)
    };
    let mut rows: Vec<IneqRow> = inner
        .rows()
        .iter()
        .map(|r| IneqRow::new(embed(&r.a), r.b.clone()))
        .collect();
    let basis_t = restricted.matrix.transpose();
    for r in (0..ydim).filter(|r| !independent.contains(r)) {
        let coeffs = solve_affine(&basis_t, &m.row(r))?.expect("row lies in the row space");
        let mut eq = embed(&coeffs.scaled(&-Rational::one())).into_entries();
        eq[r] = Rational::one();
        let eq = QVector::new(eq);
        rows.push(IneqRow::new(eq.scaled(&-Rational::one()), Rational::zero()));
        rows.push(IneqRow::new(eq, Rational::zero()));
    }
    Ok(HPolyhedron::new(ydim, rows)?.normalize_rows())
}

/// `T^{-1}(B)`: every row `g . y <= mu` of `B` becomes `(g o T) . x <= mu`.
/// No surjectivity is needed.
pub fn preimage(t: &LinMap, b: &HPolyhedron) -> Result<HPolyhedron> {
    check_dim(t.codomain_dim(), b.dim())?;
    let rows = b
        .rows()
        .iter()
        .map(|r| Ok(IneqRow::new(t.pull_back(&r.a)?, r.b.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(HPolyhedron::new(t.domain_dim(), rows)?.normalize_rows())
}

/// Audits `row` against the rows of `a`: all multipliers nonnegative, the
/// combined functional equals `row.a o T`, and the combined bound equals
/// `row.b`, exactly.
pub fn check_certificate(
    a: &HPolyhedron,
    t: &LinMap,
    row: &IneqRow,
    cert: &Certificate,
) -> Result<bool> {
    check_dim(t.domain_dim(), a.dim())?;
    check_dim(t.codomain_dim(), row.dim())?;
    let mut combo = QVector::zeros(a.dim());
    let mut bound = Rational::zero();
    let mut nonnegative = true;
    for (k, c) in &cert.multipliers {
        let Some(src) = a.rows().get(*k) else {
            return Err(Error::IndexOutOfRange {
                index: *k,
                len: a.len(),
            });
        };
        if c.is_negative() {
            nonnegative = false;
        }
        combo = combo.add_scaled(c, &src.a);
        bound += c * &src.b;
    }
    let pulled = t.pull_back(&row.a)?;
    if let Some(f) = &cert.functional {
        if *f != pulled {
            return Ok(false);
        }
    }
    Ok(nonnegative && combo == pulled && bound == row.b)
}
