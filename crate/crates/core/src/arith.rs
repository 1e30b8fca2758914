//! Exact rational scalars, vectors and matrices, with the Gauss-Jordan
//! based routines the polyhedral code needs (rank, kernel, right inverse,
//! affine solve).

use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::error::{check_dim, Error, Result};

/// Arbitrary-precision fraction, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational")]
    Empty,
    #[error("invalid rational {0:?}")]
    Invalid(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses `[+-]digits[/digits]`. No whitespace is accepted anywhere.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, ParseRationalError> {
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let invalid = || ParseRationalError::Invalid(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let digits = num.strip_prefix(['+', '-']).unwrap_or(num);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(invalid());
    }
    let numer: BigInt = num.parse().map_err(|_| invalid())?;
    let denom = match den {
        None => BigInt::one(),
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(invalid());
            }
            let d: BigInt = d.parse().map_err(|_| invalid())?;
            if d.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            d
        }
    };
    Ok(Rational::new(numer, denom))
}

/// Canonical text form: `n` for integers, `n/d` otherwise.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Positive factor `s` such that `s * v` has coprime integer entries.
/// Returns `None` for the zero vector.
pub fn primitive_scale(v: &[Rational]) -> Option<Rational> {
    let mut lcm = BigInt::one();
    let mut any = false;
    for q in v {
        if !q.is_zero() {
            any = true;
            lcm = lcm.lcm(q.denom());
        }
    }
    if !any {
        return None;
    }
    let mut gcd = BigInt::zero();
    for q in v {
        if !q.is_zero() {
            let scaled = q.numer() * (&lcm / q.denom());
            gcd = gcd.gcd(&scaled);
        }
    }
    Some(Rational::new(lcm, gcd))
}

/// Exact coordinate vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct QVector(Vec<Rational>);

impl QVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        QVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        QVector(vec![Rational::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Rational::one();
        v
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        QVector(entries.iter().map(|&n| int(n)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Exact inner product. Panics on length mismatch; callers check
    /// dimensions at the public boundary.
    pub fn dot(&self, other: &QVector) -> Rational {
        assert_eq!(self.dim(), other.dim(), "dot of vectors with different lengths");
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn scaled(&self, c: &Rational) -> QVector {
        QVector(self.0.iter().map(|x| x * c).collect())
    }

    /// `self + c * other`
    pub fn add_scaled(&self, c: &Rational, other: &QVector) -> QVector {
        assert_eq!(self.dim(), other.dim());
        QVector(self.0.iter().zip(&other.0).map(|(x, y)| x + c * y).collect())
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        self.add_scaled(&-Rational::one(), other)
    }

    /// Primitive integer representative: coprime integer entries with the
    /// first nonzero entry positive.
    pub fn primitive(&self) -> QVector {
        match primitive_scale(&self.0) {
            None => self.clone(),
            Some(s) => {
                let lead_negative = self
                    .0
                    .iter()
                    .find(|q| !q.is_zero())
                    .is_some_and(|q| q.is_negative());
                let s = if lead_negative { -s } else { s };
                self.scaled(&s)
            }
        }
    }
}

impl Index<usize> for QVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl From<Vec<Rational>> for QVector {
    fn from(v: Vec<Rational>) -> Self {
        QVector(v)
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, ")")
    }
}

/// Dense row-major exact matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::MalformedMatrix {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(QMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    /// Builds from row vectors; `cols` is needed when there are no rows.
    pub fn from_rows(cols: usize, rows: &[QVector]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.dim())?;
            data.extend(r.entries().iter().cloned());
        }
        Ok(QMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Convenience for tests and examples: integer rows.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged matrix literal");
                r.iter().map(|&n| int(n))
            })
            .collect();
        QMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Rational] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    fn get_mut(&mut self, r: usize, c: usize) -> &mut Rational {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> QVector {
        QVector::new(self.data[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn column(&self, c: usize) -> QVector {
        QVector::new((0..self.rows).map(|r| self.get(r, c).clone()).collect())
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *t.get_mut(c, r) = self.get(r, c).clone();
            }
        }
        t
    }

    /// `M x`
    pub fn mul_vec(&self, x: &QVector) -> Result<QVector> {
        check_dim(self.cols, x.dim())?;
        Ok(QVector::new((0..self.rows).map(|r| self.row(r).dot(x)).collect()))
    }

    /// Row vector times matrix, `g M`. Used to pull functionals back.
    pub fn vec_mul(&self, g: &QVector) -> Result<QVector> {
        check_dim(self.rows, g.dim())?;
        let mut out = vec![Rational::zero(); self.cols];
        for (r, gr) in g.entries().iter().enumerate() {
            if gr.is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let m = self.get(r, c);
                if !m.is_zero() {
                    *o += gr * m;
                }
            }
        }
        Ok(QVector::new(out))
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        check_dim(self.cols, other.rows)?;
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let v = other.vec_mul(&self.row(r))?;
            for (c, q) in v.into_entries().into_iter().enumerate() {
                *out.get_mut(r, c) = q;
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

/// Reduced row echelon form by exact Gauss-Jordan elimination. The pivot in
/// each column is the first nonzero entry at or below the current row.
pub fn rref(m: &QMatrix) -> (QMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        let inv = a.get(r, c).recip();
        for k in c..a.cols {
            let v = a.get(r, k) * &inv;
            *a.get_mut(r, k) = v;
        }
        for i in 0..a.rows {
            if i == r || a.get(i, c).is_zero() {
                continue;
            }
            let factor = a.get(i, c).clone();
            for k in c..a.cols {
                let pivot_entry = a.get(r, k);
                if pivot_entry.is_zero() {
                    continue;
                }
                let v = a.get(i, k) - &factor * pivot_entry;
                *a.get_mut(i, k) = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &QMatrix) -> usize {
    rref(m).1.len()
}

/// Basis of `{x : M x = 0}`, one vector per free column in increasing order,
/// each in primitive integer form with positive leading entry.
pub fn kernel_basis(m: &QMatrix) -> Vec<QVector> {
    let (r, pivots) = rref(m);
    let mut is_pivot = vec![false; m.cols()];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..m.cols())
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Rational::zero(); m.cols()];
            v[free] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(i, free).clone();
            }
            QVector::new(v).primitive()
        })
        .collect()
}

/// One exact solution of `M x = b` with free variables set to zero, or
/// `None` if the system is inconsistent.
pub fn solve_affine(m: &QMatrix, b: &QVector) -> Result<Option<QVector>> {
    check_dim(m.rows(), b.dim())?;
    let n = m.cols();
    let mut data = Vec::with_capacity(m.rows() * (n + 1));
    for r in 0..m.rows() {
        data.extend(m.row(r).into_entries());
        data.push(b[r].clone());
    }
    let aug = QMatrix::new(m.rows(), n + 1, data)?;
    let (red, pivots) = rref(&aug);
    if pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = red.get(i, n).clone();
    }
    Ok(Some(QVector::new(x)))
}

/// `P` with `M P = I`, column `i` solving `M p = e_i` with free variables
/// zero. Requires `M` to have full row rank.
pub fn right_inverse(m: &QMatrix) -> Result<QMatrix> {
    let rk = rank(m);
    if rk < m.rows() {
        return Err(Error::NotSurjective {
            rank: rk,
            codomain: m.rows(),
        });
    }
    let mut p = QMatrix::zeros(m.cols(), m.rows());
    for i in 0..m.rows() {
        let col = solve_affine(m, &QVector::unit(m.rows(), i))?
            .expect("full row rank system is consistent");
        for (r, q) in col.into_entries().into_iter().enumerate() {
            *p.get_mut(r, i) = q;
        }
    }
    Ok(p)
}
