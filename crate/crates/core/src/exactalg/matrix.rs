use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{self, q, Rational};
use super::AlgError;

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(rational::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Outcome of `solve_linear`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Consistent(Vec<Rational>),
    Inconsistent,
}

impl Solution {
    pub fn into_option(self) -> Option<Vec<Rational>> {
        match self {
            Solution::Consistent(x) => Some(x),
            Solution::Inconsistent => None,
        }
    }
}

impl QMatrix {
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
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Rational>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        QMatrix { rows, cols, data }
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        Self::from_vec(rows, cols, data.iter().map(|&x| q(x)).collect())
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row.iter().cloned());
        }
        QMatrix { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors, all of length `n`.
    pub fn from_cols(n: usize, cols: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n);
            for i in 0..n {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn diagonal(d: &[Rational]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    /// Elementary matrix E_{ij}.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = Rational::one();
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rational>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = &self[(i, j)];
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn scale(&self, s: &Rational) -> Self {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].clone())
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &QMatrix) -> QMatrix {
        &(self * other) - &(other * self)
    }

    pub fn pow(&self, k: u32) -> QMatrix {
        let mut r = QMatrix::identity(self.rows);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> QMatrix {
        let mut m = QMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[QMatrix]) -> QMatrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = QMatrix::zeros(r, c);
        let (mut oi, mut oj) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(oi + i, oj + j)] = b[(i, j)].clone();
                }
            }
            oi += b.rows;
            oj += b.cols;
        }
        m
    }

    /// Flatten row-major into a vector (used for Sylvester systems).
    pub fn to_flat(&self) -> Vec<Rational> {
        self.data.clone()
    }

    pub fn rank(&self) -> usize {
        echelon_integer(self).pivots.len()
    }

    /// Basis of the kernel. Each basis vector has entry 1 at its free column and
    /// zeros at all other free columns (reduced echelon convention).
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        nullspace(self)
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = QMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let r = rref(&aug);
        if r.pivots.len() < n || r.pivots[n - 1] >= n {
            return None;
        }
        let rows: Vec<usize> = (0..n).collect();
        let cols: Vec<usize> = (n..2 * n).collect();
        Some(r.matrix.submatrix(&rows, &cols))
    }

    pub fn max_abs_entry(&self) -> Rational {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Rows as `"num/den"` strings.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(rational::to_string).collect())
            .collect()
    }

    pub fn from_strings(rows: &[Vec<String>]) -> Result<QMatrix, AlgError> {
        let parsed: Result<Vec<Vec<Rational>>, AlgError> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| {
                        rational::parse(s).ok_or_else(|| AlgError::Parse(s.to_string()))
                    })
                    .collect()
            })
            .collect();
        let parsed = parsed?;
        if let Some(first) = parsed.first() {
            if parsed.iter().any(|r| r.len() != first.len()) {
                return Err(AlgError::DimensionMismatch("ragged rows".into()));
            }
        }
        Ok(QMatrix::from_rows(&parsed))
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut m = QMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        m[(i, j)] += a * b;
                    }
                }
            }
        }
        m
    }
}

impl<'a> Add<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

/// Serializes as a list of rows of `"num/den"` strings.
impl Serialize for QMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows = self.to_strings();
        let wrapped = MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            entries: rows,
        };
        wrapped.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        if r.rows == 0 || r.cols == 0 {
            return Ok(QMatrix::zeros(r.rows, r.cols));
        }
        let m = QMatrix::from_strings(&r.entries).map_err(serde::de::Error::custom)?;
        if m.rows != r.rows || m.cols != r.cols {
            return Err(serde::de::Error::custom("matrix shape mismatch"));
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<String>>,
}

struct Echelon {
    /// Integer rows in echelon form (only the nonzero ones).
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

fn integer_rows(m: &QMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows)
        .map(|i| {
            let row = m.row(i);
            let l = rational::lcm_denominators(row.iter());
            row.iter()
                .map(|x| x.numer() * (&l / x.denom()))
                .collect()
        })
        .collect()
}

/// Fraction-free (Bareiss) forward elimination. Every intermediate entry is an
/// integer; the division by the previous pivot is exact.
fn echelon_integer(m: &QMatrix) -> Echelon {
    let mut a = integer_rows(m);
    let rows = m.rows;
    let cols = m.cols;
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let piv = a[r][c].clone();
        for i in (r + 1)..rows {
            let f = a[i][c].clone();
            for j in c..cols {
                let v = &piv * &a[i][j] - &f * &a[r][j];
                a[i][j] = v / &prev;
            }
        }
        // Entries to the left of the pivot in rows below are zero; for skipped
        // columns the Bareiss quotient stays exact because every surviving
        // entry is a minor of the original matrix.
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    Echelon { rows: a, pivots }
}

struct Rref {
    matrix: QMatrix,
    pivots: Vec<usize>,
}

/// Reduced row echelon form, computed from the fraction-free echelon form.
fn rref(m: &QMatrix) -> Rref {
    let e = echelon_integer(m);
    let cols = m.cols;
    let mut rows: Vec<Vec<Rational>> = e
        .rows
        .iter()
        .zip(&e.pivots)
        .map(|(row, &p)| {
            let piv = Rational::from_integer(row[p].clone());
            row.iter()
                .map(|x| Rational::from_integer(x.clone()) / &piv)
                .collect()
        })
        .collect();
    for k in (0..rows.len()).rev() {
        let p = e.pivots[k];
        let (upper, lower) = rows.split_at_mut(k);
        let pr = &lower[0];
        for row in upper.iter_mut() {
            let f = row[p].clone();
            if f.is_zero() {
                continue;
            }
            for j in p..cols {
                if !pr[j].is_zero() {
                    let d = &f * &pr[j];
                    row[j] -= d;
                }
            }
        }
    }
    let mut out = QMatrix::zeros(m.rows, cols);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..cols {
            out[(i, j)] = r[j].clone();
        }
    }
    Rref {
        matrix: out,
        pivots: e.pivots,
    }
}

/// Kernel basis of `m`.
pub fn nullspace(m: &QMatrix) -> Vec<Vec<Rational>> {
    let r = rref(m);
    let cols = m.cols;
    let mut is_pivot = vec![false; cols];
    for &p in &r.pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for f in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![Rational::zero(); cols];
        v[f] = Rational::one();
        for (k, &p) in r.pivots.iter().enumerate() {
            v[p] = -r.matrix[(k, f)].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solve `m x = b`. Free variables are set to zero.
pub fn solve_linear(m: &QMatrix, b: &[Rational]) -> Result<Solution, AlgError> {
    if b.len() != m.rows {
        return Err(AlgError::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has {}",
            m.rows,
            b.len()
        )));
    }
    let mut aug = QMatrix::zeros(m.rows, m.cols + 1);
    for i in 0..m.rows {
        for j in 0..m.cols {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, m.cols)] = b[i].clone();
    }
    let r = rref(&aug);
    if r.pivots.last() == Some(&m.cols) {
        return Ok(Solution::Inconsistent);
    }
    let mut x = vec![Rational::zero(); m.cols];
    for (k, &p) in r.pivots.iter().enumerate() {
        x[p] = r.matrix[(k, m.cols)].clone();
    }
    Ok(Solution::Consistent(x))
}

/// Coordinates of `v` in the column span of `basis` (columns), if it lies there.
pub fn coordinates(basis: &QMatrix, v: &[Rational]) -> Option<Vec<Rational>> {
    solve_linear(basis, v).ok()?.into_option()
}

/// Basis (as columns) of the intersection of two column spans in the same space.
pub fn intersect_spans(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let n = a.rows;
    assert_eq!(n, b.rows);
    if a.cols == 0 || b.cols == 0 {
        return QMatrix::zeros(n, 0);
    }
    let mut stacked = QMatrix::zeros(n, a.cols + b.cols);
    for i in 0..n {
        for j in 0..a.cols {
            stacked[(i, j)] = a[(i, j)].clone();
        }
        for j in 0..b.cols {
            stacked[(i, a.cols + j)] = -b[(i, j)].clone();
        }
    }
    let ker = nullspace(&stacked);
    let vecs: Vec<Vec<Rational>> = ker
        .iter()
        .map(|k| a.mul_vec(&k[..a.cols]))
        .collect();
    column_basis(&QMatrix::from_cols(n, &vecs))
}

/// A basis (as columns) of the column span, in integer primitive echelon form.
pub fn column_basis(m: &QMatrix) -> QMatrix {
    let e = echelon_integer(&m.transpose());
    // Rows of the echelon form of the transpose are a basis of the span, but
    // in mixed form; keep a clean rational representation instead.
    let rows: Vec<Vec<Rational>> = e
        .rows
        .iter()
        .map(|r| {
            let g = r
                .iter()
                .fold(BigInt::zero(), |acc, x| num_integer::Integer::gcd(&acc, x));
            r.iter()
                .map(|x| Rational::from_integer(x / &g))
                .collect()
        })
        .collect();
    QMatrix::from_cols(m.rows, &rows)
}

/// Reduced echelon basis (as columns) of the column span: each vector has a 1
/// in its pivot coordinate and zeros in the other pivot coordinates.
pub fn span_basis_reduced(m: &QMatrix) -> QMatrix {
    let r = rref(&m.transpose());
    let rows: Vec<Vec<Rational>> = (0..r.pivots.len()).map(|k| r.matrix.row(k).to_vec()).collect();
    QMatrix::from_cols(m.rows, &rows)
}

pub fn vec_is_zero(v: &[Rational]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn vec_add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Rational], s: &Rational) -> Vec<Rational> {
    a.iter().map(|x| x * s).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}
