use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::rational::Rational;

/// Sparse row as (column, value) pairs sorted by column, no zeros.
pub type SparseRow = Vec<(usize, Rational)>;

/// Incremental row reducer for homogeneous systems with many sparse rows.
/// Keeps a fully reduced basis of the row space, keyed by pivot column, so
/// that the kernel can be read off at any time.
#[derive(Clone, Debug)]
pub struct RowReducer {
    ncols: usize,
    rows: BTreeMap<usize, SparseRow>,
}

fn axpy(row: &SparseRow, f: &Rational, other: &SparseRow) -> SparseRow {
    // row - f * other
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < other.len() {
        let ci = row.get(i).map(|x| x.0).unwrap_or(usize::MAX);
        let cj = other.get(j).map(|x| x.0).unwrap_or(usize::MAX);
        if ci < cj {
            out.push(row[i].clone());
            i += 1;
        } else if cj < ci {
            out.push((cj, -(f * &other[j].1)));
            j += 1;
        } else {
            let v = &row[i].1 - f * &other[j].1;
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn get(row: &SparseRow, c: usize) -> Option<&Rational> {
    row.binary_search_by_key(&c, |x| x.0).ok().map(|k| &row[k].1)
}

impl RowReducer {
    pub fn new(ncols: usize) -> Self {
        RowReducer {
            ncols,
            rows: BTreeMap::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce a row against the current basis without inserting it.
    pub fn reduce(&self, row: SparseRow) -> SparseRow {
        let mut r: SparseRow = row.into_iter().filter(|x| !x.1.is_zero()).collect();
        r.sort_by_key(|x| x.0);
        let mut k = 0;
        while k < r.len() {
            let c = r[k].0;
            if let Some(b) = self.rows.get(&c) {
                let f = r[k].1.clone();
                r = axpy(&r, &f, b);
                // columns before k are unchanged since basis rows are reduced
            } else {
                k += 1;
            }
        }
        r
    }

    /// Add a row; returns true when it increased the rank.
    pub fn push(&mut self, row: SparseRow) -> bool {
        let r = self.reduce(row);
        let Some((p, lead)) = r.first().cloned() else {
            return false;
        };
        let inv = Rational::one() / lead;
        let r: SparseRow = r.into_iter().map(|(c, v)| (c, v * &inv)).collect();
        for other in self.rows.values_mut() {
            if let Some(f) = get(other, p).cloned() {
                *other = axpy(other, &f, &r);
            }
        }
        self.rows.insert(p, r);
        true
    }

    pub fn push_dense(&mut self, row: &[Rational]) -> bool {
        let sparse: SparseRow = row
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| (c, v.clone()))
            .collect();
        self.push(sparse)
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        self.rows.contains_key(&c)
    }

    /// Kernel basis, same convention as the dense `nullspace`.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let mut out = Vec::new();
        for f in (0..self.ncols).filter(|c| !self.rows.contains_key(c)) {
            let mut v = vec![Rational::zero(); self.ncols];
            v[f] = Rational::one();
            for (&p, row) in &self.rows {
                if let Some(x) = get(row, f) {
                    v[p] = -x.clone();
                }
            }
            out.push(v);
        }
        out
    }
}
