use std::collections::BTreeMap;

use num::{One, Zero};

use super::dense::QMatrix;
use super::exact::{integer_row, Echelon};
use super::modular;
use crate::error::Result;
use crate::rational::Q;

/// Sparse rational matrix stored as sorted rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, Q)>>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            rows: (0..n).map(|i| vec![(i, Q::one())]).collect(),
        }
    }

    /// Builds from rows; entries are summed per column and zeros dropped.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, Q)>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|r| {
                let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
                for (c, x) in r {
                    assert!(c < ncols, "column {c} out of range");
                    *acc.entry(c).or_insert_with(Q::zero) += x;
                }
                acc.into_iter().filter(|(_, x)| !x.is_zero()).collect()
            })
            .collect::<Vec<_>>();
        SparseMatrix {
            nrows: rows.len(),
            ncols,
            rows,
        }
    }

    pub fn from_dense(m: &QMatrix) -> Self {
        let rows = (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(j, x)| (j, x.clone()))
                    .collect()
            })
            .collect();
        SparseMatrix {
            nrows: m.rows(),
            ncols: m.cols(),
            rows,
        }
    }

    pub fn to_dense(&self) -> QMatrix {
        let mut m = QMatrix::zeros(self.nrows, self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, x) in r {
                m[(i, *j)] = x.clone();
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, Q)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(usize, Q)]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn get(&self, i: usize, j: usize) -> Q {
        self.rows[i]
            .binary_search_by_key(&j, |e| e.0)
            .map(|k| self.rows[i][k].1.clone())
            .unwrap_or_else(|_| Q::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.ncols, "dimension mismatch in sparse product");
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .filter(|(j, _)| !v[*j].is_zero())
                    .fold(Q::zero(), |acc, (j, x)| acc + x * &v[*j])
            })
            .collect()
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(
            self.ncols, other.nrows,
            "dimension mismatch in sparse product"
        );
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
                for (k, a) in r {
                    for (j, b) in &other.rows[*k] {
                        *acc.entry(*j).or_insert_with(Q::zero) += a * b;
                    }
                }
                acc.into_iter().filter(|(_, x)| !x.is_zero()).collect()
            })
            .collect();
        SparseMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            rows,
        }
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(other, Q::one())
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(other, -Q::one())
    }

    fn combine(&self, other: &SparseMatrix, s: Q) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut acc: BTreeMap<usize, Q> = a.iter().cloned().collect();
                for (j, x) in b {
                    *acc.entry(*j).or_insert_with(Q::zero) += x * &s;
                }
                acc.into_iter().filter(|(_, x)| !x.is_zero()).collect()
            })
            .collect();
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows: Vec<Vec<(usize, Q)>> = vec![Vec::new(); self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, x) in r {
                rows[*j].push((i, x.clone()));
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            rows,
        }
    }

    /// Rank by exact fraction-free elimination.
    pub fn rank_exact(&self) -> usize {
        self.echelon().rank()
    }

    pub fn echelon(&self) -> Echelon {
        let mut rows: Vec<_> = self.rows.iter().filter(|r| !r.is_empty()).collect();
        rows.sort_by_key(|r| (r[0].0, r.len()));
        Echelon::from_rows(
            self.ncols,
            rows.into_iter()
                .map(|r| integer_row(r.iter().map(|(c, x)| (*c, x)))),
        )
    }

    /// Rank modulo 2^61 − 1, a lower bound for the rational rank.
    pub fn rank_mod_p(&self) -> Result<usize> {
        let mut rows = Vec::with_capacity(self.nrows);
        for r in &self.rows {
            rows.push(modular::row_from_q(r)?);
        }
        Ok(modular::rank(self.ncols, rows))
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, x) in r {
                m[(i, *j)] = crate::rational::to_f64(x);
            }
        }
        m
    }
}
