//! Fraction-free sparse elimination over the integers.
//!
//! Rational rows are scaled to primitive integer rows. Eliminating the leading
//! entry `a` of a row against a pivot with leading entry `b` forms
//! `(b/g)·row − (a/g)·pivot` with `g = gcd(a, b)` and divides the result by its
//! content, so no fractions appear and coefficients stay small. When a new row
//! meets a pivot column, the row with the shorter leading coefficient (bit
//! length) keeps the pivot.

use num::integer::Integer;
use num::{BigInt, One, Signed, Zero};

use super::dense::QMatrix;
use crate::rational::Q;

/// Sparse integer row, sorted by column, without zero entries.
pub type IntRow = Vec<(usize, BigInt)>;

/// Scales a rational row to a primitive integer row.
pub fn integer_row<'a, I>(entries: I) -> IntRow
where
    I: IntoIterator<Item = (usize, &'a Q)>,
{
    let mut items: Vec<(usize, &Q)> = entries.into_iter().filter(|(_, x)| !x.is_zero()).collect();
    items.sort_by_key(|(c, _)| *c);
    let lcm = items
        .iter()
        .fold(BigInt::one(), |acc, (_, x)| acc.lcm(x.denom()));
    let mut row: IntRow = items
        .into_iter()
        .map(|(c, x)| (c, x.numer() * (&lcm / x.denom())))
        .collect();
    make_primitive(&mut row);
    row
}

pub fn dense_integer_row(v: &[Q]) -> IntRow {
    integer_row(v.iter().enumerate())
}

fn make_primitive(row: &mut IntRow) {
    let mut g = BigInt::zero();
    for (_, x) in row.iter() {
        g = g.gcd(x);
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for (_, x) in row.iter_mut() {
        *x /= &g;
    }
}

/// `row` with the entry in column `col` eliminated by `pivot`.
fn eliminate(row: &IntRow, pivot: &IntRow, col: usize) -> IntRow {
    let a = &row
        .iter()
        .find(|(c, _)| *c == col)
        .expect("column present in row")
        .1;
    let b = &pivot
        .iter()
        .find(|(c, _)| *c == col)
        .expect("column present in pivot")
        .1;
    let g = a.gcd(b);
    let ra = b / &g;
    let pa = a / &g;
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = pivot.get(j).map_or(usize::MAX, |e| e.0);
        if ci < cj {
            out.push((ci, &row[i].1 * &ra));
            i += 1;
        } else if cj < ci {
            out.push((cj, -(&pivot[j].1 * &pa)));
            j += 1;
        } else {
            let v = &row[i].1 * &ra - &pivot[j].1 * &pa;
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    make_primitive(&mut out);
    out
}

/// Row echelon form built incrementally; pivot rows have distinct leading columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    ncols: usize,
    rows: Vec<IntRow>,
    pivot_of_col: Vec<Option<usize>>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            rows: Vec::new(),
            pivot_of_col: vec![None; ncols],
        }
    }

    pub fn from_rows<I: IntoIterator<Item = IntRow>>(ncols: usize, rows: I) -> Self {
        let mut e = Self::new(ncols);
        for r in rows {
            e.insert(r);
        }
        e
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut row: IntRow) -> IntRow {
        while let Some(&(c, _)) = row.first() {
            match self.pivot_of_col[c] {
                Some(p) => row = eliminate(&row, &self.rows[p], c),
                None => break,
            }
        }
        row
    }

    /// Adds a row; returns `true` when it increased the rank.
    pub fn insert(&mut self, mut row: IntRow) -> bool {
        loop {
            let Some((c, lead)) = row.first() else {
                return false;
            };
            let c = *c;
            assert!(c < self.ncols, "column {c} out of range");
            match self.pivot_of_col[c] {
                None => {
                    self.pivot_of_col[c] = Some(self.rows.len());
                    self.rows.push(row);
                    return true;
                }
                Some(p) => {
                    let held = &self.rows[p];
                    if lead.bits() < held[0].1.bits() {
                        let old = std::mem::replace(&mut self.rows[p], row);
                        row = eliminate(&old, &self.rows[p], c);
                    } else {
                        row = eliminate(&row, held, c);
                    }
                    row = self.reduce(row);
                }
            }
        }
    }

    pub fn contains(&self, row: IntRow) -> bool {
        self.reduce(row).is_empty()
    }

    pub fn contains_q(&self, v: &[Q]) -> bool {
        self.contains(dense_integer_row(v))
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        (0..self.ncols)
            .filter(|&c| self.pivot_of_col[c].is_some())
            .collect()
    }

    /// Basis of the row space as rational vectors.
    pub fn basis(&self) -> Vec<Vec<Q>> {
        let mut cols = self.pivot_columns();
        cols.sort_unstable();
        cols.into_iter()
            .map(|c| {
                let r = &self.rows[self.pivot_of_col[c].unwrap()];
                let mut v = vec![Q::zero(); self.ncols];
                for (j, x) in r {
                    v[*j] = Q::from_integer(x.clone());
                }
                v
            })
            .collect()
    }

    /// Fully reduced form: every pivot row vanishes on the other pivot columns.
    pub fn into_rref(self) -> Rref {
        let mut order = self.pivot_columns();
        order.sort_unstable();
        let mut reduced: Vec<(usize, IntRow)> = Vec::with_capacity(order.len());
        let mut done: Vec<Option<usize>> = vec![None; self.ncols];
        for &c in order.iter().rev() {
            let mut row = self.rows[self.pivot_of_col[c].unwrap()].clone();
            loop {
                let target = row
                    .iter()
                    .skip(1)
                    .find(|(j, _)| done[*j].is_some())
                    .map(|e| e.0);
                match target {
                    Some(j) => row = eliminate(&row, &reduced[done[j].unwrap()].1, j),
                    None => break,
                }
            }
            if row[0].1.is_negative() {
                for (_, x) in row.iter_mut() {
                    *x = -&*x;
                }
            }
            done[c] = Some(reduced.len());
            reduced.push((c, row));
        }
        reduced.reverse();
        Rref {
            ncols: self.ncols,
            rows: reduced,
        }
    }
}

/// Reduced row echelon form with integer rows.
#[derive(Clone, Debug)]
pub struct Rref {
    ncols: usize,
    rows: Vec<(usize, IntRow)>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.rows.iter().map(|(c, _)| *c).collect()
    }

    /// Kernel basis restricted to the first `upto` columns, one vector per free column.
    fn kernel_upto(&self, upto: usize) -> Vec<Vec<Q>> {
        let mut is_pivot = vec![false; self.ncols];
        for (c, _) in &self.rows {
            is_pivot[*c] = true;
        }
        let free: Vec<usize> = (0..upto).filter(|&c| !is_pivot[c]).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![Q::zero(); upto];
            v[f] = Q::one();
            for (c, row) in &self.rows {
                if *c >= upto {
                    continue;
                }
                if let Some((_, x)) = row.iter().find(|(j, _)| *j == f) {
                    v[*c] = -Q::new(x.clone(), row[0].1.clone());
                }
            }
            basis.push(v);
        }
        basis
    }

    pub fn kernel_basis(&self) -> Vec<Vec<Q>> {
        self.kernel_upto(self.ncols)
    }
}

fn rows_of(m: &QMatrix) -> impl Iterator<Item = IntRow> + '_ {
    (0..m.rows()).map(move |i| dense_integer_row(m.row(i)))
}

pub fn rank(m: &QMatrix) -> usize {
    Echelon::from_rows(m.cols(), rows_of(m)).rank()
}

/// Basis of `{x : m x = 0}`.
pub fn kernel(m: &QMatrix) -> Vec<Vec<Q>> {
    Echelon::from_rows(m.cols(), rows_of(m))
        .into_rref()
        .kernel_basis()
}

/// Basis of the column space of `m`.
pub fn column_space(m: &QMatrix) -> Vec<Vec<Q>> {
    let t = m.transpose();
    Echelon::from_rows(t.cols(), rows_of(&t)).basis()
}

/// Rank of a list of vectors.
pub fn rank_of_vectors(vs: &[Vec<Q>], dim: usize) -> usize {
    Echelon::from_rows(dim, vs.iter().map(|v| dense_integer_row(v))).rank()
}

/// True when `v` lies in the span of `basis`.
pub fn in_span(basis: &[Vec<Q>], v: &[Q]) -> bool {
    let e = Echelon::from_rows(v.len(), basis.iter().map(|b| dense_integer_row(b)));
    e.contains_q(v)
}

/// True when the two families span the same subspace.
pub fn same_span(a: &[Vec<Q>], b: &[Vec<Q>], dim: usize) -> bool {
    let ea = Echelon::from_rows(dim, a.iter().map(|v| dense_integer_row(v)));
    let eb = Echelon::from_rows(dim, b.iter().map(|v| dense_integer_row(v)));
    ea.rank() == eb.rank()
        && b.iter().all(|v| ea.contains_q(v))
        && a.iter().all(|v| eb.contains_q(v))
}

/// Solution set of `m x = b`: a particular solution and a kernel basis, or `None`.
pub fn solve(m: &QMatrix, b: &[Q]) -> Option<(Vec<Q>, Vec<Vec<Q>>)> {
    assert_eq!(m.rows(), b.len());
    let n = m.cols();
    let rows = (0..m.rows()).map(|i| {
        let it = m
            .row(i)
            .iter()
            .enumerate()
            .chain(std::iter::once((n, &b[i])));
        integer_row(it)
    });
    let rref = Echelon::from_rows(n + 1, rows).into_rref();
    if rref.pivot_columns().contains(&n) {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (c, row) in &rref.rows {
        if let Some((_, v)) = row.iter().find(|(j, _)| *j == n) {
            x[*c] = Q::new(v.clone(), row[0].1.clone());
        }
    }
    Some((x, rref.kernel_upto(n)))
}

/// Exact inverse of a square matrix, or `None` when singular.
pub fn inverse(m: &QMatrix) -> Option<QMatrix> {
    assert!(m.is_square());
    let n = m.rows();
    let aug = m.hcat(&QMatrix::identity(n));
    let rref = Echelon::from_rows(2 * n, rows_of(&aug)).into_rref();
    if rref.rank() < n
        || rref
            .pivot_columns()
            .iter()
            .take(n)
            .enumerate()
            .any(|(i, &c)| i != c)
    {
        return None;
    }
    let mut inv = QMatrix::zeros(n, n);
    for (c, row) in &rref.rows {
        if *c >= n {
            return None;
        }
        for (j, v) in row {
            if *j >= n {
                inv[(*c, j - n)] = Q::new(v.clone(), row[0].1.clone());
            }
        }
    }
    Some(inv)
}

/// Exact positive semidefiniteness test for a symmetric matrix by symmetric
/// Gaussian elimination on the diagonal.
pub fn is_positive_semidefinite(m: &QMatrix) -> bool {
    assert!(m.is_square());
    let n = m.rows();
    let mut a = m.clone();
    for k in 0..n {
        let pivot = a[(k, k)].clone();
        if pivot.is_negative() {
            return false;
        }
        if pivot.is_zero() {
            if (k + 1..n).any(|j| !a[(k, j)].is_zero() || !a[(j, k)].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &pivot;
            for j in k + 1..n {
                if !a[(k, j)].is_zero() {
                    let t = &f * &a[(k, j)];
                    a[(i, j)] -= t;
                }
            }
        }
    }
    true
}
