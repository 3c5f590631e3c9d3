//! Dense exact linear algebra over a [`Field`].
//!
//! Matrices act on column vectors: an `r x c` matrix maps F^c to F^r.

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, Debug)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> PartialEq for Matrix<F> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl<F: Field> Matrix<F> {
    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let z = field.zero();
        Matrix { data: vec![z; rows * cols], field, rows, cols }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = m.field.one();
        }
        m
    }

    pub fn from_i64_rows(field: F, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(field, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m.data[i * c + j] = m.field.from_i64(v);
            }
        }
        m
    }

    /// Build from sparse integer entries `(row, col, value)`; repeated entries add up.
    pub fn from_triplets(field: F, rows: usize, cols: usize, entries: &[(usize, usize, i64)]) -> Self {
        let mut m = Self::zeros(field, rows, cols);
        for &(i, j, v) in entries {
            let x = m.field.from_i64(v);
            let cur = &m.data[i * cols + j];
            m.data[i * cols + j] = m.field.add(cur, &x);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let f = &self.field;
        let mut out = Matrix::zeros(f.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if f.is_zero(b) {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.data[idx] = f.add(&out.data[idx], &f.mul(a, b));
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(v.len(), self.cols);
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                let mut acc = f.zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !f.is_zero(a) && !f.is_zero(x) {
                        acc = f.add(&acc, &f.mul(a, x));
                    }
                }
                acc
            })
            .collect()
    }

    /// Append `v` as an extra column.
    pub fn with_column(&self, v: &[F::Elem]) -> Matrix<F> {
        assert_eq!(v.len(), self.rows);
        let mut out = Matrix::zeros(self.field.clone(), self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * (self.cols + 1) + j] = self.get(i, j).clone();
            }
            out.data[i * (self.cols + 1) + self.cols] = v[i].clone();
        }
        out
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Matrix<F>, Vec<usize>) {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| !f.is_zero(m.get(i, c))) else {
                continue;
            };
            if piv != r {
                for j in 0..m.cols {
                    m.data.swap(piv * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(m.get(r, c)).expect("nonzero pivot");
            for j in c..m.cols {
                let idx = r * m.cols + j;
                m.data[idx] = f.mul(&m.data[idx], &inv);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c).clone();
                if f.is_zero(&factor) {
                    continue;
                }
                for j in c..m.cols {
                    let rv = m.data[r * m.cols + j].clone();
                    if f.is_zero(&rv) {
                        continue;
                    }
                    let idx = i * m.cols + j;
                    m.data[idx] = f.sub(&m.data[idx], &f.mul(&factor, &rv));
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.field.is_zero(x))
    }
}

/// Row-sparse matrix with incremental elimination, for large sparse
/// differentials. Rows are sorted by column.
#[derive(Clone, Debug)]
pub struct SparseEchelon<F: Field> {
    field: F,
    /// pivot column -> normalized row (leading entry 1)
    pivots: std::collections::BTreeMap<usize, Vec<(usize, F::Elem)>>,
}

impl<F: Field> SparseEchelon<F> {
    pub fn new(field: F) -> Self {
        SparseEchelon { field, pivots: Default::default() }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn axpy(&self, row: &[(usize, F::Elem)], c: &F::Elem, piv: &[(usize, F::Elem)]) -> Vec<(usize, F::Elem)> {
        // row - c * piv
        let f = &self.field;
        let mut out = Vec::with_capacity(row.len() + piv.len());
        let (mut a, mut b) = (0, 0);
        while a < row.len() || b < piv.len() {
            if b == piv.len() || (a < row.len() && row[a].0 < piv[b].0) {
                out.push(row[a].clone());
                a += 1;
            } else if a == row.len() || piv[b].0 < row[a].0 {
                out.push((piv[b].0, f.neg(&f.mul(c, &piv[b].1))));
                b += 1;
            } else {
                let v = f.sub(&row[a].1, &f.mul(c, &piv[b].1));
                if !f.is_zero(&v) {
                    out.push((row[a].0, v));
                }
                a += 1;
                b += 1;
            }
        }
        out
    }

    /// Reduce `row` against the current pivots; returns the remainder.
    pub fn reduce(&self, mut row: Vec<(usize, F::Elem)>) -> Vec<(usize, F::Elem)> {
        row.retain(|(_, v)| !self.field.is_zero(v));
        row.sort_by_key(|e| e.0);
        let mut start = 0;
        while start < row.len() {
            let (c, v) = row[start].clone();
            match self.pivots.get(&c) {
                Some(piv) => {
                    let tail = self.axpy(&row[start..], &v, piv);
                    row.truncate(start);
                    row.extend(tail);
                }
                None => start += 1,
            }
        }
        row
    }

    /// Insert a row; returns whether the rank grew.
    pub fn insert(&mut self, row: Vec<(usize, F::Elem)>) -> bool {
        let r = self.reduce(row);
        let Some((c, lead)) = r.first().cloned() else { return false };
        let inv = self.field.inv(&lead).expect("nonzero");
        let norm = r.into_iter().map(|(j, v)| (j, self.field.mul(&v, &inv))).collect();
        self.pivots.insert(c, norm);
        true
    }

    pub fn contains(&self, row: Vec<(usize, F::Elem)>) -> bool {
        self.reduce(row).is_empty()
    }
}

/// Rank of a matrix given by integer triplets `(row, col, value)`.
pub fn sparse_rank<F: Field>(field: &F, rows: usize, entries: &[(usize, usize, i64)]) -> usize {
    let mut by_row: Vec<Vec<(usize, F::Elem)>> = vec![Vec::new(); rows];
    for &(i, j, v) in entries {
        by_row[i].push((j, field.from_i64(v)));
    }
    let mut ech = SparseEchelon::new(field.clone());
    for mut r in by_row {
        r.sort_by_key(|e| e.0);
        // merge duplicates
        let mut merged: Vec<(usize, F::Elem)> = Vec::with_capacity(r.len());
        for (j, v) in r {
            match merged.last_mut() {
                Some((lj, lv)) if *lj == j => *lv = field.add(lv, &v),
                _ => merged.push((j, v)),
            }
        }
        ech.insert(merged);
    }
    ech.rank()
}

/// Rank and a basis of the right kernel `{v : m v = 0}`.
pub fn rank_and_kernel<F: Field>(m: &Matrix<F>) -> (usize, Vec<Vec<F::Elem>>) {
    let f = m.field().clone();
    let (r, pivots) = m.rref();
    let mut is_pivot = vec![false; m.cols()];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut kernel = Vec::new();
    for free in (0..m.cols()).filter(|&c| !is_pivot[c]) {
        let mut v = vec![f.zero(); m.cols()];
        v[free] = f.one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = f.neg(r.get(row, free));
        }
        kernel.push(v);
    }
    (pivots.len(), kernel)
}

/// `dim ker(d_out) - rank(d_in)` for `C_{k-1} --d_in--> C_k --d_out--> C_{k+1}`.
pub fn homology_dim<F: Field>(d_in: &Matrix<F>, d_out: &Matrix<F>) -> Result<usize> {
    if d_in.rows() != d_out.cols() {
        return Err(Error::InvalidArgument(format!(
            "d_in has {} rows but d_out has {} columns",
            d_in.rows(),
            d_out.cols()
        )));
    }
    let comp = d_out.mul(d_in);
    let f = comp.field();
    for i in 0..comp.rows() {
        for j in 0..comp.cols() {
            if !f.is_zero(comp.get(i, j)) {
                return Err(Error::NotAComplex { row: i, col: j, entry: format!("{:?}", comp.get(i, j)) });
            }
        }
    }
    let ker = d_out.cols() - d_out.rank();
    Ok(ker - d_in.rank())
}

/// Whether `v` lies in the column span of `m`.
pub fn in_column_space<F: Field>(m: &Matrix<F>, v: &[F::Elem]) -> bool {
    m.with_column(v).rank() == m.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};

    #[test]
    fn rank_kernel_small() {
        let q = Rationals;
        let z = Matrix::zeros(q, 2, 2);
        let (r, k) = rank_and_kernel(&z);
        assert_eq!((r, k.len()), (0, 2));
        let id = Matrix::identity(q, 3);
        assert_eq!(rank_and_kernel(&id).0, 3);
        let m = Matrix::from_i64_rows(q, &[vec![1, 1], vec![1, 1]]);
        let (r, k) = rank_and_kernel(&m);
        assert_eq!((r, k.len()), (1, 1));
        assert!(m.apply(&k[0]).iter().all(|x| q.is_zero(x)));
        let f2 = PrimeField::new(2).unwrap();
        let m2 = Matrix::from_i64_rows(f2, &[vec![1, 1], vec![1, 1]]);
        assert_eq!(m2.rank(), 1);
    }

    #[test]
    fn homology_examples() {
        let q = Rationals;
        let zin = Matrix::zeros(q, 1, 1);
        let zout = Matrix::zeros(q, 1, 1);
        assert_eq!(homology_dim(&zin, &zout).unwrap(), 1);
        assert_eq!(homology_dim(&zin, &Matrix::identity(q, 1)).unwrap(), 0);
        // F --1--> F --0--> 0
        let d_in = Matrix::from_i64_rows(q, &[vec![1]]);
        let d_out = Matrix::zeros(q, 0, 1);
        assert_eq!(homology_dim(&d_in, &d_out).unwrap(), 0);
    }

    #[test]
    fn not_a_complex_reports_entry() {
        let q = Rationals;
        let id = Matrix::identity(q, 2);
        match homology_dim(&id, &id) {
            Err(Error::NotAComplex { row: 0, col: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sparse_matches_dense() {
        let q = Rationals;
        let rows = vec![vec![1, 2, 0, 1], vec![2, 4, 0, 2], vec![0, 1, 1, 0], vec![1, 3, 1, 1]];
        let mut trip = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0 {
                    trip.push((i, j, v));
                }
            }
        }
        assert_eq!(sparse_rank(&q, 4, &trip), Matrix::from_i64_rows(q, &rows).rank());
        assert_eq!(sparse_rank(&PrimeField::new(2).unwrap(), 4, &trip), 2);
    }

    #[test]
    fn column_space() {
        let q = Rationals;
        let m = Matrix::from_i64_rows(q, &[vec![1, 0], vec![1, 0], vec![0, 1]]);
        assert!(in_column_space(&m, &[q.from_i64(2), q.from_i64(2), q.from_i64(5)]));
        assert!(!in_column_space(&m, &[q.from_i64(1), q.from_i64(0), q.from_i64(0)]));
    }
}
