//! Compressed sparse row matrices and direct sparse solvers.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{ColMut, Side};
use nalgebra::DVector;
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("sparse {kind} factorization of a {n}x{n} matrix failed: {detail}")]
    Factorization { kind: &'static str, n: usize, detail: String },
    #[error("matrix construction failed: {0}")]
    Construction(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    /// Sums duplicate entries. The result depends only on the multiset of
    /// triplets and their order within each `(row, col)` pair.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            assert!(i < nrows && j < ncols, "entry ({i}, {j}) outside {nrows}x{ncols}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    /// `y = A x`, rows in parallel.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        y.par_iter_mut().with_min_len(256).enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        });
    }

    pub fn mul(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.nrows);
        self.mul_into(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect())
    }

    /// `a A + b B`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (i, j, a * v)).collect();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, b * v)));
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= a);
        m
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Restriction to the given rows and columns, each renumbered in order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut t = Vec::new();
        for (k, &r) in rows.iter().enumerate() {
            for (j, v) in self.row(r) {
                if col_map[j] != usize::MAX {
                    t.push((k, col_map[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), t)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] += v;
        }
        d
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>, LinalgError> {
        let t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t).map_err(|e| LinalgError::Construction(format!("{e:?}")))
    }

    /// Matrix Market coordinate format.
    pub fn write_matrix_market(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

enum Factor {
    Lu(Lu<usize, f64>),
    Llt(Llt<usize, f64>),
}

/// A factorized sparse matrix.
pub struct SparseSolver {
    n: usize,
    factor: Factor,
    matrix: CsrMatrix,
}

impl SparseSolver {
    pub fn lu(a: &CsrMatrix) -> Result<Self, LinalgError> {
        let f = a.to_faer()?.sp_lu().map_err(|e| LinalgError::Factorization { kind: "LU", n: a.nrows, detail: format!("{e:?}") })?;
        Ok(Self { n: a.nrows, factor: Factor::Lu(f), matrix: a.clone() })
    }

    /// Cholesky of a symmetric positive definite matrix (lower triangle read).
    pub fn cholesky(a: &CsrMatrix) -> Result<Self, LinalgError> {
        let f = a
            .to_faer()?
            .sp_cholesky(Side::Lower)
            .map_err(|e| LinalgError::Factorization { kind: "Cholesky", n: a.nrows, detail: format!("{e:?}") })?;
        Ok(Self { n: a.nrows, factor: Factor::Llt(f), matrix: a.clone() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn solve_raw(&self, x: &mut [f64]) {
        let col = ColMut::from_slice_mut(x);
        match &self.factor {
            Factor::Lu(f) => f.solve_in_place(col),
            Factor::Llt(f) => f.solve_in_place(col),
        }
    }

    /// Solves in place, then applies `refinements` steps of iterative refinement.
    pub fn solve_in_place(&self, b: &mut [f64], refinements: usize) {
        if self.n == 0 {
            return;
        }
        let rhs = b.to_vec();
        self.solve_raw(b);
        let mut r = vec![0.0; self.n];
        for _ in 0..refinements {
            self.matrix.mul_into(b, &mut r);
            r.iter_mut().zip(&rhs).for_each(|(ri, bi)| *ri = bi - *ri);
            self.solve_raw(&mut r);
            b.iter_mut().zip(&r).for_each(|(x, d)| *x += d);
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice(), 1);
        x
    }

    /// `‖A x - b‖_∞`.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut r = vec![0.0; self.n];
        self.matrix.mul_into(x, &mut r);
        r.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_sort() {
        let a = CsrMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 1, 2.0), (1, 2, 0.5), (1, 0, -1.0)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 2), 1.5);
        assert_eq!(a.get(0, 0), 0.0);
        let y = a.mul(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert_eq!(y.as_slice(), &[4.0, 3.5]);
        assert_eq!(a.transpose().get(2, 1), 1.5);
    }

    #[test]
    fn solvers_agree_with_dense() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + i as f64 * 0.1));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let b = DVector::from_fn(n, |i, _| (i as f64).sin());
        let dense = a.to_dense().lu().solve(&b).unwrap();
        for s in [SparseSolver::lu(&a).unwrap(), SparseSolver::cholesky(&a).unwrap()] {
            assert!((s.solve(&b) - &dense).norm() < 1e-13);
        }
        let mut ns = a.clone();
        ns.values[1] = 3.0;
        let x = SparseSolver::lu(&ns).unwrap().solve(&b);
        assert!((ns.mul(&x) - &b).norm() < 1e-12);
    }

    #[test]
    fn select_and_asymmetry() {
        let a = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (2, 0, 2.0), (1, 1, 5.0), (2, 2, 3.0)]);
        assert_eq!(a.asymmetry(), 0.0);
        let s = a.select(&[0, 2], &[0, 2]);
        assert_eq!(s.to_dense(), nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
    }
}
