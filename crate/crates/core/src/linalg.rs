//! Thin wrappers around faer's sparse factorizations and small dense helpers.

use crate::c64;
use crate::error::{Error, Result};
use crate::fem::SparseMatrix;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

pub fn to_faer<T: Copy + num_traits::Zero + std::ops::AddAssign>(m: &SparseMatrix<T>) -> Result<SparseColMat<usize, T>>
where
    T: faer::traits::ComplexField,
{
    let trips: Vec<Triplet<usize, usize, T>> =
        m.triplets().into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseColMat::try_new_from_triplets(m.nrows, m.ncols, &trips)
        .map_err(|e| Error::Factorization(format!("sparse conversion: {e:?}")))
}

/// Sparse Cholesky factorization of a real symmetric positive definite matrix.
pub struct RealCholesky {
    n: usize,
    llt: Option<Llt<usize, f64>>,
}

impl RealCholesky {
    pub fn new(m: &SparseMatrix<f64>) -> Result<Self> {
        if m.nrows != m.ncols {
            return Err(Error::Dimension { expected: m.nrows, got: m.ncols });
        }
        if m.nrows == 0 {
            return Ok(RealCholesky { n: 0, llt: None });
        }
        let a = to_faer(m)?;
        let llt = a.sp_cholesky(Side::Lower).map_err(|e| Error::Factorization(format!("cholesky: {e:?}")))?;
        Ok(RealCholesky { n: m.nrows, llt: Some(llt) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let Some(llt) = &self.llt else { return vec![] };
        let mut x = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        llt.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solves with a complex right-hand side (real and imaginary parts separately).
    pub fn solve_c(&self, b: &[c64]) -> Vec<c64> {
        assert_eq!(b.len(), self.n);
        let Some(llt) = &self.llt else { return vec![] };
        let mut x = Mat::<f64>::from_fn(self.n, 2, |i, j| if j == 0 { b[i].re } else { b[i].im });
        llt.solve_in_place(x.as_mut());
        (0..self.n).map(|i| c64::new(x[(i, 0)], x[(i, 1)])).collect()
    }
}

/// Sparse LU factorization of a general complex matrix.
pub struct ComplexLu {
    n: usize,
    lu: Lu<usize, c64>,
}

impl ComplexLu {
    pub fn new(m: &SparseMatrix<c64>) -> Result<Self> {
        if m.nrows != m.ncols {
            return Err(Error::Dimension { expected: m.nrows, got: m.ncols });
        }
        let a = to_faer(m)?;
        let lu = a.sp_lu().map_err(|e| Error::Factorization(format!("lu: {e:?}")))?;
        Ok(ComplexLu { n: m.nrows, lu })
    }

    pub fn solve(&self, b: &[c64]) -> Vec<c64> {
        assert_eq!(b.len(), self.n);
        let mut x = Mat::<c64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

#[inline]
pub fn dotc(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).fold(c64::new(0.0, 0.0), |s, (x, y)| s + x.conj() * y)
}

#[inline]
pub fn norm2(a: &[c64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[inline]
pub fn axpy(alpha: c64, x: &[c64], y: &mut [c64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn is_finite(a: &[c64]) -> bool {
    a.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

pub fn to_complex(a: &[f64]) -> Vec<c64> {
    a.iter().map(|&x| c64::new(x, 0.0)).collect()
}

/// Dense eigen-decomposition of a small complex matrix (row-major input).
/// Returns eigenvalues and column eigenvectors.
pub fn dense_eigen(n: usize, a: &[c64]) -> Result<(Vec<c64>, Vec<Vec<c64>>)> {
    let m = Mat::<c64>::from_fn(n, n, |i, j| a[i * n + j]);
    let e = m.eigen().map_err(|e| Error::NoConvergence(format!("dense eigen: {e:?}")))?;
    let s = e.S();
    let u = e.U();
    let vals = (0..n).map(|i| s[i]).collect();
    let vecs = (0..n).map(|j| (0..n).map(|i| u[(i, j)]).collect()).collect();
    Ok((vals, vecs))
}

/// Inverse of a symmetric positive definite 6x6 block via Cholesky.
pub fn spd_inverse6(a: &[[f64; 6]; 6]) -> Option<[[f64; 6]; 6]> {
    let mut l = [[0.0f64; 6]; 6];
    for i in 0..6 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut inv = [[0.0f64; 6]; 6];
    for col in 0..6 {
        let mut y = [0.0f64; 6];
        for i in 0..6 {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        for i in (0..6).rev() {
            let mut s = y[i];
            for k in (i + 1)..6 {
                s -= l[k][i] * inv[k][col];
            }
            inv[i][col] = s / l[i][i];
        }
    }
    Some(inv)
}
