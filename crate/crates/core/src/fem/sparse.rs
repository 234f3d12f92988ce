use crate::error::{Error, Result};
use num_traits::Zero;
use std::ops::{AddAssign, Mul};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Copy + Zero + AddAssign> SparseMatrix<T> {
    /// Duplicates are summed in their input order, so equal inputs give
    /// bit-identical matrices. Entries summing to exact zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, trips: &[(usize, usize, T)]) -> Result<Self> {
        for &(r, c, _) in trips {
            if r >= nrows || c >= ncols {
                return Err(Error::Invalid(format!("triplet ({r},{c}) outside {nrows}x{ncols}")));
            }
        }
        let mut order: Vec<usize> = (0..trips.len()).collect();
        order.sort_by_key(|&i| (trips[i].0, trips[i].1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trips.len());
        let mut values: Vec<T> = Vec::with_capacity(trips.len());
        let mut rows = Vec::with_capacity(trips.len());
        let mut i = 0;
        while i < order.len() {
            let (r, c, _) = trips[order[i]];
            let mut s = T::zero();
            while i < order.len() && trips[order[i]].0 == r && trips[order[i]].1 == c {
                s += trips[order[i]].2;
                i += 1;
            }
            if !s.is_zero() {
                rows.push(r);
                indices.push(c);
                values.push(s);
            }
        }
        for &r in &rows {
            indptr[r + 1] += 1;
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Ok(SparseMatrix { nrows, ncols, indptr, indices, values })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: vec![], values: vec![] }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let row = self.indptr[r]..self.indptr[r + 1];
        match self.indices[row.clone()].binary_search(&c) {
            Ok(k) => self.values[row.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                out.push((r, c, v));
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t).expect("indices in range")
    }

    pub fn map<U: Copy + Zero + AddAssign>(&self, f: impl Fn(T) -> U) -> SparseMatrix<U> {
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    /// `y = self * x` for any vector scalar that can be scaled by `T`.
    pub fn mul_vec<U>(&self, x: &[U]) -> Vec<U>
    where
        U: Copy + Zero + AddAssign + Mul<T, Output = U>,
    {
        assert_eq!(x.len(), self.ncols, "vector length");
        (0..self.nrows)
            .map(|r| {
                let mut s = U::zero();
                for k in self.indptr[r]..self.indptr[r + 1] {
                    s += x[self.indices[k]] * self.values[k];
                }
                s
            })
            .collect()
    }

    /// `y = self^T * x`.
    pub fn mul_vec_t<U>(&self, x: &[U]) -> Vec<U>
    where
        U: Copy + Zero + AddAssign + Mul<T, Output = U>,
    {
        assert_eq!(x.len(), self.nrows, "vector length");
        let mut y = vec![U::zero(); self.ncols];
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += x[r] * self.values[k];
            }
        }
        y
    }
}

impl<T: Copy + Zero + AddAssign + Mul<Output = T>> SparseMatrix<T> {
    pub fn matmul(&self, o: &SparseMatrix<T>) -> Result<SparseMatrix<T>> {
        if self.ncols != o.nrows {
            return Err(Error::Dimension { expected: self.ncols, got: o.nrows });
        }
        let mut trips = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in o.row(k) {
                    trips.push((r, c, a * b));
                }
            }
        }
        SparseMatrix::from_triplets(self.nrows, o.ncols, &trips)
    }
}

/// Symmetry class of an assembled form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    HermitianPd,
    Hermitian,
    General,
}

/// An assembled sesquilinear form: entry `(i, j)` is `a(phi_j, phi_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseForm<T> {
    pub matrix: SparseMatrix<T>,
    pub symmetry: Symmetry,
}

impl<T> SparseForm<T> {
    pub fn new(matrix: SparseMatrix<T>, symmetry: Symmetry) -> Self {
        SparseForm { matrix, symmetry }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(2, 3, &[(0, 1, 1.0), (1, 2, 2.0), (0, 1, 2.5), (1, 0, 1.0), (1, 0, -1.0)])
            .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 3.5);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![7.0, 6.0]);
        assert_eq!(m.mul_vec_t(&[1.0, 1.0]), vec![0.0, 3.5, 2.0]);
        assert_eq!(m.transpose().get(2, 1), 2.0);
        assert!(SparseMatrix::from_triplets(1, 1, &[(1, 0, 1.0)]).is_err());
    }

    #[test]
    fn matmul_small() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1i64), (0, 1, 2), (1, 1, 3)]).unwrap();
        let b = a.matmul(&a).unwrap();
        assert_eq!(b.to_dense(), vec![vec![1, 8], vec![0, 9]]);
    }
}
