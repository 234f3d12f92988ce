use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Real symmetric 3x3 tensor stored as the upper triangle in row-major order
/// `[a11, a12, a13, a22, a23, a33]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymTensor<T> {
    pub entries: [T; 6],
}

const IDX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

impl<T: Real> SymTensor<T> {
    pub fn from_entries(entries: [T; 6]) -> Self {
        SymTensor { entries }
    }

    /// Builds a tensor from a full matrix; rejects exact asymmetry and non-finite entries.
    pub fn from_matrix(m: [[T; 3]; 3]) -> Result<Self> {
        for row in &m {
            for v in row {
                if !v.is_finite() {
                    return invalid("non-finite tensor entry");
                }
            }
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                if m[i][j] != m[j][i] {
                    return invalid("tensor is not symmetric");
                }
            }
        }
        Ok(SymTensor { entries: [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]] })
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        let z = T::zero();
        SymTensor { entries: [a, z, z, b, z, c] }
    }

    pub fn scalar(c: T) -> Self {
        Self::diag(c, c, c)
    }

    pub fn identity() -> Self {
        Self::scalar(T::one())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[IDX[i][j]]
    }

    pub fn to_matrix(&self) -> [[T; 3]; 3] {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> T {
        self.entries[0] + self.entries[3] + self.entries[5]
    }

    pub fn scale(&self, s: T) -> Self {
        let mut e = self.entries;
        e.iter_mut().for_each(|v| *v *= s);
        SymTensor { entries: e }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut e = self.entries;
        e.iter_mut().zip(o.entries.iter()).for_each(|(a, b)| *a += *b);
        SymTensor { entries: e }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-T::one()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        let e = &self.entries;
        let off = e[1] * e[1] + e[2] * e[2] + e[4] * e[4];
        (e[0] * e[0] + e[3] * e[3] + e[5] * e[5] + off + off).sqrt()
    }

    pub fn mul_vec(&self, v: [T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.get(i, 0) * v[0] + self.get(i, 1) * v[1] + self.get(i, 2) * v[2];
        }
        out
    }

    /// `R A R^T` for a (not necessarily orthogonal) 3x3 matrix `R`.
    pub fn congruence(&self, r: &[[T; 3]; 3]) -> Self {
        let a = self.to_matrix();
        let mut ar = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    ar[i][j] += a[i][k] * r[j][k];
                }
            }
        }
        let mut e = [T::zero(); 6];
        for i in 0..3 {
            for j in i..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s += r[i][k] * ar[k][j];
                }
                e[IDX[i][j]] = s;
            }
        }
        SymTensor { entries: e }
    }

    /// Assembles `V diag(w) V^T` where the columns of `v` are the eigenvectors.
    pub fn from_spectrum(w: [T; 3], v: &[[T; 3]; 3]) -> Self {
        let mut e = [T::zero(); 6];
        for i in 0..3 {
            for j in i..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s += v[i][k] * w[k] * v[j][k];
                }
                e[IDX[i][j]] = s;
            }
        }
        SymTensor { entries: e }
    }

    /// Cyclic Jacobi eigen-decomposition. Eigenvalues ascending; eigenvector `k`
    /// is the column `v[.][k]`.
    pub fn eigen(&self) -> ([T; 3], [[T; 3]; 3]) {
        let mut a = self.to_matrix();
        let mut v = [[T::zero(); 3]; 3];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = T::one();
        }
        let two = T::lit(2.0);
        for _sweep in 0..64 {
            let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
            let diag = a[0][0].abs() + a[1][1].abs() + a[2][2].abs();
            if off <= T::epsilon() * T::epsilon() * diag.max(T::min_positive_value()) || off == T::zero() {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..3 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..3 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
        let w = [a[order[0]][order[0]], a[order[1]][order[1]], a[order[2]][order[2]]];
        let mut vs = [[T::zero(); 3]; 3];
        for r in 0..3 {
            for (k, &o) in order.iter().enumerate() {
                vs[r][k] = v[r][o];
            }
        }
        (w, vs)
    }

    pub fn eigenvalues(&self) -> [T; 3] {
        self.eigen().0
    }

    pub fn det(&self) -> T {
        let m = self.to_matrix();
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        let m = self.to_matrix();
        let c = |i: usize, j: usize| {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]
        };
        let inv = [
            [c(0, 0) / d, c(1, 0) / d, c(2, 0) / d],
            [c(0, 1) / d, c(1, 1) / d, c(2, 1) / d],
            [c(0, 2) / d, c(1, 2) / d, c(2, 2) / d],
        ];
        Some(SymTensor { entries: [inv[0][0], inv[0][1], inv[0][2], inv[1][1], inv[1][2], inv[2][2]] })
    }
}

impl<T: Real> Default for SymTensor<T> {
    fn default() -> Self {
        Self::identity()
    }
}

/// True iff the spectrum of `a` lies in `[alpha - tol, beta + tol]`, `tol = 1e-9 * beta`.
pub fn check_coercivity<T: Real>(a: &SymTensor<T>, alpha: T, beta: T) -> Result<bool> {
    if !(alpha > T::zero()) || !(beta >= alpha) {
        return invalid("coercivity bounds need 0 < alpha <= beta");
    }
    if !a.is_finite() {
        return invalid("non-finite tensor entry");
    }
    let tol = T::lit(1e-9) * beta;
    let w = a.eigenvalues();
    Ok(w[0] >= alpha - tol && w[2] <= beta + tol)
}
