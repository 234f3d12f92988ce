use super::assembly::assemble_mass;
use super::incidence::{discrete_gradient, gradient_incidence};
use super::sparse::SparseMatrix;
use crate::c64;
use crate::error::Result;
use crate::linalg::{dotc, RealCholesky};
use crate::materials::SymTensor;
use crate::mesh::BoxMesh;

/// Weighted L2 projection of edge fields onto gradients of nodal functions
/// supported on a chosen vertex set: solves `(G^T M G) p = G^T M u`.
pub struct GradientProjector {
    g: SparseMatrix<f64>,
    m: SparseMatrix<f64>,
    chol: RealCholesky,
}

impl GradientProjector {
    pub fn new(mesh: &BoxMesh, mass: &SparseMatrix<f64>, vertices: &[usize]) -> Result<Self> {
        let g = gradient_incidence::<f64>(mesh, vertices);
        Self::from_parts(g, mass.clone())
    }

    pub fn from_parts(g: SparseMatrix<f64>, m: SparseMatrix<f64>) -> Result<Self> {
        let gt = g.transpose();
        let mg = m.matmul(&g)?;
        let k = gt.matmul(&mg)?;
        let chol = RealCholesky::new(&k)?;
        Ok(GradientProjector { g, m, chol })
    }

    pub fn gradient(&self) -> &SparseMatrix<f64> {
        &self.g
    }

    /// Nodal potential `p` of the gradient part.
    pub fn potential(&self, u: &[c64]) -> Vec<c64> {
        if self.g.ncols == 0 {
            return vec![];
        }
        let rhs = self.g.mul_vec_t(&self.m.mul_vec(u));
        self.chol.solve_c(&rhs)
    }

    /// `G p`.
    pub fn gradient_part(&self, u: &[c64]) -> Vec<c64> {
        if self.g.ncols == 0 {
            return vec![c64::new(0.0, 0.0); u.len()];
        }
        self.g.mul_vec(&self.potential(u))
    }

    /// `u - G p`, in place.
    pub fn remove_gradient(&self, u: &mut [c64]) {
        let gp = self.gradient_part(u);
        u.iter_mut().zip(gp).for_each(|(a, b)| *a -= b);
    }
}

/// Splits `u` into `G p` (interior-vertex potential) and a remainder that is
/// discretely `xi`-divergence free: `G^T M_xi (u - G p) = 0`.
pub fn hodge_project(mesh: &BoxMesh, xi: &[SymTensor<f64>], u: &[c64]) -> Result<(Vec<c64>, Vec<c64>)> {
    if u.len() != mesh.nedges() {
        return Err(crate::Error::Dimension { expected: mesh.nedges(), got: u.len() });
    }
    if !crate::linalg::is_finite(u) {
        return crate::error::invalid("non-finite field coefficients");
    }
    let m = assemble_mass(mesh, xi)?.matrix;
    let proj = GradientProjector::from_parts(discrete_gradient::<f64>(mesh), m)?;
    let grad = proj.gradient_part(u);
    let rest: Vec<c64> = u.iter().zip(&grad).map(|(a, b)| a - b).collect();
    Ok((grad, rest))
}

/// `M`-inner product helper used by tests and diagnostics.
pub fn m_inner(m: &SparseMatrix<f64>, a: &[c64], b: &[c64]) -> c64 {
    dotc(a, &m.mul_vec(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::materials::random_tensor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<c64> {
        (0..n).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    #[test]
    fn pure_gradient_input() {
        let mesh = BoxMesh::new(3, 3, 2, 1.0, 1.0, 1.0).unwrap();
        let xi = vec![SymTensor::identity(); mesh.ncells()];
        let g = discrete_gradient::<f64>(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = rand_vec(&mut rng, g.ncols);
        let u = g.mul_vec(&p);
        let (_, rest) = hodge_project(&mesh, &xi, &u).unwrap();
        assert!(norm2(&rest) < 1e-10 * norm2(&u));
    }

    #[test]
    fn constant_field_has_no_gradient_part() {
        let mesh = BoxMesh::new(3, 4, 3, 1.0, 2.0, 1.5).unwrap();
        let xi = vec![SymTensor::identity(); mesh.ncells()];
        // constant field (1, 2, -1): line integrals along each edge
        let c = [1.0, 2.0, -1.0];
        let u: Vec<c64> = (0..mesh.nedges())
            .map(|e| {
                let d = mesh.edge_info(e).0;
                c64::new(c[d] * mesh.edge_length(e), 0.0)
            })
            .collect();
        let m = assemble_mass(&mesh, &xi).unwrap().matrix;
        let g = discrete_gradient::<f64>(&mesh);
        let gtmu = g.mul_vec_t(&m.mul_vec(&u));
        assert!(norm2(&gtmu) < 1e-13);
        let (grad, _) = hodge_project(&mesh, &xi, &u).unwrap();
        assert!(norm2(&grad) < 1e-12 * norm2(&u));
    }

    #[test]
    fn random_decomposition() {
        let mesh = BoxMesh::new(3, 2, 3, 1.0, 0.8, 1.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xi: Vec<_> = (0..mesh.ncells()).map(|_| random_tensor(&mut rng, 1.0, 11.68)).collect();
        let u = rand_vec(&mut rng, mesh.nedges());
        let (grad, rest) = hodge_project(&mesh, &xi, &u).unwrap();
        let sum: Vec<c64> = grad.iter().zip(&rest).map(|(a, b)| a + b).collect();
        let diff: Vec<c64> = sum.iter().zip(&u).map(|(a, b)| a - b).collect();
        assert!(norm2(&diff) <= 1e-12 * norm2(&u));
        let m = assemble_mass(&mesh, &xi).unwrap().matrix;
        let ip = m_inner(&m, &grad, &rest).norm();
        let scale = (m_inner(&m, &grad, &grad).re * m_inner(&m, &rest, &rest).re).sqrt();
        assert!(ip <= 1e-10 * scale);
        let g = discrete_gradient::<f64>(&mesh);
        let div = g.mul_vec_t(&m.mul_vec(&rest));
        assert!(norm2(&div) < 1e-10 * norm2(&u));
    }

    #[test]
    fn rejects_bad_input() {
        let mesh = BoxMesh::cube(2, 1.0).unwrap();
        let xi = vec![SymTensor::identity(); mesh.ncells()];
        assert!(hodge_project(&mesh, &xi, &[c64::new(0.0, 0.0); 3]).is_err());
        let mut u = vec![c64::new(0.0, 0.0); mesh.nedges()];
        u[0] = c64::new(f64::NAN, 0.0);
        assert!(hodge_project(&mesh, &xi, &u).is_err());
    }
}
