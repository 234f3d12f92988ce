//! Removal of the discrete kernel of `A`.
//!
//! `ker A = {(E, 0) : K^T E = 0} + {(0, G q)}` with `q` on interior vertices
//! (all vertices but one for PEC). Both parts are `B`-orthogonal to every
//! eigenvector with nonzero eigenvalue, so Krylov vectors are projected onto
//! the `B`-orthogonal complement block by block.

use crate::c64;
use crate::error::Result;
use crate::fem::{GradientProjector, SparseMatrix};
use crate::linalg::RealCholesky;
use crate::mesh::BoxMesh;
use crate::operator::OperatorPair;

/// Spanning tree of the vertex graph: all z-edges, the y-edges in the plane
/// `z = 0` and the x-edges on the line `y = z = 0`.
pub fn spanning_tree(mesh: &BoxMesh) -> Vec<bool> {
    (0..mesh.nedges())
        .map(|e| {
            let (d, p) = mesh.edge_info(e);
            match d {
                2 => true,
                1 => p[2] == 0,
                _ => p[1] == 0 && p[2] == 0,
            }
        })
        .collect()
}

/// Vertices whose gradients lie in the H part of the kernel.
pub fn kernel_vertices(op: &OperatorPair) -> Vec<usize> {
    if op.impedance.is_pec() {
        (1..op.mesh.nverts()).collect()
    } else {
        op.mesh.interior_vertices()
    }
}

/// Dimension of the deflated kernel.
pub fn kernel_dim(op: &OperatorPair) -> usize {
    let rank_k = op.n_h - (op.mesh.nverts() - 1);
    op.n_e - rank_k + kernel_vertices(op).len()
}

pub struct Deflator {
    n_e: usize,
    curl: SparseMatrix<f64>,
    m_eps_inv: crate::fem::CellBlocks,
    cotree: Vec<usize>,
    e_chol: RealCholesky,
    h_proj: Option<GradientProjector>,
}

impl Deflator {
    pub fn new(op: &OperatorPair) -> Result<Self> {
        let tree = spanning_tree(&op.mesh);
        let cotree: Vec<usize> = (0..op.n_h).filter(|&e| !tree[e]).collect();
        let mut pos = vec![usize::MAX; op.n_h];
        for (k, &e) in cotree.iter().enumerate() {
            pos[e] = k;
        }
        let s = op.curl_curl();
        let trips: Vec<_> = s
            .triplets()
            .into_iter()
            .filter(|&(r, c, _)| pos[r] != usize::MAX && pos[c] != usize::MAX)
            .map(|(r, c, v)| (pos[r], pos[c], v))
            .collect();
        let scc = SparseMatrix::from_triplets(cotree.len(), cotree.len(), &trips)?;
        let e_chol = RealCholesky::new(&scc)?;
        let verts = kernel_vertices(op);
        let h_proj = if verts.is_empty() { None } else { Some(GradientProjector::new(&op.mesh, &op.m_mu, &verts)?) };
        Ok(Deflator { n_e: op.n_e, curl: op.curl.clone(), m_eps_inv: op.m_eps_inv.clone(), cotree, e_chol, h_proj })
    }

    /// `M_eps`-orthogonal projection of `E` onto `range(M_eps^-1 K)`.
    pub fn project_e(&self, e: &[c64]) -> Vec<c64> {
        let b = self.curl.mul_vec_t(e);
        let bc: Vec<c64> = self.cotree.iter().map(|&k| b[k]).collect();
        let yc = self.e_chol.solve_c(&bc);
        let mut y = vec![c64::new(0.0, 0.0); self.curl.ncols];
        for (k, &edge) in self.cotree.iter().enumerate() {
            y[edge] = yc[k];
        }
        self.m_eps_inv.mul(&self.curl.mul_vec(&y))
    }

    /// `M_mu`-orthogonal removal of kernel gradients from `H`.
    pub fn project_h(&self, h: &mut [c64]) {
        if let Some(p) = &self.h_proj {
            p.remove_gradient(h);
        }
    }

    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        let (e, h) = x.split_at(self.n_e);
        let mut out = self.project_e(e);
        let mut hh = h.to_vec();
        self.project_h(&mut hh);
        out.extend(hh);
        out
    }
}

/// Applies `B^-1` (cellwise inverse on E, Cholesky of `M_mu` on H).
pub struct MassSolver {
    n_e: usize,
    m_eps_inv: crate::fem::CellBlocks,
    mu_chol: RealCholesky,
}

impl MassSolver {
    pub fn new(op: &OperatorPair) -> Result<Self> {
        Ok(MassSolver { n_e: op.n_e, m_eps_inv: op.m_eps_inv.clone(), mu_chol: RealCholesky::new(&op.m_mu)? })
    }

    pub fn solve(&self, r: &[c64]) -> Vec<c64> {
        let (e, h) = r.split_at(self.n_e);
        let mut out = self.m_eps_inv.mul(e);
        out.extend(self.mu_chol.solve_c(h));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{discrete_gradient, ImpedanceSpec};
    use crate::linalg::{dotc, norm2};
    use crate::materials::random_field;
    use crate::operator::assemble_maxwell;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tree_has_vertex_count_minus_one_edges() {
        let m = BoxMesh::new(3, 2, 4, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(spanning_tree(&m).iter().filter(|&&t| t).count(), m.nverts() - 1);
    }

    #[test]
    fn projection_is_idempotent_and_kills_kernel() {
        let mesh = BoxMesh::new(3, 2, 2, 1.0, 0.7, 1.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let field = random_field(&mut rng, mesh.ncells(), 1.0, 5.0);
        let op = assemble_maxwell(&mesh, &field, &ImpedanceSpec::real(1.0)).unwrap();
        let d = Deflator::new(&op).unwrap();
        let x: Vec<c64> = (0..op.dim()).map(|_| c64::new(rng.random::<f64>(), rng.random::<f64>())).collect();
        let px = d.apply(&x);
        let ppx = d.apply(&px);
        let diff: Vec<c64> = px.iter().zip(&ppx).map(|(a, b)| a - b).collect();
        assert!(norm2(&diff) < 1e-11 * norm2(&px));
        // the removed part is B-orthogonal to the kept part
        let rem: Vec<c64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
        let ip = dotc(&rem, &op.apply_b(&px)).norm();
        assert!(ip < 1e-10 * op.energy(&x));
        // removed part is in the kernel
        assert!(norm2(&op.apply_a(&rem)) < 1e-10 * norm2(&x));
        let g = discrete_gradient::<f64>(&mesh);
        let p: Vec<c64> = (0..g.ncols).map(|_| c64::new(rng.random::<f64>(), 0.0)).collect();
        let mut k = op.edge_to_flux(&g.mul_vec(&p));
        k.extend(g.mul_vec(&p));
        assert!(norm2(&d.apply(&k)) < 1e-11 * norm2(&k));
    }

    #[test]
    fn kernel_dimension_matches_dense_rank() {
        let mesh = BoxMesh::cube(1, 1.0).unwrap();
        let op = assemble_maxwell(&mesh, &crate::MaterialField::vacuum(1), &ImpedanceSpec::real(1.0)).unwrap();
        // 6 flux unknowns, curl of 12 edges has rank 12 - 7 = 5, no interior vertex
        assert_eq!(kernel_dim(&op), 1);
        let pec = assemble_maxwell(&mesh, &crate::MaterialField::vacuum(1), &ImpedanceSpec::Pec).unwrap();
        assert_eq!(kernel_dim(&pec), 8);
    }
}
