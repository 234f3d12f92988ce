//! The discretized Maxwell operator as a generalized eigenproblem `A x = w B x`.
//!
//! Unknowns are `x = (E, H)` with `E` in the broken flux space (`6 * ncells`
//! unknowns) and `H` on edges. The weak statements are
//!
//! ```text
//!  i (curl H, psi)                      = w (eps E, psi)
//! -i (E, curl v) - i (Z H_tan, v_tan)   = w (mu H, v)
//! ```
//!
//! so `A = [[0, iK], [-iK^T, -iB_Z]]` and `B = diag(M_eps, M_mu)`.

use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::fem::{
    assemble_boundary_form, assemble_curl_pairing, assemble_flux_edge_mass, assemble_flux_mass, assemble_mass,
    discrete_curl, CellBlocks, ImpedanceSpec, SparseForm, SparseMatrix, Symmetry,
};
use crate::linalg::{dotc, is_finite, ComplexLu};
use crate::materials::{MaterialField, SymTensor};
use crate::mesh::BoxMesh;

/// Identifiers of the inputs an operator was assembled from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub mesh_id: String,
    pub material_id: String,
    pub impedance_id: String,
}

#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub mesh: BoxMesh,
    pub field: MaterialField,
    pub impedance: ImpedanceSpec,
    /// Size of the E block (`6 * ncells`).
    pub n_e: usize,
    /// Size of the H block (number of edges).
    pub n_h: usize,
    pub m_eps: CellBlocks,
    pub m_eps_inv: CellBlocks,
    pub m_mu: SparseMatrix<f64>,
    /// Curl pairing `K` (flux rows, edge columns).
    pub curl: SparseMatrix<f64>,
    /// Integer curl incidence `D` with `K = M_1 D`.
    pub incidence: SparseMatrix<f64>,
    pub b_z: SparseMatrix<c64>,
    pub provenance: Provenance,
}

/// FNV-1a over the bit patterns of the material entries.
fn material_hash(field: &MaterialField) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for t in field.eps.iter().chain(field.mu.iter()) {
        for v in t.entries {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
    }
    format!("{h:016x}")
}

pub fn assemble_maxwell(mesh: &BoxMesh, field: &MaterialField, z: &ImpedanceSpec) -> Result<OperatorPair> {
    if field.ncells() != mesh.ncells() {
        return Err(Error::Dimension { expected: mesh.ncells(), got: field.ncells() });
    }
    let m_eps = assemble_flux_mass(mesh, &field.eps)?;
    let m_eps_inv = m_eps.inverse()?;
    let m_mu = assemble_mass(mesh, &field.mu)?.matrix;
    let curl = assemble_curl_pairing(mesh).matrix;
    let incidence = discrete_curl::<f64>(mesh);
    let b_z = assemble_boundary_form(mesh, z)?.matrix;
    let provenance = Provenance {
        mesh_id: format!(
            "box({},{},{};{},{},{})",
            mesh.n[0], mesh.n[1], mesh.n[2], mesh.len[0], mesh.len[1], mesh.len[2]
        ),
        material_id: material_hash(field),
        impedance_id: z.label(),
    };
    Ok(OperatorPair {
        mesh: mesh.clone(),
        field: field.clone(),
        impedance: z.clone(),
        n_e: 6 * mesh.ncells(),
        n_h: mesh.nedges(),
        m_eps,
        m_eps_inv,
        m_mu,
        curl,
        incidence,
        b_z,
        provenance,
    })
}

fn scale(v: &mut [c64], s: c64) {
    v.iter_mut().for_each(|x| *x *= s);
}

impl OperatorPair {
    pub fn dim(&self) -> usize {
        self.n_e + self.n_h
    }

    pub fn split<'a>(&self, x: &'a [c64]) -> (&'a [c64], &'a [c64]) {
        x.split_at(self.n_e)
    }

    pub fn apply_a(&self, x: &[c64]) -> Vec<c64> {
        let (e, h) = self.split(x);
        let i = c64::new(0.0, 1.0);
        let mut top = self.curl.mul_vec(h);
        scale(&mut top, i);
        let mut bot = self.curl.mul_vec_t(e);
        let bz = self.b_z.mul_vec(h);
        bot.iter_mut().zip(bz).for_each(|(a, b)| *a = -i * (*a + b));
        top.extend(bot);
        top
    }

    pub fn apply_b(&self, x: &[c64]) -> Vec<c64> {
        let (e, h) = self.split(x);
        let mut out = self.m_eps.mul(e);
        out.extend(self.m_mu.mul_vec(h));
        out
    }

    /// `x^H B x`, the energy `(eps E, E) + (mu H, H)`.
    pub fn energy(&self, x: &[c64]) -> f64 {
        dotc(x, &self.apply_b(x)).re
    }

    pub fn rayleigh_quotient(&self, x: &[c64]) -> Result<c64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        let b = self.energy(x);
        if !(b > 0.0) {
            return invalid("rayleigh quotient of the zero vector");
        }
        Ok(dotc(x, &self.apply_a(x)) / b)
    }

    /// Assembled `A` (E block first).
    pub fn a_form(&self) -> SparseForm<c64> {
        let i = c64::new(0.0, 1.0);
        let mut trips = Vec::new();
        for (r, c, v) in self.curl.triplets() {
            trips.push((r, self.n_e + c, i * v));
            trips.push((self.n_e + c, r, -i * v));
        }
        for (r, c, v) in self.b_z.triplets() {
            trips.push((self.n_e + r, self.n_e + c, -i * v));
        }
        let m = SparseMatrix::from_triplets(self.dim(), self.dim(), &trips).expect("indices in range");
        let sym = if self.impedance.is_selfadjoint_class() { Symmetry::Hermitian } else { Symmetry::General };
        SparseForm::new(m, sym)
    }

    /// Assembled block-diagonal `B`.
    pub fn b_form(&self) -> SparseForm<c64> {
        let mut trips: Vec<_> = self.m_eps.to_sparse().triplets().into_iter().map(|(r, c, v)| (r, c, c64::new(v, 0.0))).collect();
        for (r, c, v) in self.m_mu.triplets() {
            trips.push((self.n_e + r, self.n_e + c, c64::new(v, 0.0)));
        }
        let m = SparseMatrix::from_triplets(self.dim(), self.dim(), &trips).expect("indices in range");
        SparseForm::new(m, Symmetry::HermitianPd)
    }

    /// `K^T M_eps^-1 K`, the weighted curl-curl form on edges, assembled cellwise.
    pub fn curl_curl(&self) -> SparseMatrix<f64> {
        let h = self.mesh.h();
        let m1 = crate::fem::element::flux_mass(&SymTensor::identity(), h);
        let dm = crate::fem::element::local_curl();
        let mut local_k = [[0.0f64; 12]; 6];
        for i in 0..6 {
            for j in 0..12 {
                local_k[i][j] = (0..6).map(|k| m1[i][k] * dm[k][j] as f64).sum();
            }
        }
        let mut trips = Vec::with_capacity(144 * self.mesh.ncells());
        for c in 0..self.mesh.ncells() {
            let inv = &self.m_eps_inv.blocks[c];
            let mut ik = [[0.0f64; 12]; 6];
            for i in 0..6 {
                for j in 0..12 {
                    ik[i][j] = (0..6).map(|k| inv[i][k] * local_k[k][j]).sum();
                }
            }
            let edges = self.mesh.cell_edges(c);
            for a in 0..12 {
                for b in 0..12 {
                    let v: f64 = (0..6).map(|i| local_k[i][a] * ik[i][b]).sum();
                    if v != 0.0 {
                        trips.push((edges[a], edges[b], v));
                    }
                }
            }
        }
        SparseMatrix::from_triplets(self.n_h, self.n_h, &trips).expect("indices in range")
    }

    /// L2 projection of an edge field onto the flux space (cellwise).
    pub fn edge_to_flux(&self, u: &[c64]) -> Vec<c64> {
        let p = assemble_flux_edge_mass(&self.mesh);
        let rhs = p.mul_vec(u);
        let id = vec![SymTensor::identity(); self.mesh.ncells()];
        let m1_inv = assemble_flux_mass(&self.mesh, &id).and_then(|m| m.inverse()).expect("identity flux mass");
        m1_inv.mul(&rhs)
    }

    /// Factorization of the H-Schur complement of `A - sigma B`:
    /// `K^T M_eps^-1 K - i sigma B_Z - sigma^2 M_mu`.
    pub fn factor_shifted(&self, sigma: c64) -> Result<ShiftedSolver<'_>> {
        if sigma.norm() == 0.0 || !sigma.re.is_finite() || !sigma.im.is_finite() {
            return Err(Error::Factorization("shift must be finite and nonzero".into()));
        }
        let i = c64::new(0.0, 1.0);
        let mut trips: Vec<(usize, usize, c64)> = self.curl_curl().triplets().into_iter().map(|(r, c, v)| (r, c, c64::new(v, 0.0))).collect();
        for (r, c, v) in self.b_z.triplets() {
            trips.push((r, c, -i * sigma * v));
        }
        let s2 = sigma * sigma;
        for (r, c, v) in self.m_mu.triplets() {
            trips.push((r, c, -s2 * v));
        }
        let k = SparseMatrix::from_triplets(self.n_h, self.n_h, &trips)?;
        let lu = ComplexLu::new(&k)?;
        let solver = ShiftedSolver { op: self, sigma, lu };
        // a zero pivot shows up as non-finite output rather than an error
        let probe: Vec<c64> = (0..self.dim()).map(|j| c64::new(1.0 + (j % 7) as f64, (j % 3) as f64)).collect();
        if !is_finite(&solver.solve(&probe)) {
            return Err(Error::Factorization(format!("shifted operator singular at {sigma}")));
        }
        Ok(solver)
    }
}

/// Solves `(A - sigma B) y = r` through the H-Schur complement.
pub struct ShiftedSolver<'a> {
    op: &'a OperatorPair,
    pub sigma: c64,
    lu: ComplexLu,
}

impl ShiftedSolver<'_> {
    pub fn solve(&self, r: &[c64]) -> Vec<c64> {
        let op = self.op;
        let (re, rh) = op.split(r);
        let i = c64::new(0.0, 1.0);
        let s = self.sigma;
        let meinv_re = op.m_eps_inv.mul(re);
        let kt = op.curl.mul_vec_t(&meinv_re);
        let rhs: Vec<c64> = rh.iter().zip(&kt).map(|(a, b)| s * a - i * b).collect();
        let h = self.lu.solve(&rhs);
        let kh = op.curl.mul_vec(&h);
        let t: Vec<c64> = kh.iter().zip(re).map(|(a, b)| i * a - b).collect();
        let mut e = op.m_eps_inv.mul(&t);
        scale(&mut e, 1.0 / s);
        e.extend(h);
        e
    }

    /// `(A - sigma B)^-1 B x`.
    pub fn apply_inverse_b(&self, x: &[c64]) -> Vec<c64> {
        self.solve(&self.op.apply_b(x))
    }
}

/// Resolvent solve: `x` with `(A - w B) x = B f`, for `Im w > 0`.
///
/// Eliminating `E` gives the coercive H-problem
/// `(eps^-1 curl H, curl v) - i w (Z H_tan, v_tan) - w^2 (mu H, v) = w (mu f_H, v) - i (f_E, curl v)`,
/// and `E = w^-1 (i eps^-1 curl H - f_E)`.
pub fn resolvent_solve(op: &OperatorPair, omega: c64, f: &[c64]) -> Result<Vec<c64>> {
    if !(omega.im > 0.0) {
        return invalid("resolvent needs Im omega > 0");
    }
    if f.len() != op.dim() {
        return Err(Error::Dimension { expected: op.dim(), got: f.len() });
    }
    let solver = op.factor_shifted(omega)?;
    let x = solver.apply_inverse_b(f);
    let bf = op.apply_b(f);
    let ax = op.apply_a(&x);
    let bx = op.apply_b(&x);
    let res: f64 = ax.iter().zip(&bx).zip(&bf).map(|((a, b), c)| (a - omega * b - c).norm_sqr()).sum::<f64>().sqrt();
    let scale = crate::linalg::norm2(&bf).max(f64::MIN_POSITIVE);
    if !(res <= 1e-8 * scale) && crate::linalg::norm2(&bf) > 0.0 {
        return Err(Error::Factorization(format!("resolvent residual {res:e} too large")));
    }
    Ok(x)
}
