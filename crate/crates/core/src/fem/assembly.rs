use super::element::{edge_mass, face_trace_mass, flux_edge_mass, flux_mass, local_curl};
use super::impedance::{ImpedanceSpec, BoundaryMatrix};
use super::sparse::{SparseForm, SparseMatrix, Symmetry};
use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::linalg::spd_inverse6;
use crate::materials::SymTensor;
use crate::mesh::BoxMesh;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::ops::{AddAssign, Mul};

fn check_cells(mesh: &BoxMesh, xi: &[SymTensor<f64>]) -> Result<()> {
    if xi.len() != mesh.ncells() {
        return Err(Error::Dimension { expected: mesh.ncells(), got: xi.len() });
    }
    Ok(())
}

/// Edge-element mass `M[i,j] = int <xi phi_j, phi_i>`.
pub fn assemble_mass(mesh: &BoxMesh, xi: &[SymTensor<f64>]) -> Result<SparseForm<f64>> {
    check_cells(mesh, xi)?;
    let h = mesh.h();
    let mut trips = Vec::with_capacity(144 * mesh.ncells());
    for (c, t) in xi.iter().enumerate() {
        let m = edge_mass(t, h);
        let edges = mesh.cell_edges(c);
        for i in 0..12 {
            for j in 0..12 {
                trips.push((edges[i], edges[j], m[i][j]));
            }
        }
    }
    let m = SparseMatrix::from_triplets(mesh.nedges(), mesh.nedges(), &trips)?;
    Ok(SparseForm::new(m, Symmetry::HermitianPd))
}

/// Block-diagonal mass of the broken flux space, one 6x6 block per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellBlocks {
    pub blocks: Vec<[[f64; 6]; 6]>,
}

impl CellBlocks {
    pub fn dim(&self) -> usize {
        6 * self.blocks.len()
    }

    pub fn mul<U>(&self, x: &[U]) -> Vec<U>
    where
        U: Copy + Zero + AddAssign + Mul<f64, Output = U>,
    {
        assert_eq!(x.len(), self.dim());
        let mut y = vec![U::zero(); x.len()];
        for (c, b) in self.blocks.iter().enumerate() {
            for i in 0..6 {
                let mut s = U::zero();
                for j in 0..6 {
                    s += x[6 * c + j] * b[i][j];
                }
                y[6 * c + i] = s;
            }
        }
        y
    }

    pub fn inverse(&self) -> Result<CellBlocks> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| spd_inverse6(b).ok_or_else(|| Error::Factorization("cell mass not positive definite".into())))
            .collect::<Result<Vec<_>>>()?;
        Ok(CellBlocks { blocks })
    }

    pub fn to_sparse(&self) -> SparseMatrix<f64> {
        let mut trips = Vec::with_capacity(36 * self.blocks.len());
        for (c, b) in self.blocks.iter().enumerate() {
            for i in 0..6 {
                for j in 0..6 {
                    trips.push((6 * c + i, 6 * c + j, b[i][j]));
                }
            }
        }
        SparseMatrix::from_triplets(self.dim(), self.dim(), &trips).expect("indices in range")
    }
}

pub fn assemble_flux_mass(mesh: &BoxMesh, xi: &[SymTensor<f64>]) -> Result<CellBlocks> {
    check_cells(mesh, xi)?;
    let h = mesh.h();
    Ok(CellBlocks { blocks: xi.iter().map(|t| flux_mass(t, h)).collect() })
}

/// Curl pairing `K[i,j] = int <curl phi_j, psi_i>` between edge shapes and the
/// broken flux shapes (rows `6c + m`).
pub fn assemble_curl_pairing(mesh: &BoxMesh) -> SparseForm<f64> {
    let h = mesh.h();
    let m1 = flux_mass(&SymTensor::identity(), h);
    let dm = local_curl();
    let mut local = [[0.0f64; 12]; 6];
    for i in 0..6 {
        for j in 0..12 {
            local[i][j] = (0..6).map(|k| m1[i][k] * dm[k][j] as f64).sum();
        }
    }
    let mut trips = Vec::with_capacity(72 * mesh.ncells());
    for c in 0..mesh.ncells() {
        let edges = mesh.cell_edges(c);
        for i in 0..6 {
            for j in 0..12 {
                if local[i][j] != 0.0 {
                    trips.push((6 * c + i, edges[j], local[i][j]));
                }
            }
        }
    }
    let m = SparseMatrix::from_triplets(6 * mesh.ncells(), mesh.nedges(), &trips).expect("indices in range");
    SparseForm::new(m, Symmetry::General)
}

/// Cross mass `P[i,j] = int <phi_j, psi_i>` (flux rows, edge columns).
pub fn assemble_flux_edge_mass(mesh: &BoxMesh) -> SparseMatrix<f64> {
    let local = flux_edge_mass(mesh.h());
    let mut trips = Vec::with_capacity(72 * mesh.ncells());
    for c in 0..mesh.ncells() {
        let edges = mesh.cell_edges(c);
        for i in 0..6 {
            for j in 0..12 {
                if local[i][j] != 0.0 {
                    trips.push((6 * c + i, edges[j], local[i][j]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(6 * mesh.ncells(), mesh.nedges(), &trips).expect("indices in range")
}

/// Tangential trace mass on the boundary with a per-side coefficient.
pub fn boundary_mass(mesh: &BoxMesh, coeff: impl Fn(usize) -> c64) -> SparseMatrix<c64> {
    let h = mesh.h();
    let faces: [Vec<(usize, usize, f64)>; 6] = std::array::from_fn(|side| face_trace_mass(h, side / 2, side % 2));
    let mut trips = Vec::new();
    for f in mesh.boundary_faces() {
        let a = coeff(f.side);
        let edges = mesh.cell_edges(f.cell);
        for &(i, j, v) in &faces[f.side] {
            trips.push((edges[i], edges[j], a * v));
        }
    }
    SparseMatrix::from_triplets(mesh.nedges(), mesh.nedges(), &trips).expect("indices in range")
}

/// Boundary trace mass restricted to boundary edges (ordered as
/// [`BoxMesh::boundary_edges`]).
pub fn boundary_trace_mass(mesh: &BoxMesh) -> SparseMatrix<f64> {
    let full = boundary_mass(mesh, |_| c64::new(1.0, 0.0));
    let bedges = mesh.boundary_edges();
    let mut pos = vec![usize::MAX; mesh.nedges()];
    for (k, &e) in bedges.iter().enumerate() {
        pos[e] = k;
    }
    let trips: Vec<_> = full.triplets().into_iter().map(|(r, c, v)| (pos[r], pos[c], v.re)).collect();
    SparseMatrix::from_triplets(bedges.len(), bedges.len(), &trips).expect("boundary rows")
}

const MATRIX_SAMPLES: usize = 64;

/// Sampled accretivity and coercivity check of a matrix impedance in the
/// trace-mass inner product: `Re(v^H M_b Z v) >= 0`, `|v^H M_b Z v| >= c v^H M_b v`.
pub fn validate_matrix_impedance(mesh: &BoxMesh, z: &BoundaryMatrix) -> Result<f64> {
    let nb = mesh.boundary_edges().len();
    if z.n != nb {
        return Err(Error::Dimension { expected: nb, got: z.n });
    }
    let mb = boundary_trace_mass(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut cmin = f64::INFINITY;
    for _ in 0..MATRIX_SAMPLES {
        let v: Vec<c64> = (0..nb).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let zv: Vec<c64> = (0..nb).map(|i| (0..nb).map(|j| z.get(i, j) * v[j]).sum()).collect();
        let q = crate::linalg::dotc(&v, &mb.mul_vec(&zv));
        let n2 = crate::linalg::dotc(&v, &mb.mul_vec(&v)).re;
        if q.re < -1e-12 * q.norm() {
            return invalid("matrix impedance is not accretive");
        }
        cmin = cmin.min(q.norm() / n2);
    }
    if !(cmin > 1e-12) {
        return invalid("matrix impedance is not coercive");
    }
    Ok(cmin)
}

/// `B_Z[i,j] = int <Z phi_j,tan, phi_i,tan> ds`; zero on interior edges.
pub fn assemble_boundary_form(mesh: &BoxMesh, z: &ImpedanceSpec) -> Result<SparseForm<c64>> {
    z.validate()?;
    match z {
        ImpedanceSpec::Pec => Ok(SparseForm::new(SparseMatrix::zeros(mesh.nedges(), mesh.nedges()), Symmetry::Hermitian)),
        ImpedanceSpec::Matrix(zm) => {
            validate_matrix_impedance(mesh, zm)?;
            let mb = boundary_trace_mass(mesh);
            let bedges = mesh.boundary_edges();
            let mut trips = Vec::new();
            for i in 0..mb.nrows {
                for (k, m) in mb.row(i) {
                    for j in 0..zm.n {
                        let v = zm.get(k, j) * m;
                        if v != c64::new(0.0, 0.0) {
                            trips.push((bedges[i], bedges[j], v));
                        }
                    }
                }
            }
            let m = SparseMatrix::from_triplets(mesh.nedges(), mesh.nedges(), &trips)?;
            Ok(SparseForm::new(m, Symmetry::General))
        }
        _ => {
            let coeff = |s: usize| z.face_coefficient(s).expect("pointwise impedance");
            let all_real = (0..6).all(|s| coeff(s).im == 0.0);
            let m = boundary_mass(mesh, coeff);
            let sym = if all_real { Symmetry::Hermitian } else { Symmetry::General };
            Ok(SparseForm::new(m, sym))
        }
    }
}
