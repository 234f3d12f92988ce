//! Boundary-trace diagnostics of eigenpairs.
//!
//! `n x E` on the boundary is defined through the boundary condition as
//! `Z H_tan` (the flux-space E has no trace of its own), and
//! `||curl E|| = |w| ||mu H||` from the second Maxwell equation.

use super::EigenPair;
use crate::c64;
use crate::fem::{assemble_flux_mass, assemble_mass, boundary_mass, boundary_trace_mass, CellBlocks, ImpedanceSpec, SparseMatrix};
use crate::linalg::dotc;
use crate::materials::SymTensor;
use crate::operator::OperatorPair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryDiagnostics {
    pub trace_ratio: f64,
    pub pec_defect: f64,
    pub h_tan: f64,
    pub n_cross_e: f64,
}

pub struct DiagnosticForms {
    b1: SparseMatrix<f64>,
    bz2: Option<SparseMatrix<f64>>,
    m_id: SparseMatrix<f64>,
    m_mu2: SparseMatrix<f64>,
    m1: CellBlocks,
    /// Re Z bounded below by a positive constant (hypothesis of the real-eigenvalue test).
    pub re_z_positive: bool,
}

impl DiagnosticForms {
    pub fn new(op: &OperatorPair) -> Self {
        let mesh = &op.mesh;
        let b1 = boundary_mass(mesh, |_| c64::new(1.0, 0.0)).map(|v| v.re);
        let bz2 = match &op.impedance {
            ImpedanceSpec::Matrix(_) => None,
            z => Some(boundary_mass(mesh, |s| c64::new(z.face_coefficient(s).unwrap().norm_sqr(), 0.0)).map(|v| v.re)),
        };
        let re_z_positive = match &op.impedance {
            ImpedanceSpec::Matrix(_) | ImpedanceSpec::Pec => false,
            z => (0..6).all(|s| z.face_coefficient(s).unwrap().re > 0.0),
        };
        let id = vec![SymTensor::identity(); mesh.ncells()];
        let mu2: Vec<SymTensor<f64>> = op.field.mu.iter().map(|m| SymTensor::identity().congruence(&m.to_matrix())).collect();
        DiagnosticForms {
            b1,
            bz2,
            m_id: assemble_mass(mesh, &id).expect("sizes").matrix,
            m_mu2: assemble_mass(mesh, &mu2).expect("sizes").matrix,
            m1: assemble_flux_mass(mesh, &id).expect("sizes"),
            re_z_positive,
        }
    }

    fn z_trace_norm2(&self, op: &OperatorPair, h: &[c64]) -> f64 {
        match (&op.impedance, &self.bz2) {
            (ImpedanceSpec::Matrix(z), _) => {
                let bedges = op.mesh.boundary_edges();
                let hb: Vec<c64> = bedges.iter().map(|&e| h[e]).collect();
                let zh: Vec<c64> = (0..z.n).map(|i| (0..z.n).map(|j| z.get(i, j) * hb[j]).sum()).collect();
                dotc(&zh, &boundary_trace_mass(&op.mesh).mul_vec(&zh)).re
            }
            (_, Some(b)) => dotc(h, &b.mul_vec(h)).re,
            _ => 0.0,
        }
    }

    pub fn evaluate(&self, op: &OperatorPair, omega: c64, x: &[c64]) -> BoundaryDiagnostics {
        let (e, h) = op.split(x);
        let h_tan2 = dotc(h, &self.b1.mul_vec(h)).re.max(0.0);
        let ne2 = self.z_trace_norm2(op, h).max(0.0);
        let curl_h = op.incidence.mul_vec(h);
        let h_curl2 = dotc(h, &self.m_id.mul_vec(h)).re + dotc(&curl_h, &self.m1.mul(&curl_h)).re;
        let e_curl2 = dotc(e, &self.m1.mul(e)).re + omega.norm_sqr() * dotc(h, &self.m_mu2.mul_vec(h)).re;
        let denom = h_curl2 + e_curl2;
        BoundaryDiagnostics {
            trace_ratio: if denom > 0.0 { (ne2 + h_tan2) / denom } else { 0.0 },
            pec_defect: ne2.sqrt() + h_tan2.sqrt(),
            h_tan: h_tan2.sqrt(),
            n_cross_e: ne2.sqrt(),
        }
    }
}

/// `(trace_ratio, pec_defect)` of one eigenpair.
pub fn boundary_diagnostics(pair: &EigenPair, op: &OperatorPair) -> (f64, f64) {
    let forms = DiagnosticForms::new(op);
    let mut x = pair.e.clone();
    x.extend_from_slice(&pair.h);
    let d = forms.evaluate(op, pair.omega, &x);
    (d.trace_ratio, d.pec_defect)
}
