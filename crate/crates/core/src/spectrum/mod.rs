//! Eigenpairs of the discretized operator near a shift, and spectral scans.

pub mod deflation;
pub mod diagnostics;
pub mod scan;
mod solver;

use crate::c64;
use crate::error::{Error, Result};
use crate::operator::OperatorPair;

pub use diagnostics::{boundary_diagnostics, BoundaryDiagnostics, DiagnosticForms};
pub use scan::{spectral_gap_scan, GapSample, GapScanReport, RandomSampler};
pub use solver::{relative_residual, solve_eigenpairs_with};

/// Parameters of [`solve_eigenpairs_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Krylov block size; must be at least the largest wanted multiplicity.
    pub block_size: usize,
    /// Largest basis before a thick restart (0 = `max(40, 3 (k + block))`).
    pub max_basis: usize,
    /// Convergence tolerance on the relative residual.
    pub tol: f64,
    pub max_op_applications: usize,
    /// Ritz values with `|w| < gap_tol_rel * max(1, |shift|)` are discarded.
    pub gap_tol_rel: f64,
    /// Relative distance below which eigenvalues share a cluster.
    pub cluster_tol: f64,
    /// `|Im w|` below which an eigenvalue counts as real for the PEC-defect flag.
    pub real_tol: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            block_size: 4,
            max_basis: 0,
            tol: 1e-9,
            max_op_applications: 3000,
            gap_tol_rel: 1e-4,
            cluster_tol: 1e-6,
            real_tol: 1e-6,
            seed: 0x0d15_51fa,
        }
    }
}

/// Energy-normalized eigenpair.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub omega: c64,
    pub e: Vec<c64>,
    pub h: Vec<c64>,
    pub residual: f64,
    pub energy: f64,
    pub trace_ratio: f64,
    pub pec_defect: f64,
    /// Index of the cluster of numerically equal eigenvalues.
    pub cluster: usize,
    pub multiplicity: usize,
    /// Nearly real eigenvalue with `Re Z > 0` and a large PEC defect.
    pub real_flag: bool,
}

impl EigenPair {
    pub fn coeffs(&self) -> Vec<c64> {
        let mut x = self.e.clone();
        x.extend_from_slice(&self.h);
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub requested_shift: c64,
    /// Shift actually factorized (perturbed after a failure).
    pub shift: c64,
    pub k: usize,
    pub krylov_dim: usize,
    pub block_size: usize,
    pub iterations: usize,
    pub op_applications: usize,
    pub deflated_kernel_dim: usize,
    pub discarded_near_zero: usize,
    pub converged: bool,
    pub cluster_tol: f64,
    /// Sorted by distance to the shift.
    pub eigenpairs: Vec<EigenPair>,
}

impl SpectrumReport {
    pub fn omegas(&self) -> Vec<c64> {
        self.eigenpairs.iter().map(|p| p.omega).collect()
    }

    /// Accepts the report when the solver converged or every pair still meets
    /// the 1e-8 residual bound.
    pub fn require_converged(self) -> Result<Self> {
        let good = self.eigenpairs.iter().filter(|p| p.residual < 1e-8).count();
        if self.converged || (good >= self.k && good == self.eigenpairs.len()) {
            Ok(self)
        } else {
            Err(Error::NoConvergence(format!(
                "{} of {} eigenpairs below residual 1e-8 after {} operator applications",
                good,
                self.k,
                self.op_applications
            )))
        }
    }
}

pub(crate) fn annotate_clusters(pairs: &mut [EigenPair], tol: f64) {
    let n = pairs.len();
    let mut cluster: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            let scale = pairs[i].omega.norm().max(pairs[j].omega.norm());
            if (pairs[i].omega - pairs[j].omega).norm() <= tol * scale {
                cluster[i] = cluster[j];
                break;
            }
        }
    }
    let mut ids = std::collections::BTreeMap::new();
    for c in &cluster {
        let next = ids.len();
        ids.entry(*c).or_insert(next);
    }
    for i in 0..n {
        pairs[i].cluster = ids[&cluster[i]];
        pairs[i].multiplicity = cluster.iter().filter(|&&c| c == cluster[i]).count();
    }
}

/// Eigenpairs nearest `shift` with default options.
pub fn solve_eigenpairs(op: &OperatorPair, shift: c64, k: usize) -> Result<SpectrumReport> {
    solve_eigenpairs_with(op, shift, k, &SolverOptions::default())
}
