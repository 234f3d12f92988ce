use super::{solve_eigenpairs_with, SolverOptions};
use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::fem::ImpedanceSpec;
use crate::materials::{random_field, MaterialField};
use crate::mesh::BoxMesh;
use crate::operator::assemble_maxwell;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Random cellwise `(eps, mu)` with spectra in `[alpha, beta]`; trial `t` uses
/// its own stream derived from `seed`, so samples do not depend on scheduling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSampler {
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl RandomSampler {
    pub fn sample(&self, trial: usize, ncells: usize) -> MaterialField {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (trial as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        random_field(&mut rng, ncells, self.alpha, self.beta)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapSample {
    pub trial: usize,
    /// Smallest `|w|` over converged nonzero eigenvalues.
    pub min_abs: Option<f64>,
    pub omega: Option<c64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapScanReport {
    pub r_min: f64,
    pub samples: Vec<GapSample>,
}

fn scan_one(
    field: MaterialField,
    trial: usize,
    mesh: &BoxMesh,
    z: &ImpedanceSpec,
    shifts: &[c64],
    k: usize,
    opts: &SolverOptions,
) -> GapSample {
    let run = || -> Result<(f64, c64)> {
        let op = assemble_maxwell(mesh, &field, z)?;
        let mut best: Option<(f64, c64)> = None;
        for &s in shifts {
            let rep = solve_eigenpairs_with(&op, s, k, opts)?;
            for p in rep.eigenpairs.iter().filter(|p| p.residual < 1e-8) {
                let a = p.omega.norm();
                if best.map(|b| a < b.0).unwrap_or(true) {
                    best = Some((a, p.omega));
                }
            }
        }
        best.ok_or_else(|| Error::NoConvergence("no converged eigenvalue".into()))
    };
    match run() {
        Ok((a, w)) => GapSample { trial, min_abs: Some(a), omega: Some(w), error: None },
        Err(e) => GapSample { trial, min_abs: None, omega: None, error: Some(e.to_string()) },
    }
}

/// Smallest nonzero `|w|` over `trials` sampled media; trials run in parallel
/// and are reported in trial order.
pub fn spectral_gap_scan<F>(
    sampler: F,
    trials: usize,
    mesh: &BoxMesh,
    z: &ImpedanceSpec,
    shift_grid: &[c64],
    k: usize,
    opts: &SolverOptions,
) -> Result<GapScanReport>
where
    F: Fn(usize) -> MaterialField + Sync,
{
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    if shift_grid.is_empty() {
        return invalid("shift grid is empty");
    }
    z.validate()?;
    let samples: Vec<GapSample> = (0..trials)
        .into_par_iter()
        .map(|t| scan_one(sampler(t), t, mesh, z, shift_grid, k, opts))
        .collect();
    let r_min = samples.iter().filter_map(|s| s.min_abs).fold(f64::INFINITY, f64::min);
    if !r_min.is_finite() {
        return Err(Error::NoConvergence("every scan sample failed".into()));
    }
    Ok(GapScanReport { r_min, samples })
}
