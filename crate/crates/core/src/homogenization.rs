//! Two-phase laminates: rasterized material fields, the div-curl check on
//! exact correctors, and eigenvalue convergence toward the laminate limit.

use crate::c64;
use crate::error::{invalid, Result};
use crate::fem::ImpedanceSpec;
use crate::materials::{laminate_hlimit, theta_means, MaterialField, SymTensor};
use crate::mesh::BoxMesh;
use crate::operator::assemble_maxwell;
use crate::spectrum::{solve_eigenpairs_with, SolverOptions};
use rayon::prelude::*;

/// Rank-1 laminate: `periods` repetitions of a phase-1 slab of width
/// `theta / periods` followed by a phase-2 slab, stacked along axis `normal`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaminateSpec {
    pub eps1: f64,
    pub eps2: f64,
    pub theta: f64,
    pub normal: usize,
    pub periods: usize,
}

impl LaminateSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0 && self.eps2 > 0.0) || !self.eps1.is_finite() || !self.eps2.is_finite() {
            return invalid("phase values must be positive");
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return invalid("theta outside [0,1]");
        }
        if self.normal > 2 {
            return invalid("normal axis must be 0, 1 or 2");
        }
        if self.periods == 0 {
            return invalid("period count must be positive");
        }
        Ok(())
    }

    pub fn unit_normal(&self) -> [f64; 3] {
        let mut n = [0.0; 3];
        n[self.normal] = 1.0;
        n
    }

    /// Phase (1 or 2) at normalized position `t` in [0,1] along the normal.
    pub fn phase_at(&self, t: f64) -> u8 {
        let frac = (t * self.periods as f64).fract();
        if frac < self.theta {
            1
        } else {
            2
        }
    }

    /// Narrowest slab measured in mesh cells.
    pub fn cells_per_slab(&self, mesh: &BoxMesh) -> f64 {
        let per_period = mesh.n[self.normal] as f64 / self.periods as f64;
        let w = if self.theta == 0.0 || self.theta == 1.0 { 1.0 } else { self.theta.min(1.0 - self.theta) };
        per_period * w
    }
}

/// Cellwise phase pattern decided by the cell centers.
pub fn phase_pattern(mesh: &BoxMesh, spec: &LaminateSpec) -> Result<Vec<u8>> {
    spec.validate()?;
    if mesh.n[spec.normal] < 2 * spec.periods {
        return invalid(format!(
            "{} periods need at least {} cells along axis {}",
            spec.periods,
            2 * spec.periods,
            spec.normal
        ));
    }
    Ok((0..mesh.ncells())
        .map(|c| {
            let i = mesh.cell_ijk(c)[spec.normal];
            spec.phase_at((i as f64 + 0.5) / mesh.n[spec.normal] as f64)
        })
        .collect())
}

/// Isotropic two-phase field with `mu = I`.
pub fn sample_laminate_field(mesh: &BoxMesh, spec: &LaminateSpec) -> Result<MaterialField> {
    let pattern = phase_pattern(mesh, spec)?;
    let eps = pattern
        .iter()
        .map(|&p| SymTensor::scalar(if p == 1 { spec.eps1 } else { spec.eps2 }))
        .collect();
    let lo = spec.eps1.min(spec.eps2).min(1.0);
    let hi = spec.eps1.max(spec.eps2).max(1.0);
    MaterialField::new(eps, vec![SymTensor::identity(); mesh.ncells()], (lo, hi))
}

/// Homogenized field: the laminate limit tensor in every cell, `mu = I`.
pub fn homogenized_field(mesh: &BoxMesh, spec: &LaminateSpec) -> Result<MaterialField> {
    spec.validate()?;
    let a = laminate_hlimit(spec.eps1, spec.eps2, spec.theta, spec.unit_normal())?;
    let lo = spec.eps1.min(spec.eps2).min(1.0);
    let hi = spec.eps1.max(spec.eps2).max(1.0);
    MaterialField::new(vec![a; mesh.ncells()], vec![SymTensor::identity(); mesh.ncells()], (lo, hi))
}

/// Exact corrector of the laminate for the macroscopic field `xi`: per slab
/// `(phase, width, E, D)`. Tangential `E` and normal `D` are the same in every
/// slab, so the fields are curl- and divergence-free across interfaces.
pub fn laminate_correctors(spec: &LaminateSpec, xi: [f64; 3]) -> Result<Vec<(u8, f64, [f64; 3], [f64; 3])>> {
    spec.validate()?;
    let m = theta_means(spec.eps1, spec.eps2, spec.theta)?;
    let a = spec.normal;
    let dn = m.lam_minus * xi[a];
    let n = spec.periods as f64;
    let mut out = Vec::with_capacity(2 * spec.periods);
    for _ in 0..spec.periods {
        for (phase, eps, w) in [(1u8, spec.eps1, spec.theta / n), (2u8, spec.eps2, (1.0 - spec.theta) / n)] {
            if w == 0.0 {
                continue;
            }
            let mut e = xi;
            e[a] = dn / eps;
            let d = [eps * e[0], eps * e[1], eps * e[2]];
            out.push((phase, w, e, d));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivCurlReport {
    pub candidate: SymTensor<f64>,
    pub n_list: Vec<usize>,
    /// Weak limits per (n, test vector), in `n_list` order times `e1, e2, e3`.
    pub e_inf: Vec<[f64; 3]>,
    pub d_inf: Vec<[f64; 3]>,
    /// Largest `|D_inf - A E_inf|` (the box has unit volume).
    pub residual: f64,
    /// Largest jump of tangential E or normal D between neighbouring slabs.
    pub corrector_defect: f64,
    pub tol: f64,
    pub pass: bool,
}

pub const DIVCURL_TOL: f64 = 1e-12;

pub fn divcurl_check(spec: &LaminateSpec, candidate: &SymTensor<f64>, n_list: &[usize]) -> Result<DivCurlReport> {
    spec.validate()?;
    if !candidate.is_finite() {
        return invalid("candidate tensor is not finite");
    }
    if n_list.is_empty() {
        return invalid("n_list is empty");
    }
    let mut e_inf = Vec::new();
    let mut d_inf = Vec::new();
    let mut residual = 0.0f64;
    let mut defect = 0.0f64;
    for &n in n_list {
        let s = LaminateSpec { periods: n, ..*spec };
        for k in 0..3 {
            let mut xi = [0.0; 3];
            xi[k] = 1.0;
            let slabs = laminate_correctors(&s, xi)?;
            let mut e = [0.0; 3];
            let mut d = [0.0; 3];
            for (_, w, es, ds) in &slabs {
                for j in 0..3 {
                    e[j] += w * es[j];
                    d[j] += w * ds[j];
                }
            }
            for pair in slabs.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                for j in 0..3 {
                    let jump = if j == spec.normal { (a.3[j] - b.3[j]).abs() } else { (a.2[j] - b.2[j]).abs() };
                    defect = defect.max(jump);
                }
            }
            let ae = candidate.mul_vec(e);
            let r = ((d[0] - ae[0]).powi(2) + (d[1] - ae[1]).powi(2) + (d[2] - ae[2]).powi(2)).sqrt();
            residual = residual.max(r);
            e_inf.push(e);
            d_inf.push(d);
        }
    }
    Ok(DivCurlReport {
        candidate: *candidate,
        n_list: n_list.to_vec(),
        e_inf,
        d_inf,
        residual,
        corrector_defect: defect,
        tol: DIVCURL_TOL,
        pass: residual < DIVCURL_TOL,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub omega: c64,
    pub gap: f64,
    pub residual: f64,
    /// Another fine eigenvalue was equally close to the reference.
    pub ambiguous: bool,
    pub alternative: Option<c64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub homogenized: Vec<c64>,
    /// Index into `homogenized` of the tracked (lowest) eigenvalue.
    pub tracked: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Matched value for every homogenized eigenvalue, per entry of `n_list`.
    pub trajectories: Vec<Vec<Option<c64>>>,
}

fn clusters(vals: &[c64], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        match out.iter_mut().find(|c| (vals[c[0]] - v).norm() <= tol * v.norm().max(1.0)) {
            Some(c) => c.push(i),
            None => out.push(vec![i]),
        }
    }
    out
}

fn mean(vals: &[c64], idx: &[usize]) -> c64 {
    idx.iter().map(|&i| vals[i]).sum::<c64>() / idx.len() as f64
}

/// Nearest-neighbour assignment with injectivity. Clusters of repeated
/// eigenvalues are matched first, only to clusters of the same multiplicity,
/// then leftovers are matched one by one. For each reference value returns
/// the candidate index, whether another candidate was equally close, and that
/// rival.
pub fn match_eigenvalues(reference: &[c64], candidates: &[c64], tie_tol: f64) -> Vec<Option<(usize, bool, Option<usize>)>> {
    let rc = clusters(reference, tie_tol);
    let cc = clusters(candidates, tie_tol);
    let rm: Vec<c64> = rc.iter().map(|c| mean(reference, c)).collect();
    let cm: Vec<c64> = cc.iter().map(|c| mean(candidates, c)).collect();
    let mut out = vec![None; reference.len()];
    let mut used = vec![false; candidates.len()];

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (a, r) in rc.iter().enumerate() {
        for (b, c) in cc.iter().enumerate() {
            if r.len() == c.len() && r.len() > 1 {
                pairs.push(((rm[a] - cm[b]).norm(), a, b));
            }
        }
    }
    pairs.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let mut rdone = vec![false; rc.len()];
    let mut cdone = vec![false; cc.len()];
    for &(dist, a, b) in &pairs {
        if rdone[a] || cdone[b] {
            continue;
        }
        let scale = rm[a].norm().max(1e-300);
        let rival = pairs
            .iter()
            .find(|&&(d2, a2, b2)| a2 == a && b2 != b && !cdone[b2] && (d2 - dist).abs() <= tie_tol * scale && (cm[b2] - cm[b]).norm() > tie_tol * scale)
            .map(|r| cc[r.2][0]);
        rdone[a] = true;
        cdone[b] = true;
        for (&i, &j) in rc[a].iter().zip(&cc[b]) {
            used[j] = true;
            out[i] = Some((j, rival.is_some(), rival));
        }
    }

    let mut single: Vec<(f64, usize, usize)> = Vec::new();
    for (i, r) in reference.iter().enumerate() {
        if out[i].is_some() {
            continue;
        }
        for (j, c) in candidates.iter().enumerate() {
            if !used[j] {
                single.push(((r - c).norm(), i, j));
            }
        }
    }
    single.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    for &(dist, i, j) in &single {
        if out[i].is_some() || used[j] {
            continue;
        }
        let scale = reference[i].norm().max(1e-300);
        let rival = single
            .iter()
            .find(|&&(d2, i2, j2)| {
                i2 == i && j2 != j && !used[j2] && (d2 - dist).abs() <= tie_tol * scale && (candidates[j2] - candidates[j]).norm() > tie_tol * scale
            })
            .map(|r| r.2);
        used[j] = true;
        out[i] = Some((j, rival.is_some(), rival));
    }
    out
}

/// Solves the homogenized problem and each laminate in `n_list` near `shift`
/// and follows the lowest homogenized eigenvalue (smallest `|w|` with
/// `Re w >= 0`) from the finest laminate down to the coarsest.
pub fn eigen_convergence_experiment(
    spec: &LaminateSpec,
    n_list: &[usize],
    mesh: &BoxMesh,
    z: &ImpedanceSpec,
    shift: c64,
    k: usize,
    opts: &SolverOptions,
) -> Result<ConvergenceTable> {
    spec.validate()?;
    if n_list.is_empty() {
        return invalid("n_list is empty");
    }
    for &n in n_list {
        let s = LaminateSpec { periods: n, ..*spec };
        if s.cells_per_slab(mesh) < 2.0 - 1e-12 {
            return invalid(format!("n = {n} leaves fewer than 2 cells per slab"));
        }
    }
    let hom = homogenized_field(mesh, spec)?;
    let hop = assemble_maxwell(mesh, &hom, z)?;
    let hrep = solve_eigenpairs_with(&hop, shift, k, opts)?.require_converged()?;
    let homogenized = hrep.omegas();
    let tracked = homogenized
        .iter()
        .enumerate()
        .filter(|(_, w)| w.re >= -1e-12)
        .min_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let solved: Vec<Result<crate::SpectrumReport>> = n_list
        .par_iter()
        .map(|&n| {
            let s = LaminateSpec { periods: n, ..*spec };
            let f = sample_laminate_field(mesh, &s)?;
            let op = assemble_maxwell(mesh, &f, z)?;
            solve_eigenpairs_with(&op, shift, k, opts)?.require_converged()
        })
        .collect();
    let mut reports = Vec::with_capacity(n_list.len());
    for r in solved {
        reports.push(r?);
    }
    let mut order: Vec<usize> = (0..n_list.len()).collect();
    order.sort_by(|&a, &b| n_list[b].cmp(&n_list[a]));
    let mut reference = homogenized.clone();
    let mut rows = vec![None; n_list.len()];
    let mut trajectories = vec![Vec::new(); n_list.len()];
    for &idx in &order {
        let cands = reports[idx].omegas();
        let m = match_eigenvalues(&reference, &cands, opts.cluster_tol);
        let mut next = reference.clone();
        for (i, mm) in m.iter().enumerate() {
            if let Some((j, _, _)) = mm {
                next[i] = cands[*j];
            }
        }
        trajectories[idx] = m.iter().map(|mm| mm.map(|(j, _, _)| cands[j])).collect();
        if let Some((j, amb, alt)) = m[tracked] {
            let p = &reports[idx].eigenpairs[j];
            rows[idx] = Some(ConvergenceRow {
                n: n_list[idx],
                omega: p.omega,
                gap: (p.omega - homogenized[tracked]).norm(),
                residual: p.residual,
                ambiguous: amb,
                alternative: alt.map(|a| cands[a]),
            });
        }
        reference = next;
    }
    let rows = rows
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| crate::Error::NoConvergence("tracked eigenvalue lost during matching".into()))?;
    Ok(ConvergenceTable { homogenized, tracked, rows, trajectories })
}
