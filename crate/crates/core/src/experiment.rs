//! Runs one configured experiment and writes its artifacts. Nothing is written
//! unless validation and the computation both succeed.

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::homogenization::{divcurl_check, eigen_convergence_experiment};
use crate::materials::{hclosure_search, theta_means, SymTensor};
use crate::operator::assemble_maxwell;
use crate::optimizer::{optimize, TargetInterval};
use crate::report::{
    convergence_csv, divcurl_csv, divcurl_text, fmt_f64, gap_scan_csv, spectrum_csv, spectrum_text, trace_csv,
    write_atomic,
};
use crate::spectrum::{solve_eigenpairs_with, spectral_gap_scan};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const NORMALIZATION: &str = "lengths in units where the wave speed in the vacuum phase (eps = mu = 1) is 1";

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Short human-readable result line.
    pub summary: String,
}

/// Computes the artifacts of `kind` as `(file name, contents)` pairs.
pub fn compute(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<(Vec<(String, String)>, String)> {
    cfg.validate(kind)?;
    let mut files = Vec::new();
    let summary;
    match kind {
        ExperimentKind::Spectrum => {
            let mesh = cfg.mesh()?;
            let field = cfg.material_field(&mesh)?;
            let op = assemble_maxwell(&mesh, &field, &cfg.impedance()?)?;
            let rep = solve_eigenpairs_with(&op, cfg.shift(), cfg.solver.k, &cfg.solver_options()?)?.require_converged()?;
            summary = format!("{} eigenpairs near {}", rep.eigenpairs.len(), rep.shift);
            files.push(("spectrum.csv".into(), spectrum_csv(&rep)));
            files.push(("spectrum.txt".into(), spectrum_text(&rep)));
        }
        ExperimentKind::GapScan => {
            let mesh = cfg.mesh()?;
            let sampler = cfg.sampler()?;
            let shifts: Vec<crate::c64> = cfg.scan.shifts.iter().map(|s| crate::c64::new(s[0], s[1])).collect();
            let n = mesh.ncells();
            let rep = spectral_gap_scan(
                |t| sampler.sample(t, n),
                cfg.scan.trials,
                &mesh,
                &cfg.impedance()?,
                &shifts,
                cfg.solver.k,
                &cfg.solver_options()?,
            )?;
            let failed = rep.samples.iter().filter(|s| s.error.is_some()).count();
            summary = format!("r_min = {} over {} trials ({failed} failed)", fmt_f64(rep.r_min), rep.samples.len());
            files.push(("gap_scan.csv".into(), gap_scan_csv(&rep)));
            files.push(("gap_scan.txt".into(), format!("r_min: {}\nfailed: {failed}\n", fmt_f64(rep.r_min))));
        }
        ExperimentKind::HconvTest => {
            let rep = divcurl_check(&cfg.laminate.spec(), &cfg.candidate()?, &cfg.laminate.n_list)?;
            summary = format!("pass: {} residual: {}", rep.pass, fmt_f64(rep.residual));
            files.push(("divcurl.csv".into(), divcurl_csv(&rep)));
            files.push(("divcurl.txt".into(), divcurl_text(&rep)));
        }
        ExperimentKind::EigenConvergence => {
            let mesh = cfg.mesh()?;
            let t = eigen_convergence_experiment(
                &cfg.laminate.spec(),
                &cfg.laminate.n_list,
                &mesh,
                &cfg.impedance()?,
                cfg.shift(),
                cfg.solver.k,
                &cfg.solver_options()?,
            )?;
            let w = t.homogenized[t.tracked];
            let mut text = String::from("# trajectories come from nearest-neighbour matching, a heuristic\n");
            let _ = writeln!(text, "tracked: {} {}", fmt_f64(w.re), fmt_f64(w.im));
            for h in &t.homogenized {
                let _ = writeln!(text, "homogenized: {} {}", fmt_f64(h.re), fmt_f64(h.im));
            }
            summary = format!(
                "tracked {w}: final relative gap {:.3e}",
                t.rows.iter().max_by_key(|r| r.n).map(|r| r.gap / w.norm()).unwrap_or(f64::NAN)
            );
            files.push(("convergence.csv".into(), convergence_csv(&t)));
            files.push(("convergence.txt".into(), text));
        }
        ExperimentKind::Optimize => {
            let mesh = cfg.mesh()?;
            let d0 = cfg.initial_design()?;
            let interval = TargetInterval::new(cfg.optimize.phi_minus, cfg.optimize.phi_plus)?;
            let (best, trace) = optimize(
                &d0,
                cfg.optimize.budget,
                cfg.method()?,
                &mesh,
                &cfg.impedance()?,
                &interval,
                cfg.shift(),
                cfg.solver.k,
                &cfg.solver_options()?,
            )?;
            let first = trace.best.first().copied().unwrap_or(f64::INFINITY);
            let last = trace.best.last().copied().unwrap_or(f64::INFINITY);
            summary = format!("d_I {} -> {} in {} evaluations", fmt_f64(first), fmt_f64(last), trace.records.len());
            let mut text = String::from("# heuristic search; no optimality certificate\n");
            let _ = writeln!(text, "initial: {}\nbest: {}\nevaluations: {}", fmt_f64(first), fmt_f64(last), trace.records.len());
            if let Some(a) = &trace.aborted {
                let _ = writeln!(text, "aborted: {a}");
            }
            files.push(("trace.csv".into(), trace_csv(&trace)));
            files.push(("design.txt".into(), best.to_text()));
            files.push(("optimize.txt".into(), text));
        }
        ExperimentKind::ClosureCheck => {
            let c = &cfg.closure;
            let a = SymTensor::from_entries(c.tensor);
            let m = hclosure_search(&a, c.eps1, c.eps2)?;
            let means = theta_means(c.eps1, c.eps2, m.theta)?;
            summary = format!("member: {}, theta = {:.6}", m.member, m.theta);
            let text = format!(
                "member: {}\ntheta: {}\nviolation: {}\nlam_minus: {}\nlam_plus: {}\n",
                m.member,
                fmt_f64(m.theta),
                fmt_f64(m.violation),
                fmt_f64(means.lam_minus),
                fmt_f64(means.lam_plus)
            );
            files.push(("closure.txt".into(), text));
        }
    }
    Ok((files, summary))
}

/// Validates, runs and writes artifacts plus `manifest.txt` into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, kind: ExperimentKind, out: &Path) -> Result<RunOutcome> {
    let start = Instant::now();
    let (files, summary) = compute(cfg, kind)?;
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for (name, content) in &files {
        let p = out.join(name);
        write_atomic(&p, content)?;
        written.push(p);
    }
    let mut m = String::new();
    let _ = writeln!(m, "kind: {}", kind.name());
    let _ = writeln!(m, "version: {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "seed: {}", cfg.seed());
    let _ = writeln!(m, "threads: {}", rayon::current_num_threads());
    let _ = writeln!(m, "wall_time_s: {:.3}", start.elapsed().as_secs_f64());
    let _ = writeln!(m, "normalization: {NORMALIZATION}");
    let _ = writeln!(m, "summary: {summary}");
    for (name, _) in &files {
        let _ = writeln!(m, "file: {name}");
    }
    let _ = writeln!(m, "\n# config\n{}", cfg.to_toml());
    let p = out.join("manifest.txt");
    write_atomic(&p, &m)?;
    written.push(p);
    Ok(RunOutcome { files: written, summary })
}
