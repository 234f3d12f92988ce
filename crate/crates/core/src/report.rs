//! Deterministic text and CSV output. Floats use `{:.16e}` (17 significant
//! digits), which parses back to the identical `f64`.

use crate::c64;
use crate::error::{Error, Result};
use crate::homogenization::{ConvergenceTable, DivCurlReport};
use crate::optimizer::OptimizationTrace;
use crate::spectrum::{GapScanReport, SpectrumReport};
use std::fmt::Write as _;
use std::path::Path;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "nan".into())
}

pub const SPECTRUM_HEADER: &str = "omega_re,omega_im,residual,energy,trace_ratio,pec_defect";

pub fn spectrum_csv(r: &SpectrumReport) -> String {
    let mut s = String::from(SPECTRUM_HEADER);
    s.push('\n');
    for p in &r.eigenpairs {
        let row = [p.omega.re, p.omega.im, p.residual, p.energy, p.trace_ratio, p.pec_defect];
        s.push_str(&row.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// Plain-text report: `key: value` metadata, then one block per eigenpair.
pub fn spectrum_text(r: &SpectrumReport) -> String {
    let mut s = String::new();
    let c = |w: c64| format!("{} {}", fmt_f64(w.re), fmt_f64(w.im));
    let _ = writeln!(s, "requested_shift: {}", c(r.requested_shift));
    let _ = writeln!(s, "shift: {}", c(r.shift));
    let _ = writeln!(s, "k: {}", r.k);
    let _ = writeln!(s, "krylov_dim: {}", r.krylov_dim);
    let _ = writeln!(s, "block_size: {}", r.block_size);
    let _ = writeln!(s, "iterations: {}", r.iterations);
    let _ = writeln!(s, "op_applications: {}", r.op_applications);
    let _ = writeln!(s, "deflated_kernel_dim: {}", r.deflated_kernel_dim);
    let _ = writeln!(s, "discarded_near_zero: {}", r.discarded_near_zero);
    let _ = writeln!(s, "converged: {}", r.converged);
    let _ = writeln!(s, "cluster_tol: {}", fmt_f64(r.cluster_tol));
    for (i, p) in r.eigenpairs.iter().enumerate() {
        let _ = writeln!(s, "\n[eigenpair {i}]");
        let _ = writeln!(s, "omega: {}", c(p.omega));
        let _ = writeln!(s, "residual: {}", fmt_f64(p.residual));
        let _ = writeln!(s, "energy: {}", fmt_f64(p.energy));
        let _ = writeln!(s, "trace_ratio: {}", fmt_f64(p.trace_ratio));
        let _ = writeln!(s, "pec_defect: {}", fmt_f64(p.pec_defect));
        let _ = writeln!(s, "cluster: {}", p.cluster);
        let _ = writeln!(s, "multiplicity: {}", p.multiplicity);
        let _ = writeln!(s, "real_flag: {}", p.real_flag);
    }
    s
}

pub fn gap_scan_csv(r: &GapScanReport) -> String {
    let mut s = String::from("trial,min_abs,omega_re,omega_im\n");
    for g in &r.samples {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            g.trial,
            opt_f64(g.min_abs),
            opt_f64(g.omega.map(|w| w.re)),
            opt_f64(g.omega.map(|w| w.im))
        );
    }
    s
}

pub fn divcurl_csv(r: &DivCurlReport) -> String {
    let mut s = String::from("n,xi,e_x,e_y,e_z,d_x,d_y,d_z\n");
    for (row, (e, d)) in r.e_inf.iter().zip(&r.d_inf).enumerate() {
        let n = r.n_list.get(row / 3).copied().unwrap_or(0);
        let vals: Vec<String> = e.iter().chain(d.iter()).map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(s, "{},{},{}", n, row % 3, vals.join(","));
    }
    s
}

pub fn divcurl_text(r: &DivCurlReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "candidate: {}", r.candidate.entries.map(fmt_f64).join(" "));
    let _ = writeln!(s, "residual: {}", fmt_f64(r.residual));
    let _ = writeln!(s, "corrector_defect: {}", fmt_f64(r.corrector_defect));
    let _ = writeln!(s, "tol: {}", fmt_f64(r.tol));
    let _ = writeln!(s, "pass: {}", r.pass);
    s
}

/// Rows follow `n_list` order. The trajectory comes from a matching heuristic.
pub fn convergence_csv(t: &ConvergenceTable) -> String {
    let mut s = String::from("n,omega_re,omega_im,gap,residual,ambiguous\n");
    for r in &t.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.omega.re),
            fmt_f64(r.omega.im),
            fmt_f64(r.gap),
            fmt_f64(r.residual),
            r.ambiguous as u8
        );
    }
    s
}

pub fn trace_csv(t: &OptimizationTrace) -> String {
    let mut s = String::from("iter,dI,omega_re,omega_im,best,design_hash,feasible\n");
    for (r, b) in t.records.iter().zip(&t.best) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:016x},{}",
            r.eval,
            fmt_f64(r.value),
            opt_f64(r.omega.map(|w| w.re)),
            opt_f64(r.omega.map(|w| w.im)),
            fmt_f64(*b),
            r.design_hash,
            r.feasible as u8
        );
    }
    s
}

/// Parsed CSV: header names and numeric rows. Hexadecimal cells are not
/// supported; callers parse those columns themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str) -> Result<Csv> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty csv".into()))?
        .split(',')
        .map(|h| h.to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let row: Vec<f64> = l
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: '{v}': {e}", i + 1))))
            .collect::<Result<_>>()?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!("row {} has {} fields, expected {}", i + 1, row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok(Csv { header, rows })
}

/// Writes through a temporary sibling and renames, so a failed run never
/// leaves a truncated file behind.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Invalid(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, content.as_bytes())?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
