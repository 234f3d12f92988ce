//! Derivative-free search for composite designs whose eigenvalue is closest to
//! a target frequency band.

use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::fem::{ImpedanceSpec, Sign};
use crate::materials::{in_mtheta, laminate_hlimit, project_to_mtheta, MaterialField, SymTensor};
use crate::mesh::BoxMesh;
use crate::operator::assemble_maxwell;
use crate::spectrum::{solve_eigenpairs_with, SolverOptions};
use std::fmt::Write as _;

/// Eigenpairs above this residual are not trusted by the search.
pub const ACCEPT_RESIDUAL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetInterval {
    pub phi_minus: f64,
    pub phi_plus: f64,
}

impl TargetInterval {
    pub fn new(phi_minus: f64, phi_plus: f64) -> Result<Self> {
        if !(phi_minus.is_finite() && phi_plus.is_finite()) || phi_minus > phi_plus {
            return invalid(format!("bad interval [{phi_minus}, {phi_plus}]"));
        }
        Ok(TargetInterval { phi_minus, phi_plus })
    }
}

/// Distance in the complex plane from `omega` to the real segment `I`.
pub fn distance_to_interval(omega: c64, i: &TargetInterval) -> f64 {
    if omega.re >= i.phi_minus && omega.re <= i.phi_plus {
        omega.im.abs()
    } else {
        (omega - i.phi_minus).norm().min((omega - i.phi_plus).norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DesignCell {
    /// Rank-1 laminate of volume fraction `theta` (phase 1) with normal `axis`.
    Laminate { theta: f64, axis: usize },
    /// Explicit tensor, projected onto `M_theta` when realized.
    Tensor { theta: f64, eps: SymTensor<f64> },
}

impl DesignCell {
    pub fn theta(&self) -> f64 {
        match *self {
            DesignCell::Laminate { theta, .. } | DesignCell::Tensor { theta, .. } => theta,
        }
    }

    fn with_theta(&self, t: f64) -> Self {
        match *self {
            DesignCell::Laminate { axis, .. } => DesignCell::Laminate { theta: t, axis },
            DesignCell::Tensor { eps, .. } => DesignCell::Tensor { theta: t, eps },
        }
    }
}

/// Per-cell design on a coarse grid; `mu = I` throughout.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignPoint {
    pub eps1: f64,
    pub eps2: f64,
    pub grid: [usize; 3],
    pub cells: Vec<DesignCell>,
}

impl DesignPoint {
    pub fn uniform_laminate(eps1: f64, eps2: f64, grid: [usize; 3], theta: f64, axis: usize) -> Self {
        let n = grid[0] * grid[1] * grid[2];
        DesignPoint { eps1, eps2, grid, cells: vec![DesignCell::Laminate { theta, axis }; n] }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0 && self.eps1 < self.eps2 && self.eps2.is_finite()) {
            return invalid("design phases need 0 < eps1 < eps2");
        }
        if self.grid.contains(&0) || self.cells.len() != self.grid.iter().product::<usize>() {
            return invalid("design grid does not match the cell list");
        }
        for c in &self.cells {
            let t = c.theta();
            if !(0.0..=1.0).contains(&t) {
                return invalid(format!("theta {t} outside [0,1]"));
            }
            match c {
                DesignCell::Laminate { axis, .. } if *axis > 2 => return invalid("axis must be 0, 1 or 2"),
                DesignCell::Tensor { eps, .. } if !eps.is_finite() => return invalid("tensor is not finite"),
                _ => {}
            }
        }
        Ok(())
    }

    /// Realized tensor of every design cell.
    pub fn tensors(&self) -> Result<Vec<SymTensor<f64>>> {
        self.validate()?;
        self.cells
            .iter()
            .map(|c| match *c {
                DesignCell::Laminate { theta, axis } => {
                    let mut n = [0.0; 3];
                    n[axis] = 1.0;
                    laminate_hlimit(self.eps1, self.eps2, theta, n)
                }
                DesignCell::Tensor { theta, eps } => project_to_mtheta(&eps, self.eps1, self.eps2, theta),
            })
            .collect()
    }

    /// True when every realized tensor lies in its `M_theta`.
    pub fn is_feasible(&self) -> Result<bool> {
        let ts = self.tensors()?;
        for (t, c) in ts.iter().zip(&self.cells) {
            if !in_mtheta(t, self.eps1, self.eps2, c.theta())? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Material field on `mesh`, whose cell counts must be multiples of the grid.
    pub fn realize(&self, mesh: &BoxMesh) -> Result<MaterialField> {
        for d in 0..3 {
            if !mesh.n[d].is_multiple_of(self.grid[d]) {
                return invalid(format!("mesh {:?} is not a refinement of design grid {:?}", mesh.n, self.grid));
            }
        }
        let ts = self.tensors()?;
        let eps = (0..mesh.ncells())
            .map(|c| {
                let [i, j, k] = mesh.cell_ijk(c);
                let g = self.grid;
                let (a, b, cc) = (i * g[0] / mesh.n[0], j * g[1] / mesh.n[1], k * g[2] / mesh.n[2]);
                ts[a + g[0] * (b + g[1] * cc)]
            })
            .collect();
        MaterialField::new(eps, vec![SymTensor::identity(); mesh.ncells()], (self.eps1.min(1.0), self.eps2.max(1.0)))
    }

    /// FNV-1a over the design variables.
    pub fn hash(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(self.eps1.to_bits());
        eat(self.eps2.to_bits());
        self.grid.iter().for_each(|&g| eat(g as u64));
        for c in &self.cells {
            match c {
                DesignCell::Laminate { theta, axis } => {
                    eat(theta.to_bits());
                    eat(*axis as u64);
                }
                DesignCell::Tensor { theta, eps } => {
                    eat(theta.to_bits());
                    eps.entries.iter().for_each(|v| eat(v.to_bits()));
                }
            }
        }
        h
    }

    /// Line-oriented text form: a header line, then one line per cell.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "design {:.16e} {:.16e} {} {} {}\n",
            self.eps1, self.eps2, self.grid[0], self.grid[1], self.grid[2]
        );
        for c in &self.cells {
            match c {
                DesignCell::Laminate { theta, axis } => {
                    let _ = writeln!(s, "laminate {theta:.16e} {axis}");
                }
                DesignCell::Tensor { theta, eps } => {
                    let e = eps.entries;
                    let _ = write!(s, "tensor {theta:.16e}");
                    for v in e {
                        let _ = write!(s, " {v:.16e}");
                    }
                    s.push('\n');
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("design file: {m}"));
        let num = |t: Option<&str>| -> Result<f64> {
            t.ok_or_else(|| bad("missing field"))?.parse::<f64>().map_err(|e| bad(&e.to_string()))
        };
        let int = |t: Option<&str>| -> Result<usize> {
            t.ok_or_else(|| bad("missing field"))?.parse::<usize>().map_err(|e| bad(&e.to_string()))
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let head = lines.next().ok_or_else(|| bad("empty"))?;
        let mut it = head.split_whitespace();
        if it.next() != Some("design") {
            return Err(bad("header must start with 'design'"));
        }
        let eps1 = num(it.next())?;
        let eps2 = num(it.next())?;
        let grid = [int(it.next())?, int(it.next())?, int(it.next())?];
        let mut cells = Vec::new();
        for l in lines {
            let mut it = l.split_whitespace();
            match it.next() {
                Some("laminate") => {
                    let theta = num(it.next())?;
                    let axis = int(it.next())?;
                    cells.push(DesignCell::Laminate { theta, axis });
                }
                Some("tensor") => {
                    let theta = num(it.next())?;
                    let mut e = [0.0; 6];
                    for v in e.iter_mut() {
                        *v = num(it.next())?;
                    }
                    cells.push(DesignCell::Tensor { theta, eps: SymTensor::from_entries(e) });
                }
                _ => return Err(bad(&format!("unknown line '{l}'"))),
            }
        }
        let d = DesignPoint { eps1, eps2, grid, cells };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// Nonzero eigenvalue closest to the band; `None` when none was found.
    pub omega: Option<c64>,
    /// `d_I(omega)`, or `+inf` when no eigenvalue was found.
    pub value: f64,
    pub op_applications: usize,
    pub converged: bool,
}

/// Picks the eigenvalue minimizing `d_I`; ties go to smaller `|Im w|`, then
/// smaller `|Re w|`.
pub fn select_eigenvalue(omegas: &[c64], interval: &TargetInterval, zero_tol: f64) -> Option<(c64, f64)> {
    let key = |w: &c64| (distance_to_interval(*w, interval), w.im.abs(), w.re.abs());
    omegas
        .iter()
        .filter(|w| w.norm() >= zero_tol)
        .min_by(|a, b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal))
        .map(|w| (*w, distance_to_interval(*w, interval)))
}

pub fn evaluate_design(
    d: &DesignPoint,
    mesh: &BoxMesh,
    z: &ImpedanceSpec,
    interval: &TargetInterval,
    shift: c64,
    k: usize,
    opts: &SolverOptions,
) -> Result<Evaluation> {
    let field = d.realize(mesh)?;
    let op = assemble_maxwell(mesh, &field, z)?;
    let rep = solve_eigenpairs_with(&op, shift, k, opts)?;
    let zero_tol = opts.gap_tol_rel * rep.shift.norm().max(1.0);
    let good: Vec<c64> = rep.eigenpairs.iter().filter(|p| p.residual < ACCEPT_RESIDUAL).map(|p| p.omega).collect();
    let pick = select_eigenvalue(&good, interval, zero_tol);
    Ok(Evaluation {
        omega: pick.map(|p| p.0),
        value: pick.map(|p| p.1).unwrap_or(f64::INFINITY),
        op_applications: rep.op_applications,
        converged: rep.converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    CoordinateSearch,
    NelderMead,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub eval: usize,
    pub design_hash: u64,
    pub omega: Option<c64>,
    pub value: f64,
    pub op_applications: usize,
    pub converged: bool,
    pub feasible: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OptimizationTrace {
    pub records: Vec<IterationRecord>,
    /// Best value after each evaluation.
    pub best: Vec<f64>,
    /// Set when the search stopped on repeated solver failures.
    pub aborted: Option<String>,
}

impl OptimizationTrace {
    pub fn is_monotone(&self) -> bool {
        self.best.windows(2).all(|w| w[1] <= w[0])
    }
}

pub const STEP0: f64 = 0.25;
pub const STEP_FLOOR: f64 = 1e-3;
const MAX_FAILURES: usize = 3;

struct Search<'a> {
    mesh: &'a BoxMesh,
    z: &'a ImpedanceSpec,
    interval: &'a TargetInterval,
    shift: c64,
    k: usize,
    opts: &'a SolverOptions,
    budget: usize,
    trace: OptimizationTrace,
    best: Option<(DesignPoint, f64)>,
    failures: usize,
}

impl Search<'_> {
    fn left(&self) -> usize {
        self.budget - self.trace.records.len()
    }

    fn stopped(&self) -> bool {
        self.left() == 0 || self.trace.aborted.is_some()
    }

    /// Evaluates a batch concurrently and records results in batch order.
    fn eval_batch(&mut self, designs: &[DesignPoint]) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        let n = designs.len().min(self.left());
        let results: Vec<(Result<Evaluation>, Result<bool>)> = designs[..n]
            .par_iter()
            .map(|d| {
                (evaluate_design(d, self.mesh, self.z, self.interval, self.shift, self.k, self.opts), d.is_feasible())
            })
            .collect();
        let mut values = Vec::with_capacity(n);
        for (d, (ev, feas)) in designs.iter().zip(results) {
            let feasible = feas?;
            if !feasible {
                return Err(Error::Invalid(format!("design {:016x} left the feasible set", d.hash())));
            }
            let prev = self.trace.best.last().copied().unwrap_or(f64::INFINITY);
            let rec = match ev {
                Ok(e) => {
                    self.failures = 0;
                    IterationRecord {
                        eval: self.trace.records.len(),
                        design_hash: d.hash(),
                        omega: e.omega,
                        value: e.value,
                        op_applications: e.op_applications,
                        converged: e.converged,
                        feasible,
                        error: None,
                    }
                }
                Err(err) => {
                    self.failures += 1;
                    IterationRecord {
                        eval: self.trace.records.len(),
                        design_hash: d.hash(),
                        omega: None,
                        value: f64::INFINITY,
                        op_applications: 0,
                        converged: false,
                        feasible,
                        error: Some(err.to_string()),
                    }
                }
            };
            if rec.value < prev || self.best.is_none() {
                self.best = Some((d.clone(), rec.value));
            }
            values.push(rec.value);
            self.trace.best.push(prev.min(rec.value));
            self.trace.records.push(rec);
            if self.failures >= MAX_FAILURES {
                self.trace.aborted = Some(format!("{MAX_FAILURES} consecutive solver failures"));
                break;
            }
        }
        Ok(values)
    }
}

fn coordinate_search(s: &mut Search, d0: &DesignPoint) -> Result<()> {
    let mut cur = d0.clone();
    let mut val = s.eval_batch(std::slice::from_ref(&cur))?[0];
    let mut step = STEP0;
    while !s.stopped() && step >= STEP_FLOOR {
        let mut improved = false;
        for c in 0..cur.cells.len() {
            if s.stopped() {
                break;
            }
            let t = cur.cells[c].theta();
            let mut cands = Vec::new();
            for nt in [(t + step).min(1.0), (t - step).max(0.0)] {
                if nt != t {
                    let mut d = cur.clone();
                    d.cells[c] = d.cells[c].with_theta(nt);
                    cands.push(d);
                }
            }
            let vals = s.eval_batch(&cands)?;
            if let Some((i, &v)) = vals.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal)) {
                if v < val {
                    cur = cands[i].clone();
                    val = v;
                    improved = true;
                }
            }
        }
        if !improved && !s.stopped() {
            // rotate laminate normals before shrinking the step
            for c in 0..cur.cells.len() {
                if s.stopped() {
                    break;
                }
                if let DesignCell::Laminate { theta, axis } = cur.cells[c] {
                    let mut d = cur.clone();
                    d.cells[c] = DesignCell::Laminate { theta, axis: (axis + 1) % 3 };
                    let v = s.eval_batch(std::slice::from_ref(&d))?;
                    if let Some(&v) = v.first() {
                        if v < val {
                            cur = d;
                            val = v;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(())
}

fn nelder_mead(s: &mut Search, d0: &DesignPoint) -> Result<()> {
    let n = d0.cells.len();
    let make = |x: &[f64]| -> DesignPoint {
        let mut d = d0.clone();
        for (c, &t) in d.cells.iter_mut().zip(x) {
            *c = c.with_theta(t.clamp(0.0, 1.0));
        }
        d
    };
    let x0: Vec<f64> = d0.cells.iter().map(|c| c.theta()).collect();
    let mut simplex = vec![x0.clone()];
    for i in 0..n {
        let mut x = x0.clone();
        x[i] = if x[i] + STEP0 <= 1.0 { x[i] + STEP0 } else { x[i] - STEP0 };
        simplex.push(x);
    }
    let designs: Vec<DesignPoint> = simplex.iter().map(|x| make(x)).collect();
    let mut f = s.eval_batch(&designs)?;
    simplex.truncate(f.len());
    if simplex.len() < n + 1 {
        return Ok(());
    }
    let clamp = |x: Vec<f64>| -> Vec<f64> { x.into_iter().map(|t| t.clamp(0.0, 1.0)).collect() };
    while !s.stopped() {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| f[a].partial_cmp(&f[b]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        f = idx.iter().map(|&i| f[i]).collect();
        let spread = (0..n).map(|j| simplex.iter().map(|x| (x[j] - simplex[0][j]).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if spread < STEP_FLOOR {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |a: f64| clamp(centroid.iter().zip(&worst).map(|(c, w)| c + a * (c - w)).collect());
        let xr = along(1.0);
        let fr = match s.eval_batch(&[make(&xr)])?.first() {
            Some(&v) => v,
            None => break,
        };
        if fr < f[0] {
            let xe = along(2.0);
            let fe = match s.eval_batch(&[make(&xe)])?.first() {
                Some(&v) => v,
                None => break,
            };
            if fe < fr {
                simplex[n] = xe;
                f[n] = fe;
            } else {
                simplex[n] = xr;
                f[n] = fr;
            }
        } else if fr < f[n - 1] {
            simplex[n] = xr;
            f[n] = fr;
        } else {
            let xc = if fr < f[n] { along(0.5) } else { along(-0.5) };
            let fc = match s.eval_batch(&[make(&xc)])?.first() {
                Some(&v) => v,
                None => break,
            };
            if fc < f[n].min(fr) {
                simplex[n] = xc;
                f[n] = fc;
            } else {
                // shrink toward the best vertex
                let best = simplex[0].clone();
                let shrunk: Vec<Vec<f64>> = simplex[1..].iter().map(|x| x.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect()).collect();
                let designs: Vec<DesignPoint> = shrunk.iter().map(|x| make(x)).collect();
                let fs = s.eval_batch(&designs)?;
                for (i, v) in fs.into_iter().enumerate() {
                    simplex[i + 1] = shrunk[i].clone();
                    f[i + 1] = v;
                }
            }
        }
    }
    Ok(())
}

/// Runs the search and returns the best design visited with the full trace.
#[allow(clippy::too_many_arguments)]
pub fn optimize(
    d0: &DesignPoint,
    budget: usize,
    method: Method,
    mesh: &BoxMesh,
    z: &ImpedanceSpec,
    interval: &TargetInterval,
    shift: c64,
    k: usize,
    opts: &SolverOptions,
) -> Result<(DesignPoint, OptimizationTrace)> {
    if budget == 0 {
        return invalid("budget must be at least 1");
    }
    d0.validate()?;
    d0.realize(mesh)?;
    let mut s = Search {
        mesh,
        z,
        interval,
        shift,
        k,
        opts,
        budget,
        trace: OptimizationTrace::default(),
        best: None,
        failures: 0,
    };
    match method {
        Method::CoordinateSearch => coordinate_search(&mut s, d0)?,
        Method::NelderMead => nelder_mead(&mut s, d0)?,
    }
    let best = s.best.map(|b| b.0).unwrap_or_else(|| d0.clone());
    Ok((best, s.trace))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignSample {
    pub trial: usize,
    pub min_positive: Option<f64>,
    pub max_negative: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinPositiveReport {
    pub omega_plus: f64,
    pub trial: usize,
    pub design: MaterialField,
    /// Largest negative eigenvalue over all samples.
    pub omega_minus: f64,
    pub samples: Vec<SignSample>,
}

/// Smallest positive eigenvalue over sampled fields for `Z = -ic`, searched
/// with shifts `+s0` and `-s0`. Every sample must show both signs.
pub fn min_positive_eigenvalue<F>(
    sampler: F,
    trials: usize,
    mesh: &BoxMesh,
    c: f64,
    s0: f64,
    k: usize,
    opts: &SolverOptions,
) -> Result<MinPositiveReport>
where
    F: Fn(usize) -> MaterialField + Sync,
{
    use rayon::prelude::*;
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    if !(s0 > 0.0) {
        return invalid("s0 must be positive");
    }
    let z = ImpedanceSpec::selfadjoint_ic(c, Sign::Minus);
    z.validate()?;
    let runs: Vec<(SignSample, MaterialField)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let field = sampler(t);
            let run = || -> Result<(Option<f64>, Option<f64>)> {
                let op = assemble_maxwell(mesh, &field, &z)?;
                let mut pos: Option<f64> = None;
                let mut neg: Option<f64> = None;
                for s in [s0, -s0] {
                    let rep = solve_eigenpairs_with(&op, c64::new(s, 0.0), k, opts)?;
                    let zero = opts.gap_tol_rel * rep.shift.norm().max(1.0);
                    for p in rep.eigenpairs.iter().filter(|p| p.residual < ACCEPT_RESIDUAL && p.omega.norm() >= zero) {
                        let w = p.omega.re;
                        if w > 0.0 {
                            pos = Some(pos.map_or(w, |v| v.min(w)));
                        } else {
                            neg = Some(neg.map_or(w, |v| v.max(w)));
                        }
                    }
                }
                Ok((pos, neg))
            };
            let sample = match run() {
                Ok((p, n)) => SignSample {
                    trial: t,
                    min_positive: p,
                    max_negative: n,
                    error: if p.is_none() || n.is_none() { Some("only one sign found".into()) } else { None },
                },
                Err(e) => SignSample { trial: t, min_positive: None, max_negative: None, error: Some(e.to_string()) },
            };
            (sample, field)
        })
        .collect();
    let mut best: Option<(f64, usize)> = None;
    let mut omega_minus = f64::NEG_INFINITY;
    for (s, _) in &runs {
        if let Some(p) = s.min_positive {
            if best.map(|b| p < b.0).unwrap_or(true) {
                best = Some((p, s.trial));
            }
        }
        if let Some(n) = s.max_negative {
            omega_minus = omega_minus.max(n);
        }
    }
    let (omega_plus, trial) = best.ok_or_else(|| Error::NoConvergence("no positive eigenvalue in any sample".into()))?;
    let design = runs[trial].1.clone();
    Ok(MinPositiveReport {
        omega_plus,
        trial,
        design,
        omega_minus,
        samples: runs.into_iter().map(|r| r.0).collect(),
    })
}
