//! Experiment configuration: TOML-style `key = value` lines grouped under
//! `[section]` headers. Every section is optional and has defaults; unknown
//! keys are rejected.

use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::fem::{ImpedanceSpec, Sign};
use crate::homogenization::LaminateSpec;
use crate::materials::{MaterialField, SymTensor};
use crate::mesh::BoxMesh;
use crate::optimizer::{DesignPoint, Method, TargetInterval};
use crate::spectrum::{RandomSampler, SolverOptions};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Spectrum,
    GapScan,
    HconvTest,
    EigenConvergence,
    Optimize,
    ClosureCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::GapScan => "gap_scan",
            ExperimentKind::HconvTest => "hconv_test",
            ExperimentKind::EigenConvergence => "eigen_convergence",
            ExperimentKind::Optimize => "optimize",
            ExperimentKind::ClosureCheck => "closure_check",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub n: [usize; 3],
    pub size: [f64; 3],
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { n: [4, 4, 4], size: [1.0, 1.0, 1.0] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialSource {
    Uniform,
    Laminate,
    Design,
    Random,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialConfig {
    pub source: MaterialSource,
    /// Uniform isotropic permittivity, overridden by `eps_tensor`.
    pub eps: f64,
    pub eps_tensor: Option<[f64; 6]>,
    pub mu: f64,
    /// Design file for `source = "design"`.
    pub path: Option<PathBuf>,
    /// Spectral bounds for `source = "random"`.
    pub alpha: f64,
    pub beta: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig {
            source: MaterialSource::Uniform,
            eps: 1.0,
            eps_tensor: None,
            mu: 1.0,
            path: None,
            alpha: 1.0,
            beta: 11.68,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpedanceKind {
    Pec,
    Scalar,
    PerFace,
    SelfadjointIc,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpedanceConfig {
    pub kind: ImpedanceKind,
    pub re: f64,
    pub im: f64,
    /// `[re, im]` per side in the order `x-, x+, y-, y+, z-, z+`.
    pub faces: Option<Vec<[f64; 2]>>,
    pub c: f64,
    /// "+" or "-".
    pub sign: String,
}

impl Default for ImpedanceConfig {
    fn default() -> Self {
        ImpedanceConfig { kind: ImpedanceKind::Scalar, re: 1.0, im: 0.0, faces: None, c: 1.0, sign: "-".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub shift: [f64; 2],
    pub k: usize,
    pub tol: f64,
    pub block_size: usize,
    pub max_basis: usize,
    pub max_op_applications: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverConfig {
            shift: [1.0, 0.0],
            k: 6,
            tol: o.tol,
            block_size: o.block_size,
            max_basis: o.max_basis,
            max_op_applications: o.max_op_applications,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub trials: usize,
    /// Shift grid as `[re, im]` pairs.
    pub shifts: Vec<[f64; 2]>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { trials: 50, shifts: vec![[0.0, 0.25]] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Hlimit,
    Arithmetic,
    Harmonic,
    Tensor,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaminateConfig {
    pub eps1: f64,
    pub eps2: f64,
    pub theta: f64,
    pub normal: usize,
    pub periods: usize,
    pub n_list: Vec<usize>,
    pub candidate: CandidateKind,
    pub candidate_tensor: Option<[f64; 6]>,
}

impl Default for LaminateConfig {
    fn default() -> Self {
        LaminateConfig {
            eps1: 1.0,
            eps2: 4.0,
            theta: 0.5,
            normal: 0,
            periods: 1,
            n_list: vec![1, 2, 4],
            candidate: CandidateKind::Hlimit,
            candidate_tensor: None,
        }
    }
}

impl LaminateConfig {
    pub fn spec(&self) -> LaminateSpec {
        LaminateSpec { eps1: self.eps1, eps2: self.eps2, theta: self.theta, normal: self.normal, periods: self.periods }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    pub budget: usize,
    /// "coordinate_search" or "nelder_mead".
    pub method: String,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub grid: [usize; 3],
    pub theta0: f64,
    pub axis0: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            budget: 200,
            method: "coordinate_search".into(),
            phi_minus: 1.0,
            phi_plus: 1.1,
            eps1: 1.0,
            eps2: 11.68,
            grid: [4, 4, 4],
            theta0: 0.5,
            axis0: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosureConfig {
    pub tensor: [f64; 6],
    pub eps1: f64,
    pub eps2: f64,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        ClosureConfig { tensor: [1.0, 0.0, 0.0, 1.0, 0.0, 1.0], eps1: 1.0, eps2: 11.68 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default)]
    pub impedance: ImpedanceConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub laminate: LaminateConfig,
    #[serde(default)]
    pub optimize: OptimizeConfig,
    #[serde(default)]
    pub closure: ClosureConfig,
}

pub const DEFAULT_SEED: u64 = 0x0d15_51fa;

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {}", e.message())))
    }

    /// Reads a config; relative file paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(p), Some(dir)) = (cfg.material.path.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn mesh(&self) -> Result<BoxMesh> {
        let [nx, ny, nz] = self.mesh.n;
        let [lx, ly, lz] = self.mesh.size;
        BoxMesh::new(nx, ny, nz, lx, ly, lz)
    }

    pub fn impedance(&self) -> Result<ImpedanceSpec> {
        let c = &self.impedance;
        let z = match c.kind {
            ImpedanceKind::Pec => ImpedanceSpec::Pec,
            ImpedanceKind::Scalar => ImpedanceSpec::scalar(c64::new(c.re, c.im)),
            ImpedanceKind::PerFace => {
                let f = c.faces.as_ref().ok_or_else(|| Error::Invalid("per_face impedance needs 'faces'".into()))?;
                if f.len() != 6 {
                    return invalid(format!("per_face impedance needs 6 faces, got {}", f.len()));
                }
                let mut a = [c64::new(0.0, 0.0); 6];
                for (x, p) in a.iter_mut().zip(f) {
                    *x = c64::new(p[0], p[1]);
                }
                ImpedanceSpec::PerFace(a)
            }
            ImpedanceKind::SelfadjointIc => {
                let sign = match c.sign.as_str() {
                    "+" | "plus" => Sign::Plus,
                    "-" | "minus" => Sign::Minus,
                    s => return invalid(format!("sign must be '+' or '-', got '{s}'")),
                };
                ImpedanceSpec::selfadjoint_ic(c.c, sign)
            }
        };
        z.validate()?;
        Ok(z)
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let s = &self.solver;
        if s.k == 0 {
            return invalid("solver.k must be at least 1");
        }
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return invalid("solver.tol must be in (0, 1)");
        }
        if s.block_size == 0 || s.max_op_applications == 0 {
            return invalid("solver.block_size and solver.max_op_applications must be positive");
        }
        if !s.shift.iter().all(|v| v.is_finite()) {
            return invalid("solver.shift must be finite");
        }
        Ok(SolverOptions {
            block_size: s.block_size,
            max_basis: s.max_basis,
            tol: s.tol,
            max_op_applications: s.max_op_applications,
            seed: self.seed(),
            ..SolverOptions::default()
        })
    }

    pub fn shift(&self) -> c64 {
        c64::new(self.solver.shift[0], self.solver.shift[1])
    }

    pub fn sampler(&self) -> Result<RandomSampler> {
        let m = &self.material;
        if !(m.alpha > 0.0 && m.alpha <= m.beta && m.beta.is_finite()) {
            return invalid("random material needs 0 < alpha <= beta");
        }
        Ok(RandomSampler { seed: self.seed(), alpha: m.alpha, beta: m.beta })
    }

    pub fn design_file(&self) -> Result<DesignPoint> {
        let p = self.material.path.as_ref().ok_or_else(|| Error::Invalid("material.path is required".into()))?;
        if !p.is_file() {
            return invalid(format!("design file {} does not exist", p.display()));
        }
        let text = std::fs::read_to_string(p).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", p.display())))?;
        DesignPoint::from_text(&text)
    }

    pub fn material_field(&self, mesh: &BoxMesh) -> Result<MaterialField> {
        let m = &self.material;
        let n = mesh.ncells();
        match m.source {
            MaterialSource::Uniform => {
                let eps = match m.eps_tensor {
                    Some(e) => SymTensor::from_entries(e),
                    None => SymTensor::scalar(m.eps),
                };
                MaterialField::uniform(n, eps, SymTensor::scalar(m.mu))
            }
            MaterialSource::Laminate => crate::homogenization::sample_laminate_field(mesh, &self.laminate.spec()),
            MaterialSource::Design => self.design_file()?.realize(mesh),
            MaterialSource::Random => Ok(self.sampler()?.sample(0, n)),
        }
    }

    pub fn candidate(&self) -> Result<SymTensor<f64>> {
        let l = &self.laminate;
        let m = crate::materials::theta_means(l.eps1, l.eps2, l.theta)?;
        Ok(match l.candidate {
            CandidateKind::Hlimit => {
                let mut n = [0.0; 3];
                n[l.normal.min(2)] = 1.0;
                crate::materials::laminate_hlimit(l.eps1, l.eps2, l.theta, n)?
            }
            CandidateKind::Arithmetic => SymTensor::scalar(m.lam_plus),
            CandidateKind::Harmonic => SymTensor::scalar(m.lam_minus),
            CandidateKind::Tensor => SymTensor::from_entries(
                l.candidate_tensor.ok_or_else(|| Error::Invalid("laminate.candidate_tensor is required".into()))?,
            ),
        })
    }

    pub fn method(&self) -> Result<Method> {
        match self.optimize.method.as_str() {
            "coordinate_search" => Ok(Method::CoordinateSearch),
            "nelder_mead" => Ok(Method::NelderMead),
            s => invalid(format!("unknown optimize.method '{s}'")),
        }
    }

    pub fn initial_design(&self) -> Result<DesignPoint> {
        if self.material.source == MaterialSource::Design {
            return self.design_file();
        }
        let o = &self.optimize;
        let d = DesignPoint::uniform_laminate(o.eps1, o.eps2, o.grid, o.theta0, o.axis0);
        d.validate()?;
        Ok(d)
    }

    /// Checks every parameter the chosen experiment will use, building the
    /// same objects the run will build, without doing any solver work.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        if let Some(k) = self.kind {
            if k != kind {
                return invalid(format!("config is for '{}' but '{}' was requested", k.name(), kind.name()));
            }
        }
        if kind == ExperimentKind::ClosureCheck {
            let c = &self.closure;
            crate::materials::theta_means(c.eps1, c.eps2, 0.5)?;
            if !SymTensor::from_entries(c.tensor).is_finite() {
                return invalid("closure.tensor is not finite");
            }
            return Ok(());
        }
        if kind == ExperimentKind::HconvTest {
            self.laminate.spec().validate()?;
            if self.laminate.n_list.is_empty() || self.laminate.n_list.contains(&0) {
                return invalid("laminate.n_list needs positive entries");
            }
            self.candidate()?;
            return Ok(());
        }
        let mesh = self.mesh()?;
        self.impedance()?;
        self.solver_options()?;
        match kind {
            ExperimentKind::Spectrum => {
                self.material_field(&mesh)?;
            }
            ExperimentKind::GapScan => {
                self.sampler()?;
                if self.scan.trials == 0 || self.scan.shifts.is_empty() {
                    return invalid("scan.trials and scan.shifts must be non-empty");
                }
            }
            ExperimentKind::EigenConvergence => {
                let spec = self.laminate.spec();
                spec.validate()?;
                if self.laminate.n_list.is_empty() {
                    return invalid("laminate.n_list is empty");
                }
                for &n in &self.laminate.n_list {
                    let s = LaminateSpec { periods: n, ..spec };
                    if n == 0 || s.cells_per_slab(&mesh) < 2.0 - 1e-12 {
                        return invalid(format!("laminate with n = {n} needs at least 2 cells per slab"));
                    }
                }
            }
            ExperimentKind::Optimize => {
                TargetInterval::new(self.optimize.phi_minus, self.optimize.phi_plus)?;
                if self.optimize.budget == 0 {
                    return invalid("optimize.budget must be at least 1");
                }
                self.method()?;
                self.initial_design()?.realize(&mesh)?;
            }
            ExperimentKind::ClosureCheck | ExperimentKind::HconvTest => {}
        }
        Ok(())
    }
}
