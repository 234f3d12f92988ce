use crate::c64;
use crate::error::{invalid, Error, Result};
use std::f64::consts::FRAC_PI_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Dense impedance matrix acting on boundary-edge trace coefficients,
/// rows/columns ordered as [`crate::BoxMesh::boundary_edges`]. Row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMatrix {
    pub n: usize,
    pub data: Vec<c64>,
}

impl BoundaryMatrix {
    pub fn new(n: usize, data: Vec<c64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension { expected: n * n, got: data.len() });
        }
        Ok(BoundaryMatrix { n, data })
    }

    pub fn scaled_identity(n: usize, a: c64) -> Self {
        let mut data = vec![c64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = a;
        }
        BoundaryMatrix { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.data[i * self.n + j]
    }
}

/// Boundary operator `Z` in `n x E = Z H_tan`.
#[derive(Clone, Debug, PartialEq)]
pub enum ImpedanceSpec {
    /// Constant coefficient on the whole boundary.
    Scalar(c64),
    /// One coefficient per box side `2*axis + s`.
    PerFace([c64; 6]),
    /// `Z = sign * i * c`; `iZ` or `-iZ` is positive and selfadjoint.
    SelfAdjointIc { c: f64, sign: Sign },
    Matrix(BoundaryMatrix),
    /// Perfect conductor reference case: `n x E = 0`, no boundary term.
    Pec,
}

/// Coercivity constant `c` and sector width `delta` of an accretive coefficient set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImpedanceBounds {
    pub c: f64,
    pub delta: f64,
}

/// Checks `|a| >= c > 0` and that all arguments fit in one of the sectors
/// `[-pi/2, pi/2 - delta]` or `[-pi/2 + delta, pi/2]` with `delta > 0`.
pub fn sector_bounds(coeffs: &[c64]) -> Result<ImpedanceBounds> {
    let mut c = f64::INFINITY;
    let (mut amin, mut amax) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in coeffs {
        if !a.re.is_finite() || !a.im.is_finite() {
            return invalid("non-finite impedance coefficient");
        }
        let m = a.norm();
        if m == 0.0 {
            return invalid("impedance coefficient must be nonzero");
        }
        let arg = a.arg();
        if arg.abs() > FRAC_PI_2 {
            return invalid(format!("impedance coefficient {a} is not accretive"));
        }
        c = c.min(m);
        amin = amin.min(arg);
        amax = amax.max(arg);
    }
    let delta = (FRAC_PI_2 - amax).max(amin + FRAC_PI_2);
    if !(delta > 0.0) {
        return invalid("impedance coefficients violate the sector condition");
    }
    Ok(ImpedanceBounds { c, delta })
}

impl ImpedanceSpec {
    pub fn scalar(a: c64) -> Self {
        ImpedanceSpec::Scalar(a)
    }

    pub fn real(a: f64) -> Self {
        ImpedanceSpec::Scalar(c64::new(a, 0.0))
    }

    pub fn selfadjoint_ic(c: f64, sign: Sign) -> Self {
        ImpedanceSpec::SelfAdjointIc { c, sign }
    }

    pub fn is_pec(&self) -> bool {
        matches!(self, ImpedanceSpec::Pec)
    }

    /// True when `iZ` is Hermitian, making the assembled operator Hermitian.
    pub fn is_selfadjoint_class(&self) -> bool {
        matches!(self, ImpedanceSpec::SelfAdjointIc { .. } | ImpedanceSpec::Pec)
    }

    /// Pointwise coefficient on box side `side`, if the spec is pointwise.
    pub fn face_coefficient(&self, side: usize) -> Option<c64> {
        match self {
            ImpedanceSpec::Scalar(a) => Some(*a),
            ImpedanceSpec::PerFace(a) => Some(a[side]),
            ImpedanceSpec::SelfAdjointIc { c, sign } => Some(c64::new(0.0, sign.value() * c)),
            ImpedanceSpec::Pec => Some(c64::new(0.0, 0.0)),
            ImpedanceSpec::Matrix(_) => None,
        }
    }

    /// Validates the pointwise variants. The matrix variant is validated at
    /// assembly time against the boundary trace mass; PEC has no bounds.
    pub fn validate(&self) -> Result<Option<ImpedanceBounds>> {
        match self {
            ImpedanceSpec::Scalar(a) => sector_bounds(&[*a]).map(Some),
            ImpedanceSpec::PerFace(a) => sector_bounds(a).map(Some),
            ImpedanceSpec::SelfAdjointIc { c, .. } => {
                if !(*c > 0.0) || !c.is_finite() {
                    return invalid("selfadjoint impedance needs c > 0");
                }
                Ok(Some(ImpedanceBounds { c: *c, delta: std::f64::consts::PI }))
            }
            ImpedanceSpec::Matrix(m) => {
                if m.data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                    return invalid("non-finite impedance matrix entry");
                }
                Ok(None)
            }
            ImpedanceSpec::Pec => Ok(None),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ImpedanceSpec::Scalar(a) => format!("scalar({},{})", a.re, a.im),
            ImpedanceSpec::PerFace(a) => {
                let parts: Vec<String> = a.iter().map(|v| format!("({},{})", v.re, v.im)).collect();
                format!("per_face[{}]", parts.join(";"))
            }
            ImpedanceSpec::SelfAdjointIc { c, sign } => {
                format!("selfadjoint_ic({c},{})", if *sign == Sign::Plus { '+' } else { '-' })
            }
            ImpedanceSpec::Matrix(m) => format!("matrix({}x{})", m.n, m.n),
            ImpedanceSpec::Pec => "pec".into(),
        }
    }
}
