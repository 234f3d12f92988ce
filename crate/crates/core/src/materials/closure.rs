use super::tensor::SymTensor;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Relative tolerance on every membership inequality.
pub const MEMBER_TOL: f64 = 1e-9;
/// Grid size of the theta search in [`in_hclosure`].
pub const THETA_GRID: usize = 201;

/// Weighted harmonic (`lam_minus`) and arithmetic (`lam_plus`) means of two phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaMeans<T> {
    pub lam_minus: T,
    pub lam_plus: T,
    pub theta: T,
    pub eps1: T,
    pub eps2: T,
}

pub fn theta_means<T: Real>(eps1: T, eps2: T, theta: T) -> Result<ThetaMeans<T>> {
    if !(eps1 > T::zero() && eps2 > T::zero()) || !eps1.is_finite() || !eps2.is_finite() {
        return invalid("phase values must be positive and finite");
    }
    if !(theta >= T::zero() && theta <= T::one()) {
        return invalid("theta outside [0,1]");
    }
    let one = T::one();
    let lam_minus = if theta == one {
        eps1
    } else if theta == T::zero() {
        eps2
    } else {
        one / (theta / eps1 + (one - theta) / eps2)
    };
    let lam_plus = theta * eps1 + (one - theta) * eps2;
    Ok(ThetaMeans { lam_minus, lam_plus, theta, eps1, eps2 })
}

fn check_phases<T: Real>(a: &SymTensor<T>, eps1: T, eps2: T) -> Result<()> {
    if !(eps1 > T::zero()) || !(eps1 < eps2) || !eps2.is_finite() {
        return invalid("closure needs 0 < eps1 < eps2");
    }
    if !a.is_finite() {
        return invalid("non-finite tensor entry");
    }
    Ok(())
}

/// Largest relative violation of the `M_theta` conditions (`<= 0` inside).
///
/// Endpoint theta compares against the single matrix `eps_phase * I`.
/// A singular trace term on the violated side counts as `+inf`.
pub fn mtheta_violation<T: Real>(a: &SymTensor<T>, eps1: T, eps2: T, theta: T) -> Result<T> {
    check_phases(a, eps1, eps2)?;
    let m = theta_means(eps1, eps2, theta)?;
    if theta == T::one() || theta == T::zero() {
        let c = if theta == T::one() { eps1 } else { eps2 };
        return Ok(a.sub(&SymTensor::scalar(c)).norm() / c);
    }
    Ok(spectrum_violation(a.eigenvalues(), &m))
}

pub(crate) fn spectrum_violation<T: Real>(w: [T; 3], m: &ThetaMeans<T>) -> T {
    let (lm, lp, e1, e2) = (m.lam_minus, m.lam_plus, m.eps1, m.eps2);
    let one = T::one();
    let two = T::lit(2.0);
    let mut v = (lm - w[0]) / lm;
    v = v.max((w[2] - lp) / lp);
    let b1 = one / (lm - e1) + two / (lp - e1);
    let b2 = one / (e2 - lm) + two / (e2 - lp);
    let mut t1 = T::zero();
    let mut t2 = T::zero();
    for &x in &w {
        if x - e1 <= T::zero() || e2 - x <= T::zero() {
            return T::infinity();
        }
        t1 += one / (x - e1);
        t2 += one / (e2 - x);
    }
    v = v.max((t1 - b1) / b1);
    v.max((t2 - b2) / b2)
}

/// Membership in `M_theta` with relative tolerance [`MEMBER_TOL`] on each inequality.
pub fn in_mtheta<T: Real>(a: &SymTensor<T>, eps1: T, eps2: T, theta: T) -> Result<bool> {
    Ok(mtheta_violation(a, eps1, eps2, theta)? <= T::lit(MEMBER_TOL))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosureMembership<T> {
    pub member: bool,
    /// Volume fraction with the smallest violation.
    pub theta: T,
    pub violation: T,
}

/// Searches theta in [0,1]: a grid of [`THETA_GRID`] points, then golden-section
/// refinement on the bracket around the best grid point.
pub fn hclosure_search<T: Real>(a: &SymTensor<T>, eps1: T, eps2: T) -> Result<ClosureMembership<T>> {
    check_phases(a, eps1, eps2)?;
    let n = THETA_GRID - 1;
    let f = |t: T| mtheta_violation(a, eps1, eps2, t).unwrap_or(T::infinity());
    let grid: Vec<T> = (0..=n).map(|i| T::lit(i as f64 / n as f64)).collect();
    let vals: Vec<T> = grid.iter().map(|&t| f(t)).collect();
    let mut best = 0;
    for i in 1..=n {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    let mut theta = grid[best];
    let mut viol = vals[best];
    if viol > T::lit(MEMBER_TOL) {
        // refine strictly inside (0,1) where the violation is continuous
        let eps = T::lit(1e-12);
        let mut lo = if best == 0 { eps } else { grid[best - 1].max(eps) };
        let mut hi = if best == n { T::one() - eps } else { grid[best + 1].min(T::one() - eps) };
        let g = T::lit(0.5 * (5f64.sqrt() - 1.0));
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let mut f1 = f(x1);
        let mut f2 = f(x2);
        for _ in 0..200 {
            if hi - lo <= T::lit(1e-15) {
                break;
            }
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2);
            }
        }
        let (t, v) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if v < viol {
            theta = t;
            viol = v;
        }
    }
    Ok(ClosureMembership { member: viol <= T::lit(MEMBER_TOL), theta, violation: viol })
}

/// Membership in the union of `M_theta` over theta in [0,1].
pub fn in_hclosure<T: Real>(a: &SymTensor<T>, eps1: T, eps2: T) -> Result<bool> {
    Ok(hclosure_search(a, eps1, eps2)?.member)
}

/// Effective tensor of a rank-1 laminate with the given layer normal.
pub fn laminate_hlimit<T: Real>(eps1: T, eps2: T, theta: T, normal: [T; 3]) -> Result<SymTensor<T>> {
    let nn = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
    if !(nn > T::zero()) || !nn.is_finite() {
        return invalid("lamination normal must be nonzero");
    }
    let n = [normal[0] / nn, normal[1] / nn, normal[2] / nn];
    let m = theta_means(eps1, eps2, theta)?;
    let mut e = [T::zero(); 6];
    let idx = [[0usize, 1, 2], [1, 3, 4], [2, 4, 5]];
    for i in 0..3 {
        for j in i..3 {
            let d = if i == j { m.lam_plus } else { T::zero() };
            e[idx[i][j]] = d + (m.lam_minus - m.lam_plus) * n[i] * n[j];
        }
    }
    Ok(SymTensor::from_entries(e))
}

/// Returns a member of `M_theta`: members are returned unchanged; otherwise the
/// spectrum is clipped to `[lam_minus, lam_plus]` and moved along a straight line
/// toward `(lam_minus, lam_plus, lam_plus)` by bisection (60 steps) until both
/// trace inequalities hold.
pub fn project_to_mtheta<T: Real>(a: &SymTensor<T>, eps1: T, eps2: T, theta: T) -> Result<SymTensor<T>> {
    if mtheta_violation(a, eps1, eps2, theta)? <= T::lit(MEMBER_TOL) {
        return Ok(*a);
    }
    if theta == T::one() {
        return Ok(SymTensor::scalar(eps1));
    }
    if theta == T::zero() {
        return Ok(SymTensor::scalar(eps2));
    }
    let m = theta_means(eps1, eps2, theta)?;
    let (w, v) = a.eigen();
    let clip = w.map(|x| x.max(m.lam_minus).min(m.lam_plus));
    let target = [m.lam_minus, m.lam_plus, m.lam_plus];
    let at = |t: T| {
        let mut out = [T::zero(); 3];
        for k in 0..3 {
            out[k] = (T::one() - t) * clip[k] + t * target[k];
        }
        out
    };
    // stricter than MEMBER_TOL so the reassembled tensor still passes
    let strict = T::lit(1e-11);
    let feasible = |t: T| spectrum_violation(at(t), &m) <= strict;
    let spectrum = if feasible(T::zero()) {
        clip
    } else if !feasible(T::one()) {
        target
    } else {
        let (mut lo, mut hi) = (T::zero(), T::one());
        for _ in 0..60 {
            let mid = T::lit(0.5) * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        at(hi)
    };
    Ok(SymTensor::from_spectrum(spectrum, &v))
}

#[cfg(test)]
mod tests {
    use super::*;

    const E2: f64 = 11.68;

    #[test]
    fn means_examples() {
        let m = theta_means(1.0, E2, 0.5).unwrap();
        // hand evaluation: 2 * 11.68 / 12.68
        assert!((m.lam_minus - 23.36 / 12.68).abs() < 1e-14);
        assert!((m.lam_minus - 1.84226).abs() < 5e-5);
        assert_eq!(m.lam_plus, 6.34);
        let m = theta_means(1.0, E2, 1.0).unwrap();
        assert_eq!((m.lam_minus, m.lam_plus), (1.0, 1.0));
        let m = theta_means(2.0f64, 2.0, 0.3).unwrap();
        assert!((m.lam_minus - 2.0).abs() < 1e-15 && (m.lam_plus - 2.0).abs() < 1e-15);
        assert!(theta_means(1.0, 2.0, 1.5).is_err());
        assert!(theta_means(1.0, 2.0, -0.1).is_err());
    }

    #[test]
    fn mtheta_examples() {
        let m = theta_means(1.0, E2, 0.5).unwrap();
        let lam = SymTensor::diag(m.lam_minus, m.lam_plus, m.lam_plus);
        assert!(in_mtheta(&lam, 1.0, E2, 0.5).unwrap());
        let iso = SymTensor::scalar(m.lam_minus);
        assert!(!in_mtheta(&iso, 1.0, E2, 0.5).unwrap());
        // 3/(l-1) against 1/(l-1) + 2/(L-1)
        assert!(3.0 / (m.lam_minus - 1.0) > 1.0 / (m.lam_minus - 1.0) + 2.0 / (m.lam_plus - 1.0));
        assert!(in_mtheta(&SymTensor::scalar(1.0), 1.0, E2, 1.0).unwrap());
        assert!(!in_mtheta(&SymTensor::scalar(m.lam_plus), 1.0, E2, 1.0).unwrap());
        assert!(in_mtheta(&SymTensor::scalar(E2), 1.0, E2, 0.0).unwrap());
        assert!(in_mtheta(&lam, 4.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn trace_bounds_hold_with_equality_at_laminate() {
        let m = theta_means(1.0, E2, 0.5).unwrap();
        let w = SymTensor::diag(m.lam_minus, m.lam_plus, m.lam_plus).eigenvalues();
        let t2: f64 = w.iter().map(|x| 1.0 / (E2 - x)).sum();
        let b2 = 1.0 / (E2 - m.lam_minus) + 2.0 / (E2 - m.lam_plus);
        assert!((t2 - b2).abs() <= 1e-14 * b2);
        let v = mtheta_violation(&SymTensor::diag(m.lam_minus, m.lam_plus, m.lam_plus), 1.0, E2, 0.5).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn singular_trace_is_infinite() {
        let m = theta_means(1.0, E2, 0.5).unwrap();
        let v = spectrum_violation([1.0, 2.0, 3.0], &m);
        assert!(v.is_infinite());
    }

    #[test]
    fn hclosure_examples() {
        assert!(in_hclosure(&SymTensor::scalar(1.0), 1.0, E2).unwrap());
        let r = hclosure_search(&SymTensor::scalar(1.0), 1.0, E2).unwrap();
        assert_eq!(r.theta, 1.0);
        let m = theta_means(1.0, E2, 0.3).unwrap();
        let a = SymTensor::diag(m.lam_minus, m.lam_plus, m.lam_plus);
        let r = hclosure_search(&a, 1.0, E2).unwrap();
        assert!(r.member);
        assert!((r.theta - 0.3).abs() < 1e-6);
        assert!(!in_hclosure(&SymTensor::scalar(E2 + 1.0), 1.0, E2).unwrap());
    }

    #[test]
    fn hclosure_off_grid_laminate() {
        let th = 0.123456789;
        let a = laminate_hlimit(1.0, E2, th, [0.2, 0.9, -0.4]).unwrap();
        let r = hclosure_search(&a, 1.0, E2).unwrap();
        assert!(r.member, "violation {}", r.violation);
        assert!((r.theta - th).abs() < 1e-7);
    }

    #[test]
    fn laminate_examples() {
        let a = laminate_hlimit(1.0, E2, 0.5, [1.0, 0.0, 0.0]).unwrap();
        let m = theta_means(1.0, E2, 0.5).unwrap();
        assert_eq!(a, SymTensor::diag(m.lam_minus, 6.34, 6.34));
        let c = laminate_hlimit(2.0, 2.0, 0.7, [0.3, 0.1, 0.5]).unwrap();
        assert!(c.sub(&SymTensor::scalar(2.0)).norm() < 1e-14);
        let s = 0.5f64.sqrt();
        let r = laminate_hlimit(1.0, E2, 0.5, [s, s, 0.0]).unwrap();
        // rotation by 45 degrees about z maps e1 to (e1+e2)/sqrt2
        let rot = [[s, -s, 0.0], [s, s, 0.0], [0.0, 0.0, 1.0]];
        let expect = SymTensor::diag(m.lam_minus, 6.34, 6.34).congruence(&rot);
        assert!(r.sub(&expect).norm() < 1e-14);
        assert!(laminate_hlimit(1.0, E2, 0.5, [0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn projection_examples() {
        let m = theta_means(1.0, E2, 0.5).unwrap();
        let lam = laminate_hlimit(1.0, E2, 0.5, [0.0, 1.0, 0.0]).unwrap();
        assert_eq!(project_to_mtheta(&lam, 1.0, E2, 0.5).unwrap(), lam);
        let iso = SymTensor::scalar(m.lam_minus);
        let p = project_to_mtheta(&iso, 1.0, E2, 0.5).unwrap();
        assert!(in_mtheta(&p, 1.0, E2, 0.5).unwrap());
        let big = SymTensor::diag(2.0, 3.0, 20.0);
        let p = project_to_mtheta(&big, 1.0, E2, 0.5).unwrap();
        assert!(p.eigenvalues()[2] <= m.lam_plus * (1.0 + 1e-12));
        assert!(in_mtheta(&p, 1.0, E2, 0.5).unwrap());
        let p2 = project_to_mtheta(&p, 1.0, E2, 0.5).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn laminate_identifies_its_fraction() {
        let a = laminate_hlimit(1.0, E2, 0.5, [1.0, 0.0, 0.0]).unwrap();
        assert!(in_mtheta(&a, 1.0, E2, 0.5).unwrap());
        assert!(!in_mtheta(&a, 1.0, E2, 0.3).unwrap());
        assert!(!in_mtheta(&a, 1.0, E2, 0.7).unwrap());
    }
}
