use super::deflation::{kernel_dim, Deflator, MassSolver};
use super::diagnostics::DiagnosticForms;
use super::{EigenPair, SolverOptions, SpectrumReport};
use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dense_eigen, dotc};
use crate::operator::{OperatorPair, ShiftedSolver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Basis {
    v: Vec<Vec<c64>>,
    bv: Vec<Vec<c64>>,
    w: Vec<Vec<c64>>,
}

struct Ctx<'a> {
    solver: ShiftedSolver<'a>,
    defl: Deflator,
    ops: usize,
}

impl Ctx<'_> {
    fn apply(&mut self, v: &[c64]) -> Vec<c64> {
        self.ops += 1;
        self.defl.apply(&self.solver.apply_inverse_b(v))
    }
}

impl Basis {
    fn len(&self) -> usize {
        self.v.len()
    }

    /// B-orthogonalizes `cand` against the basis (two passes); returns the
    /// normalized vector or `None` when it is numerically dependent.
    fn orthogonalize(&self, op: &OperatorPair, mut cand: Vec<c64>) -> Option<(Vec<c64>, Vec<c64>)> {
        let n0 = op.energy(&cand).max(0.0).sqrt();
        if !(n0 > 0.0) || !n0.is_finite() {
            return None;
        }
        for _ in 0..2 {
            for (v, bv) in self.v.iter().zip(&self.bv) {
                let c = dotc(bv, &cand);
                axpy(-c, v, &mut cand);
            }
        }
        let bc = op.apply_b(&cand);
        let n = dotc(&cand, &bc).re.max(0.0).sqrt();
        if n < 1e-10 * n0 {
            return None;
        }
        let s = 1.0 / n;
        cand.iter_mut().for_each(|x| *x *= s);
        let bc = bc.into_iter().map(|x| x * s).collect();
        Some((cand, bc))
    }
}

struct Ritz {
    theta: c64,
    omega: c64,
    y: Vec<c64>,
}

fn combine(vs: &[Vec<c64>], y: &[c64]) -> Vec<c64> {
    let mut out = vec![c64::new(0.0, 0.0); vs[0].len()];
    for (v, &c) in vs.iter().zip(y) {
        axpy(c, v, &mut out);
    }
    out
}

fn rayleigh_ritz(basis: &Basis, sigma: c64, gap_tol: f64, discarded: &mut usize) -> Result<Vec<Ritz>> {
    let m = basis.len();
    let mut h = vec![c64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            h[i * m + j] = dotc(&basis.bv[i], &basis.w[j]);
        }
    }
    let (vals, vecs) = dense_eigen(m, &h)?;
    let tmax = vals.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let mut out = Vec::new();
    let mut small = 0;
    for (theta, y) in vals.into_iter().zip(vecs) {
        if theta.norm() <= 1e-13 * tmax {
            continue;
        }
        let omega = sigma + 1.0 / theta;
        if omega.norm() < gap_tol {
            small += 1;
            continue;
        }
        out.push(Ritz { theta, omega, y });
    }
    *discarded = (*discarded).max(small);
    out.sort_by(|a, b| {
        b.theta.norm().partial_cmp(&a.theta.norm()).unwrap_or(std::cmp::Ordering::Equal).then(
            a.omega.re.partial_cmp(&b.omega.re).unwrap_or(std::cmp::Ordering::Equal),
        )
    });
    Ok(out)
}

/// Relative residual `||A x - w B x||_{B^-1} / (|w| ||x||_B)`.
pub fn relative_residual(op: &OperatorPair, mass: &MassSolver, omega: c64, x: &[c64]) -> f64 {
    let ax = op.apply_a(x);
    let bx = op.apply_b(x);
    let r: Vec<c64> = ax.iter().zip(&bx).map(|(a, b)| a - omega * b).collect();
    let rb = dotc(&r, &mass.solve(&r)).re.max(0.0).sqrt();
    let xb = dotc(x, &bx).re.max(0.0).sqrt();
    rb / (omega.norm() * xb)
}

fn factor_with_retry(op: &OperatorPair, shift: c64) -> Result<(ShiftedSolver<'_>, c64)> {
    let mut sigma = shift;
    for attempt in 0..4 {
        match op.factor_shifted(sigma) {
            Ok(s) => return Ok((s, sigma)),
            Err(Error::Factorization(msg)) if attempt < 3 => {
                log::warn!("factorization failed at shift {sigma}: {msg}; perturbing");
                sigma += c64::new(0.0, 1e-3);
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("loop returns")
}

fn normalize(op: &OperatorPair, x: &mut [c64]) -> f64 {
    let en = op.energy(x);
    let s = 1.0 / en.sqrt();
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if v.norm() > x[best].norm() {
            best = i;
        }
    }
    let p = x[best].conj() / x[best].norm();
    x.iter_mut().for_each(|v| *v *= p * s);
    op.energy(x)
}

/// Eigenpairs of `A x = w B x` nearest `shift`, by block shift-invert Krylov
/// iteration with kernel deflation and thick restarts.
pub fn solve_eigenpairs_with(op: &OperatorPair, shift: c64, k: usize, opts: &SolverOptions) -> Result<SpectrumReport> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    let (solver, sigma) = factor_with_retry(op, shift)?;
    let defl = Deflator::new(op)?;
    let mass = MassSolver::new(op)?;
    let n_eff = op.dim() - kernel_dim(op);
    if k > n_eff {
        return invalid(format!("k = {k} exceeds the {n_eff} nonzero eigenvalues"));
    }
    let bsize = opts.block_size.max(1).min(n_eff);
    let mmax = if opts.max_basis > 0 { opts.max_basis } else { (3 * (k + bsize)).max(40) }.min(n_eff).max(k.min(n_eff));
    let gap_tol = opts.gap_tol_rel * sigma.norm().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut ctx = Ctx { solver, defl, ops: 0 };
    let mut basis = Basis { v: vec![], bv: vec![], w: vec![] };
    let random = |rng: &mut ChaCha8Rng, ctx: &Ctx| -> Vec<c64> {
        let x: Vec<c64> = (0..op.dim()).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        ctx.defl.apply(&x)
    };
    let mut pending: Vec<Vec<c64>> = (0..bsize).map(|_| random(&mut rng, &ctx)).collect();
    let mut iterations = 0;
    let mut discarded = 0;
    let mut converged = false;
    let mut result: Vec<(Ritz, Vec<c64>, f64)> = Vec::new();
    loop {
        let mut added = Vec::new();
        for cand in pending.drain(..) {
            if basis.len() >= mmax {
                break;
            }
            if let Some((v, bv)) = basis.orthogonalize(op, cand) {
                let w = ctx.apply(&v);
                basis.v.push(v);
                basis.bv.push(bv);
                basis.w.push(w);
                added.push(basis.len() - 1);
            }
        }
        if added.is_empty() && basis.len() < mmax {
            // invariant subspace or breakdown: continue from fresh directions
            for _ in 0..bsize {
                pending.push(random(&mut rng, &ctx));
            }
            if basis.len() >= n_eff {
                break;
            }
            continue;
        }
        if basis.len() < (k + 1).min(mmax) {
            pending = added.iter().map(|&i| basis.w[i].clone()).collect();
            continue;
        }
        iterations += 1;
        let ritz = rayleigh_ritz(&basis, sigma, gap_tol, &mut discarded)?;
        let mut nconv = 0;
        result.clear();
        for r in ritz.iter().take(k) {
            let x = combine(&basis.v, &r.y);
            let wx = combine(&basis.w, &r.y);
            let d: Vec<c64> = wx.iter().zip(&x).map(|(a, b)| a - r.theta * b).collect();
            let est = op.energy(&d).max(0.0).sqrt() / (r.theta.norm() * op.energy(&x).sqrt());
            let res = if est < 1e-5 { relative_residual(op, &mass, r.omega, &x) } else { f64::INFINITY };
            if res < opts.tol {
                nconv += 1;
            }
            result.push((Ritz { theta: r.theta, omega: r.omega, y: vec![] }, x, res));
        }
        log::debug!("iteration {iterations}: basis {} converged {nconv}/{k} ops {}", basis.len(), ctx.ops);
        if nconv >= k && result.len() >= k {
            converged = true;
            break;
        }
        if ctx.ops >= opts.max_op_applications || basis.len() >= n_eff {
            break;
        }
        if basis.len() + bsize > mmax {
            // thick restart from the wanted Ritz vectors
            let keep = (k + bsize).min(ritz.len()).min(mmax.saturating_sub(bsize).max(1));
            let mut nb = Basis { v: vec![], bv: vec![], w: vec![] };
            let mut unconverged = Vec::new();
            for (j, r) in ritz.iter().take(keep).enumerate() {
                let x = combine(&basis.v, &r.y);
                let mut wx = combine(&basis.w, &r.y);
                let mut xx = x;
                for _ in 0..2 {
                    for ((v, bv), w) in nb.v.iter().zip(&nb.bv).zip(&nb.w) {
                        let c = dotc(bv, &xx);
                        axpy(-c, v, &mut xx);
                        axpy(-c, w, &mut wx);
                    }
                }
                let bx = op.apply_b(&xx);
                let n = dotc(&xx, &bx).re.max(0.0).sqrt();
                if !(n > 1e-10) {
                    continue;
                }
                let s = 1.0 / n;
                xx.iter_mut().for_each(|t| *t *= s);
                wx.iter_mut().for_each(|t| *t *= s);
                nb.v.push(xx);
                nb.bv.push(bx.into_iter().map(|t| t * s).collect());
                nb.w.push(wx);
                let done = result.get(j).map(|t| t.2 < opts.tol).unwrap_or(false);
                if !done {
                    unconverged.push(nb.len() - 1);
                }
            }
            basis = nb;
            if unconverged.is_empty() {
                unconverged = (0..basis.len()).collect();
            }
            pending = unconverged.iter().take(bsize).map(|&i| basis.w[i].clone()).collect();
            while pending.len() < bsize {
                pending.push(random(&mut rng, &ctx));
            }
        } else {
            pending = added.iter().map(|&i| basis.w[i].clone()).collect();
        }
    }
    if !converged {
        log::warn!("eigensolver stopped after {} operator applications without full convergence", ctx.ops);
    }
    let forms = DiagnosticForms::new(op);
    let mut pairs = Vec::new();
    for (r, mut x, _) in result.into_iter() {
        let energy = normalize(op, &mut x);
        let residual = relative_residual(op, &mass, r.omega, &x);
        let d = forms.evaluate(op, r.omega, &x);
        let h = x.split_off(op.n_e);
        let real_flag = r.omega.im.abs() < opts.real_tol && forms.re_z_positive && d.pec_defect > 1e-6;
        pairs.push(EigenPair {
            omega: r.omega,
            e: x,
            h,
            residual,
            energy,
            trace_ratio: d.trace_ratio,
            pec_defect: d.pec_defect,
            cluster: 0,
            multiplicity: 1,
            real_flag,
        });
    }
    pairs.sort_by(|a, b| {
        (a.omega - sigma).norm().partial_cmp(&(b.omega - sigma).norm()).unwrap_or(std::cmp::Ordering::Equal)
    });
    super::annotate_clusters(&mut pairs, opts.cluster_tol);
    Ok(SpectrumReport {
        requested_shift: shift,
        shift: sigma,
        k,
        krylov_dim: mmax,
        block_size: bsize,
        iterations,
        op_applications: ctx.ops,
        deflated_kernel_dim: kernel_dim(op),
        discarded_near_zero: discarded,
        converged,
        cluster_tol: opts.cluster_tol,
        eigenpairs: pairs,
    })
}
