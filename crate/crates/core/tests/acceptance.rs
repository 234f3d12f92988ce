//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line.

mod common;

use dissipax::fem::{discrete_gradient, ImpedanceSpec, Sign};
use dissipax::homogenization::{divcurl_check, eigen_convergence_experiment, LaminateSpec};
use dissipax::linalg::{dotc, norm2};
use dissipax::materials::{
    in_mtheta, laminate_hlimit, mtheta_violation, random_field, random_rotation, theta_means, SymTensor,
};
use dissipax::operator::assemble_maxwell;
use dissipax::optimizer::{min_positive_eigenvalue, optimize, DesignPoint, Method, TargetInterval};
use dissipax::spectrum::{solve_eigenpairs, solve_eigenpairs_with, spectral_gap_scan, RandomSampler, SolverOptions};
use dissipax::{c64, BoxMesh, MaterialField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    check(t.elapsed() < limit, format!("runtime {:.1?} over {:?}", t.elapsed(), limit))
}

fn rvec(rng: &mut ChaCha8Rng, n: usize) -> Vec<c64> {
    (0..n).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn random_medium(mesh: &BoxMesh, seed: u64) -> MaterialField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_field(&mut rng, mesh.ncells(), 1.0, 11.68)
}

fn mixed_faces() -> ImpedanceSpec {
    ImpedanceSpec::PerFace([
        c64::new(1.0, 0.0),
        c64::new(1.0, 1.0),
        c64::new(2.0, -0.5),
        c64::new(0.5, 0.3),
        c64::new(1.5, 0.0),
        c64::new(1.0, -0.8),
    ])
}

fn dissipativity() -> Outcome {
    let t = Instant::now();
    let mesh = BoxMesh::cube(3, 1.0).unwrap();
    let zs = [ImpedanceSpec::real(1.0), ImpedanceSpec::scalar(c64::new(1.0, 1.0)), mixed_faces()];
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_form = f64::NEG_INFINITY;
    let mut worst_im = f64::NEG_INFINITY;
    for cfg in 0..20 {
        let z = &zs[cfg % 3];
        let op = assemble_maxwell(&mesh, &random_medium(&mesh, 1000 + cfg as u64), z).map_err(|e| e.to_string())?;
        for _ in 0..1000 {
            let x = rvec(&mut rng, op.dim());
            let q = dotc(&x, &op.apply_a(&x));
            let b = dotc(&x, &op.apply_b(&x)).norm();
            worst_form = worst_form.max(q.im / b);
        }
        let rep = solve_eigenpairs(&op, c64::new(1.0, 0.0), 6).map_err(|e| e.to_string())?;
        rep.clone().require_converged().map_err(|e| e.to_string())?;
        for p in &rep.eigenpairs {
            worst_im = worst_im.max(p.omega.im);
        }
    }
    check(worst_form <= 1e-12, format!("max Im(x^H A x)/|x^H B x| = {worst_form:e}"))?;
    check(worst_im <= 1e-8, format!("max Im w = {worst_im:e}"))?;
    within(t, Duration::from_secs(60))?;
    Ok(format!("max Im(xAx)/|xBx| = {worst_form:.2e}, max Im w = {worst_im:.2e}"))
}

fn pec_cube() -> Outcome {
    let t = Instant::now();
    let solve = |n: usize| -> Result<Vec<c64>, String> {
        let mesh = BoxMesh::cube(n, PI).unwrap();
        let op = assemble_maxwell(&mesh, &MaterialField::vacuum(mesh.ncells()), &ImpedanceSpec::Pec).map_err(|e| e.to_string())?;
        let rep = solve_eigenpairs(&op, c64::new(1.3, 0.0), 6).map_err(|e| e.to_string())?;
        Ok(rep.require_converged().map_err(|e| e.to_string())?.omegas())
    };
    let (r2, r3) = (2f64.sqrt(), 3f64.sqrt());
    let group = |w: &[c64], x: f64, tol: f64| -> Vec<f64> {
        w.iter().filter(|v| (*v - x).norm() < tol * x).map(|v| (v - x).norm()).collect()
    };
    let w8 = solve(8)?;
    let g2 = group(&w8, r2, 0.05);
    let g3 = group(&w8, r3, 0.07);
    check(g2.len() == 3, format!("{} eigenvalues within 5% of sqrt 2: {w8:?}", g2.len()))?;
    check(g3.len() == 2, format!("{} eigenvalues within 7% of sqrt 3: {w8:?}", g3.len()))?;
    let w16 = solve(16)?;
    let g2f = group(&w16, r2, 0.05);
    check(g2f.len() == 3, format!("16^3: {} eigenvalues near sqrt 2", g2f.len()))?;
    let e8 = g2.iter().cloned().fold(0.0, f64::max);
    let e16 = g2f.iter().cloned().fold(0.0, f64::max);
    let ratio = e8 / e16;
    check(ratio >= 2.5, format!("error ratio {ratio:.3}"))?;
    within(t, Duration::from_secs(180))?;
    Ok(format!("sqrt2 errors {e8:.3e} -> {e16:.3e} (ratio {ratio:.2})"))
}

fn kernel_deflation() -> Outcome {
    let t = Instant::now();
    let mesh = BoxMesh::new(4, 3, 3, 1.0, 0.8, 1.1).unwrap();
    let op = assemble_maxwell(&mesh, &random_medium(&mesh, 7), &ImpedanceSpec::real(1.0)).map_err(|e| e.to_string())?;
    let g = discrete_gradient::<f64>(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = rvec(&mut rng, g.ncols);
        let mut x = op.edge_to_flux(&g.mul_vec(&p));
        x.extend(vec![c64::new(0.0, 0.0); op.n_h]);
        worst = worst.max(norm2(&op.apply_a(&x)) / norm2(&x));
    }
    check(worst < 1e-13, format!("max |A(Gp,0)|/|x| = {worst:e}"))?;
    let mut spurious = 0;
    for z in [ImpedanceSpec::Pec, ImpedanceSpec::real(1.0), mixed_faces()] {
        let mesh = BoxMesh::cube(4, PI).unwrap();
        let op = assemble_maxwell(&mesh, &random_medium(&mesh, 8), &z).map_err(|e| e.to_string())?;
        for s in [c64::new(0.0, 0.01), c64::new(0.05, 0.0)] {
            let rep = solve_eigenpairs(&op, s, 6).map_err(|e| e.to_string())?;
            spurious += rep.eigenpairs.iter().filter(|p| p.omega.norm() < 1e-4 && p.energy > 1e-6).count();
        }
    }
    check(spurious == 0, format!("{spurious} near-zero eigenpairs reported"))?;
    within(t, Duration::from_secs(30))?;
    Ok(format!("max |A(Gp,0)|/|x| = {worst:.2e}, no near-zero pairs"))
}

fn selfadjoint() -> Outcome {
    let t = Instant::now();
    let mesh = BoxMesh::cube(3, 1.0).unwrap();
    let z = ImpedanceSpec::selfadjoint_ic(1.0, Sign::Minus);
    let op = assemble_maxwell(&mesh, &random_medium(&mesh, 40), &z).map_err(|e| e.to_string())?;
    let a = op.a_form().matrix;
    let scale = a.triplets().iter().map(|t| t.2.norm()).fold(0.0, f64::max);
    let asym = a.triplets().iter().map(|&(r, c, v)| (v - a.get(c, r).conj()).norm()).fold(0.0, f64::max);
    check(asym <= 1e-14 * scale, format!("max |A - A^H| = {asym:e}"))?;
    let mut max_im = 0.0f64;
    for trial in 0..10 {
        let op = assemble_maxwell(&mesh, &random_medium(&mesh, 400 + trial), &z).map_err(|e| e.to_string())?;
        for s in [0.5, -0.5] {
            let rep = solve_eigenpairs(&op, c64::new(s, 0.0), 6).map_err(|e| e.to_string())?;
            for p in &rep.eigenpairs {
                max_im = max_im.max(p.omega.im.abs());
            }
        }
    }
    check(max_im <= 1e-10, format!("max |Im w| = {max_im:e}"))?;
    let r = min_positive_eigenvalue(|t| random_medium(&mesh, 400 + t as u64), 10, &mesh, 1.0, 0.5, 6, &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let bad: Vec<usize> = r.samples.iter().filter(|s| s.min_positive.is_none() || s.max_negative.is_none()).map(|s| s.trial).collect();
    check(bad.is_empty(), format!("samples without both signs: {bad:?}"))?;
    within(t, Duration::from_secs(120))?;
    Ok(format!("|A-A^H| = {asym:.1e}, max |Im w| = {max_im:.1e}, w+ = {:.4}, w- = {:.4}", r.omega_plus, r.omega_minus))
}

fn divcurl() -> Outcome {
    let t = Instant::now();
    let mut worst_pass = 0.0f64;
    let mut best_fail = f64::INFINITY;
    for theta in [0.25, 0.5, 0.75] {
        for (e1, e2) in [(1.0, 4.0), (1.0, 11.68)] {
            let spec = LaminateSpec { eps1: e1, eps2: e2, theta, normal: 0, periods: 1 };
            let truth = laminate_hlimit(e1, e2, theta, [1.0, 0.0, 0.0]).unwrap();
            let r = divcurl_check(&spec, &truth, &[1, 2, 4, 8]).map_err(|e| e.to_string())?;
            check(r.pass, format!("true limit rejected at theta {theta}, ({e1}, {e2}): {:e}", r.residual))?;
            worst_pass = worst_pass.max(r.residual);
            let m = theta_means(e1, e2, theta).unwrap();
            let r = divcurl_check(&spec, &SymTensor::scalar(m.lam_plus), &[1, 2, 4, 8]).map_err(|e| e.to_string())?;
            check(!r.pass && r.residual > 0.1, format!("impostor residual {:e}", r.residual))?;
            best_fail = best_fail.min(r.residual);
        }
    }
    within(t, Duration::from_secs(5))?;
    Ok(format!("true limit residual <= {worst_pass:.1e}, impostor >= {best_fail:.3}"))
}

fn eigen_convergence() -> Outcome {
    let t = Instant::now();
    let mesh = BoxMesh::new(16, 4, 4, 1.0, 1.0, 1.0).unwrap();
    let spec = LaminateSpec { eps1: 1.0, eps2: 4.0, theta: 0.5, normal: 0, periods: 1 };
    let tab = eigen_convergence_experiment(&spec, &[1, 2, 4], &mesh, &ImpedanceSpec::real(1.0), c64::new(0.5, 0.0), 8, &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let w = tab.homogenized[tab.tracked];
    let gaps: Vec<f64> = tab.rows.iter().map(|r| r.gap).collect();
    check(gaps.windows(2).all(|p| p[1] < p[0]), format!("gaps not decreasing: {gaps:?}"))?;
    let rel = gaps[2] / w.norm();
    check(rel < 0.05, format!("final relative gap {rel:.4}"))?;
    check(tab.rows.iter().all(|r| r.omega.im <= 1e-8), "tracked eigenvalue left the closed lower half plane")?;
    within(t, Duration::from_secs(300))?;
    Ok(format!("w_inf = {w:.5}, relative gaps {:.4} {:.4} {:.4}", gaps[0] / w.norm(), gaps[1] / w.norm(), rel))
}

fn gap_scan() -> Outcome {
    let t = Instant::now();
    let sampler = RandomSampler { seed: 707, alpha: 1.0, beta: 11.68 };
    let shifts = [c64::new(0.0, 0.25)];
    let opts = SolverOptions::default();
    let scan = |n: usize| {
        let mesh = BoxMesh::cube(n, 1.0).unwrap();
        let nc = mesh.ncells();
        spectral_gap_scan(|t| sampler.sample(t, nc), 50, &mesh, &ImpedanceSpec::real(1.0), &shifts, 6, &opts)
    };
    let a = scan(6).map_err(|e| e.to_string())?;
    let b = scan(8).map_err(|e| e.to_string())?;
    let failed = a.samples.iter().chain(&b.samples).filter(|s| s.error.is_some()).count();
    check(failed == 0, format!("{failed} scan samples failed"))?;
    check(a.r_min > 0.05, format!("6^3 r_min {}", a.r_min))?;
    let ratio = a.r_min.max(b.r_min) / a.r_min.min(b.r_min);
    check(ratio < 2.0, format!("r_min changed by factor {ratio:.3}"))?;
    within(t, Duration::from_secs(600))?;
    Ok(format!("r_min 6^3 = {:.4}, 8^3 = {:.4}", a.r_min, b.r_min))
}

fn closure_algebra() -> Outcome {
    let t = Instant::now();
    let (e1, e2) = (1.0f64, 11.68f64);
    for theta in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let m = theta_means(e1, e2, theta).unwrap();
        for axis in 0..3 {
            let mut n = [0.0; 3];
            n[axis] = 1.0;
            let a = laminate_hlimit(e1, e2, theta, n).unwrap();
            check(in_mtheta(&a, e1, e2, theta).unwrap(), format!("laminate point rejected at theta {theta}"))?;
            // the lower trace bound holds with equality at the laminate point
            let lhs = a.sub(&SymTensor::scalar(e1)).inverse().unwrap().trace();
            let rhs = 1.0 / (m.lam_minus - e1) + 2.0 / (m.lam_plus - e1);
            check((lhs - rhs).abs() <= 1e-12 * rhs, format!("trace bound not tight: {lhs} vs {rhs}"))?;
        }
        check(!in_mtheta(&SymTensor::scalar(m.lam_minus), e1, e2, theta).unwrap(), "harmonic-mean isotropic tensor accepted")?;
    }
    check(in_mtheta(&SymTensor::scalar(e1), e1, e2, 1.0).unwrap(), "eps1 I rejected at theta 1")?;
    check(in_mtheta(&SymTensor::scalar(e2), e1, e2, 0.0).unwrap(), "eps2 I rejected at theta 0")?;
    check(!in_mtheta(&SymTensor::scalar(e1 * (1.0 + 1e-6)), e1, e2, 1.0).unwrap(), "theta 1 is not a singleton")?;
    check(!in_mtheta(&SymTensor::diag(e2, e2, e2 * (1.0 - 1e-6)), e1, e2, 0.0).unwrap(), "theta 0 is not a singleton")?;
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let probes = [
        (laminate_hlimit(e1, e2, 0.5, [1.0, 0.0, 0.0]).unwrap(), 0.5),
        (SymTensor::diag(3.0, 5.0, 6.0), 0.5),
        (SymTensor::scalar(theta_means(e1, e2, 0.3).unwrap().lam_minus), 0.3),
    ];
    for _ in 0..100 {
        let r = random_rotation(&mut rng);
        for (a, theta) in &probes {
            let b = a.congruence(&r);
            check(in_mtheta(a, e1, e2, *theta).unwrap() == in_mtheta(&b, e1, e2, *theta).unwrap(), "membership changed under rotation")?;
            let (va, vb) = (mtheta_violation(a, e1, e2, *theta).unwrap(), mtheta_violation(&b, e1, e2, *theta).unwrap());
            check((va - vb).abs() <= 1e-9 * va.abs().max(1.0), format!("violation changed under rotation: {va} vs {vb}"))?;
        }
    }
    within(t, Duration::from_secs(5))?;
    Ok("laminate points tight, harmonic mean rejected, endpoints singletons, 100 rotations invariant".into())
}

fn optimizer_demo() -> Outcome {
    let t = Instant::now();
    let mesh = BoxMesh::cube(4, PI).unwrap();
    let d0 = DesignPoint::uniform_laminate(1.0, 4.0, [4, 4, 4], 0.5, 0);
    let interval = TargetInterval::new(1.3, 1.4).unwrap();
    let (best, trace) = optimize(
        &d0,
        200,
        Method::CoordinateSearch,
        &mesh,
        &ImpedanceSpec::real(1.0),
        &interval,
        c64::new(1.35, 0.0),
        6,
        &SolverOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    check(trace.aborted.is_none(), format!("search aborted: {:?}", trace.aborted))?;
    check(trace.records.len() <= 200, "budget exceeded")?;
    check(trace.is_monotone(), "best-so-far trace increased")?;
    check(trace.records.iter().all(|r| r.feasible), "infeasible design visited")?;
    check(best.is_feasible().unwrap_or(false), "best design infeasible")?;
    let (d_init, d_final) = (trace.best[0], *trace.best.last().unwrap());
    check(d_final <= 0.5 * d_init, format!("d_I {d_init:.4} -> {d_final:.4}"))?;
    within(t, Duration::from_secs(600))?;
    Ok(format!("d_I {d_init:.4} -> {d_final:.4} in {} evaluations", trace.records.len()))
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let configs = [
        (ImpedanceSpec::real(1.0), c64::new(2.0, 0.0)),
        (ImpedanceSpec::scalar(c64::new(1.0, 1.0)), c64::new(1.5, -0.5)),
        (mixed_faces(), c64::new(3.0, 0.0)),
        (ImpedanceSpec::selfadjoint_ic(1.0, Sign::Minus), c64::new(-1.0, 0.1)),
        (ImpedanceSpec::Pec, c64::new(2.5, 0.0)),
    ];
    let mut worst = 0.0f64;
    for (i, (z, shift)) in configs.iter().enumerate() {
        let mesh = BoxMesh::cube(2, 1.0).unwrap();
        let op = assemble_maxwell(&mesh, &random_medium(&mesh, 900 + i as u64), z).map_err(|e| e.to_string())?;
        let opts = SolverOptions::default();
        let rep = solve_eigenpairs_with(&op, *shift, 10, &opts).map_err(|e| e.to_string())?;
        let rep = rep.require_converged().map_err(|e| e.to_string())?;
        let zero = opts.gap_tol_rel * shift.norm().max(1.0);
        let oracle = common::nearest_nonzero(&common::dense_generalized_eigenvalues(&op), *shift, zero, 10);
        let err = common::match_error(&rep.omegas(), &oracle);
        check(err < 1e-8, format!("config {i}: mismatch {err:e}"))?;
        worst = worst.max(err);
    }
    within(t, Duration::from_secs(60))?;
    Ok(format!("max relative mismatch {worst:.2e} over 5 configurations"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 exact dissipativity", dissipativity),
        ("2 PEC cube benchmark", pec_cube),
        ("3 kernel and deflation", kernel_deflation),
        ("4 selfadjoint extremal case", selfadjoint),
        ("5 div-curl H-limit test", divcurl),
        ("6 eigenvalue convergence under H-convergence", eigen_convergence),
        ("7 eigenvalue-free disc scan", gap_scan),
        ("8 closure algebra", closure_algebra),
        ("9 optimizer demo", optimizer_demo),
        ("10 oracle equivalence", oracle_equivalence),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{:.1?}]", t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{:.1?}]", t.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
