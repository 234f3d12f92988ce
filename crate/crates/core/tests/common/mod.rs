//! Dense reference computations shared by the integration tests.
#![allow(dead_code)]

use dissipax::{c64, OperatorPair};

/// All eigenvalues of `A x = w B x`, via a hand-written dense Cholesky
/// `B = L L^H` and faer's dense eigenvalues of `L^-1 A L^-H`.
pub fn dense_generalized_eigenvalues(op: &OperatorPair) -> Vec<c64> {
    let n = op.dim();
    let a = op.a_form().matrix.to_dense();
    let b = op.b_form().matrix.to_dense();
    let at = |m: &Vec<Vec<c64>>, i: usize, j: usize| m[i][j];
    // Cholesky, lower triangular
    let mut l = vec![vec![c64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let mut d = at(&b, j, j);
        for k in 0..j {
            d -= l[j][k] * l[j][k].conj();
        }
        assert!(d.re > 0.0, "mass matrix is not positive definite");
        let d = d.re.sqrt();
        l[j][j] = c64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = at(&b, i, j);
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / d;
        }
    }
    // Y = L^-1 A, then C = L^-1 Y^H ^H = L^-1 A L^-H
    let forward = |rhs: &mut Vec<c64>| {
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[i][k] * rhs[k];
            }
            rhs[i] = s / l[i][i];
        }
    };
    let mut y = vec![vec![c64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let mut col: Vec<c64> = (0..n).map(|i| a[i][j]).collect();
        forward(&mut col);
        for i in 0..n {
            y[i][j] = col[i];
        }
    }
    let mut c = faer::Mat::<c64>::zeros(n, n);
    for i in 0..n {
        let mut row: Vec<c64> = (0..n).map(|j| y[i][j].conj()).collect();
        forward(&mut row);
        for j in 0..n {
            c[(i, j)] = row[j].conj();
        }
    }
    c.eigenvalues().expect("dense eigenvalues")
}

/// Oracle eigenvalues with `|w| >= zero_tol`, sorted by distance to `shift`.
pub fn nearest_nonzero(all: &[c64], shift: c64, zero_tol: f64, k: usize) -> Vec<c64> {
    let mut v: Vec<c64> = all.iter().copied().filter(|w| w.norm() >= zero_tol).collect();
    v.sort_by(|a, b| (a - shift).norm().partial_cmp(&(b - shift).norm()).unwrap());
    v.truncate(k);
    v
}

/// Largest distance from each computed value to a distinct oracle value
/// (greedy matching).
pub fn match_error(computed: &[c64], oracle: &[c64]) -> f64 {
    let mut used = vec![false; oracle.len()];
    let mut worst = 0.0f64;
    for w in computed {
        let mut best: Option<(usize, f64)> = None;
        for (j, o) in oracle.iter().enumerate() {
            let d = (w - o).norm() / w.norm().max(1.0);
            if !used[j] && best.map(|b| d < b.1).unwrap_or(true) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, d)) => {
                used[j] = true;
                worst = worst.max(d);
            }
            None => return f64::INFINITY,
        }
    }
    worst
}
