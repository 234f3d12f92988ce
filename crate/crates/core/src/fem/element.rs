//! Reference-cell shape functions and element matrices.
//!
//! Local coordinates `t` lie in `[0,1]^3`. Edge shape `4d + a + 2b` is
//! `l_a(t_p) l_b(t_q) / h_d` along axis `d`, where `(p, q)` are the transverse
//! axes; its line integral along its own edge is 1. Flux shape `2d + s` is
//! `l_s(t_d) / A_d` along axis `d` (`A_d` the face area normal to `d`); its flux
//! through the face `t_d = s` is 1.

use crate::materials::SymTensor;
use crate::mesh::transverse;

/// Two-point Gauss nodes on [0,1] (weights 1/2).
pub const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

#[inline]
pub fn lin(s: usize, t: f64) -> f64 {
    if s == 0 {
        1.0 - t
    } else {
        t
    }
}

#[inline]
pub fn local_edge(dir: usize, along: [(usize, usize); 2]) -> usize {
    let (t1, _) = transverse(dir);
    let (mut a, mut b) = (0, 0);
    for (axis, off) in along {
        if axis == t1 {
            a = off;
        } else {
            b = off;
        }
    }
    4 * dir + a + 2 * b
}

pub fn edge_shape(l: usize, t: [f64; 3], h: [f64; 3]) -> [f64; 3] {
    let d = l / 4;
    let (p, q) = transverse(d);
    let mut v = [0.0; 3];
    v[d] = lin(l & 1, t[p]) * lin((l >> 1) & 1, t[q]) / h[d];
    v
}

pub fn flux_shape(m: usize, t: [f64; 3], h: [f64; 3]) -> [f64; 3] {
    let d = m / 2;
    let (p, q) = transverse(d);
    let mut v = [0.0; 3];
    v[d] = lin(m & 1, t[d]) / (h[p] * h[q]);
    v
}

fn gauss_points() -> impl Iterator<Item = [f64; 3]> {
    (0..8).map(|g| [GAUSS[g & 1], GAUSS[(g >> 1) & 1], GAUSS[(g >> 2) & 1]])
}

fn weighted_dot(xi: &SymTensor<f64>, u: [f64; 3], v: [f64; 3]) -> f64 {
    let xu = xi.mul_vec(u);
    xu[0] * v[0] + xu[1] * v[1] + xu[2] * v[2]
}

/// `M[i][j] = int <xi phi_j, phi_i>` over one cell.
pub fn edge_mass(xi: &SymTensor<f64>, h: [f64; 3]) -> [[f64; 12]; 12] {
    let w = h[0] * h[1] * h[2] / 8.0;
    let mut m = [[0.0; 12]; 12];
    for t in gauss_points() {
        let phi: [[f64; 3]; 12] = std::array::from_fn(|l| edge_shape(l, t, h));
        for i in 0..12 {
            for j in 0..12 {
                m[i][j] += w * weighted_dot(xi, phi[j], phi[i]);
            }
        }
    }
    m
}

/// `M[i][j] = int <xi psi_j, psi_i>` over one cell.
pub fn flux_mass(xi: &SymTensor<f64>, h: [f64; 3]) -> [[f64; 6]; 6] {
    let w = h[0] * h[1] * h[2] / 8.0;
    let mut m = [[0.0; 6]; 6];
    for t in gauss_points() {
        let psi: [[f64; 3]; 6] = std::array::from_fn(|l| flux_shape(l, t, h));
        for i in 0..6 {
            for j in 0..6 {
                m[i][j] += w * weighted_dot(xi, psi[j], psi[i]);
            }
        }
    }
    m
}

/// `P[i][j] = int <phi_j, psi_i>` over one cell.
pub fn flux_edge_mass(h: [f64; 3]) -> [[f64; 12]; 6] {
    let w = h[0] * h[1] * h[2] / 8.0;
    let mut m = [[0.0; 12]; 6];
    for t in gauss_points() {
        for i in 0..6 {
            let psi = flux_shape(i, t, h);
            for j in 0..12 {
                let phi = edge_shape(j, t, h);
                m[i][j] += w * (psi[0] * phi[0] + psi[1] * phi[1] + psi[2] * phi[2]);
            }
        }
    }
    m
}

/// Face-by-edge incidence: `curl phi_j = sum_i D[i][j] psi_i` exactly.
pub fn local_curl() -> [[i8; 12]; 6] {
    let mut dm = [[0i8; 12]; 6];
    for d in 0..3 {
        let p = (d + 1) % 3;
        let q = (d + 2) % 3;
        for s in 0..2 {
            let row = &mut dm[2 * d + s];
            for o in 0..2 {
                row[local_edge(p, [(d, s), (q, o)])] = if o == 0 { 1 } else { -1 };
                row[local_edge(q, [(d, s), (p, o)])] = if o == 0 { -1 } else { 1 };
            }
        }
    }
    dm
}

/// Edge-by-vertex incidence of one cell (local vertex `a + 2b + 4c`).
pub fn local_gradient() -> [[i8; 8]; 12] {
    let mut g = [[0i8; 8]; 12];
    for (l, row) in g.iter_mut().enumerate() {
        let d = l / 4;
        let (p, q) = transverse(d);
        let mut off = [0usize; 3];
        off[p] = l & 1;
        off[q] = (l >> 1) & 1;
        let v0 = off[0] + 2 * off[1] + 4 * off[2];
        off[d] = 1;
        let v1 = off[0] + 2 * off[1] + 4 * off[2];
        row[v0] = -1;
        row[v1] = 1;
    }
    g
}

/// Tangential trace mass on the cell face normal to `axis` at offset `side`:
/// entries `(l, l', int <phi_l', phi_l> ds)` over the four face edges (2x2 Gauss).
pub fn face_trace_mass(h: [f64; 3], axis: usize, side: usize) -> Vec<(usize, usize, f64)> {
    let (p, q) = transverse(axis);
    let area = h[p] * h[q];
    let mut edges = Vec::new();
    for dir in [p, q] {
        let other = if dir == p { q } else { p };
        for o in 0..2 {
            edges.push(local_edge(dir, [(axis, side), (other, o)]));
        }
    }
    let mut out = Vec::new();
    for &li in &edges {
        for &lj in &edges {
            let mut s = 0.0;
            for gu in GAUSS {
                for gv in GAUSS {
                    let mut t = [0.0; 3];
                    t[axis] = side as f64;
                    t[p] = gu;
                    t[q] = gv;
                    let a = edge_shape(li, t, h);
                    let b = edge_shape(lj, t, h);
                    s += 0.25 * area * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
                }
            }
            if s != 0.0 {
                out.push((li, lj, s));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grad_lin(s: usize) -> f64 {
        if s == 0 {
            -1.0
        } else {
            1.0
        }
    }

    // curl of an edge shape computed from its closed form
    fn edge_curl(l: usize, t: [f64; 3], h: [f64; 3]) -> [f64; 3] {
        let d = l / 4;
        let (p, q) = transverse(d);
        let (a, b) = (l & 1, (l >> 1) & 1);
        let mut g = [0.0; 3];
        g[p] = grad_lin(a) * lin(b, t[q]) / (h[d] * h[p]);
        g[q] = lin(a, t[p]) * grad_lin(b) / (h[d] * h[q]);
        // grad f x e_d
        let mut e = [0.0; 3];
        e[d] = 1.0;
        [g[1] * e[2] - g[2] * e[1], g[2] * e[0] - g[0] * e[2], g[0] * e[1] - g[1] * e[0]]
    }

    #[test]
    fn curl_incidence_matches_closed_form() {
        let h = [0.7, 1.3, 0.4];
        let dm = local_curl();
        for l in 0..12 {
            for t in [[0.1, 0.5, 0.9], [0.3, 0.8, 0.2], [0.77, 0.01, 0.6]] {
                let c = edge_curl(l, t, h);
                let mut r = [0.0; 3];
                for (m, row) in dm.iter().enumerate() {
                    let psi = flux_shape(m, t, h);
                    for k in 0..3 {
                        r[k] += row[l] as f64 * psi[k];
                    }
                }
                for k in 0..3 {
                    assert!((c[k] - r[k]).abs() < 1e-12, "edge {l}");
                }
            }
        }
    }

    #[test]
    fn curl_of_gradient_vanishes_locally() {
        let dm = local_curl();
        let g = local_gradient();
        for row in dm.iter() {
            for v in 0..8 {
                let s: i32 = (0..12).map(|l| row[l] as i32 * g[l][v] as i32).sum();
                assert_eq!(s, 0);
            }
        }
    }

    #[test]
    fn unit_cell_edge_mass_by_hand() {
        // int l_a l_b over the unit square: 1/9 on the diagonal, 1/18 adjacent, 1/36 opposite
        let m = edge_mass(&SymTensor::identity(), [1.0, 1.0, 1.0]);
        for i in 0..12 {
            assert!((m[i][i] - 1.0 / 9.0).abs() < 1e-15);
            let row: f64 = m[i].iter().sum();
            assert!((row - 0.25).abs() < 1e-15);
            assert!((m[i][i ^ 1] - 1.0 / 18.0).abs() < 1e-15);
            assert!((m[i][i ^ 3] - 1.0 / 36.0).abs() < 1e-15);
        }
        let m2 = edge_mass(&SymTensor::scalar(2.0), [1.0, 1.0, 1.0]);
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(m2[i][j], 2.0 * m[i][j]);
            }
        }
    }

    #[test]
    fn flux_shapes_carry_unit_flux() {
        let h = [0.5, 2.0, 1.5];
        for m in 0..6 {
            let d = m / 2;
            let (p, q) = transverse(d);
            for s in 0..2 {
                let mut flux = 0.0;
                for gu in GAUSS {
                    for gv in GAUSS {
                        let mut t = [0.0; 3];
                        t[d] = s as f64;
                        t[p] = gu;
                        t[q] = gv;
                        flux += 0.25 * h[p] * h[q] * flux_shape(m, t, h)[d];
                    }
                }
                let expect = if s == m % 2 { 1.0 } else { 0.0 };
                assert!((flux - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn face_mass_unit_square() {
        let f = face_trace_mass([1.0, 1.0, 1.0], 2, 1);
        assert_eq!(f.len(), 8);
        for (a, b, v) in f {
            let expect = if a == b { 1.0 / 3.0 } else { 1.0 / 6.0 };
            assert!((v - expect).abs() < 1e-15);
        }
    }
}
