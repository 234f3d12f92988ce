//! Axis-aligned hexahedral mesh of the box `[0,Lx] x [0,Ly] x [0,Lz]`.
//!
//! Vertex `(i,j,k)` has index `i + (nx+1)(j + (ny+1)k)`. Edges are numbered
//! x-edges first, then y-edges, then z-edges, each oriented along the positive
//! axis and indexed by its start vertex. Box sides are numbered `2*axis + s`
//! with `s = 0` at the low end and `s = 1` at the high end.

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BoxMesh {
    pub n: [usize; 3],
    pub len: [f64; 3],
    nverts: usize,
    nedges: usize,
    edge_offset: [usize; 3],
}

/// A cell face lying on the box boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryFace {
    pub cell: usize,
    /// Box side `2*axis + s`.
    pub side: usize,
}

impl BoundaryFace {
    pub fn axis(&self) -> usize {
        self.side / 2
    }
    /// `+1` for the high side, `-1` for the low side.
    pub fn outward(&self) -> f64 {
        if self.side % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Transverse axes of direction `d` in increasing order.
#[inline]
pub fn transverse(d: usize) -> (usize, usize) {
    match d {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl BoxMesh {
    pub fn new(nx: usize, ny: usize, nz: usize, lx: f64, ly: f64, lz: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return invalid("cell counts must be at least 1");
        }
        for l in [lx, ly, lz] {
            if !(l > 0.0) || !l.is_finite() {
                return invalid("box lengths must be positive and finite");
            }
        }
        let overflow = || Error::Invalid("degree-of-freedom count overflows".into());
        let n = [nx, ny, nz];
        let nv = (nx + 1)
            .checked_mul(ny + 1)
            .and_then(|v| v.checked_mul(nz + 1))
            .ok_or_else(overflow)?;
        let mut counts = [0usize; 3];
        for (d, c) in counts.iter_mut().enumerate() {
            let (a, b) = transverse(d);
            *c = n[d]
                .checked_mul(n[a] + 1)
                .and_then(|v| v.checked_mul(n[b] + 1))
                .ok_or_else(overflow)?;
        }
        let ne = counts[0]
            .checked_add(counts[1])
            .and_then(|v| v.checked_add(counts[2]))
            .ok_or_else(overflow)?;
        // the broken flux space carries six unknowns per cell; its size bounds all others
        nx.checked_mul(ny)
            .and_then(|v| v.checked_mul(nz))
            .and_then(|v| v.checked_mul(6))
            .and_then(|v| v.checked_add(ne))
            .ok_or_else(overflow)?;
        Ok(BoxMesh {
            n,
            len: [lx, ly, lz],
            nverts: nv,
            nedges: ne,
            edge_offset: [0, counts[0], counts[0] + counts[1]],
        })
    }

    /// Cube `[0,l]^3` with `m` cells per side.
    pub fn cube(m: usize, l: f64) -> Result<Self> {
        Self::new(m, m, m, l, l, l)
    }

    pub fn h(&self) -> [f64; 3] {
        [self.len[0] / self.n[0] as f64, self.len[1] / self.n[1] as f64, self.len[2] / self.n[2] as f64]
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.h();
        h[0] * h[1] * h[2]
    }

    pub fn nverts(&self) -> usize {
        self.nverts
    }
    pub fn nedges(&self) -> usize {
        self.nedges
    }
    pub fn ncells(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    #[inline]
    pub fn vertex(&self, i: usize, j: usize, k: usize) -> usize {
        i + (self.n[0] + 1) * (j + (self.n[1] + 1) * k)
    }

    pub fn vertex_ijk(&self, v: usize) -> [usize; 3] {
        let nx1 = self.n[0] + 1;
        let ny1 = self.n[1] + 1;
        [v % nx1, (v / nx1) % ny1, v / (nx1 * ny1)]
    }

    pub fn vertex_coords(&self, v: usize) -> [f64; 3] {
        let p = self.vertex_ijk(v);
        let h = self.h();
        [p[0] as f64 * h[0], p[1] as f64 * h[1], p[2] as f64 * h[2]]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let p = self.vertex_ijk(v);
        (0..3).any(|d| p[d] == 0 || p[d] == self.n[d])
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.nverts).filter(|&v| !self.is_boundary_vertex(v)).collect()
    }

    /// Index of the edge along `d` starting at vertex `p`.
    #[inline]
    pub fn edge(&self, d: usize, p: [usize; 3]) -> usize {
        let mut dims = [self.n[0] + 1, self.n[1] + 1, self.n[2] + 1];
        dims[d] -= 1;
        self.edge_offset[d] + p[0] + dims[0] * (p[1] + dims[1] * p[2])
    }

    /// Direction and start vertex position of an edge.
    pub fn edge_info(&self, e: usize) -> (usize, [usize; 3]) {
        let d = if e >= self.edge_offset[2] {
            2
        } else if e >= self.edge_offset[1] {
            1
        } else {
            0
        };
        let mut dims = [self.n[0] + 1, self.n[1] + 1, self.n[2] + 1];
        dims[d] -= 1;
        let r = e - self.edge_offset[d];
        (d, [r % dims[0], (r / dims[0]) % dims[1], r / (dims[0] * dims[1])])
    }

    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        let (d, p) = self.edge_info(e);
        let mut q = p;
        q[d] += 1;
        (self.vertex(p[0], p[1], p[2]), self.vertex(q[0], q[1], q[2]))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        self.h()[self.edge_info(e).0]
    }

    /// An edge is on the boundary when it lies in one of the six box planes.
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        let (d, p) = self.edge_info(e);
        let (a, b) = transverse(d);
        p[a] == 0 || p[a] == self.n[a] || p[b] == 0 || p[b] == self.n[b]
    }

    pub fn boundary_edges(&self) -> Vec<usize> {
        (0..self.nedges).filter(|&e| self.is_boundary_edge(e)).collect()
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    pub fn cell_ijk(&self, c: usize) -> [usize; 3] {
        [c % self.n[0], (c / self.n[0]) % self.n[1], c / (self.n[0] * self.n[1])]
    }

    pub fn cell_center(&self, c: usize) -> [f64; 3] {
        let p = self.cell_ijk(c);
        let h = self.h();
        [(p[0] as f64 + 0.5) * h[0], (p[1] as f64 + 0.5) * h[1], (p[2] as f64 + 0.5) * h[2]]
    }

    /// The 12 edges of a cell. Local edge `4d + a + 2b` runs along `d` with
    /// offset `a` on the first and `b` on the second transverse axis.
    pub fn cell_edges(&self, c: usize) -> [usize; 12] {
        let p = self.cell_ijk(c);
        let mut out = [0usize; 12];
        for d in 0..3 {
            let (t1, t2) = transverse(d);
            for b in 0..2 {
                for a in 0..2 {
                    let mut q = p;
                    q[t1] += a;
                    q[t2] += b;
                    out[4 * d + a + 2 * b] = self.edge(d, q);
                }
            }
        }
        out
    }

    /// The 8 vertices of a cell, local index `a + 2b + 4c` for offsets `(a,b,c)`.
    pub fn cell_vertices(&self, c: usize) -> [usize; 8] {
        let p = self.cell_ijk(c);
        std::array::from_fn(|l| self.vertex(p[0] + (l & 1), p[1] + ((l >> 1) & 1), p[2] + ((l >> 2) & 1)))
    }

    /// Boundary faces in fixed order: by side, then by cell index.
    pub fn boundary_faces(&self) -> Vec<BoundaryFace> {
        let mut out = Vec::new();
        for side in 0..6 {
            let axis = side / 2;
            let at = if side % 2 == 0 { 0 } else { self.n[axis] - 1 };
            for c in 0..self.ncells() {
                if self.cell_ijk(c)[axis] == at {
                    out.push(BoundaryFace { cell: c, side });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(m: &BoxMesh) -> usize {
        let [nx, ny, nz] = m.n;
        nx * (ny + 1) * (nz + 1) + ny * (nx + 1) * (nz + 1) + nz * (nx + 1) * (ny + 1)
    }

    #[test]
    fn mesh_examples() {
        let m = BoxMesh::new(1, 1, 1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!((m.nedges(), m.nverts(), m.ncells()), (12, 8, 1));
        let m = BoxMesh::new(2, 1, 1, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(m.nedges(), 20);
        let pi = std::f64::consts::PI;
        let m = BoxMesh::cube(8, pi).unwrap();
        assert_eq!(m.nedges(), 3 * 8 * 81);
        assert_eq!(m.nedges(), 1944);
    }

    #[test]
    fn mesh_errors() {
        assert!(BoxMesh::new(0, 1, 1, 1.0, 1.0, 1.0).is_err());
        assert!(BoxMesh::new(1, 1, 1, -1.0, 1.0, 1.0).is_err());
        assert!(BoxMesh::new(1, 1, 1, 0.0, 1.0, 1.0).is_err());
        assert!(BoxMesh::new(usize::MAX / 2, 4, 4, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn edge_numbering_roundtrip() {
        let m = BoxMesh::new(3, 2, 4, 1.0, 2.0, 3.0).unwrap();
        assert_eq!(m.nedges(), count(&m));
        for e in 0..m.nedges() {
            let (d, p) = m.edge_info(e);
            assert_eq!(m.edge(d, p), e);
            let (v0, v1) = m.edge_vertices(e);
            let (a, b) = (m.vertex_ijk(v0), m.vertex_ijk(v1));
            assert_eq!(b[d], a[d] + 1);
        }
        for v in 0..m.nverts() {
            let p = m.vertex_ijk(v);
            assert_eq!(m.vertex(p[0], p[1], p[2]), v);
        }
    }

    #[test]
    fn boundary_faces_flag_their_edges() {
        let m = BoxMesh::new(3, 2, 2, 1.0, 1.0, 1.0).unwrap();
        let faces = m.boundary_faces();
        assert_eq!(faces.len(), 2 * (2 * 2 + 3 * 2 + 3 * 2));
        for f in faces {
            let ax = f.axis();
            let edges = m.cell_edges(f.cell);
            for d in 0..3 {
                if d == ax {
                    continue;
                }
                let (t1, _) = transverse(d);
                for l in 0..4 {
                    let (a, b) = (l & 1, l >> 1);
                    let off = if t1 == ax { a } else { b };
                    if off == f.side % 2 {
                        assert!(m.is_boundary_edge(edges[4 * d + l]));
                    }
                }
            }
        }
        assert_eq!(m.interior_vertices().len(), 2);
    }
}
