//! Integer incidence matrices, generic over the entry type so that exactness
//! can be checked in integer or rational arithmetic.

use super::element::local_curl;
use super::sparse::SparseMatrix;
use crate::mesh::BoxMesh;
use num_traits::{One, Zero};
use std::ops::{AddAssign, Neg};

fn sign<T: One + Neg<Output = T>>(s: i8) -> T {
    if s > 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Edge-by-vertex incidence restricted to the given vertex columns.
pub fn gradient_incidence<T>(mesh: &BoxMesh, vertices: &[usize]) -> SparseMatrix<T>
where
    T: Copy + Zero + One + Neg<Output = T> + AddAssign,
{
    let mut col = vec![usize::MAX; mesh.nverts()];
    for (k, &v) in vertices.iter().enumerate() {
        col[v] = k;
    }
    let mut trips = Vec::with_capacity(2 * mesh.nedges());
    for e in 0..mesh.nedges() {
        let (v0, v1) = mesh.edge_vertices(e);
        if col[v0] != usize::MAX {
            trips.push((e, col[v0], sign::<T>(-1)));
        }
        if col[v1] != usize::MAX {
            trips.push((e, col[v1], sign::<T>(1)));
        }
    }
    SparseMatrix::from_triplets(mesh.nedges(), vertices.len(), &trips).expect("indices in range")
}

/// Discrete gradient on interior vertices (columns ordered as
/// [`BoxMesh::interior_vertices`]). Edge unknowns are line integrals, so the
/// entries are exactly `+-1`.
pub fn discrete_gradient<T>(mesh: &BoxMesh) -> SparseMatrix<T>
where
    T: Copy + Zero + One + Neg<Output = T> + AddAssign,
{
    gradient_incidence(mesh, &mesh.interior_vertices())
}

/// Gradient on all vertices.
pub fn full_gradient<T>(mesh: &BoxMesh) -> SparseMatrix<T>
where
    T: Copy + Zero + One + Neg<Output = T> + AddAssign,
{
    let all: Vec<usize> = (0..mesh.nverts()).collect();
    gradient_incidence(mesh, &all)
}

/// Broken face-by-edge curl incidence: row `6c + 2d + s` is the flux unknown
/// of cell `c` through its face normal to `d` at offset `s`.
pub fn discrete_curl<T>(mesh: &BoxMesh) -> SparseMatrix<T>
where
    T: Copy + Zero + One + Neg<Output = T> + AddAssign,
{
    let dm = local_curl();
    let mut trips = Vec::with_capacity(24 * mesh.ncells());
    for c in 0..mesh.ncells() {
        let edges = mesh.cell_edges(c);
        for (m, row) in dm.iter().enumerate() {
            for (l, &s) in row.iter().enumerate() {
                if s != 0 {
                    trips.push((6 * c + m, edges[l], sign::<T>(s)));
                }
            }
        }
    }
    SparseMatrix::from_triplets(6 * mesh.ncells(), mesh.nedges(), &trips).expect("indices in range")
}
