//! Edge and broken-flux finite element spaces on a [`crate::BoxMesh`].
//!
//! `H` lives in the lowest-order edge space (tangentially continuous, one
//! line-integral unknown per edge). `E` lives in a broken cellwise space with
//! one flux unknown per cell face; it contains the curl of every edge field, so
//! the curl pairing is `K = M_1 D` with the integer incidence `D`.

pub mod assembly;
pub mod element;
pub mod hodge;
pub mod impedance;
pub mod incidence;
pub mod sparse;

pub use assembly::{
    assemble_boundary_form, assemble_curl_pairing, assemble_flux_edge_mass, assemble_flux_mass, assemble_mass,
    boundary_mass, boundary_trace_mass, CellBlocks,
};
pub use hodge::{hodge_project, GradientProjector};
pub use impedance::{BoundaryMatrix, ImpedanceBounds, ImpedanceSpec, Sign};
pub use incidence::{discrete_curl, discrete_gradient, full_gradient, gradient_incidence};
pub use sparse::{SparseForm, SparseMatrix, Symmetry};
