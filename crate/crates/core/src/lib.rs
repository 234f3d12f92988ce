//! Impedance Maxwell eigenproblems on box domains.
//!
//! The crate discretizes the first-order system `i curl H = w eps E`,
//! `-i curl E = w mu H` with the boundary condition `n x E = Z H_tan`,
//! computes eigenvalues near a shift, and runs homogenization and design
//! experiments on two-phase laminate media.
//!
//! Tensor algebra and incidence matrices are generic over the scalar type;
//! assembled operators and solvers work in `f64` / [`c64`].

pub mod config;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod homogenization;
pub mod linalg;
pub mod materials;
pub mod mesh;
pub mod operator;
pub mod optimizer;
pub mod report;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64 as c64;

pub use fem::{ImpedanceSpec, SparseForm, SparseMatrix, Symmetry};
pub use materials::{MaterialField, SymTensor, ThetaMeans};
pub use mesh::BoxMesh;
pub use operator::OperatorPair;
pub use spectrum::{EigenPair, SolverOptions, SpectrumReport};



/// Material tensor in double precision.
pub type MaterialTensor = SymTensor<f64>;
/// Phase means in double precision.
pub type ThetaMeans64 = ThetaMeans<f64>;
