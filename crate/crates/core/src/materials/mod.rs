//! Symmetric material tensors, cellwise fields and the two-phase closure set.

mod closure;
mod field;
mod tensor;

pub use closure::{
    hclosure_search, in_hclosure, in_mtheta, laminate_hlimit, mtheta_violation, project_to_mtheta, theta_means,
    ClosureMembership, ThetaMeans, MEMBER_TOL, THETA_GRID,
};
pub use field::{random_field, random_rotation, random_tensor, MaterialField};
pub use tensor::{check_coercivity, SymTensor};
