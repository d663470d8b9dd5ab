//! Inequality checkers. Each evaluates one displayed inequality with explicit
//! structural constants derived from the space (`κ`, `D_μ`) and returns a
//! [`CheckResult`].
//!
//! Functions that need an `A_∞` constant take it as an argument so that a
//! suite computes it once per weight; pass the constant of the family named
//! in the function's documentation.

mod grid;
mod probe;
mod result;
mod space;

pub use grid::{check_rhi_maximal_dyadic, check_sharp_rhi_cubes};
pub use probe::{largest_admissible, probe_dyadic_rhi, probe_local_rhi, probe_sharp_rhi, ProbeResult};
pub use result::{passes, CheckKind, CheckResult, REL_TOL};
pub use space::{
    basis_inclusion_all_balls, basis_inclusion_check, buckley_mixed_bound, check_rhi_maximal_local, check_weak_rhi, default_testset,
    mixed_bound, open_property, rhi_local_all_balls, weak_rhi_all_balls, weak_type_bound, MIXED_BOUND_EXPRESSION,
};
