//! Weighted Alpert wavelets: bases on dyadic cubes, the projections `△_Q`
//! and `E_Q`, finite expansions over a scale window, and identity checks.

mod basis;
mod checks;
mod expansion;
mod projection;

pub use basis::{build_alpert_basis, AlpertBasis};
pub use checks::{
    check_moment_vanishing, check_telescoping, e_bound_report, finite_type_estimate, EBound, MomentVanishing,
    FINITE_TYPE_LATTICE,
};
pub use expansion::{
    check_encloses, expand, expand_parallel, minimal_enclosing_scale, parseval_gap, reconstruct, window_levels,
    CoefficientTree, CubePart, ScaleWindow, TopPart, RESOLUTION_TOL,
};
pub(crate) use expansion::check_resolution;
pub use projection::{delta_coefficients, project_delta, project_e, project_e_with_rank, region_frame};

/// Eigenvalues below `RANK_REL * lambda_max` are dropped.
pub const RANK_REL: f64 = 1e-9;
/// Absolute eigenvalue floor, relative to the largest Gram diagonal.
pub const RANK_FLOOR: f64 = 1e-13;
