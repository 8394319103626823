//! Exterior Dirichlet problem, the obstacle problem and capacity diagnostics.

mod diagnostics;
mod exterior;
mod obstacle;

pub use diagnostics::{
    cap_fat_ratio, comparison_check, corkscrew_check, lift_check, lower_bound_ratio,
    wiener_decay_fit, wiener_levelwise_check, CapFatPoint, ComparisonReport, LiftReport,
    LowerBoundSample, WienerFit, WienerLevel, WienerLevelwise,
};
pub(crate) use exterior::default_center;
pub use exterior::{
    extrapolate_far_field, radial_exterior, solve_exterior, ExteriorSolution, ExteriorSpec, FarField,
};
pub use obstacle::{
    solve_obstacle, solve_obstacle_active_set, solve_obstacle_with, CapacityResult, Initial,
    ObstacleOptions,
};

/// Default tolerance of linear solves (scaled max-norm residual).
pub const LINEAR_TOL: f64 = 1e-10;
/// Default complementarity tolerance of the obstacle solver.
pub const COMPLEMENTARITY_TOL: f64 = 1e-8;
