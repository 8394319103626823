//! Level sets, perimeters, the monotone quantity `U_β`, its derivative and
//! lower bound, and decay estimates for exterior potentials.

mod decay;
mod functional;
mod level;

pub use decay::{decay_check, DecayReport, GRADIENT_CEILING, UPPER_CEILING};
pub use functional::{
    monotonicity_report, monotonicity_report_radial, second_order_lower_bound_radial, u_beta_derivative_radial,
    u_beta_radial, MonotoneReport, UEstimator, U_FLOOR,
};
pub use level::{level_set, perimeter, CoareaCheck, LevelData, GRADIENT_FLOOR};
