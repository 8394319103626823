//! Heat kernels, Green functions and the nonparabolicity classifier.

mod function;
mod heat;
mod parabolic;

pub use function::{
    green_as_exterior_solution, green_function, green_harmonic_residual, quasi_green, shell_green,
    GreenExterior, ShellGreen, TimeIntegral,
};
pub use heat::{HeatKernelEngine, HeatMethod, SPECTRAL_CAP};
pub(crate) use parabolic::VolumeIntegral;
pub use parabolic::{
    green_sandwich_check, nonparabolic_test, Parabolicity, ParabolicityReport, SandwichReport,
    CRITICAL_BAND, EXPONENT_MARGIN,
};
