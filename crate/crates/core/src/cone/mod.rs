//! Cone geometry, rigidity residuals, the cosine law, cross-sections and the
//! refined Kato matrix inequality.

mod cosine;
mod kato;
mod rigidity;
mod section;

pub use cosine::{cosine_check, cosine_check_radial, CosineReport};
pub use kato::{kato_check, kato_refine, kato_search, KatoReport, KatoSearch};
pub use rigidity::{
    cone_function, mesh_tolerance, rigidity_residual, rigidity_residual_radial, ConeVerdict, RigidityResidual,
    REJECT_FACTOR,
};
pub use section::{
    cross_section, cross_section_radial, dd_prime_check, CrossSectionSample, DdPrime, BAND_FACTOR,
    C_CEILING,
};

use crate::error::{Error, Result};

/// `sqrt(s² + t² - 2 s t cos(min(d_Z, π)))`.
pub fn cone_distance(t: f64, s: f64, dz: f64) -> f64 {
    // 1 - cos θ = 2 sin²(θ/2) keeps nearby points free of cancellation.
    let half = (0.5 * dz.min(std::f64::consts::PI)).sin();
    let v = (t - s) * (t - s) + 4.0 * t * s * half * half;
    v.max(0.0).sqrt()
}

/// Radial density `t^(N-1)` of the cone measure.
pub fn cone_measure_density(t: f64, n: f64) -> f64 {
    t.powf(n - 1.0)
}

/// `(4/β)(β - (N-2)/(N-1))`.
pub fn harmonic_exponent_constant(beta: f64, n: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::param("β must be positive"));
    }
    let crit = (n - 2.0) / (n - 1.0);
    if beta == crit {
        return Ok(0.0);
    }
    Ok(4.0 / beta * (beta - crit))
}

/// `(N-1)/(N-2)`.
pub(crate) fn kappa(n: f64) -> f64 {
    (n - 1.0) / (n - 2.0)
}
