use serde::Serialize;

use crate::calculus::gradient_norm;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::green::VolumeIntegral;
use crate::space::GraphSpace;

/// Ceiling on the fitted upper-bound constant.
pub const UPPER_CEILING: f64 = 10.0;
/// Ceiling on the fitted gradient constant.
pub const GRADIENT_CEILING: f64 = 2.0;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecayReport {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub grad_ok: bool,
    /// `d(x₀, {u <= 1/2}) ∧ 1`.
    pub delta: f64,
    /// Smallest `u / (δ^(N-2) d^(2-N) / 2)` over `Ω`.
    pub lower_margin: f64,
    pub lower_violations: usize,
    /// Fitted `C₂` in `u <= C₂ m(B_1) ∫_d^∞ s / m(B_s) ds`.
    pub upper_constant: f64,
    /// Fitted `C` in `|∇u| / u <= C / d`.
    pub gradient_constant: f64,
    pub checked_vertices: usize,
}

/// Two-sided decay and gradient bounds for an exterior potential around `x0 ∈ Ω^c`.
///
/// `Ω^c` is read off the field as `{u = 1}`; the bounds are evaluated on the
/// defined vertices of `Ω`.
pub fn decay_check(space: &GraphSpace, u: &Field, x0: usize) -> Result<DecayReport> {
    let n = space.len();
    if x0 >= n || !u.defined(x0) {
        return Err(Error::param(format!("vertex {x0} out of range or undefined")));
    }
    let saturated = |x: usize| u.value(x) >= 1.0 - 1e-12;
    if !saturated(x0) {
        return Err(Error::pre("x0 must lie in Ω^c (u = 1)"));
    }
    let dim = space.dim();
    let map = space.distances(x0, f64::INFINITY);
    let half = u
        .iter()
        .filter(|&(_, v)| v <= 0.5)
        .map(|(x, _)| map.get(x))
        .fold(f64::INFINITY, f64::min);
    if !half.is_finite() {
        return Err(Error::pre("{u <= 1/2} is empty within the solved region"));
    }
    let delta = half.min(1.0);
    let grad = gradient_norm(space, u);
    let vol = VolumeIntegral::new(space, x0)?;
    let unit_mass = vol.mass_at(1.0);

    let mut lower_margin = f64::INFINITY;
    let mut lower_violations = 0;
    let mut upper: f64 = 0.0;
    let mut gradient: f64 = 0.0;
    let mut checked = 0;
    for (x, v) in u.iter() {
        if saturated(x) {
            continue;
        }
        let d = map.get(x);
        checked += 1;
        let bound = 0.5 * delta.powf(dim - 2.0) * d.powf(2.0 - dim);
        lower_margin = lower_margin.min(v / bound);
        if v < bound * (1.0 - 1e-12) {
            lower_violations += 1;
        }
        if d >= 1.0 && d <= vol.reach() {
            upper = upper.max(v / (unit_mass * vol.eval(d)));
        }
        if grad.defined(x) && v > 0.0 {
            gradient = gradient.max(d * grad.value(x) / v);
        }
    }
    Ok(DecayReport {
        lower_ok: lower_violations == 0,
        upper_ok: upper.is_finite() && upper <= UPPER_CEILING,
        grad_ok: gradient <= GRADIENT_CEILING,
        delta,
        lower_margin,
        lower_violations,
        upper_constant: upper,
        gradient_constant: gradient,
        checked_vertices: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_lattice;

    #[test]
    fn exact_inverse_distance_passes() {
        let g = build_lattice(3, 4.0, 0.5).unwrap();
        let c = g.nearest_vertex(&[0.0; 3]).unwrap();
        let map = g.distances(c, f64::INFINITY);
        let u = Field::from_fn(&g, |x| (1.0 / map.get(x).max(1.0)).min(1.0)).restrict(|x| !g.is_boundary(x));
        let rep = decay_check(&g, &u, c).unwrap();
        assert!(rep.lower_ok && rep.lower_violations == 0);
        assert!(rep.delta > 0.0 && rep.delta <= 1.0);
        assert!(rep.checked_vertices > 0);
    }

    #[test]
    fn base_point_must_be_saturated() {
        let g = build_lattice(2, 2.0, 0.5).unwrap();
        let u = Field::from_fn(&g, |_| 0.3);
        assert!(matches!(decay_check(&g, &u, 0), Err(Error::Precondition(_))));
        assert!(decay_check(&g, &u, 10_000).is_err());
    }
}
