//! Gradient flow of `-∇u`: integration, projection onto levels and the
//! measure laws it satisfies on cones.

mod field;
mod integrate;
mod measure;

pub use field::GradientField;
pub use integrate::{
    flow_point, integrate_flow, projection, FlowOptions, FlowStatus, Trajectory, STAGNATION_FLOOR,
};
pub use measure::{
    disintegration_histogram, measure_pushforward_check, measure_pushforward_radial,
    Disintegration, PushforwardReport,
};

use crate::error::{Error, Result};
use crate::space::RadialField;

/// A potential that can be evaluated with its gradient at continuous points.
pub trait FlowField: Sync {
    fn dim(&self) -> usize;

    /// `(u, ∇u)` at `p`, `None` outside the resolved region.
    fn sample(&self, p: &[f64]) -> Option<(f64, Vec<f64>)>;

    /// Snap a point back onto the underlying space.
    fn normalize(&self, _p: &mut [f64]) {}

    fn distance(&self, p: &[f64], q: &[f64]) -> f64;
}

impl FlowField for GradientField<'_> {
    fn dim(&self) -> usize {
        GradientField::dim(self)
    }

    fn sample(&self, p: &[f64]) -> Option<(f64, Vec<f64>)> {
        GradientField::sample(self, p)
    }

    fn normalize(&self, p: &mut [f64]) {
        GradientField::normalize(self, p)
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        GradientField::distance(self, p, q)
    }
}

/// Closed-form radial potential on `[r_min, r_max]`; points are `[r]`.
///
/// The flow keeps the cross-section coordinate fixed, so one coordinate suffices.
#[derive(Debug, Clone)]
pub struct RadialGradient {
    pub field: RadialField,
    pub r_min: f64,
    pub r_max: f64,
}

impl RadialGradient {
    pub fn new(field: RadialField, r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min >= 0.0 && r_max > r_min) {
            return Err(Error::param("radial range must satisfy 0 <= rMin < rMax"));
        }
        Ok(RadialGradient { field, r_min, r_max })
    }
}

impl FlowField for RadialGradient {
    fn dim(&self) -> usize {
        1
    }

    fn sample(&self, p: &[f64]) -> Option<(f64, Vec<f64>)> {
        let r = p[0];
        (r >= self.r_min && r <= self.r_max).then(|| (self.field.value(r), vec![self.field.d1(r)]))
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        (p[0] - q[0]).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::space::{build_cone, build_lattice, CrossSection};

    fn cone_function() -> RadialGradient {
        RadialGradient::new(RadialField::cone_function(), 0.01, 100.0).unwrap()
    }

    #[test]
    fn radial_cone_function_flow_is_exponential() {
        let f = cone_function();
        let opts = FlowOptions::with_tol(1e-12);
        for t in [0.1, 0.5, 1.0] {
            let end = flow_point(&f, &[3.0], t, &opts).unwrap();
            assert!((end[0] - 3.0 * (-t).exp()).abs() < 1e-9, "{t}: {end:?}");
        }
    }

    #[test]
    fn group_property_and_backward_flow() {
        let f = cone_function();
        let opts = FlowOptions::with_tol(1e-12);
        let mid = flow_point(&f, &[2.0], 0.3, &opts).unwrap();
        let two = flow_point(&f, &mid, 0.4, &opts).unwrap();
        let one = flow_point(&f, &[2.0], 0.7, &opts).unwrap();
        assert!((two[0] - one[0]).abs() < 1e-10);
        let back = flow_point(&f, &one, -0.7, &opts).unwrap();
        assert!((back[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn exit_time_matches_level_formula() {
        let f = cone_function();
        let (lo, hi) = (0.5, 8.0);
        let opts = FlowOptions::with_tol(1e-11).within(lo, hi);
        let traj = integrate_flow(&f, &[2.5], 5.0, &opts).unwrap();
        assert_eq!(traj.status, FlowStatus::Exited);
        let u0 = 2.5f64 * 2.5 / 2.0;
        let expected = 0.5 * (u0 / lo).ln();
        assert!((traj.exit_time.unwrap() - expected).abs() < 1e-7, "{traj:?}");
        let back = integrate_flow(&f, &[2.5], -5.0, &opts).unwrap();
        assert!((back.exit_time.unwrap() - 0.5 * (u0 / hi).ln()).abs() < 1e-7);
    }

    #[test]
    fn projection_reaches_level() {
        let f = cone_function();
        let opts = FlowOptions::with_tol(1e-10);
        let p = projection(&f, &[4.0], 0.5, &opts).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-7);
        assert_eq!(projection(&f, &[1.0], 0.5, &opts).unwrap(), vec![1.0]);
        let q = projection(&f, &[0.5], 2.0, &opts).unwrap();
        assert!((f.field.value(q[0]) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn leaving_the_range_is_flagged() {
        let f = RadialGradient::new(RadialField::cone_function(), 1.0, 5.0).unwrap();
        let traj = integrate_flow(&f, &[3.0], 3.0, &FlowOptions::radial()).unwrap();
        assert_eq!(traj.status, FlowStatus::Exited);
        assert!(traj.end()[0] >= 1.0 && traj.end_time() < 3.0f64.ln() + 1e-9);
        assert!(flow_point(&f, &[3.0], 3.0, &FlowOptions::radial()).is_err());
    }

    #[test]
    fn lattice_flow_of_quadratic_contracts_linearly() {
        let g = build_lattice(3, 3.0, 0.25).unwrap();
        let u = Field::from_positions(&g, |p| 0.5 * p.iter().map(|c| c * c).sum::<f64>()).unwrap();
        let f = GradientField::new(&g, &u).unwrap();
        let x = [1.6, -0.9, 2.1];
        let end = flow_point(&f, &x, 0.5, &FlowOptions::with_tol(1e-10)).unwrap();
        for (a, b) in end.iter().zip(x) {
            assert!((a - b * (-0.5f64).exp()).abs() < 1e-8, "{end:?}");
        }
    }

    #[test]
    fn cone_mesh_flow_obeys_scaling_laws() {
        let space = build_cone(3.0, &CrossSection::sphere(0.8), 0.5, 4.0, 24).unwrap();
        let u = Field::from_fn(&space, |x| 0.5 * space.radius_of(x).unwrap().powi(2));
        let f = GradientField::new(&space, &u).unwrap();
        let x = space.position(20 * 162 + 40).unwrap().to_vec();
        let u0 = f.value(&x).unwrap();
        let opts = FlowOptions::with_tol(1e-11);
        let traj = integrate_flow(&f, &x, 1.0, &opts).unwrap();
        assert_eq!(traj.status, FlowStatus::Completed);
        for (t, v) in traj.times.iter().zip(&traj.u_values) {
            assert!((v * (2.0 * t).exp() - u0).abs() < 1e-8);
        }
        let d = f.distance(&x, traj.end());
        assert!((d - (1.0 - (-1.0f64).exp()) * (2.0 * u0).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn stagnant_start_is_rejected() {
        let g = build_lattice(2, 1.0, 0.25).unwrap();
        let u = Field::from_fn(&g, |_| 0.3);
        let f = GradientField::new(&g, &u).unwrap();
        assert!(integrate_flow(&f, &[0.1, 0.1], 1.0, &FlowOptions::graph()).is_err());
    }
}
