//! Analytic radial model: the cone `t^(N-1) dt ⊗ m_Z` over a homogeneous cross-section.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CrossSection;
use crate::cone::cone_distance;
use crate::error::{Error, Result};

/// Geometry of the cross-section, enough to measure `d_Z` between points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadialCross {
    /// Round sphere of radius `radius_factor` in `R^ambient`; points are unit vectors.
    Sphere { radius_factor: f64, ambient: usize },
    /// Circle of length `angle`; points are arc coordinates `[s]`.
    Circle { angle: f64 },
    /// Only the mass is known.
    Abstract,
}

/// Point `(t, z)` of a cone.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint {
    pub r: f64,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSpace {
    #[serde(rename = "N")]
    pub dim: f64,
    #[serde(rename = "crossSectionMass")]
    pub cross_section_mass: f64,
    #[serde(rename = "rMin")]
    pub r_min: f64,
    #[serde(rename = "rMax")]
    pub r_max: f64,
    pub label: String,
    #[serde(rename = "crossSection")]
    pub cross: RadialCross,
}

/// `|S^(n-1)|`.
/// Angle between two vectors, accurate near 0 and π unlike `acos` of the dot product.
pub(crate) fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (p, q) = (x / na, y / nb);
        diff += (p - q) * (p - q);
        sum += (p + q) * (p + q);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

pub(crate) fn sphere_area(n: usize) -> f64 {
    // |S^0| = 2, |S^1| = 2π, |S^(k+1)| = 2π |S^(k-1)| / k
    let mut a = [2.0, 2.0 * PI];
    if n <= 2 {
        return a[n.max(1) - 1];
    }
    let mut k = 1;
    while k + 2 <= n {
        let next = 2.0 * PI * a[0] / k as f64;
        a = [a[1], next];
        k += 1;
    }
    a[1]
}

impl RadialSpace {
    pub fn new(dim: f64, cross_section_mass: f64, cross: RadialCross) -> Result<Self> {
        if !(dim >= 1.0) {
            return Err(Error::param("radial dimension N must be at least 1"));
        }
        if !(cross_section_mass > 0.0) {
            return Err(Error::param("cross-section mass must be positive"));
        }
        Ok(RadialSpace {
            dim,
            cross_section_mass,
            r_min: 0.0,
            r_max: f64::INFINITY,
            label: format!("radial-N{dim}"),
            cross,
        })
    }

    /// `R^n` as the cone over the unit sphere.
    pub fn euclidean(n: usize) -> Self {
        RadialSpace {
            dim: n as f64,
            cross_section_mass: sphere_area(n),
            r_min: 0.0,
            r_max: f64::INFINITY,
            label: format!("euclidean-R{n}"),
            cross: RadialCross::Sphere {
                radius_factor: 1.0,
                ambient: n,
            },
        }
    }

    /// Radial backend for a homogeneous cross-section.
    pub fn cone(n: f64, cross: &CrossSection) -> Result<Self> {
        let geometry = match cross {
            CrossSection::Circle { angle, .. } => RadialCross::Circle { angle: *angle },
            CrossSection::Sphere { radius_factor, .. } => {
                if !(*radius_factor > 0.0 && *radius_factor <= 1.0) {
                    return Err(Error::param("sphere radius factor must lie in (0, 1]"));
                }
                RadialCross::Sphere {
                    radius_factor: *radius_factor,
                    ambient: 3,
                }
            }
            CrossSection::Graph(_) => {
                return Err(Error::param("radial backend needs a homogeneous cross-section"))
            }
        };
        let mut s = RadialSpace::new(n, cross.mass(), geometry)?;
        s.label = format!("radial-cone-N{n}");
        Ok(s)
    }

    pub fn with_range(mut self, r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min >= 0.0 && r_max > r_min) {
            return Err(Error::param("radial range needs 0 <= rMin < rMax"));
        }
        self.r_min = r_min;
        self.r_max = r_max;
        Ok(self)
    }

    /// `m_Z(Z) t^(N-1)`.
    pub fn density(&self, t: f64) -> f64 {
        self.cross_section_mass * t.powf(self.dim - 1.0)
    }

    /// Measure of `{a < r < b}`.
    pub fn annulus_mass(&self, a: f64, b: f64) -> f64 {
        let n = self.dim;
        self.cross_section_mass * (b.powf(n) - a.powf(n)) / n
    }

    pub fn ball_mass(&self, r: f64) -> f64 {
        self.annulus_mass(0.0, r)
    }

    /// Cross-section distance between two directions.
    pub fn cross_distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        match &self.cross {
            RadialCross::Sphere { radius_factor, .. } => {
                Ok(radius_factor * angle_between(a, b))
            }
            RadialCross::Circle { angle } => {
                let s = (a[0] - b[0]).rem_euclid(*angle);
                Ok(s.min(angle - s))
            }
            RadialCross::Abstract => Err(Error::param("cross-section geometry unknown")),
        }
    }

    pub fn distance(&self, p: &ConePoint, q: &ConePoint) -> Result<f64> {
        Ok(cone_distance(p.r, q.r, self.cross_distance(&p.z, &q.z)?))
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial function with its first two derivatives.
#[derive(Clone)]
pub struct RadialField {
    value: RealFn,
    d1: RealFn,
    d2: RealFn,
    pub description: String,
}

impl fmt::Debug for RadialField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialField")
            .field("description", &self.description)
            .finish()
    }
}

impl RadialField {
    pub fn new(
        description: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RadialField {
            value: Arc::new(value),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            description: description.into(),
        }
    }

    /// `a + b r^p`.
    pub fn power(a: f64, b: f64, p: f64) -> Self {
        RadialField::new(
            format!("{a} + {b} r^{p}"),
            move |r| a + b * r.powf(p),
            move |r| b * p * r.powf(p - 1.0),
            move |r| b * p * (p - 1.0) * r.powf(p - 2.0),
        )
    }

    /// Potential equal to 1 at `r_in` and 0 at `r_out` (infinite allowed), harmonic for dimension `n`.
    pub fn exterior_potential(n: f64, r_in: f64, r_out: f64) -> Self {
        let p = 2.0 - n;
        let tail = if r_out.is_finite() { r_out.powf(p) } else { 0.0 };
        let b = 1.0 / (r_in.powf(p) - tail);
        RadialField::power(-b * tail, b, p)
    }

    /// The model cone function `r²/2`.
    pub fn cone_function() -> Self {
        RadialField::power(0.0, 0.5, 2.0)
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    pub fn d1(&self, r: f64) -> f64 {
        (self.d1)(r)
    }

    pub fn d2(&self, r: f64) -> f64 {
        (self.d2)(r)
    }

    /// Radial Laplacian `f'' + (N-1) f' / r`.
    pub fn laplacian(&self, n: f64, r: f64) -> f64 {
        self.d2(r) + (n - 1.0) * self.d1(r) / r
    }

    /// Solve `f(r) = target` on `[lo, hi]` for a monotone field by bisection.
    pub fn invert(&self, target: f64, lo: f64, hi: f64) -> Result<f64> {
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (self.value(a) - target, self.value(b) - target);
        if fa * fb > 0.0 {
            return Err(Error::pre("level not bracketed by the radial range"));
        }
        let increasing = fb > fa;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (self.value(m) < target) == increasing {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 1e-15 * b.abs().max(1.0) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_masses() {
        let s = RadialSpace::euclidean(3);
        assert!((s.ball_mass(2.0) - 4.0 / 3.0 * PI * 8.0).abs() < 1e-12);
        assert!((s.annulus_mass(1.0, 2.0) - 4.0 / 3.0 * PI * 7.0).abs() < 1e-12);
    }

    #[test]
    fn distance_over_unit_sphere_is_euclidean() {
        let s = RadialSpace::euclidean(3);
        let p = ConePoint { r: 2.0, z: vec![1.0, 0.0, 0.0] };
        let q = ConePoint { r: 3.0, z: vec![0.0, 1.0, 0.0] };
        assert!((s.distance(&p, &q).unwrap() - 13f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn angle_is_accurate_for_close_vectors() {
        let a = [1.0, 0.0, 0.0];
        let b = [1.0, 1e-9, 0.0];
        assert!((angle_between(&a, &b) - 1e-9).abs() < 1e-20);
        assert!((angle_between(&a, &[-1.0, 0.0, 0.0]) - PI).abs() < 1e-15);
    }

    #[test]
    fn exterior_potential_and_inversion() {
        let u = RadialField::exterior_potential(3.0, 1.0, 8.0);
        assert!((u.value(1.0) - 1.0).abs() < 1e-15 && u.value(8.0).abs() < 1e-15);
        assert!(u.laplacian(3.0, 2.5).abs() < 1e-12);
        let r = u.invert(0.5, 1.0, 8.0).unwrap();
        assert!((u.value(r) - 0.5).abs() < 1e-12);
        assert!(u.invert(2.0, 1.0, 8.0).is_err());
    }

    #[test]
    fn cone_cross_section_checks() {
        assert!(RadialSpace::cone(3.0, &CrossSection::sphere(1.5)).is_err());
        let s = RadialSpace::cone(3.0, &CrossSection::circle(3.0)).unwrap();
        assert_eq!(s.cross_distance(&[0.5], &[2.9]).unwrap(), 0.6000000000000001f64.min(2.4));
        assert!(s.with_range(2.0, 1.0).is_err());
    }
}
