use serde::Serialize;

use crate::calculus::{gradient_norm, laplacian};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::space::{GraphSpace, RadialField, RadialSpace};

/// Residuals of `Δ𝐮 = N` and `|∇√(2𝐮)|² = 1` for `𝐮 = v² / (2 C₀)`, `v = u^(1/(2-N))`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RigidityResidual {
    pub laplacian_sup: f64,
    pub laplacian_l2: f64,
    pub eikonal_sup: f64,
    pub eikonal_l2: f64,
    /// Weighted mean of `|∇v|²` over the region.
    pub normalization: f64,
    pub region_size: usize,
    /// Requested vertices dropped for incomplete stencils, the builder boundary or `u ∉ (0, 1)`.
    pub trimmed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Separation factor between the cone and non-cone verdicts.
pub const REJECT_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeVerdict {
    Cone,
    NotCone,
    Inconclusive,
}

impl RigidityResidual {
    /// Larger of the two sup residuals.
    pub fn worst(&self) -> f64 {
        self.laplacian_sup.max(self.eikonal_sup)
    }

    /// `Cone` at or below `tol`, `NotCone` at or above `REJECT_FACTOR * tol`.
    pub fn verdict(&self, tol: f64) -> ConeVerdict {
        let w = self.worst();
        if w <= tol {
            ConeVerdict::Cone
        } else if w >= REJECT_FACTOR * tol {
            ConeVerdict::NotCone
        } else {
            ConeVerdict::Inconclusive
        }
    }
}

/// `𝐮 = v² / (2 C₀)` with `v = u^(1/(2-N))`, defined where `u > 0`.
pub fn cone_function(u: &Field, n: f64, c0: f64) -> Result<Field> {
    if !(n > 2.0) || !(c0 > 0.0) {
        return Err(Error::param("cone function needs N > 2 and C₀ > 0"));
    }
    Ok(u.restrict(|x| u.value(x) > 0.0)
        .map(|s| s.powf(2.0 / (2.0 - n)) / (2.0 * c0)))
}

/// Second-difference error level `4 (ℓ/ρ)²` of a mesh at distance `rho_min` from the tip.
///
/// `ℓ` is the lattice spacing on grids; on cone meshes `ℓ/ρ` is the largest
/// relative radial step and `rho_min` is ignored.
pub fn mesh_tolerance(space: &GraphSpace, rho_min: f64) -> Result<f64> {
    if let Some(g) = space.grid() {
        if !(rho_min > 0.0) {
            return Err(Error::param("rho_min must be positive"));
        }
        Ok(4.0 * (g.h / rho_min).powi(2))
    } else if let Some(c) = space.cone() {
        let step = c
            .radii
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0])
            .fold(0.0, f64::max);
        Ok(4.0 * step * step)
    } else {
        Err(Error::pre("mesh tolerance needs a grid or cone layout"))
    }
}

struct Norms {
    sup: f64,
    sq: f64,
}

impl Norms {
    fn new() -> Self {
        Norms { sup: 0.0, sq: 0.0 }
    }

    fn add(&mut self, r: f64, w: f64) {
        self.sup = self.sup.max(r.abs());
        self.sq += w * r * r;
    }

    fn l2(&self, mass: f64) -> f64 {
        (self.sq / mass).sqrt()
    }
}

/// Residuals on a graph backend for a harmonic `u`, through `𝐮 = v² / (2 C₀)`.
///
/// `region` defaults to every vertex with `0 < u < 1`. Vertices whose two-ring
/// stencil is incomplete or touches the builder boundary are trimmed.
pub fn rigidity_residual(
    space: &GraphSpace,
    u: &Field,
    region: Option<&[bool]>,
    n: f64,
) -> Result<RigidityResidual> {
    if !(n > 2.0) {
        return Err(Error::param(format!("substitution needs N > 2 (got {n})")));
    }
    if u.len() != space.len() {
        return Err(Error::param("field length does not match the space"));
    }
    let open = |x: usize| u.defined(x) && u.value(x) > 0.0 && u.value(x) < 1.0;
    let v = u
        .restrict(|x| u.value(x) > 0.0 && !space.is_boundary(x))
        .map(|s| s.powf(1.0 / (2.0 - n)));
    let gv = gradient_norm(space, &v);
    let requested: Vec<usize> = match region {
        Some(mask) if mask.len() == space.len() => (0..space.len()).filter(|&x| mask[x]).collect(),
        Some(_) => return Err(Error::param("region mask length does not match the space")),
        None => (0..space.len()).filter(|&x| open(x)).collect(),
    };
    let lap_v2 = laplacian(space, &v.map(|s| s * s));
    let kept: Vec<usize> = requested
        .iter()
        .copied()
        .filter(|&x| open(x) && gv.defined(x) && lap_v2.defined(x))
        .collect();
    if kept.is_empty() {
        return Err(Error::pre("region is empty after trimming"));
    }
    let mass: f64 = kept.iter().map(|&x| space.measure(x)).sum();
    let c0 = kept
        .iter()
        .map(|&x| space.measure(x) * gv.value(x).powi(2))
        .sum::<f64>()
        / mass;
    if !(c0 > 0.0) {
        return Err(Error::pre("|∇v| vanishes on the region"));
    }
    let (mut lap, mut eik) = (Norms::new(), Norms::new());
    for &x in &kept {
        let w = space.measure(x);
        lap.add(lap_v2.value(x) / (2.0 * c0) - n, w);
        eik.add(gv.value(x).powi(2) / c0 - 1.0, w);
    }
    let trimmed = requested.len() - kept.len();
    Ok(RigidityResidual {
        laplacian_sup: lap.sup,
        laplacian_l2: lap.l2(mass),
        eikonal_sup: eik.sup,
        eikonal_l2: eik.l2(mass),
        normalization: c0,
        region_size: kept.len(),
        trimmed,
        note: (trimmed > 0).then(|| format!("{trimmed} vertices trimmed from the boundary layer")),
    })
}

/// Residuals of the exact radial substitution, sampled at `radii`.
///
/// `C₀` is the `t^(N-1)`-weighted trapezoid mean of `v'²` over the sample.
pub fn rigidity_residual_radial(
    space: &RadialSpace,
    u: &RadialField,
    radii: &[f64],
) -> Result<RigidityResidual> {
    let n = space.dim;
    if !(n > 2.0) {
        return Err(Error::param(format!("substitution needs N > 2 (got {n})")));
    }
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
        return Err(Error::param("radii must be positive, increasing, at least two"));
    }
    let p = 1.0 / (2.0 - n);
    let derivs = |r: f64| -> Result<(f64, f64, f64)> {
        let (f, f1, f2) = (u.value(r), u.d1(r), u.d2(r));
        if !(f > 0.0) {
            return Err(Error::pre(format!("u not positive at r = {r}")));
        }
        let v = f.powf(p);
        let v1 = p * f.powf(p - 1.0) * f1;
        let v2 = p * (p - 1.0) * f.powf(p - 2.0) * f1 * f1 + p * f.powf(p - 1.0) * f2;
        Ok((v, v1, v2))
    };
    let samples = radii.iter().map(|&r| derivs(r)).collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = (0..radii.len())
        .map(|k| {
            let lo = if k == 0 { radii[0] } else { 0.5 * (radii[k - 1] + radii[k]) };
            let hi = if k + 1 == radii.len() { radii[k] } else { 0.5 * (radii[k] + radii[k + 1]) };
            (hi - lo) * space.density(radii[k])
        })
        .collect();
    let mass: f64 = weights.iter().sum();
    let c0 = samples.iter().zip(&weights).map(|(s, w)| w * s.1 * s.1).sum::<f64>() / mass;
    if !(c0 > 0.0) {
        return Err(Error::pre("v' vanishes on the sample"));
    }
    let (mut lap, mut eik) = (Norms::new(), Norms::new());
    for ((&r, &(v, v1, v2)), &w) in radii.iter().zip(&samples).zip(&weights) {
        // 𝐮' = v v' / C₀, 𝐮'' = (v'² + v v'') / C₀
        let du = v * v1 / c0;
        let ddu = (v1 * v1 + v * v2) / c0;
        lap.add(ddu + (n - 1.0) * du / r - n, w);
        eik.add(v1 * v1 / c0 - 1.0, w);
    }
    Ok(RigidityResidual {
        laplacian_sup: lap.sup,
        laplacian_l2: lap.l2(mass),
        eikonal_sup: eik.sup,
        eikonal_l2: eik.l2(mass),
        normalization: c0,
        region_size: radii.len(),
        trimmed: 0,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_cone, CrossSection};

    #[test]
    fn radial_newtonian_potential_is_exact() {
        let space = RadialSpace::euclidean(3);
        let u = RadialField::power(0.0, 1.0, -1.0);
        let radii: Vec<f64> = (0..50).map(|k| 1.0 + 0.1 * k as f64).collect();
        let r = rigidity_residual_radial(&space, &u, &radii).unwrap();
        assert!(r.worst() < 1e-12, "{r:?}");
        assert!((r.normalization - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radial_truncated_potential_is_not_a_cone() {
        let space = RadialSpace::euclidean(3);
        let u = RadialField::exterior_potential(3.0, 1.0, 4.0);
        let radii: Vec<f64> = (0..20).map(|k| 1.1 + 0.1 * k as f64).collect();
        let r = rigidity_residual_radial(&space, &u, &radii).unwrap();
        assert!(r.eikonal_sup > 0.1, "{r:?}");
    }

    #[test]
    fn cone_mesh_power_field_is_nearly_exact() {
        let space = build_cone(3.0, &CrossSection::sphere(0.8), 0.5, 4.0, 48).unwrap();
        let u = Field::from_fn(&space, |x| 0.5 / space.radius_of(x).unwrap());
        let r = rigidity_residual(&space, &u, None, 3.0).unwrap();
        let tol = mesh_tolerance(&space, 0.5).unwrap();
        assert!(r.worst() < tol, "{r:?} vs {tol}");
        assert_eq!(r.verdict(tol), ConeVerdict::Cone);
        assert!(r.trimmed > 0);
    }

    #[test]
    fn measure_bump_is_rejected() {
        let space = build_cone(3.0, &CrossSection::circle(3.0), 0.5, 4.0, 48).unwrap();
        let tol = mesh_tolerance(&space, 0.5).unwrap();
        let bumped = space
            .with_scaled_measures("bumped", |x| {
                let r = space.radius_of(x).unwrap();
                1.0 + 0.1 * (-(r - 2.0).powi(2) / 0.25).exp()
            })
            .unwrap();
        let u = Field::from_fn(&bumped, |x| 0.5 / bumped.radius_of(x).unwrap());
        let r = rigidity_residual(&bumped, &u, None, 3.0).unwrap();
        assert_eq!(r.verdict(tol), ConeVerdict::NotCone, "{r:?} vs {tol}");
    }

    #[test]
    fn bad_dimension_rejected() {
        let space = build_cone(3.0, &CrossSection::sphere(0.8), 0.5, 4.0, 8).unwrap();
        let u = Field::from_fn(&space, |_| 0.5);
        assert!(rigidity_residual(&space, &u, None, 2.0).is_err());
    }
}
