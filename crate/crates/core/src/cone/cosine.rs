//! The cone cosine law through the level projection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::flow::{projection, FlowField, FlowOptions, GradientField, RadialGradient};
use crate::space::{ConePoint, GraphSpace, RadialField, RadialSpace};

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CosineReport {
    /// Largest `|d² - rhs| / d²` over the checked pairs.
    pub max_residual: f64,
    pub mean_residual: f64,
    pub checked: usize,
    /// Pairs farther apart than the locality radius.
    pub skipped: usize,
    /// Pairs whose projection left the resolved region.
    pub unprojected: usize,
}

/// `2𝐮(x) + 2𝐮(y) - 4√(𝐮(x)𝐮(y)) (1 - d(Pr x, Pr y)² / 4T)`.
fn cosine_rhs(ux: f64, uy: f64, dpr: f64, level: f64) -> f64 {
    2.0 * ux + 2.0 * uy - 4.0 * (ux * uy).sqrt() * (1.0 - dpr * dpr / (4.0 * level))
}

struct Tally {
    residuals: Vec<f64>,
    skipped: usize,
    unprojected: usize,
}

impl Tally {
    fn report(self) -> Result<CosineReport> {
        if self.residuals.is_empty() {
            return Err(Error::pre(format!(
                "no pair could be checked ({} beyond the locality radius, {} unprojected)",
                self.skipped, self.unprojected
            )));
        }
        let n = self.residuals.len();
        Ok(CosineReport {
            max_residual: self.residuals.iter().copied().fold(0.0, f64::max),
            mean_residual: self.residuals.iter().sum::<f64>() / n as f64,
            checked: n,
            skipped: self.skipped,
            unprojected: self.unprojected,
        })
    }
}

fn check_pairs<P>(
    pairs: &[(P, P)],
    rho: f64,
    distance: impl Fn(&P, &P) -> f64,
    value: impl Fn(&P) -> Option<f64>,
    project: impl Fn(&P) -> Option<P>,
    level: f64,
) -> Tally {
    let mut tally = Tally {
        residuals: Vec::new(),
        skipped: 0,
        unprojected: 0,
    };
    for (x, y) in pairs {
        let d = distance(x, y);
        if !(d > 0.0) {
            continue;
        }
        if d > rho {
            tally.skipped += 1;
            continue;
        }
        let (Some(ux), Some(uy), Some(px), Some(py)) = (value(x), value(y), project(x), project(y))
        else {
            tally.unprojected += 1;
            continue;
        };
        let rhs = cosine_rhs(ux, uy, distance(&px, &py), level);
        tally.residuals.push((d * d - rhs).abs() / (d * d));
    }
    tally
}

fn validate(level: f64, rho: f64) -> Result<()> {
    if !(level > 0.0) {
        return Err(Error::param("level must be positive"));
    }
    if !(rho > 0.0) {
        return Err(Error::param("locality radius must be positive"));
    }
    Ok(())
}

/// Cosine law on a graph backend for vertex pairs, with `𝐮` given at the vertices.
///
/// Distances are those of the continuum the mesh discretizes; `Pr` follows
/// the interpolated flow.
pub fn cosine_check(
    space: &GraphSpace,
    cone_fn: &Field,
    level: f64,
    pairs: &[(usize, usize)],
    rho: f64,
    opts: &FlowOptions,
) -> Result<CosineReport> {
    validate(level, rho)?;
    let field = GradientField::new(space, cone_fn)?;
    let point = |x: usize| -> Result<Vec<f64>> {
        space
            .position(x)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::pre("cosine check needs vertex positions"))
    };
    let mut located = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        if x >= space.len() || y >= space.len() {
            return Err(Error::param(format!("pair ({x}, {y}) out of range")));
        }
        located.push(((x, point(x)?), (y, point(y)?)));
    }
    let tally = check_pairs(
        &located,
        rho,
        |a, b| field.distance(&a.1, &b.1),
        |a| cone_fn.get(a.0),
        |a| {
            projection(&field, &a.1, level, opts)
                .ok()
                .map(|p| (a.0, p))
        },
        level,
    );
    tally.report()
}

/// Cosine law for an increasing radial `𝐮` on the analytic cone.
pub fn cosine_check_radial(
    space: &RadialSpace,
    cone_fn: &RadialField,
    level: f64,
    pairs: &[(ConePoint, ConePoint)],
    rho: f64,
    opts: &FlowOptions,
) -> Result<CosineReport> {
    validate(level, rho)?;
    let r_hi = if space.r_max.is_finite() { space.r_max } else { 1e6 };
    let field = RadialGradient::new(cone_fn.clone(), space.r_min.max(1e-12), r_hi)?;
    for (a, b) in pairs {
        space.distance(a, b)?;
    }
    let tally = check_pairs(
        pairs,
        rho,
        |a, b| space.distance(a, b).unwrap_or(f64::NAN),
        |a| field.sample(&[a.r]).map(|s| s.0),
        |a| {
            projection(&field, &[a.r], level, opts)
                .ok()
                .map(|r| ConePoint { r: r[0], z: a.z.clone() })
        },
        level,
    );
    tally.report()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_cone, CrossSection};

    #[test]
    fn euclidean_law_of_cosines() {
        let space = RadialSpace::euclidean(3);
        let z = |a: f64| vec![a.cos(), a.sin(), 0.0];
        let pairs = vec![
            (ConePoint { r: 1.5, z: z(0.0) }, ConePoint { r: 1.7, z: z(0.2) }),
            (ConePoint { r: 3.0, z: z(1.0) }, ConePoint { r: 2.6, z: z(1.3) }),
            (ConePoint { r: 1.0, z: z(0.0) }, ConePoint { r: 1.0, z: z(3.1) }),
        ];
        let r = cosine_check_radial(
            &space,
            &RadialField::cone_function(),
            0.8,
            &pairs,
            1.0,
            &FlowOptions::with_tol(1e-13),
        )
        .unwrap();
        assert_eq!((r.checked, r.skipped), (2, 1));
        assert!(r.max_residual < 1e-10, "{r:?}");
    }

    #[test]
    fn cone_mesh_pairs_match() {
        let space = build_cone(3.0, &CrossSection::circle(3.0), 0.5, 4.0, 48).unwrap();
        let u = Field::from_fn(&space, |x| 0.5 * space.radius_of(x).unwrap().powi(2));
        let m = space.cone().unwrap().samples;
        let pairs: Vec<(usize, usize)> = (10..30).map(|i| (i * m + 3, (i + 2) * m + 5)).collect();
        let r = cosine_check(&space, &u, 1.0, &pairs, 1.0, &FlowOptions::with_tol(1e-11)).unwrap();
        assert!(r.max_residual < 1e-6, "{r:?}");
        assert_eq!(r.skipped + r.checked, pairs.len());
    }

    #[test]
    fn bad_level_rejected() {
        let space = RadialSpace::euclidean(3);
        let r = cosine_check_radial(&space, &RadialField::cone_function(), 0.0, &[], 1.0, &FlowOptions::radial());
        assert!(r.is_err());
    }
}
