//! Level sets `{𝐮 = T}` with their intrinsic distance.

use serde::Serialize;

use super::cone_distance;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::space::{GraphSpace, RadialCross, RadialField, RadialSpace};

/// Band half-width in units of the largest per-edge variation across the level.
pub const BAND_FACTOR: f64 = 1.5;
/// Largest accepted `d'/d` ratio.
pub const C_CEILING: f64 = 5.0;
const MIN_BAND: usize = 20;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossSectionSample {
    pub level: f64,
    pub bandwidth: f64,
    pub band_size: usize,
    /// Connected components of the band; more than one is a topology defect.
    pub components: usize,
    /// Sampled band vertices (empty on the radial backend).
    pub vertices: Vec<usize>,
    /// Pairwise ambient distances `d`.
    pub ambient: Vec<Vec<f64>>,
    /// Pairwise band-intrinsic distances `d'` (infinite across components).
    pub intrinsic: Vec<Vec<f64>>,
    /// Largest finite `d'` divided by `√(2T)`, comparable to the diameter of `Z`.
    pub rescaled_diameter: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DdPrime {
    /// Largest `d'/d` over the sampled pairs, at least 1.
    pub c_fit: f64,
    pub holds: bool,
    pub pairs: usize,
    /// Pairs with `d' < d`.
    pub violations: usize,
    pub disconnected_pairs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Extract the band `{|𝐮 - T| <= bandwidth}` and sample distances on it.
pub fn cross_section(
    space: &GraphSpace,
    cone_fn: &Field,
    level: f64,
    sample_count: usize,
) -> Result<CrossSectionSample> {
    if cone_fn.len() != space.len() {
        return Err(Error::param("field length does not match the space"));
    }
    if !(level > 0.0) {
        return Err(Error::param("level must be positive"));
    }
    if sample_count < 2 {
        return Err(Error::param("need at least two samples"));
    }
    let mut variation: f64 = 0.0;
    for e in space.edges() {
        if !(cone_fn.defined(e.a) && cone_fn.defined(e.b)) {
            continue;
        }
        let (p, q) = (cone_fn.value(e.a), cone_fn.value(e.b));
        if p.min(q) <= level && p.max(q) >= level {
            variation = variation.max((p - q).abs());
        }
    }
    if !(variation > 0.0) {
        return Err(Error::pre(format!("no edge crosses the level {level}")));
    }
    let bandwidth = BAND_FACTOR * variation;
    let mask: Vec<bool> = (0..space.len())
        .map(|x| cone_fn.defined(x) && (cone_fn.value(x) - level).abs() <= bandwidth)
        .collect();
    let band: Vec<usize> = (0..space.len()).filter(|&x| mask[x]).collect();
    if band.len() < MIN_BAND {
        return Err(Error::pre(format!(
            "level band holds {} vertices, need {MIN_BAND}",
            band.len()
        )));
    }
    let mut component = vec![usize::MAX; space.len()];
    let mut components = 0;
    for &x in &band {
        if component[x] != usize::MAX {
            continue;
        }
        let reach = space.distances_within(x, &mask);
        for &y in &band {
            if reach[y].is_finite() {
                component[y] = components;
            }
        }
        components += 1;
    }
    let count = sample_count.min(band.len());
    let vertices: Vec<usize> = (0..count).map(|k| band[k * band.len() / count]).collect();
    let mut ambient = Vec::with_capacity(count);
    let mut intrinsic = Vec::with_capacity(count);
    for &x in &vertices {
        let full = space.distances(x, f64::INFINITY);
        let inside = space.distances_within(x, &mask);
        ambient.push(vertices.iter().map(|&y| full.get(y)).collect::<Vec<_>>());
        intrinsic.push(vertices.iter().map(|&y| inside[y]).collect::<Vec<_>>());
    }
    let diameter = intrinsic
        .iter()
        .flatten()
        .copied()
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    Ok(CrossSectionSample {
        level,
        bandwidth,
        band_size: band.len(),
        components,
        vertices,
        ambient,
        intrinsic,
        rescaled_diameter: diameter / (2.0 * level).sqrt(),
    })
}

fn sphere_directions(count: usize) -> Vec<Vec<f64>> {
    // Fibonacci lattice on the unit sphere.
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            vec![rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// Exact level set `{r = r_T}` of an increasing radial `𝐮`: `d' = r_T d_Z`.
pub fn cross_section_radial(
    space: &RadialSpace,
    cone_fn: &RadialField,
    level: f64,
    sample_count: usize,
) -> Result<CrossSectionSample> {
    if sample_count < 2 {
        return Err(Error::param("need at least two samples"));
    }
    let r_hi = if space.r_max.is_finite() { space.r_max } else { 1e6 };
    let r = cone_fn.invert(level, space.r_min.max(1e-12), r_hi)?;
    let dirs: Vec<Vec<f64>> = match &space.cross {
        RadialCross::Sphere { ambient: 3, .. } => sphere_directions(sample_count),
        RadialCross::Circle { angle } => (0..sample_count)
            .map(|k| vec![angle * k as f64 / sample_count as f64])
            .collect(),
        _ => return Err(Error::param("radial cross-section needs a circle or a 2-sphere")),
    };
    let mut ambient = Vec::with_capacity(sample_count);
    let mut intrinsic = Vec::with_capacity(sample_count);
    for a in &dirs {
        let mut da = Vec::with_capacity(sample_count);
        let mut di = Vec::with_capacity(sample_count);
        for b in &dirs {
            let dz = space.cross_distance(a, b)?;
            da.push(cone_distance(r, r, dz));
            di.push(r * dz);
        }
        ambient.push(da);
        intrinsic.push(di);
    }
    let diameter = intrinsic.iter().flatten().copied().fold(0.0, f64::max);
    Ok(CrossSectionSample {
        level,
        bandwidth: 0.0,
        band_size: 0,
        components: 1,
        vertices: Vec::new(),
        ambient,
        intrinsic,
        rescaled_diameter: diameter / (2.0 * level).sqrt(),
    })
}

/// Two-sided comparison `d <= d' <= c d` over the sampled pairs.
pub fn dd_prime_check(sample: &CrossSectionSample) -> DdPrime {
    let n = sample.ambient.len();
    let (mut c_fit, mut pairs, mut violations, mut disconnected) = (1.0f64, 0, 0, 0);
    for i in 0..n {
        for j in i + 1..n {
            let (d, dp) = (sample.ambient[i][j], sample.intrinsic[i][j]);
            if !(d > 0.0) {
                continue;
            }
            pairs += 1;
            if !dp.is_finite() {
                disconnected += 1;
                continue;
            }
            if dp < d * (1.0 - 1e-12) {
                violations += 1;
            }
            c_fit = c_fit.max(dp / d);
        }
    }
    let holds = violations == 0 && disconnected == 0 && c_fit <= C_CEILING;
    let note = if disconnected > 0 {
        Some(format!(
            "level band splits into {} components; {disconnected} pairs are not joined inside it",
            sample.components
        ))
    } else if c_fit > C_CEILING {
        Some(format!("d'/d reaches {c_fit:.3}, above {C_CEILING}"))
    } else {
        None
    };
    DdPrime {
        c_fit,
        holds,
        pairs,
        violations,
        disconnected_pairs: disconnected,
        note,
    }
}
