//! Measure laws of the flow: annulus scaling and the law of `u` under `m`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::space::{GraphSpace, RadialField, RadialSpace};

/// Fewest vertices an annulus must hold to be compared.
const MIN_ANNULUS_VERTICES: usize = 50;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PushforwardReport {
    /// `m(A(e^{2t} a, b)) / m(A(a, e^{-2t} b))`.
    pub ratio: f64,
    /// `e^{N t}`.
    pub expected: f64,
    pub relative_error: f64,
    pub source_vertices: usize,
    pub target_vertices: usize,
}

impl PushforwardReport {
    fn new(ratio: f64, expected: f64, source_vertices: usize, target_vertices: usize) -> Self {
        PushforwardReport {
            ratio,
            expected,
            relative_error: (ratio / expected - 1.0).abs(),
            source_vertices,
            target_vertices,
        }
    }
}

fn check_annulus(t: f64, (a, b): (f64, f64)) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > a) {
        return Err(Error::param("annulus needs 0 < a < b"));
    }
    if !(t >= 0.0) {
        return Err(Error::param("pushforward time must be non-negative"));
    }
    let lo = (2.0 * t).exp() * a;
    if !(lo < b) {
        return Err(Error::param(format!("e^(2t) a = {lo} must stay below b = {b}")));
    }
    Ok((lo, (-2.0 * t).exp() * b))
}

/// Vertex-measure version of the annulus scaling law on a graph space.
pub fn measure_pushforward_check(
    space: &GraphSpace,
    u: &Field,
    t: f64,
    annulus: (f64, f64),
) -> Result<PushforwardReport> {
    let (a, b) = annulus;
    let (lo, hi) = check_annulus(t, annulus)?;
    if u.len() != space.len() {
        return Err(Error::param("field length does not match the space"));
    }
    let mass = |from: f64, to: f64| -> (f64, usize) {
        u.iter()
            .filter(|&(_, v)| v >= from && v < to)
            .fold((0.0, 0), |(m, c), (x, _)| (m + space.measure(x), c + 1))
    };
    let (source, ns) = mass(lo, b);
    let (target, nt) = mass(a, hi);
    if ns.min(nt) < MIN_ANNULUS_VERTICES {
        return Err(Error::pre(format!(
            "annuli under-resolved ({ns} and {nt} vertices, need {MIN_ANNULUS_VERTICES})"
        )));
    }
    Ok(PushforwardReport::new(
        source / target,
        (space.dim() * t).exp(),
        ns,
        nt,
    ))
}

/// Exact annulus scaling for an increasing radial potential.
pub fn measure_pushforward_radial(
    space: &RadialSpace,
    u: &RadialField,
    t: f64,
    annulus: (f64, f64),
) -> Result<PushforwardReport> {
    let (a, b) = annulus;
    let (lo, hi) = check_annulus(t, annulus)?;
    let r_lo = space.r_min.max(1e-9);
    let r_hi = if space.r_max.is_finite() { space.r_max } else { 1e6 };
    let radius = |level: f64| u.invert(level, r_lo, r_hi);
    let mass = |from: f64, to: f64| -> Result<f64> {
        Ok(space.annulus_mass(radius(from)?, radius(to)?))
    };
    Ok(PushforwardReport::new(
        mass(lo, b)? / mass(a, hi)?,
        (space.dim * t).exp(),
        0,
        0,
    ))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Disintegration {
    pub edges: Vec<f64>,
    /// Normalized histogram density per bin.
    pub density: Vec<f64>,
    /// Bin averages of the density proportional to `s^(N/2 - 1)`.
    pub expected: Vec<f64>,
    pub ks_distance: f64,
    pub empty_bins: usize,
    pub vertices: usize,
}

/// Law of `u` under the vertex measure on `{a <= u < b}` against `s^(N/2 - 1)`.
pub fn disintegration_histogram(
    space: &GraphSpace,
    u: &Field,
    annulus: (f64, f64),
    bins: usize,
) -> Result<Disintegration> {
    let (a, b) = annulus;
    if !(a >= 0.0 && b > a) {
        return Err(Error::param("annulus needs 0 <= a < b"));
    }
    if bins == 0 {
        return Err(Error::param("need at least one bin"));
    }
    if u.len() != space.len() {
        return Err(Error::param("field length does not match the space"));
    }
    let half = space.dim() / 2.0;
    let cdf = |s: f64| (s.powf(half) - a.powf(half)) / (b.powf(half) - a.powf(half));
    let mut samples: Vec<(f64, f64)> = u
        .iter()
        .filter(|&(_, v)| v >= a && v < b)
        .map(|(x, v)| (v, space.measure(x)))
        .collect();
    if samples.is_empty() {
        return Err(Error::pre("annulus holds no vertices"));
    }
    samples.sort_by(|p, q| p.0.total_cmp(&q.0));
    let total: f64 = samples.iter().map(|s| s.1).sum();
    let width = (b - a) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| a + k as f64 * width).collect();
    let mut mass = vec![0.0; bins];
    for &(v, m) in &samples {
        mass[(((v - a) / width) as usize).min(bins - 1)] += m;
    }
    let empty_bins = mass.iter().filter(|&&m| m == 0.0).count();
    if empty_bins * 10 > bins {
        return Err(Error::pre(format!(
            "{empty_bins} of {bins} bins are empty; use fewer bins or a finer mesh"
        )));
    }
    let density = mass.iter().map(|m| m / (total * width)).collect();
    let expected = edges
        .windows(2)
        .map(|e| (cdf(e[1]) - cdf(e[0])) / width)
        .collect();
    let ks = smoothed_ks(space, u, (a, b), &cdf);
    Ok(Disintegration {
        edges,
        density,
        expected,
        ks_distance: ks,
        empty_bins,
        vertices: samples.len(),
    })
}

/// KS distance with each atom's mass spread evenly over its midpoint cell.
///
/// Shells of constant `u` straddling an annulus end would otherwise enter or
/// leave whole and shift the normalization by a full shell.
fn smoothed_ks(space: &GraphSpace, u: &Field, (a, b): (f64, f64), cdf: &dyn Fn(f64) -> f64) -> f64 {
    let mut all: Vec<(f64, f64)> = u.iter().map(|(x, v)| (v, space.measure(x))).collect();
    all.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (v, m) in all {
        match atoms.last_mut() {
            Some(last) if last.0 == v => last.1 += m,
            _ => atoms.push((v, m)),
        }
    }
    let k = atoms.len();
    if k < 2 {
        return 1.0;
    }
    let mut cuts = Vec::with_capacity(k + 1);
    cuts.push(atoms[0].0 - 0.5 * (atoms[1].0 - atoms[0].0));
    for w in atoms.windows(2) {
        cuts.push(0.5 * (w[0].0 + w[1].0));
    }
    cuts.push(atoms[k - 1].0 + 0.5 * (atoms[k - 1].0 - atoms[k - 2].0));
    // Mass of the smoothed law on [a, s].
    let mass_to = |s: f64| -> f64 {
        (0..k)
            .map(|i| {
                let (lo, hi) = (cuts[i].max(a), cuts[i + 1].min(s));
                if hi > lo {
                    atoms[i].1 * (hi - lo) / (cuts[i + 1] - cuts[i])
                } else {
                    0.0
                }
            })
            .sum()
    };
    let total = mass_to(b);
    if !(total > 0.0) {
        return 1.0;
    }
    // Both sides are piecewise smooth between cuts; sample cuts and atoms.
    let mut probes: Vec<f64> = cuts
        .iter()
        .chain(atoms.iter().map(|p| &p.0))
        .copied()
        .filter(|&s| s > a && s < b)
        .collect();
    probes.push(b);
    probes
        .into_iter()
        .map(|s| (mass_to(s) / total - cdf(s)).abs())
        .fold(0.0, f64::max)
}
