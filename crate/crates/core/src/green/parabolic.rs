use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::space::GraphSpace;

/// Margin on the growth exponent above 2 required for a nonparabolic verdict.
pub const EXPONENT_MARGIN: f64 = 0.3;
/// Exponents up to `2 + CRITICAL_BAND` count as parabolic; `λ = 2` is the borderline case.
pub const CRITICAL_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parabolicity {
    Nonparabolic,
    Parabolic,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParabolicityReport {
    pub classification: Parabolicity,
    /// `∫_1^{s_max} s / m(B_s) ds`.
    pub integral: f64,
    /// Growth exponent of `m(B_s) ~ s^λ` over the upper half of the range.
    pub exponent: f64,
    pub s_max: f64,
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
}

fn ball_profile(space: &GraphSpace, x: usize, s_max: f64, samples: usize) -> (Vec<f64>, Vec<f64>) {
    let map = space.distances(x, s_max);
    let sorted = map.sorted();
    let radii: Vec<f64> = (0..samples)
        .map(|k| 1.0 + (s_max - 1.0) * k as f64 / (samples - 1) as f64)
        .collect();
    let mut masses = Vec::with_capacity(samples);
    let mut acc = 0.0;
    let mut i = 0;
    for &r in &radii {
        while i < sorted.len() && sorted[i].0 <= r * (1.0 + 1e-12) {
            acc += space.measure(sorted[i].1);
            i += 1;
        }
        masses.push(acc);
    }
    (radii, masses)
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Classify from the ball-mass growth around `x` up to `s_max`.
///
/// `s_max` is capped at the largest radius whose balls stay inside the graph.
pub fn nonparabolic_test(space: &GraphSpace, x: usize, s_max: f64) -> Result<ParabolicityReport> {
    let h = space.edges().iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
    let safe = space.safe_radius(x);
    let s_max = s_max.min(safe);
    if s_max < 4.0 * h.max(1.0) || s_max <= 1.0 {
        return Err(Error::pre(format!(
            "usable radius {s_max:.3} below 4 resolution radii"
        )));
    }
    let (radii, masses) = ball_profile(space, x, s_max, 64);
    let integral = radii
        .windows(2)
        .zip(masses.windows(2))
        .map(|(r, m)| 0.5 * (r[1] - r[0]) * (r[0] / m[0] + r[1] / m[1]))
        .sum();
    let half = radii.len() / 2;
    let exponent = loglog_slope(&radii[half..], &masses[half..]);
    let classification = if exponent > 2.0 + EXPONENT_MARGIN {
        Parabolicity::Nonparabolic
    } else if exponent <= 2.0 + CRITICAL_BAND {
        Parabolicity::Parabolic
    } else {
        Parabolicity::Inconclusive
    };
    Ok(ParabolicityReport {
        classification,
        integral,
        exponent,
        s_max,
        radii,
        masses,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    /// Smallest `C >= 1` with `I(d)/C <= G <= C I(d)` on the sample.
    pub c_fit: f64,
    pub holds: bool,
    pub ceiling: f64,
    /// `(d, G, I(d))` per sampled vertex.
    pub samples: Vec<(f64, f64, f64)>,
}

/// `d ↦ ∫_d^∞ s / m(B_s(x)) ds` from the resolved ball masses, with a fitted power-law tail.
pub(crate) struct VolumeIntegral {
    radii: Vec<f64>,
    masses: Vec<f64>,
    tail: f64,
}

impl VolumeIntegral {
    pub(crate) fn new(space: &GraphSpace, x: usize) -> Result<Self> {
        let safe = space.safe_radius(x);
        if !(safe > 1.0) {
            return Err(Error::pre("resolved radius below 1"));
        }
        let (radii, masses) = ball_profile(space, x, safe, 96);
        let half = radii.len() / 2;
        let exponent = loglog_slope(&radii[half..], &masses[half..]);
        if exponent <= 2.0 + CRITICAL_BAND {
            return Err(Error::pre(format!(
                "tail of ∫ s/m(B_s) not estimable: growth exponent {exponent:.3}"
            )));
        }
        let s_end = *radii.last().unwrap();
        let c_end = masses.last().unwrap() / s_end.powf(exponent);
        let tail = s_end.powf(2.0 - exponent) / (c_end * (exponent - 2.0));
        Ok(VolumeIntegral {
            radii,
            masses,
            tail,
        })
    }

    /// Largest resolved radius.
    pub(crate) fn reach(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub(crate) fn mass_at(&self, s: f64) -> f64 {
        match self.radii.iter().position(|&r| r >= s) {
            Some(0) => self.masses[0],
            Some(k) => {
                let (a, b) = (self.radii[k - 1], self.radii[k]);
                let t = (s - a) / (b - a);
                self.masses[k - 1] * (1.0 - t) + self.masses[k] * t
            }
            None => *self.masses.last().unwrap(),
        }
    }

    pub(crate) fn eval(&self, d: f64) -> f64 {
        let (radii, masses) = (&self.radii, &self.masses);
        let mut acc = self.tail;
        for k in (0..radii.len() - 1).rev() {
            let (a, b) = (radii[k], radii[k + 1]);
            if b <= d {
                break;
            }
            let lo = a.max(d);
            let f = |s: f64| {
                let t = ((s - a) / (b - a)).clamp(0.0, 1.0);
                s / (masses[k] * (1.0 - t) + masses[k + 1] * t)
            };
            acc += 0.5 * (b - lo) * (f(lo) + f(b));
        }
        acc
    }
}

/// Compare `G(x, y)` with `I(d) = ∫_d^∞ s / m(B_s(x)) ds` on the sampled vertices.
///
/// The integral beyond the resolved range uses the fitted power law of the ball masses.
pub fn green_sandwich_check(
    space: &GraphSpace,
    x: usize,
    g: &Field,
    y_grid: &[usize],
    ceiling: f64,
) -> Result<SandwichReport> {
    let vol = VolumeIntegral::new(space, x)?;
    let s_end = vol.reach();
    let integral = |d: f64| vol.eval(d);
    let safe = space.safe_radius(x);
    let map = space.distances(x, safe);
    let mut samples = Vec::new();
    let mut c_fit: f64 = 1.0;
    for &y in y_grid {
        let d = map.get(y);
        if !(d.is_finite() && d >= 1.0 && d <= s_end) || !g.defined(y) {
            continue;
        }
        let (gv, iv) = (g.value(y), integral(d));
        c_fit = c_fit.max(gv / iv).max(iv / gv);
        samples.push((d, gv, iv));
    }
    if samples.is_empty() {
        return Err(Error::pre("no sampled vertex inside the resolved range [1, safe radius]"));
    }
    Ok(SandwichReport {
        holds: c_fit <= ceiling,
        c_fit,
        ceiling,
        samples,
    })
}
