//! The refined Kato inequality for symmetric matrices:
//! `(t+n)/(t+n-1) |Av|² <= |v|² (tr A)² / t + |v|² |A|²_HS`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KatoReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// True when the input was not symmetric and got replaced by `(A + Aᵀ)/2`.
    pub symmetrized: bool,
}

fn sides(a: &DMatrix<f64>, v: &DVector<f64>, t: f64) -> (f64, f64) {
    let n = a.nrows() as f64;
    let av = a * v;
    let v2 = v.norm_squared();
    let tr = a.trace();
    let lhs = (t + n) / (t + n - 1.0) * av.norm_squared();
    let rhs = v2 * tr * tr / t + v2 * a.norm_squared();
    (lhs, rhs)
}

pub fn kato_check(a: &DMatrix<f64>, v: &DVector<f64>, t: f64) -> Result<KatoReport> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::param("matrix dimension must be positive"));
    }
    if a.ncols() != n || v.len() != n {
        return Err(Error::param("matrix must be square and match the vector"));
    }
    if !(t > 0.0) {
        return Err(Error::param("t must be positive"));
    }
    let asym = (a - a.transpose()).amax();
    let symmetrized = asym > 1e-14 * a.amax().max(1.0);
    let (lhs, rhs) = if symmetrized {
        log::warn!("kato_check: input not symmetric, using (A + Aᵀ)/2");
        sides(&((a + a.transpose()) * 0.5), v, t)
    } else {
        sides(a, v, t)
    };
    Ok(KatoReport {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
        symmetrized,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KatoSearch {
    pub trials: usize,
    pub violations: usize,
    /// Minimum `rhs / lhs` over the trials.
    pub worst_ratio: f64,
    pub worst_n: usize,
    pub worst_t: f64,
    pub seed: u64,
}

fn gaussian_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    (&m + m.transpose()) * 0.5
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::<f64>::from_fn(n, |_, _| rng.sample(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

const CHUNK: usize = 4096;

/// Random sweep over dimensions `dims` and parameters `t_grid`.
///
/// Trials cycle through the `(n, t)` combinations; each chunk of trials owns a
/// generator seeded from `seed` and its index, so results do not depend on the
/// thread count.
pub fn kato_search(dims: &[usize], trials: usize, t_grid: &[f64], seed: u64) -> Result<KatoSearch> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::param("dimensions must be positive"));
    }
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::param("t values must be positive"));
    }
    let combos: Vec<(usize, f64)> = dims
        .iter()
        .flat_map(|&n| t_grid.iter().map(move |&t| (n, t)))
        .collect();
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<(usize, f64, usize, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut worst = (0usize, f64::INFINITY, 0usize, 0.0);
            for k in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let (n, t) = combos[k % combos.len()];
                let a = gaussian_symmetric(&mut rng, n);
                let v = unit_vector(&mut rng, n);
                let (lhs, rhs) = sides(&a, &v, t);
                if lhs > rhs * (1.0 + 1e-12) {
                    worst.0 += 1;
                }
                if lhs > 0.0 && rhs / lhs < worst.1 {
                    worst = (worst.0, rhs / lhs, n, t);
                }
            }
            worst
        })
        .collect();
    let violations = partial.iter().map(|p| p.0).sum();
    let best = partial
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .copied()
        .unwrap_or((0, f64::INFINITY, 0, 0.0));
    Ok(KatoSearch {
        trials,
        violations,
        worst_ratio: best.1,
        worst_n: best.2,
        worst_t: best.3,
        seed,
    })
}

/// Local descent on `rhs / lhs` from a random start; returns the smallest ratio reached.
///
/// The ratio is scale invariant in both `A` and `v`, so the walk is normalized
/// after every accepted step.
pub fn kato_refine(n: usize, t: f64, iterations: usize, seed: u64) -> Result<f64> {
    if n == 0 || !(t > 0.0) {
        return Err(Error::param("need n > 0 and t > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = gaussian_symmetric(&mut rng, n);
    a /= a.norm();
    let mut v = unit_vector(&mut rng, n);
    let ratio = |a: &DMatrix<f64>, v: &DVector<f64>| {
        let (l, r) = sides(a, v, t);
        if l > 0.0 {
            r / l
        } else {
            f64::INFINITY
        }
    };
    let mut best = ratio(&a, &v);
    let mut step = 0.3;
    for _ in 0..iterations {
        let mut a2 = &a + gaussian_symmetric(&mut rng, n) * step;
        a2 /= a2.norm();
        let mut v2 = &v + DVector::<f64>::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal)) * step;
        v2 /= v2.norm();
        let r = ratio(&a2, &v2);
        if r < best {
            best = r;
            a = a2;
            v = v2;
            step = (step * 1.5).min(1.0);
        } else {
            step = (step * 0.97).max(1e-9);
        }
    }
    Ok(best)
}
