//! End-to-end chain: exterior potential, monotone quantities, rigidity and the cosine law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{
    cone_function, cosine_check, cosine_check_radial, mesh_tolerance, rigidity_residual, rigidity_residual_radial,
    ConeVerdict, CosineReport, RigidityResidual,
};
use crate::error::{Error, Result};
use crate::flow::FlowOptions;
use crate::green::{nonparabolic_test, Parabolicity, ParabolicityReport};
use crate::monotone::{monotonicity_report, monotonicity_report_radial, LevelData, MonotoneReport};
use crate::potential::{radial_exterior, solve_exterior, ExteriorSpec};
use crate::field::Field;
use crate::space::{ConePoint, GraphSpace, RadialCross, RadialField, RadialSpace};

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub betas: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub solver_tol: f64,
    /// Pairs for the cosine law.
    pub pairs: usize,
    /// Locality radius for the cosine law.
    pub rho: f64,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            betas: vec![1.0, 2.0, 3.0],
            t_grid: (0..7).map(|k| 0.2 + 0.1 * k as f64).collect(),
            solver_tol: 1e-9,
            pairs: 200,
            rho: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineReport {
    pub label: String,
    #[serde(rename = "N")]
    pub dim: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parabolicity: Option<ParabolicityReport>,
    pub monotone: Vec<MonotoneReport>,
    pub rigidity: RigidityResidual,
    pub rigidity_tolerance: f64,
    pub verdict: ConeVerdict,
    /// Level of the cone function used for the projection.
    pub cosine_level: f64,
    pub cosine: CosineReport,
}

fn check_options(opts: &PipelineOptions) -> Result<()> {
    if opts.betas.is_empty() {
        return Err(Error::param("need at least one β"));
    }
    if opts.t_grid.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::param("t-grid must lie in (0, 1)"));
    }
    if opts.pairs == 0 || !(opts.rho > 0.0) {
        return Err(Error::param("cosine stage needs pairs > 0 and rho > 0"));
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Graph chain; `spec` describes the exterior problem.
pub fn pipeline_cone_report(
    space: &GraphSpace,
    spec: &ExteriorSpec,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    check_options(opts)?;
    let n = space.dim();
    if spec.omega_c.is_empty() {
        return Err(Error::pre("Ω^c is empty").at_stage("nonparabolicity"));
    }
    let center = spec
        .center
        .unwrap_or_else(|| crate::potential::default_center(space, &spec.omega_c));
    let gate = nonparabolic_test(space, center, f64::INFINITY).map_err(|e| e.at_stage("nonparabolicity"))?;
    if gate.classification != Parabolicity::Nonparabolic || !(n > 2.0) {
        return Err(Error::pre(format!(
            "space is not nonparabolic (growth exponent {:.3}, classified {:?})",
            gate.exponent, gate.classification
        ))
        .at_stage("nonparabolicity"));
    }
    let solution = solve_exterior(space, spec, opts.solver_tol).map_err(|e| e.at_stage("solve"))?;
    let u = solution.field;
    let data = LevelData::new(space, &u).map_err(|e| e.at_stage("monotone"))?;
    let monotone = opts
        .betas
        .iter()
        .map(|&b| monotonicity_report(&data, b, &opts.t_grid))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("monotone"))?;

    let (t_lo, t_hi) = (opts.t_grid[0], *opts.t_grid.last().unwrap());
    let region: Vec<bool> = (0..space.len())
        .map(|x| u.value(x) >= t_lo && u.value(x) <= t_hi)
        .collect();
    let rigidity = rigidity_residual(space, &u, Some(&region), n).map_err(|e| e.at_stage("rigidity"))?;
    let rho_min = u
        .iter()
        .filter(|&(x, _)| region[x])
        .filter_map(|(x, _)| {
            let (p, c) = (space.position(x)?, space.position(solution.center)?);
            Some(crate::space::dist2(p, c).sqrt())
        })
        .fold(f64::INFINITY, f64::min);
    let tolerance = mesh_tolerance(space, rho_min).map_err(|e| e.at_stage("rigidity"))?;

    let (level, cosine) = cosine_stage(space, &u, n, &region, rigidity.normalization, opts.pairs, opts.rho, opts.seed)?;
    Ok(PipelineReport {
        label: space.label().to_string(),
        dim: n,
        parabolicity: Some(gate),
        monotone,
        verdict: rigidity.verdict(tolerance),
        rigidity,
        rigidity_tolerance: tolerance,
        cosine_level: level,
        cosine,
    })
}

/// Cosine law on random local pairs drawn from `region`, at the median level of `𝐮` there.
///
/// Returns the level together with the report.
#[allow(clippy::too_many_arguments)]
pub fn cosine_stage(
    space: &GraphSpace,
    u: &Field,
    n: f64,
    region: &[bool],
    c0: f64,
    pairs: usize,
    rho: f64,
    seed: u64,
) -> Result<(f64, CosineReport)> {
    if region.len() != space.len() {
        return Err(Error::param("region mask length does not match the space").at_stage("cosine"));
    }
    let cone_fn = cone_function(u, n, c0).map_err(|e| e.at_stage("cosine"))?;
    let members: Vec<usize> = (0..space.len()).filter(|&x| region[x] && cone_fn.defined(x)).collect();
    if members.is_empty() {
        return Err(Error::pre("t-grid range holds no vertices").at_stage("cosine"));
    }
    let level = median(members.iter().map(|&x| cone_fn.value(x)).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let x = members[rng.gen_range(0..members.len())];
        let ball: Vec<usize> = space
            .distances(x, rho)
            .ball(rho)
            .filter(|&y| y != x && region[y])
            .collect();
        if let Some(&y) = ball.get(rng.gen_range(0..ball.len().max(1))) {
            chosen.push((x, y));
        }
    }
    let cosine = cosine_check(space, &cone_fn, level, &chosen, rho, &FlowOptions::graph())
        .map_err(|e| e.at_stage("cosine"))?;
    Ok((level, cosine))
}

/// `v²/(2C₀)` with `v = u^(1/(2-N))`, in closed form.
fn radial_cone_function(u: &RadialField, n: f64, c0: f64) -> RadialField {
    let p = 1.0 / (2.0 - n);
    let (f, g, h) = (u.clone(), u.clone(), u.clone());
    // 𝐮 = u^(2p) / (2C₀)
    RadialField::new(
        format!("cone function of {}", u.description),
        move |r| f.value(r).powf(2.0 * p) / (2.0 * c0),
        move |r| p * g.value(r).powf(2.0 * p - 1.0) * g.d1(r) / c0,
        move |r| {
            let (v, d1, d2) = (h.value(r), h.d1(r), h.d2(r));
            p * ((2.0 * p - 1.0) * v.powf(2.0 * p - 2.0) * d1 * d1 + v.powf(2.0 * p - 1.0) * d2) / c0
        },
    )
}

fn random_direction(cross: &RadialCross, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match cross {
        RadialCross::Sphere { ambient, .. } => loop {
            let v: Vec<f64> = (0..*ambient).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 0.1 && norm <= 1.0 {
                return Ok(v.iter().map(|c| c / norm).collect());
            }
        },
        RadialCross::Circle { angle } => Ok(vec![rng.gen_range(0.0..*angle)]),
        RadialCross::Abstract => Err(Error::pre("cosine stage needs cross-section geometry")),
    }
}

/// A direction within angle about `spread` of `z`.
fn nearby_direction(cross: &RadialCross, z: &[f64], spread: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match cross {
        RadialCross::Circle { angle } => vec![(z[0] + rng.gen_range(-spread..spread)).rem_euclid(*angle)],
        _ => {
            let v: Vec<f64> = z.iter().map(|c| c + rng.gen_range(-spread..spread)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.iter().map(|c| c / norm).collect()
        }
    }
}

/// Closed-form chain on the radial backend with a ball of radius `r_in` removed.
pub fn pipeline_cone_report_radial(
    space: &RadialSpace,
    r_in: f64,
    r_out: f64,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    check_options(opts)?;
    let n = space.dim;
    if !(n > 2.0) {
        return Err(Error::pre(format!("radial cone with N = {n} is parabolic")).at_stage("nonparabolicity"));
    }
    let u = radial_exterior(space, r_in, r_out).map_err(|e| e.at_stage("solve"))?;
    let monotone = opts
        .betas
        .iter()
        .map(|&b| monotonicity_report_radial(space, &u, b, &opts.t_grid))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("monotone"))?;
    let radius = |t: f64| u.invert(t, r_in, if r_out.is_finite() { r_out } else { 1e6 });
    let (r_a, r_b) = (
        radius(*opts.t_grid.last().unwrap()).map_err(|e| e.at_stage("rigidity"))?,
        radius(opts.t_grid[0]).map_err(|e| e.at_stage("rigidity"))?,
    );
    let radii: Vec<f64> = (0..=64).map(|k| r_a + (r_b - r_a) * k as f64 / 64.0).collect();
    let rigidity = rigidity_residual_radial(space, &u, &radii).map_err(|e| e.at_stage("rigidity"))?;
    let cone_fn = radial_cone_function(&u, n, rigidity.normalization);
    let level = cone_fn.value(0.5 * (r_a + r_b));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pairs = Vec::with_capacity(opts.pairs);
    let limited = space.clone().with_range(r_a, r_b).map_err(|e| e.at_stage("cosine"))?;
    for _ in 0..opts.pairs {
        let x = ConePoint {
            r: rng.gen_range(r_a..r_b),
            z: random_direction(&space.cross, &mut rng).map_err(|e| e.at_stage("cosine"))?,
        };
        let y = ConePoint {
            r: (x.r + rng.gen_range(-0.5..0.5) * opts.rho).clamp(r_a, r_b),
            z: nearby_direction(&space.cross, &x.z, 0.4 * opts.rho / x.r, &mut rng),
        };
        pairs.push((x, y));
    }
    let cosine = cosine_check_radial(&limited, &cone_fn, level, &pairs, opts.rho, &FlowOptions::with_tol(1e-12))
        .map_err(|e| e.at_stage("cosine"))?;
    Ok(PipelineReport {
        label: space.label.clone(),
        dim: n,
        parabolicity: None,
        monotone,
        verdict: rigidity.verdict(1e-10),
        rigidity,
        rigidity_tolerance: 1e-10,
        cosine_level: level,
        cosine,
    })
}
