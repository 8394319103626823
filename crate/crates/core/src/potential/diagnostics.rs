//! Comparison, lift, capacity-density, corkscrew and Wiener-type decay checks.

use serde::Serialize;

use super::obstacle::{interior_of, obstacle_core, CapacityResult, ObstacleOptions};
use super::{solve_obstacle, COMPLEMENTARITY_TOL};
use crate::error::{Error, Result};
use crate::field::{indicator, Field};
use crate::space::{Edge, GraphSpace, Network};

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub holds: bool,
    /// `max (u - v)` over the container.
    pub worst_violation: f64,
}

/// Check `u <= v` on `B` for a superharmonic `v >= χ_E`.
pub fn comparison_check(
    space: &GraphSpace,
    u: &CapacityResult,
    v: &Field,
    tol: f64,
) -> Result<ComparisonReport> {
    for &x in &u.container {
        if !v.defined(x) {
            return Err(Error::pre(format!("comparator undefined at vertex {x} of B")));
        }
    }
    let bad_super: Vec<usize> = (0..space.len())
        .filter(|&x| u.free[x])
        .filter(|&x| {
            let vx = v.value(x);
            let s: f64 = space.neighbors(x).map(|(y, w, _)| w * (v.value(y) - vx)).sum();
            s > tol * space.network().degree_weight(x)
        })
        .collect();
    if !bad_super.is_empty() {
        let shown: Vec<String> = bad_super.iter().take(10).map(usize::to_string).collect();
        return Err(Error::pre(format!(
            "comparator not superharmonic at {} vertices: {}",
            bad_super.len(),
            shown.join(",")
        )));
    }
    if let Some(&x) = u.obstacle.iter().find(|&&x| v.value(x) < 1.0 - tol) {
        return Err(Error::pre(format!("comparator below 1 on E at vertex {x}")));
    }
    if let Some(&x) = u.container.iter().find(|&&x| v.value(x) < -tol) {
        return Err(Error::pre(format!("comparator negative on B at vertex {x}")));
    }
    let worst = u
        .container
        .iter()
        .map(|&x| u.potential.value(x) - v.value(x))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonReport {
        holds: worst <= tol,
        worst_violation: worst.max(0.0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub agrees: bool,
    pub max_diff: f64,
    /// Same comparison without splitting the crossing edges.
    pub naive_max_diff: f64,
    pub inserted_vertices: usize,
}

/// Compare `min(u/m, 1)` with a fresh solve for the superlevel set `{u >= m}`.
///
/// Each edge crossing the level `m` is split at the linear crossing point into
/// two series conductances; the split vertex carries the value `m` exactly and
/// joins the new obstacle. On the refined network the lifted function is the
/// exact minimizer, so the comparison measures solver error only.
pub fn lift_check(space: &GraphSpace, u: &CapacityResult, m: f64, tol: f64) -> Result<LiftReport> {
    if !(m > 0.0 && m <= 1.0) {
        return Err(Error::param("lift level m must lie in (0, 1]"));
    }
    let n = space.len();
    let val = |x: usize| u.potential.value(x);
    let mut edges: Vec<Edge> = Vec::with_capacity(space.edges().len() + 64);
    let mut inserted = 0usize;
    for e in space.edges() {
        let (ua, ub) = (val(e.a), val(e.b));
        let (lo, hi) = if ua < ub { (e.a, e.b) } else { (e.b, e.a) };
        let (ul, uh) = (val(lo), val(hi));
        if ul < m && m < uh {
            let theta = (m - ul) / (uh - ul);
            let z = n + inserted;
            inserted += 1;
            edges.push(Edge {
                a: lo,
                b: z,
                weight: e.weight / theta,
                length: 1.0,
            });
            edges.push(Edge {
                a: z,
                b: hi,
                weight: e.weight / (1.0 - theta),
                length: 1.0,
            });
        } else {
            edges.push(*e);
        }
    }
    let total = n + inserted;
    let net = Network::from_edges(total, &edges);
    let mut free = u.free.clone();
    free.resize(total, true);
    let psi: Vec<f64> = (0..total)
        .map(|x| if x >= n || (u.free[x] && val(x) >= m) { 1.0 } else { 0.0 })
        .collect();
    let opts = ObstacleOptions {
        tol: tol * 1e-2,
        ..ObstacleOptions::default()
    };
    let (w, _, _) = obstacle_core(&net, &free, &psi, &opts)?;
    let lifted = |x: usize| (val(x) / m).min(1.0);
    let max_diff = (0..n).map(|x| (w[x] - lifted(x)).abs()).fold(0.0, f64::max);

    let plain_psi: Vec<f64> = (0..n).map(|x| psi[x]).collect();
    let (w0, _, _) = obstacle_core(space.network(), &u.free, &plain_psi, &opts)?;
    let naive = (0..n).map(|x| (w0[x] - lifted(x)).abs()).fold(0.0, f64::max);
    Ok(LiftReport {
        agrees: max_diff <= 10.0 * tol,
        max_diff,
        naive_max_diff: naive,
        inserted_vertices: inserted,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CapFatPoint {
    pub s: f64,
    pub ratio: f64,
    pub numerator: f64,
    pub denominator: f64,
}

fn min_edge_length(space: &GraphSpace) -> f64 {
    space.edges().iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
}

/// `Cap(B_s(x) ∩ E, B_2s(x)) / Cap(B_s(x), B_2s(x))` on a radius grid.
pub fn cap_fat_ratio(space: &GraphSpace, e: &[usize], x: usize, s_grid: &[f64]) -> Result<Vec<CapFatPoint>> {
    let h = min_edge_length(space);
    let em = indicator(space.len(), e);
    let smax = s_grid.iter().cloned().fold(0.0, f64::max);
    let map = space.distances(x, 2.0 * smax);
    let mut out = Vec::new();
    for &s in s_grid {
        if s < 3.0 * h {
            log::warn!("cap_fat_ratio: s = {s} below resolution 3h = {}, skipped", 3.0 * h);
            continue;
        }
        let ball: Vec<usize> = map.ball(s).collect();
        let outer: Vec<usize> = map.ball(2.0 * s).collect();
        let part: Vec<usize> = ball.iter().copied().filter(|&y| em[y]).collect();
        let den = solve_obstacle(space, &ball, &outer, COMPLEMENTARITY_TOL)?.capacity;
        let num = if part.is_empty() {
            0.0
        } else {
            solve_obstacle(space, &part, &outer, COMPLEMENTARITY_TOL)?.capacity
        };
        out.push(CapFatPoint {
            s,
            ratio: num / den,
            numerator: num,
            denominator: den,
        });
    }
    Ok(out)
}

/// For each `s`, whether some ball of radius `λ s` sits inside `B_s(x) ∩ E`.
pub fn corkscrew_check(
    space: &GraphSpace,
    e: &[usize],
    x: usize,
    lambda: f64,
    r_grid: &[f64],
) -> Result<Vec<(f64, bool)>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param("λ must lie in (0, 1)"));
    }
    let h = min_edge_length(space);
    let rmin = r_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    if lambda * rmin < 2.0 * h {
        return Err(Error::pre(format!(
            "λ·min(r) = {} below the resolution 2h = {}",
            lambda * rmin,
            2.0 * h
        )));
    }
    let em = indicator(space.len(), e);
    let rmax = r_grid.iter().cloned().fold(0.0, f64::max);
    let from_x = space.distances(x, rmax);
    let mut out = Vec::new();
    for &s in r_grid {
        let rho = lambda * s;
        let found = from_x
            .ball(s - rho)
            .filter(|&y| em[y])
            .any(|y| {
                let local = space.distances_uncached(y, rho);
                let inside = local.ball(rho).all(|z| em[z] && from_x.get(z) <= s);
                inside
            });
        out.push((s, found));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct WienerFit {
    pub alpha: f64,
    pub c: f64,
    /// `(radius, sup over B_radius(x) of 1 - u)`.
    pub levels: Vec<(f64, f64)>,
    /// `u ≡ 1` near `x`: the bound holds trivially and `α` is unconstrained.
    pub flagged: bool,
}

/// Fit `sup_{B_ρ(x)} (1 - u) ≈ C ρ^α` by least squares in log-log coordinates.
pub fn wiener_decay_fit(space: &GraphSpace, u: &Field, x: usize, radii: &[f64]) -> Result<WienerFit> {
    if radii.len() < 3 {
        return Err(Error::pre("need at least 3 dyadic levels"));
    }
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let map = space.distances(x, rmax);
    let levels: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let sup = map
                .ball(r)
                .filter(|&y| u.defined(y))
                .map(|y| 1.0 - u.value(y))
                .fold(0.0, f64::max);
            (r, sup)
        })
        .collect();
    let usable: Vec<(f64, f64)> = levels
        .iter()
        .filter(|&&(_, s)| s > 1e-14)
        .map(|&(r, s)| (r.ln(), s.ln()))
        .collect();
    if usable.is_empty() {
        return Ok(WienerFit {
            alpha: f64::NAN,
            c: 0.0,
            levels,
            flagged: true,
        });
    }
    if usable.len() < 3 {
        return Err(Error::pre("fewer than 3 usable dyadic levels"));
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let alpha = sxy / sxx;
    Ok(WienerFit {
        alpha,
        c: (my - alpha * mx).exp(),
        levels,
        flagged: false,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WienerLevel {
    pub radius: f64,
    pub sup_one_minus_u: f64,
    /// `Cap(E ∩ B_j, B_(j-1)) / Cap(B_j, B_(j-1))`.
    pub density: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WienerLevelwise {
    pub levels: Vec<WienerLevel>,
    /// Largest `C` with `1 - u <= exp(-C Σ_j a_j)` on every level.
    pub c_fit: f64,
    pub holds: bool,
}

/// Levelwise check of `1 - u <= exp(-C Σ_{j<=i} a_j)` on `B_i = B_(2^(1-i) r)(x)`,
/// with `u` the potential of `E` in `B_0`.
pub fn wiener_levelwise_check(
    space: &GraphSpace,
    e: &[usize],
    x: usize,
    r: f64,
    levels: usize,
) -> Result<WienerLevelwise> {
    if levels == 0 {
        return Err(Error::param("need at least one level"));
    }
    let radius = |i: usize| 2.0 * r / 2f64.powi(i as i32);
    let map = space.distances(x, radius(0));
    let b0: Vec<usize> = map.ball(radius(0)).collect();
    let b0_mask = indicator(space.len(), &b0);
    let inner = interior_of(space, &b0_mask);
    let em = indicator(space.len(), e);
    let e0: Vec<usize> = (0..space.len()).filter(|&y| em[y] && inner[y]).collect();
    if e0.is_empty() {
        return Err(Error::pre("E does not meet the interior of B_0"));
    }
    let u = solve_obstacle(space, &e0, &b0, COMPLEMENTARITY_TOL)?;
    let mut out = Vec::with_capacity(levels);
    let mut cumulative = 0.0;
    let mut c_fit = f64::INFINITY;
    for i in 1..=levels {
        let bi: Vec<usize> = map.ball(radius(i)).collect();
        let bprev: Vec<usize> = map.ball(radius(i - 1)).collect();
        let part: Vec<usize> = bi.iter().copied().filter(|&y| em[y]).collect();
        let den = solve_obstacle(space, &bi, &bprev, COMPLEMENTARITY_TOL)?.capacity;
        let num = if part.is_empty() {
            0.0
        } else {
            solve_obstacle(space, &part, &bprev, COMPLEMENTARITY_TOL)?.capacity
        };
        cumulative += num / den;
        let sup = bi
            .iter()
            .map(|&y| 1.0 - u.potential.value(y))
            .fold(0.0, f64::max);
        if cumulative > 0.0 {
            let c = if sup > 0.0 { -sup.ln() / cumulative } else { f64::INFINITY };
            c_fit = c_fit.min(c);
        }
        out.push(WienerLevel {
            radius: radius(i),
            sup_one_minus_u: sup,
            density: num / den,
            cumulative,
        });
    }
    Ok(WienerLevelwise {
        levels: out,
        c_fit,
        holds: c_fit > 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundSample {
    pub min_potential: f64,
    pub ratio: f64,
    /// `min_potential / ratio`.
    pub constant: f64,
}

/// Minimum over `B_r(x)` of the potential of `E ∩ B_r` in `B_2r`, against
/// `Cap(E ∩ B_r, B_2r) / Cap(B_r, B_2r)`.
pub fn lower_bound_ratio(space: &GraphSpace, e: &[usize], x: usize, r: f64) -> Result<LowerBoundSample> {
    let map = space.distances(x, 2.0 * r);
    let ball: Vec<usize> = map.ball(r).collect();
    let outer: Vec<usize> = map.ball(2.0 * r).collect();
    let em = indicator(space.len(), e);
    let part: Vec<usize> = ball.iter().copied().filter(|&y| em[y]).collect();
    if part.is_empty() {
        return Err(Error::pre("E does not meet B_r(x)"));
    }
    let u = solve_obstacle(space, &part, &outer, COMPLEMENTARITY_TOL)?;
    let den = solve_obstacle(space, &ball, &outer, COMPLEMENTARITY_TOL)?.capacity;
    let ratio = u.capacity / den;
    let min_potential = ball
        .iter()
        .map(|&y| u.potential.value(y))
        .fold(f64::INFINITY, f64::min);
    Ok(LowerBoundSample {
        min_potential,
        ratio,
        constant: min_potential / ratio,
    })
}
