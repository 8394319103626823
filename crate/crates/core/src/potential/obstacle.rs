use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{COMPLEMENTARITY_TOL, LINEAR_TOL};
use crate::calculus::dirichlet_energy;
use crate::error::{Error, Result};
use crate::field::{indicator, members, Field};
use crate::linalg::solve_dirichlet;
use crate::space::{GraphSpace, Network};

/// Minimizer of the obstacle problem and its energy.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    #[serde(skip)]
    pub potential: Field,
    pub capacity: f64,
    pub iterations: usize,
    /// Complementarity residual `max |min(L u / deg, u - ψ)|` on free vertices.
    pub residual: f64,
    pub active_set: Vec<usize>,
    #[serde(skip)]
    pub obstacle: Vec<usize>,
    #[serde(skip)]
    pub container: Vec<usize>,
    /// Vertices of the container where the solution is not pinned to zero.
    #[serde(skip)]
    pub free: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial {
    /// Start from the obstacle itself.
    Obstacle,
    /// Start from one on every free vertex.
    Ones,
}

#[derive(Debug, Clone, Copy)]
pub struct ObstacleOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor; derived from the container's hop diameter when `None`.
    pub omega: Option<f64>,
    pub initial: Initial,
    /// Re-solve with the detected active set pinned once the sweeps converge.
    pub polish: bool,
}

impl Default for ObstacleOptions {
    fn default() -> Self {
        ObstacleOptions {
            tol: COMPLEMENTARITY_TOL,
            max_sweeps: 200_000,
            omega: None,
            initial: Initial::Obstacle,
            polish: true,
        }
    }
}

/// Free vertices of a container: members that are not builder-flagged and have
/// every neighbour inside the container.
pub(crate) fn interior_of(space: &GraphSpace, container: &[bool]) -> Vec<bool> {
    (0..space.len())
        .map(|x| {
            container[x]
                && !space.is_boundary(x)
                && space.neighbors(x).all(|(y, _, _)| container[y])
        })
        .collect()
}

fn hop_diameter(net: &Network, free: &[bool]) -> usize {
    let start = match free.iter().position(|&f| f) {
        Some(s) => s,
        None => return 1,
    };
    let bfs = |s: usize| {
        let mut depth = vec![usize::MAX; net.len()];
        let mut queue = std::collections::VecDeque::from([s]);
        depth[s] = 0;
        let mut last = (s, 0);
        while let Some(x) = queue.pop_front() {
            last = (x, depth[x]);
            for (y, _, _) in net.neighbors(x) {
                if free[y] && depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        last
    };
    let (far, _) = bfs(start);
    bfs(far).1.max(1)
}

/// Complementarity residual on free vertices.
fn complementarity(net: &Network, free: &[usize], u: &[f64], psi: &[f64]) -> f64 {
    free.iter()
        .map(|&x| {
            let d = net.degree_weight(x);
            let mut g = d * u[x];
            for (y, w, _) in net.neighbors(x) {
                g -= w * u[y];
            }
            (g / d).min(u[x] - psi[x]).abs()
        })
        .fold(0.0, f64::max)
}

/// Projected SOR with optional active-set polish on a bare network.
///
/// Non-free vertices are pinned to zero; `psi` is the obstacle on free vertices.
pub(crate) fn obstacle_core(
    net: &Network,
    free_mask: &[bool],
    psi: &[f64],
    opts: &ObstacleOptions,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = net.len();
    let free = members(free_mask);
    let mut u: Vec<f64> = (0..n)
        .map(|x| match (free_mask[x], opts.initial) {
            (false, _) => 0.0,
            (true, Initial::Obstacle) => psi[x],
            (true, Initial::Ones) => 1.0,
        })
        .collect();
    let omega = opts.omega.unwrap_or_else(|| {
        let m = hop_diameter(net, free_mask) as f64;
        (2.0 / (1.0 + (std::f64::consts::PI / m).sin())).min(1.95)
    });
    let mut sweeps = 0;
    let mut res = complementarity(net, &free, &u, psi);
    while res > opts.tol && sweeps < opts.max_sweeps {
        for &x in &free {
            let d = net.degree_weight(x);
            let mut s = 0.0;
            for (y, w, _) in net.neighbors(x) {
                s += w * u[y];
            }
            let relaxed = (1.0 - omega) * u[x] + omega * s / d;
            u[x] = relaxed.max(psi[x]).min(1.0);
        }
        sweeps += 1;
        if sweeps % 10 == 0 {
            res = complementarity(net, &free, &u, psi);
        }
    }
    res = complementarity(net, &free, &u, psi);
    if res > opts.tol {
        return Err(Error::NonConvergence {
            iterations: sweeps,
            residual: res,
        });
    }
    if opts.polish {
        // Ties at the obstacle count as active.
        let active: Vec<bool> = (0..n)
            .map(|x| free_mask[x] && psi[x] > 0.0 && u[x] - psi[x] <= opts.tol.max(1e-12) * 10.0)
            .collect();
        let pinned: Vec<bool> = (0..n).map(|x| !free_mask[x] || active[x]).collect();
        let mut v: Vec<f64> = (0..n).map(|x| if active[x] { psi[x] } else { u[x] }).collect();
        let polished = solve_dirichlet(net, &pinned, &mut v, None, LINEAR_TOL * 1e-2, 20 * n + 1000);
        if polished.is_ok() {
            let r = complementarity(net, &free, &v, psi);
            if r <= res && v.iter().all(|&a| (-1e-12..=1.0 + 1e-12).contains(&a)) {
                for a in v.iter_mut() {
                    *a = a.clamp(0.0, 1.0);
                }
                u = v;
                res = r;
            }
        }
    }
    Ok((u, sweeps, res))
}

fn validate(space: &GraphSpace, e: &[usize], b: &[usize]) -> Result<(Vec<bool>, Vec<bool>, Vec<bool>)> {
    let n = space.len();
    if let Some(&bad) = e.iter().chain(b).find(|&&x| x >= n) {
        return Err(Error::param(format!("vertex {bad} out of range")));
    }
    let em = indicator(n, e);
    let bm = indicator(n, b);
    if e.iter().any(|&x| !bm[x]) {
        return Err(Error::pre("E is not contained in B"));
    }
    let free = interior_of(space, &bm);
    if e.iter().any(|&x| !free[x]) {
        return Err(Error::pre("E touches the boundary of B (need E compactly inside B)"));
    }
    Ok((em, bm, free))
}

#[allow(clippy::too_many_arguments)]
fn package(
    space: &GraphSpace,
    e: &[usize],
    b: &[usize],
    free: Vec<bool>,
    u: Vec<f64>,
    iterations: usize,
    residual: f64,
    psi: &[f64],
) -> CapacityResult {
    let potential = Field::full(u);
    let capacity = dirichlet_energy(space, &potential, None);
    let active_set = (0..space.len())
        .filter(|&x| free[x] && psi[x] > 0.0 && potential.value(x) >= psi[x])
        .collect();
    CapacityResult {
        potential,
        capacity,
        iterations,
        residual,
        active_set,
        obstacle: e.to_vec(),
        container: b.to_vec(),
        free,
    }
}

/// Minimize the Dirichlet energy over `u >= 1` on `E`, `u = 0` off the interior of `B`.
///
/// The interior of `B` excludes members with a neighbour outside `B` and
/// builder-flagged boundary vertices.
pub fn solve_obstacle(space: &GraphSpace, e: &[usize], b: &[usize], tol: f64) -> Result<CapacityResult> {
    solve_obstacle_with(
        space,
        e,
        b,
        &ObstacleOptions {
            tol,
            ..ObstacleOptions::default()
        },
    )
}

pub fn solve_obstacle_with(
    space: &GraphSpace,
    e: &[usize],
    b: &[usize],
    opts: &ObstacleOptions,
) -> Result<CapacityResult> {
    let (em, _, free) = validate(space, e, b)?;
    let psi: Vec<f64> = em.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
    let (u, it, res) = obstacle_core(space.network(), &free, &psi, opts)?;
    Ok(package(space, e, b, free, u, it, res, &psi))
}

/// Primal-dual active-set solve with dense factorizations; the cross-check oracle.
pub fn solve_obstacle_active_set(space: &GraphSpace, e: &[usize], b: &[usize]) -> Result<CapacityResult> {
    const LIMIT: usize = 3000;
    let (em, _, free) = validate(space, e, b)?;
    let n = space.len();
    let net = space.network();
    let idx: Vec<usize> = members(&free);
    if idx.len() > LIMIT {
        return Err(Error::param(format!(
            "active-set oracle limited to {LIMIT} free vertices"
        )));
    }
    let mut local = vec![usize::MAX; n];
    for (k, &x) in idx.iter().enumerate() {
        local[x] = k;
    }
    let m = idx.len();
    let mut k = DMatrix::<f64>::zeros(m, m);
    for (i, &x) in idx.iter().enumerate() {
        for (y, w, _) in net.neighbors(x) {
            k[(i, i)] += w;
            if local[y] != usize::MAX {
                k[(i, local[y])] -= w;
            }
        }
    }
    let psi: Vec<f64> = idx.iter().map(|&x| if em[x] { 1.0 } else { 0.0 }).collect();
    let mut u = DVector::<f64>::from_vec(psi.clone());
    let mut lambda = DVector::<f64>::zeros(m);
    let mut active: Vec<bool> = vec![false; m];
    let c = 1.0;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next: Vec<bool> = (0..m).map(|i| lambda[i] + c * (psi[i] - u[i]) > 0.0).collect();
        if iterations > 1 && next == active {
            break;
        }
        if iterations > 200 {
            return Err(Error::NonConvergence {
                iterations,
                residual: f64::NAN,
            });
        }
        active = next;
        let inactive: Vec<usize> = (0..m).filter(|&i| !active[i]).collect();
        let mut sol = DVector::<f64>::from_fn(m, |i, _| if active[i] { psi[i] } else { 0.0 });
        if !inactive.is_empty() {
            let ki = DMatrix::<f64>::from_fn(inactive.len(), inactive.len(), |a, b| {
                k[(inactive[a], inactive[b])]
            });
            let rhs = DVector::<f64>::from_fn(inactive.len(), |a, _| {
                -(0..m)
                    .filter(|&j| active[j])
                    .map(|j| k[(inactive[a], j)] * psi[j])
                    .sum::<f64>()
            });
            let chol = ki
                .cholesky()
                .ok_or_else(|| Error::pre("reduced Laplacian is not positive definite"))?;
            let xi = chol.solve(&rhs);
            for (a, &i) in inactive.iter().enumerate() {
                sol[i] = xi[a];
            }
        }
        u = sol;
        let ku = &k * &u;
        lambda = DVector::<f64>::from_fn(m, |i, _| if active[i] { ku[i] } else { 0.0 });
    }
    let mut full = vec![0.0; n];
    for (i, &x) in idx.iter().enumerate() {
        full[x] = u[i].clamp(0.0, 1.0);
    }
    let psi_full: Vec<f64> = em.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
    let residual = complementarity(net, &idx, &full, &psi_full);
    Ok(package(space, e, b, free, full, iterations, residual, &psi_full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_path;

    #[test]
    fn path_capacities_are_tents() {
        let p = build_path(5).unwrap();
        let all: Vec<usize> = (0..5).collect();
        // Tent 0, 1/2, 1, 1/2, 0 has energy 4 · 1/4.
        let one = solve_obstacle(&p, &[2], &all, 1e-12).unwrap();
        assert!((one.capacity - 1.0).abs() < 1e-10);
        assert_eq!(one.active_set, vec![2]);
        let three = solve_obstacle(&p, &[1, 2, 3], &all, 1e-12).unwrap();
        assert!((three.capacity - 2.0).abs() < 1e-10);
        let oracle = solve_obstacle_active_set(&p, &[2], &all).unwrap();
        assert!(oracle.potential.sup_distance(&one.potential) < 1e-9);
    }

    #[test]
    fn obstacle_must_sit_inside_container() {
        let p = build_path(6).unwrap();
        assert!(matches!(solve_obstacle(&p, &[1], &[1, 2, 3], 1e-8), Err(Error::Precondition(_))));
        assert!(matches!(solve_obstacle(&p, &[4], &[1, 2, 3], 1e-8), Err(Error::Precondition(_))));
        assert!(matches!(solve_obstacle(&p, &[9], &[1, 2, 3], 1e-8), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn ones_start_reaches_same_minimizer() {
        let p = build_path(9).unwrap();
        let all: Vec<usize> = (0..9).collect();
        let opts = ObstacleOptions { tol: 1e-12, initial: Initial::Ones, polish: false, ..Default::default() };
        let a = solve_obstacle_with(&p, &[3, 4], &all, &opts).unwrap();
        let b = solve_obstacle(&p, &[3, 4], &all, 1e-12).unwrap();
        assert!((a.capacity - b.capacity).abs() < 1e-9);
        // 1/3 + 1/4 for the two linear ramps.
        assert!((b.capacity - (1.0 / 3.0 + 0.25)).abs() < 1e-10);
    }
}
