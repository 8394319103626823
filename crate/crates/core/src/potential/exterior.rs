use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{indicator, Field};
use crate::linalg::{solve_dirichlet, SolveStats};
use crate::space::{GraphSpace, RadialField, RadialSpace};

/// Exterior problem data: `u = 1` on `Ω^c`, harmonic in `Ω`, `u = 0` on the truncation shell.
#[derive(Debug, Clone)]
pub struct ExteriorSpec {
    pub omega_c: Vec<usize>,
    /// Shell radius measured from `center`; `None` uses the builder-flagged boundary only.
    pub r_out: Option<f64>,
    /// Reference vertex for the shell; defaults to the `Ω^c` vertex nearest the centroid.
    pub center: Option<usize>,
}

impl ExteriorSpec {
    pub fn new(omega_c: Vec<usize>, r_out: f64) -> Self {
        ExteriorSpec {
            omega_c,
            r_out: Some(r_out),
            center: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExteriorSolution {
    pub field: Field,
    pub stats: SolveStats,
    pub center: usize,
    pub r_out: Option<f64>,
    /// Vertices pinned to zero.
    pub shell: Vec<bool>,
    /// Largest value on free vertices adjacent to the shell.
    pub shell_neighbor_max: f64,
    /// Set when `shell_neighbor_max` exceeds one half.
    pub truncation_tight: bool,
}

pub(crate) fn default_center(space: &GraphSpace, set: &[usize]) -> usize {
    if space.position_dim() == 0 || set.is_empty() {
        return set.first().copied().unwrap_or(0);
    }
    let d = space.position_dim();
    let mut c = vec![0.0; d];
    for &x in set {
        for (k, v) in space.position(x).unwrap().iter().enumerate() {
            c[k] += v / set.len() as f64;
        }
    }
    *set.iter()
        .min_by(|&&a, &&b| {
            let da = crate::space::dist2(space.position(a).unwrap(), &c);
            let db = crate::space::dist2(space.position(b).unwrap(), &c);
            da.total_cmp(&db)
        })
        .unwrap()
}

/// Solve the truncated exterior problem.
pub fn solve_exterior(space: &GraphSpace, spec: &ExteriorSpec, tol: f64) -> Result<ExteriorSolution> {
    let n = space.len();
    if spec.omega_c.is_empty() {
        return Err(Error::pre("Ω^c is empty"));
    }
    if let Some(&bad) = spec.omega_c.iter().find(|&&x| x >= n) {
        return Err(Error::param(format!("vertex {bad} out of range")));
    }
    let inside = indicator(n, &spec.omega_c);
    let center = spec.center.unwrap_or_else(|| default_center(space, &spec.omega_c));
    let shell: Vec<bool> = match spec.r_out {
        Some(r) => {
            if !(r > 0.0) {
                return Err(Error::param("truncation radius must be positive"));
            }
            let map = space.distances(center, r);
            (0..n)
                .map(|x| !inside[x] && (map.get(x) >= r || space.is_boundary(x)))
                .collect()
        }
        None => (0..n).map(|x| !inside[x] && space.is_boundary(x)).collect(),
    };
    if (0..n).all(|x| inside[x] || shell[x]) {
        return Err(Error::pre("Ω is empty: every vertex is pinned"));
    }
    if !shell.iter().any(|&s| s) {
        return Err(Error::pre("truncation shell is empty"));
    }
    if let Some(r) = spec.r_out {
        let map = space.distances(center, r);
        if spec.omega_c.iter().any(|&x| map.get(x) >= r) {
            return Err(Error::pre("Ω^c reaches the truncation shell"));
        }
    }
    let pinned: Vec<bool> = (0..n).map(|x| inside[x] || shell[x]).collect();
    let mut values: Vec<f64> = (0..n).map(|x| if inside[x] { 1.0 } else { 0.0 }).collect();
    let stats = solve_dirichlet(space.network(), &pinned, &mut values, None, tol, 20 * n + 1000)?;
    for v in values.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let shell_neighbor_max = (0..n)
        .filter(|&x| !pinned[x] && space.neighbors(x).any(|(y, _, _)| shell[y]))
        .map(|x| values[x])
        .fold(0.0, f64::max);
    Ok(ExteriorSolution {
        field: Field::full(values),
        stats,
        center,
        r_out: spec.r_out,
        shell,
        shell_neighbor_max,
        truncation_tight: shell_neighbor_max > 0.5,
    })
}

/// Closed-form exterior potential on the radial backend.
pub fn radial_exterior(space: &RadialSpace, r_in: f64, r_out: f64) -> Result<RadialField> {
    if !(r_in > 0.0 && r_out > r_in) {
        return Err(Error::param("need 0 < r_in < r_out"));
    }
    if r_out.is_infinite() && space.dim <= 2.0 {
        return Err(Error::pre("untruncated exterior potential needs N > 2"));
    }
    Ok(RadialField::exterior_potential(space.dim, r_in, r_out))
}

/// Two-radius removal of the truncation shift.
#[derive(Debug, Clone, Serialize)]
pub struct FarField {
    #[serde(skip)]
    pub field: Field,
    /// Fitted `A` in `u_∞ ≈ u_R + A R^(2-N) (1 - u_R)`.
    pub amplitude: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    /// Sup of the fit residual between the two radii, on the common domain.
    pub fit_residual: f64,
}

/// Combine solutions truncated at `R1 < R2` into an estimate of the untruncated potential.
///
/// A truncated solution behaves like `(u_∞ - c_R) / (1 - c_R)` with
/// `c_R = A R^(2-N)`; `A` is fitted by least squares on the vertices free in
/// both solves. The result is defined inside the outer shell only.
pub fn extrapolate_far_field(
    space: &GraphSpace,
    inner: &ExteriorSolution,
    outer: &ExteriorSolution,
) -> Result<FarField> {
    let (r1, r2) = match (inner.r_out, outer.r_out) {
        (Some(a), Some(b)) if a < b => (a, b),
        _ => return Err(Error::param("extrapolation needs two increasing truncation radii")),
    };
    let n = space.len();
    let p = 2.0 - space.dim();
    let (a1, a2) = (r1.powf(p), r2.powf(p));
    let common: Vec<usize> = (0..n)
        .filter(|&x| !inner.shell[x] && !outer.shell[x])
        .filter(|&x| {
            let u = inner.field.value(x);
            u > 0.0 && u < 1.0
        })
        .collect();
    if common.is_empty() {
        return Err(Error::pre("no common free vertices for the far-field fit"));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &x in &common {
        let (u1, u2) = (inner.field.value(x), outer.field.value(x));
        let d = a1 * (1.0 - u1) - a2 * (1.0 - u2);
        num += (u2 - u1) * d;
        den += d * d;
    }
    if !(den > 0.0) {
        return Err(Error::pre("degenerate far-field fit"));
    }
    let a = num / den;
    let fit_residual = common
        .iter()
        .map(|&x| {
            let (u1, u2) = (inner.field.value(x), outer.field.value(x));
            ((u1 + a * a1 * (1.0 - u1)) - (u2 + a * a2 * (1.0 - u2))).abs()
        })
        .fold(0.0, f64::max);
    let values: Vec<f64> = (0..n)
        .map(|x| {
            let u = outer.field.value(x);
            u + a * a2 * (1.0 - u)
        })
        .collect();
    let mask: Vec<bool> = (0..n).map(|x| !outer.shell[x]).collect();
    Ok(FarField {
        field: Field::new(values, mask)?,
        amplitude: a,
        r_inner: r1,
        r_outer: r2,
        fit_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::laplacian;
    use crate::space::{build_lattice, build_path};

    #[test]
    fn path_exterior_is_linear() {
        let p = build_path(6).unwrap();
        let sol = solve_exterior(&p, &ExteriorSpec { omega_c: vec![0], r_out: None, center: None }, 1e-12)
            .unwrap();
        // Builder flags both ends; vertex 0 is held at one.
        for x in 0..6 {
            assert!((sol.field.value(x) - (1.0 - x as f64 / 5.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn lattice_exterior_is_harmonic_and_bounded() {
        let g = build_lattice(3, 3.0, 0.5).unwrap();
        let c = g.nearest_vertex(&[0.0; 3]).unwrap();
        let sol = solve_exterior(&g, &ExteriorSpec::new(vec![c], 2.6), 1e-12).unwrap();
        let lap = laplacian(&g, &sol.field);
        for x in 0..g.len() {
            let v = sol.field.value(x);
            assert!((0.0..=1.0 + 1e-12).contains(&v));
            if x != c && !sol.shell[x] && lap.defined(x) {
                assert!(lap.value(x).abs() < 1e-8);
            }
        }
        assert!(!sol.truncation_tight);
    }

    #[test]
    fn bad_exterior_inputs() {
        let g = build_path(4).unwrap();
        assert!(solve_exterior(&g, &ExteriorSpec::new(vec![], 2.0), 1e-8).is_err());
        assert!(solve_exterior(&g, &ExteriorSpec::new(vec![7], 2.0), 1e-8).is_err());
        assert!(solve_exterior(&g, &ExteriorSpec::new(vec![1], -1.0), 1e-8).is_err());
        assert!(radial_exterior(&RadialSpace::euclidean(2), 1.0, f64::INFINITY).is_err());
        assert!(radial_exterior(&RadialSpace::euclidean(3), 2.0, 1.0).is_err());
    }

    #[test]
    fn far_field_needs_increasing_radii() {
        let g = build_lattice(3, 3.0, 0.5).unwrap();
        let c = g.nearest_vertex(&[0.0; 3]).unwrap();
        let a = solve_exterior(&g, &ExteriorSpec::new(vec![c], 2.0), 1e-12).unwrap();
        let b = solve_exterior(&g, &ExteriorSpec::new(vec![c], 2.6), 1e-12).unwrap();
        assert!(extrapolate_far_field(&g, &b, &a).is_err());
        let far = extrapolate_far_field(&g, &a, &b).unwrap();
        assert!(far.amplitude > 0.0);
        // Lifting the truncated solution never lowers it.
        for (x, v) in far.field.iter() {
            assert!(v >= b.field.value(x) - 1e-12);
        }
    }
}
