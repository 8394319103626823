//! Generators for the canonical example spaces.

use super::{ConeLayout, CrossSection, Edge, GraphParts, GraphSpace, GridLayout, Layout};
use crate::cone::cone_distance;
use crate::error::{Error, Result};

/// Default cap on generated vertex counts.
pub const LATTICE_BUDGET: usize = 6_000_000;

fn grid_space(
    dim: f64,
    label: String,
    shape: Vec<usize>,
    h: f64,
    periodic: Vec<bool>,
    weight: f64,
    measure: f64,
) -> Result<GraphSpace> {
    let d = shape.len();
    let total: usize = shape.iter().product();
    if total > LATTICE_BUDGET {
        return Err(Error::BudgetExceeded {
            requested: total,
            budget: LATTICE_BUDGET,
        });
    }
    let origin: Vec<f64> = shape
        .iter()
        .zip(&periodic)
        .map(|(&n, &p)| if p { 0.0 } else { -((n - 1) as f64) * h / 2.0 })
        .collect();
    let layout = GridLayout {
        shape: shape.clone(),
        h,
        periodic: periodic.clone(),
        origin: origin.clone(),
    };
    let mut positions = Vec::with_capacity(total);
    let mut boundary = Vec::with_capacity(total);
    let mut edges = Vec::with_capacity(total * d);
    let mut c = vec![0usize; d];
    for idx in 0..total {
        layout.coords(idx, &mut c);
        positions.push((0..d).map(|k| origin[k] + c[k] as f64 * h).collect());
        boundary.push((0..d).any(|k| !periodic[k] && (c[k] == 0 || c[k] + 1 == shape[k])));
        for k in 0..d {
            let next = if c[k] + 1 < shape[k] {
                Some(c[k] + 1)
            } else if periodic[k] && shape[k] > 2 {
                Some(0)
            } else {
                None
            };
            if let Some(nk) = next {
                let mut c2 = c.clone();
                c2[k] = nk;
                edges.push(Edge {
                    a: idx,
                    b: layout.index(&c2),
                    weight,
                    length: h,
                });
            }
        }
    }
    GraphSpace::new(GraphParts {
        dim,
        label,
        positions,
        measures: vec![measure; total],
        edges,
        boundary,
        layout: Some(Layout::Grid(layout)),
    })
}

/// Cubic lattice patch `[-extent, extent]^N` with spacing `h`.
///
/// Weights `h^(N-2)`, measures `h^N` and lengths `h` make the graph Laplacian
/// consistent with the Euclidean one.
pub fn build_lattice(n: usize, extent: f64, h: f64) -> Result<GraphSpace> {
    if n < 2 {
        return Err(Error::param(format!("lattice dimension N = {n} < 2")));
    }
    if !(h > 0.0 && extent > 0.0 && h <= extent) {
        return Err(Error::param("lattice needs 0 < h <= extent"));
    }
    let side = (2.0 * extent / h).round() as usize + 1;
    let requested = (side as f64).powi(n as i32);
    if requested > LATTICE_BUDGET as f64 {
        return Err(Error::BudgetExceeded {
            requested: requested.min(usize::MAX as f64) as usize,
            budget: LATTICE_BUDGET,
        });
    }
    let nf = n as f64;
    grid_space(
        nf,
        format!("lattice-R{n}-e{extent}-h{h}"),
        vec![side; n],
        h,
        vec![false; n],
        h.powf(nf - 2.0),
        h.powf(nf),
    )
}

/// Flat cylinder `[-length/2, length/2] x S^1`, periodic in the second axis.
///
/// The circumference is rounded to a whole number of steps of `h`.
pub fn build_cylinder(circumference: f64, length: f64, h: f64) -> Result<GraphSpace> {
    if !(h > 0.0 && circumference > 0.0 && length > 0.0) {
        return Err(Error::param("cylinder parameters must be positive"));
    }
    if h > length {
        return Err(Error::param("cylinder step exceeds its length"));
    }
    let around = (circumference / h).round() as usize;
    if around < 3 {
        return Err(Error::param("cylinder circumference needs at least 3 steps"));
    }
    let along = (length / h).round() as usize + 1;
    grid_space(
        2.0,
        format!("cylinder-c{circumference}-l{length}-h{h}"),
        vec![along, around],
        h,
        vec![false, true],
        1.0,
        h * h,
    )
}

/// Path graph `0 - 1 - ... - (n-1)` with unit weights, lengths and measures.
pub fn build_path(n: usize) -> Result<GraphSpace> {
    if n < 2 {
        return Err(Error::param("path needs at least two vertices"));
    }
    let mut boundary = vec![false; n];
    boundary[0] = true;
    boundary[n - 1] = true;
    GraphSpace::new(GraphParts {
        dim: 1.0,
        label: format!("path-{n}"),
        positions: (0..n).map(|i| vec![i as f64]).collect(),
        measures: vec![1.0; n],
        edges: (0..n - 1)
            .map(|i| Edge {
                a: i,
                b: i + 1,
                weight: 1.0,
                length: 1.0,
            })
            .collect(),
        boundary,
        layout: None,
    })
}

/// `∫_a^b t^p dt`.
pub(crate) fn power_integral(a: f64, b: f64, p: f64) -> f64 {
    if (p + 1.0).abs() < 1e-14 {
        (b / a).ln()
    } else {
        (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
    }
}

/// Product mesh of geometric shells over a cross-section sample.
///
/// Vertex measures integrate `t^(N-1) dt` exactly over each radial cell, and the
/// radial conductances make `r^(2-N)` discretely harmonic.
pub fn build_cone(
    n: f64,
    cross: &CrossSection,
    r_min: f64,
    r_max: f64,
    radial_steps: usize,
) -> Result<GraphSpace> {
    if !(r_min > 0.0) {
        return Err(Error::param("cone needs rMin > 0"));
    }
    if !(r_max > r_min) {
        return Err(Error::param("cone needs rMin < rMax"));
    }
    if !(n >= 2.0) {
        return Err(Error::param("cone dimension N must be at least 2"));
    }
    if radial_steps < 2 {
        return Err(Error::param("cone needs at least 2 radial steps"));
    }
    let mesh = cross.mesh()?;
    if mesh.diameter > std::f64::consts::PI + 1e-9 {
        return Err(Error::pre(format!(
            "cross-section diameter {:.4} exceeds π",
            mesh.diameter
        )));
    }
    let q = (r_max / r_min).powf(1.0 / radial_steps as f64);
    let radii: Vec<f64> = (0..=radial_steps)
        .map(|i| if i == radial_steps { r_max } else { r_min * q.powi(i as i32) })
        .collect();
    let shells = radii.len();
    let cell = |i: usize| {
        let lo = if i == 0 { radii[0] } else { (radii[i - 1] * radii[i]).sqrt() };
        let hi = if i + 1 == shells { radii[i] } else { (radii[i] * radii[i + 1]).sqrt() };
        (lo, hi)
    };
    let m = mesh.measures.len();
    let total = shells * m;
    if total > LATTICE_BUDGET {
        return Err(Error::BudgetExceeded {
            requested: total,
            budget: LATTICE_BUDGET,
        });
    }
    let mut measures = Vec::with_capacity(total);
    let mut positions = Vec::new();
    let mut boundary = Vec::with_capacity(total);
    let mut edges = Vec::new();
    for i in 0..shells {
        let (lo, hi) = cell(i);
        let radial_mass = power_integral(lo, hi, n - 1.0);
        let tangential = power_integral(lo, hi, n - 3.0);
        let t = radii[i];
        for j in 0..m {
            let v = i * m + j;
            measures.push(mesh.measures[j] * radial_mass);
            boundary.push(i == 0 || i + 1 == shells);
            if let Some(p) = &mesh.positions {
                let mut x: Vec<f64> = p[j].iter().map(|c| t * c).collect();
                if let Some(l) = mesh.lift {
                    x.push(t * l);
                }
                positions.push(x);
            }
            if i + 1 < shells {
                let s = radii[i + 1];
                edges.push(Edge {
                    a: v,
                    b: v + m,
                    weight: mesh.measures[j] / power_integral(t, s, 1.0 - n),
                    length: s - t,
                });
            }
        }
        for &(j, k, wz, dz) in &mesh.edges {
            edges.push(Edge {
                a: i * m + j,
                b: i * m + k,
                weight: wz * tangential,
                length: cone_distance(t, t, dz),
            });
        }
    }
    let label = match cross {
        CrossSection::Circle { angle, .. } => format!("cone-N{n}-circle{angle:.4}"),
        CrossSection::Sphere { radius_factor, .. } => format!("cone-N{n}-sphere{radius_factor}"),
        CrossSection::Graph(g) => format!("cone-N{n}-over-{}", g.label()),
    };
    GraphSpace::new(GraphParts {
        dim: n,
        label,
        positions,
        measures,
        edges,
        boundary,
        layout: Some(Layout::Cone(ConeLayout {
            radii,
            samples: m,
            cross_links: mesh.links,
            cross_measure: mesh.measures,
        })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use std::f64::consts::PI;

    #[test]
    fn lattice_sizes_and_measure() {
        let g = build_lattice(3, 1.0, 1.0).unwrap();
        assert_eq!(g.len(), 27);
        assert_eq!(g.edges().len(), 54);
        // 33 vertices per side, h³ each.
        let g = build_lattice(3, 4.0, 0.25).unwrap();
        assert!((g.total_measure() - 33f64.powi(3) / 64.0).abs() < 1e-9);
        assert!(build_lattice(3, 1.0, 2.0).is_err());
        assert!(matches!(build_lattice(3, 100.0, 0.01), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn cylinder_wraps_around() {
        let c = build_cylinder(2.0, 3.0, 0.25).unwrap();
        // 8 around, 13 along; interior vertices all have degree 4.
        assert_eq!(c.len(), 8 * 13);
        let interior = (0..c.len()).filter(|&x| !c.is_boundary(x));
        assert!(interior.into_iter().all(|x| c.network().degree(x) == 4));
        assert!(build_cylinder(0.5, 3.0, 0.25).is_err());
    }

    #[test]
    fn cone_mass_and_harmonic_radial_power() {
        let cross = CrossSection::circle(3.0);
        let space = build_cone(3.0, &cross, 0.5, 4.0, 24).unwrap();
        // Shell cells integrate t² dt exactly.
        let expected = cross.mass() * (4f64.powi(3) - 0.5f64.powi(3)) / 3.0;
        assert!((space.total_measure() / expected - 1.0).abs() < 1e-12);
        let u = Field::from_fn(&space, |x| 1.0 / space.radius_of(x).unwrap());
        let lap = crate::calculus::laplacian(&space, &u);
        for x in (0..space.len()).filter(|&x| !space.is_boundary(x)) {
            assert!(lap.value(x).abs() < 1e-10, "{}", lap.value(x));
        }
    }

    #[test]
    fn cone_over_wide_circle_is_refused() {
        assert!(build_cone(3.0, &CrossSection::circle(2.0 * PI + 1.0), 0.5, 4.0, 8).is_err());
        assert!(build_cone(3.0, &CrossSection::sphere(0.8), 0.0, 4.0, 8).is_err());
    }

    #[test]
    fn power_integral_handles_log_case() {
        assert!((power_integral(1.0, 2.0, -1.0) - 2f64.ln()).abs() < 1e-15);
        assert!((power_integral(0.0, 3.0, 2.0) - 9.0).abs() < 1e-12);
    }
}
