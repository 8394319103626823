//! Cross-section samples for cone meshes.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use super::radial::angle_between;
use super::GraphSpace;
use crate::error::{Error, Result};

/// Cross-section `Z` of a cone `C(Z)`.
#[derive(Debug, Clone)]
pub enum CrossSection {
    /// Circle of total length `angle`, sampled uniformly.
    Circle { angle: f64, samples: usize },
    /// Round 2-sphere of radius `radius_factor`, icosphere of the given subdivision level.
    Sphere { radius_factor: f64, level: usize },
    /// Arbitrary weighted graph used as is.
    Graph(Box<GraphSpace>),
}

impl CrossSection {
    pub fn circle(angle: f64) -> Self {
        let samples = ((angle / (2.0 * PI)) * 64.0).ceil().max(8.0) as usize;
        CrossSection::Circle { angle, samples }
    }

    pub fn sphere(radius_factor: f64) -> Self {
        CrossSection::Sphere {
            radius_factor,
            level: 2,
        }
    }

    /// Total mass m_Z(Z) of the continuum cross-section, when known in closed form.
    pub fn mass(&self) -> f64 {
        match self {
            CrossSection::Circle { angle, .. } => *angle,
            CrossSection::Sphere { radius_factor, .. } => 4.0 * PI * radius_factor * radius_factor,
            CrossSection::Graph(g) => g.total_measure(),
        }
    }

    pub fn mesh(&self) -> Result<CrossSectionMesh> {
        match self {
            CrossSection::Circle { angle, samples } => circle_mesh(*angle, *samples),
            CrossSection::Sphere {
                radius_factor,
                level,
            } => sphere_mesh(*radius_factor, *level),
            CrossSection::Graph(g) => graph_mesh(g),
        }
    }
}

/// Discretized cross-section: measures, Laplacian weights and metric links.
#[derive(Debug, Clone)]
pub struct CrossSectionMesh {
    pub measures: Vec<f64>,
    /// `(j, k, weight, d_Z)` Laplacian edges.
    pub edges: Vec<(usize, usize, f64, f64)>,
    /// `(j, k, d_Z)` pairs used as metric shortcuts (includes the edges).
    pub links: Vec<(usize, usize, f64)>,
    /// Embedding of each sample; the cone embeds as `t * pos` when `lift` is `None`,
    /// otherwise as `(t * pos, t * lift)`.
    pub positions: Option<Vec<Vec<f64>>>,
    pub lift: Option<f64>,
    pub diameter: f64,
}

fn circle_mesh(angle: f64, samples: usize) -> Result<CrossSectionMesh> {
    if !(angle > 0.0 && angle <= 2.0 * PI + 1e-12) {
        return Err(Error::param("circle angle must lie in (0, 2π]"));
    }
    if samples < 3 {
        return Err(Error::param("circle needs at least 3 samples"));
    }
    let n = samples;
    let step = angle / n as f64;
    let dz = |j: usize, k: usize| {
        let a = (j as f64 - k as f64).abs() * step;
        a.min(angle - a)
    };
    let edges = (0..n).map(|j| (j, (j + 1) % n, 1.0 / step, step)).collect();
    let mut links = Vec::new();
    for j in 0..n {
        for hop in 1..=3.min(n / 2) {
            let k = (j + hop) % n;
            if hop * 2 == n && k < j {
                continue;
            }
            links.push((j, k, dz(j, k)));
        }
    }
    let a = angle / (2.0 * PI);
    let positions = (0..n)
        .map(|j| {
            let phi = j as f64 * step / a;
            vec![a * phi.cos(), a * phi.sin()]
        })
        .collect();
    Ok(CrossSectionMesh {
        measures: vec![step; n],
        edges,
        links,
        positions: Some(positions),
        lift: Some((1.0 - a * a).max(0.0).sqrt()),
        diameter: angle / 2.0,
    })
}

fn icosphere(level: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<[f64; 3]> = vec![
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let mut f: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let normalize = |a: [f64; 3]| {
        let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        [a[0] / n, a[1] / n, a[2] / n]
    };
    for x in v.iter_mut() {
        *x = normalize(*x);
    }
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(f.len() * 4);
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<[f64; 3]>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = [
                    (v[a][0] + v[b][0]) / 2.0,
                    (v[a][1] + v[b][1]) / 2.0,
                    (v[a][2] + v[b][2]) / 2.0,
                ];
                v.push(normalize(m));
                v.len() - 1
            })
        };
        for t in &f {
            let ab = midpoint(t[0], t[1], &mut v);
            let bc = midpoint(t[1], t[2], &mut v);
            let ca = midpoint(t[2], t[0], &mut v);
            next.push([t[0], ab, ca]);
            next.push([t[1], bc, ab]);
            next.push([t[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        f = next;
    }
    (v, f)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sphere_mesh(rho: f64, level: usize) -> Result<CrossSectionMesh> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::param("sphere radius factor must lie in (0, 1]"));
    }
    let (v, faces) = icosphere(level);
    let n = v.len();
    let mut area = vec![0.0; n];
    let mut w: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for t in &faces {
        let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
        let cr = cross(sub(b, a), sub(c, a));
        let tri = 0.5 * dot(cr, cr).sqrt();
        for &i in t {
            area[i] += tri / 3.0;
        }
        for k in 0..3 {
            let (i, j, o) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let (e1, e2) = (sub(v[i], v[o]), sub(v[j], v[o]));
            let c2 = cross(e1, e2);
            let cot = dot(e1, e2) / dot(c2, c2).sqrt();
            *w.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * cot;
        }
    }
    let total: f64 = area.iter().sum();
    let scale = 4.0 * PI * rho * rho / total;
    let measures = area.iter().map(|a| a * scale).collect();
    let gdist = |i: usize, j: usize| rho * angle_between(&v[i], &v[j]);
    let edges: Vec<_> = w.iter().map(|(&(i, j), &wt)| (i, j, wt, gdist(i, j))).collect();
    let mut nbr = vec![Vec::new(); n];
    for &(i, j, _, _) in &edges {
        nbr[i].push(j);
        nbr[j].push(i);
    }
    let links = two_ring_links(&nbr, gdist);
    Ok(CrossSectionMesh {
        measures,
        edges,
        links,
        positions: Some(v.iter().map(|p| vec![rho * p[0], rho * p[1], rho * p[2]]).collect()),
        lift: Some((1.0 - rho * rho).max(0.0).sqrt()),
        diameter: rho * PI,
    })
}

fn two_ring_links(nbr: &[Vec<usize>], d: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize, f64)> {
    let mut links = Vec::new();
    for j in 0..nbr.len() {
        let mut ring: Vec<usize> = nbr[j].clone();
        for &k in &nbr[j] {
            ring.extend(nbr[k].iter().copied());
        }
        ring.sort_unstable();
        ring.dedup();
        for k in ring {
            if k > j {
                links.push((j, k, d(j, k)));
            }
        }
    }
    links
}

fn graph_mesh(g: &GraphSpace) -> Result<CrossSectionMesh> {
    let n = g.len();
    let mut diameter: f64 = 0.0;
    let maps: Vec<_> = (0..n).map(|s| g.distances_uncached(s, f64::INFINITY)).collect();
    for m in &maps {
        diameter = diameter.max(m.distances().iter().cloned().fold(0.0, f64::max));
    }
    if diameter > PI + 1e-9 {
        return Err(Error::pre(format!(
            "cross-section diameter {diameter:.4} exceeds π"
        )));
    }
    let edges = g.edges().iter().map(|e| (e.a, e.b, e.weight, maps[e.a].get(e.b))).collect();
    let mut nbr = vec![Vec::new(); n];
    for e in g.edges() {
        nbr[e.a].push(e.b);
        nbr[e.b].push(e.a);
    }
    let links = two_ring_links(&nbr, |i, j| maps[i].get(j));
    Ok(CrossSectionMesh {
        measures: g.measures().to_vec(),
        edges,
        links,
        positions: None,
        lift: None,
        diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meshes_carry_the_continuum_mass() {
        for cs in [CrossSection::circle(3.0), CrossSection::sphere(0.8), CrossSection::sphere(1.0)] {
            let m = cs.mesh().unwrap();
            let total: f64 = m.measures.iter().sum();
            assert!((total / cs.mass() - 1.0).abs() < 1e-12, "{cs:?}");
        }
    }

    #[test]
    fn sphere_embedding_is_isometric_on_links() {
        let m = CrossSection::sphere(0.8).mesh().unwrap();
        let p = m.positions.as_ref().unwrap();
        for &(j, k, dz) in m.links.iter().take(200) {
            // Chord of the radius-0.8 sphere.
            let chord: f64 = p[j].iter().zip(&p[k]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!((chord - 2.0 * 0.8 * (dz / (2.0 * 0.8)).sin()).abs() < 1e-12);
        }
        assert!((m.diameter - 0.8 * PI).abs() < 1e-9);
    }

    #[test]
    fn bad_circle_is_rejected() {
        assert!(CrossSection::Circle { angle: 1.0, samples: 2 }.mesh().is_err());
        assert!(CrossSection::Circle { angle: 7.0, samples: 64 }.mesh().is_err());
    }
}
