//! Shortest-path distances, balls and volume profiles.
//!
//! Nearest-neighbour paths on a lattice measure the taxicab metric, so grid
//! and cone layouts add length-only shortcuts (a primitive stencil on grids,
//! exact cone chords on cone meshes). Shortcuts never enter the Laplacian.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use super::{GraphSpace, GridLayout};
use crate::cone::cone_distance;
use crate::error::{Error, Result};

const CACHE_SLOTS: usize = 24;

#[derive(Debug, Default)]
pub(crate) struct DistanceCache {
    maps: Mutex<HashMap<usize, Arc<DistanceMap>>>,
    cross_adj: OnceLock<Vec<Vec<(usize, f64)>>>,
}

/// Distances from one source, truncated at `cutoff`.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    pub source: usize,
    pub cutoff: f64,
    dist: Vec<f64>,
    /// Reached vertices sorted by distance.
    order: Vec<(f64, usize)>,
}

impl DistanceMap {
    /// Distance to `x`, infinite when beyond the cutoff or unreachable.
    pub fn get(&self, x: usize) -> f64 {
        self.dist[x]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    /// Reached vertices in increasing distance.
    pub fn sorted(&self) -> &[(f64, usize)] {
        &self.order
    }

    /// Vertices of the closed ball of radius `r`.
    pub fn ball(&self, r: f64) -> impl Iterator<Item = usize> + '_ {
        let k = self.order.partition_point(|&(d, _)| d <= r);
        self.order[..k].iter().map(|&(_, x)| x)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Primitive integer offsets with entries in `-r..=r` and their lengths.
pub(crate) fn grid_stencil(g: &GridLayout) -> Vec<(Vec<isize>, f64)> {
    let d = g.shape.len();
    let r: isize = if d <= 3 { 2 } else { 1 };
    let mut out = Vec::new();
    let side = (2 * r + 1) as usize;
    for code in 0..side.pow(d as u32) {
        let mut c = code;
        let mut off = vec![0isize; d];
        for o in off.iter_mut() {
            *o = (c % side) as isize - r;
            c /= side;
        }
        if off.iter().all(|&o| o == 0) {
            continue;
        }
        let gcd = off.iter().fold(0usize, |a, &o| gcd(a, o.unsigned_abs()));
        if gcd != 1 {
            continue;
        }
        let len = g.h * off.iter().map(|&o| (o * o) as f64).sum::<f64>().sqrt();
        out.push((off, len));
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl GraphSpace {
    fn cross_adjacency(&self) -> &[Vec<(usize, f64)>] {
        self.cache().cross_adj.get_or_init(|| match self.cone() {
            Some(c) => {
                let mut adj = vec![Vec::new(); c.samples];
                for &(j, k, dz) in &c.cross_links {
                    adj[j].push((k, dz));
                    adj[k].push((j, dz));
                }
                adj
            }
            None => Vec::new(),
        })
    }

    fn for_each_metric_neighbor(&self, x: usize, coords: &mut [usize], mut f: impl FnMut(usize, f64)) {
        for (y, _, l) in self.neighbors(x) {
            f(y, l);
        }
        if let Some(g) = self.grid() {
            g.coords(x, coords);
            'offsets: for (off, len) in self.stencil() {
                let mut idx = 0usize;
                for k in 0..coords.len() {
                    let n = g.shape[k] as isize;
                    let mut c = coords[k] as isize + off[k];
                    if g.periodic[k] {
                        c = c.rem_euclid(n);
                    } else if c < 0 || c >= n {
                        continue 'offsets;
                    }
                    idx = idx * g.shape[k] + c as usize;
                }
                f(idx, *len);
            }
        } else if let Some(c) = self.cone() {
            let (i, j) = (x / c.samples, x % c.samples);
            let adj = self.cross_adjacency();
            let t = c.radii[i];
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(c.radii.len() - 1);
            for i2 in lo..=hi {
                let s = c.radii[i2];
                if i2 != i {
                    f(i2 * c.samples + j, (t - s).abs());
                }
                for &(k, dz) in &adj[j] {
                    f(i2 * c.samples + k, cone_distance(t, s, dz));
                }
            }
        }
    }

    /// Dijkstra from `source`, exploring up to `cutoff` (uncached).
    pub fn distances_uncached(&self, source: usize, cutoff: f64) -> DistanceMap {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut order = Vec::new();
        let mut heap = BinaryHeap::new();
        let mut coords = vec![0usize; self.grid().map_or(0, |g| g.shape.len())];
        dist[source] = 0.0;
        heap.push(Item(0.0, source));
        while let Some(Item(d, x)) = heap.pop() {
            if done[x] {
                continue;
            }
            done[x] = true;
            order.push((d, x));
            self.for_each_metric_neighbor(x, &mut coords, |y, l| {
                let nd = d + l;
                if nd <= cutoff && nd < dist[y] {
                    dist[y] = nd;
                    heap.push(Item(nd, y));
                }
            });
        }
        DistanceMap {
            source,
            cutoff,
            dist,
            order,
        }
    }

    /// Dijkstra from `source` through vertices with `mask[x]` set only.
    pub fn distances_within(&self, source: usize, mask: &[bool]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.len()];
        if !mask[source] {
            return dist;
        }
        let mut done = vec![false; self.len()];
        let mut heap = BinaryHeap::new();
        let mut coords = vec![0usize; self.grid().map_or(0, |g| g.shape.len())];
        dist[source] = 0.0;
        heap.push(Item(0.0, source));
        while let Some(Item(d, x)) = heap.pop() {
            if done[x] {
                continue;
            }
            done[x] = true;
            self.for_each_metric_neighbor(x, &mut coords, |y, l| {
                let nd = d + l;
                if mask[y] && nd < dist[y] {
                    dist[y] = nd;
                    heap.push(Item(nd, y));
                }
            });
        }
        dist
    }

    /// Cached distances from `source` reaching at least `cutoff`.
    pub fn distances(&self, source: usize, cutoff: f64) -> Arc<DistanceMap> {
        if let Some(m) = self.cache().maps.lock().unwrap().get(&source) {
            if m.cutoff >= cutoff {
                return m.clone();
            }
        }
        let map = Arc::new(self.distances_uncached(source, cutoff));
        let mut guard = self.cache().maps.lock().unwrap();
        if guard.len() >= CACHE_SLOTS {
            let victim = *guard.keys().next().unwrap();
            guard.remove(&victim);
        }
        guard.insert(source, map.clone());
        map
    }

    /// Shortest-path distance, infinite when disconnected.
    pub fn geodesic_distance(&self, a: usize, b: usize) -> f64 {
        self.distances(a, f64::INFINITY).get(b)
    }

    /// Measure of the closed ball `B_r(center)`.
    pub fn ball_mass(&self, center: usize, r: f64) -> f64 {
        let map = self.distances(center, r);
        map.ball(r).map(|x| self.measure(x)).sum()
    }

    /// Distance from `center` to the nearest builder-flagged boundary vertex.
    pub fn safe_radius(&self, center: usize) -> f64 {
        let map = self.distances(center, f64::INFINITY);
        map.sorted()
            .iter()
            .find(|&&(_, x)| self.is_boundary(x))
            .map_or(f64::INFINITY, |&(d, _)| d)
    }

    /// Volume ratios `m(B_r)/r^N` on an increasing radius grid.
    pub fn bishop_gromov_profile(&self, center: usize, radii: &[f64]) -> Result<BallProfile> {
        if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
            return Err(Error::param("radius grid must be positive and increasing"));
        }
        let rmax = *radii.last().unwrap();
        let map = self.distances(center, rmax);
        let safe = self.safe_radius(center);
        let mut acc = 0.0;
        let mut k = 0;
        let sorted = map.sorted();
        let mut ratio = Vec::with_capacity(radii.len());
        let mut mass = Vec::with_capacity(radii.len());
        for &r in radii {
            while k < sorted.len() && sorted[k].0 <= r {
                acc += self.measure(sorted[k].1);
                k += 1;
            }
            mass.push(acc);
            ratio.push(acc / r.powf(self.dim()));
        }
        Ok(BallProfile {
            radii: radii.to_vec(),
            mass,
            ratio,
            safe_radius: safe,
            contaminated: radii.iter().map(|&r| r > safe).collect(),
        })
    }

    /// Profile value at the largest radius that stays clear of the boundary.
    pub fn avr_estimate(&self, center: usize) -> Result<f64> {
        let safe = self.safe_radius(center);
        if !safe.is_finite() {
            return Err(Error::pre("no boundary flagged; asymptotic ratio needs a finite safe radius"));
        }
        let r = 0.95 * safe;
        Ok(self.ball_mass(center, r) / r.powf(self.dim()))
    }
}

/// Ball masses and volume ratios on a radius grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BallProfile {
    pub radii: Vec<f64>,
    pub mass: Vec<f64>,
    pub ratio: Vec<f64>,
    pub safe_radius: f64,
    /// True where the ball reaches the patch boundary.
    pub contaminated: Vec<bool>,
}

#[cfg(test)]
mod tests {
    use crate::space::{build_cone, build_lattice, build_path, CrossSection};
    use std::f64::consts::PI;

    #[test]
    fn lattice_distance_is_close_to_euclidean() {
        let g = build_lattice(3, 4.0, 0.25).unwrap();
        let c = g.nearest_vertex(&[0.0; 3]).unwrap();
        let map = g.distances(c, 10.0);
        for p in [[3.0, 0.0, 0.0], [2.0, 2.0, 0.0], [1.5, 1.5, 1.5], [2.0, 1.0, 0.5]] {
            let y = g.nearest_vertex(&p).unwrap();
            let e = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((map.get(y) / e - 1.0).abs() < 0.03, "{p:?}: {}", map.get(y));
        }
        // Ball mass tracks the Euclidean volume up to the stencil's anisotropy.
        let m = g.ball_mass(c, 2.0);
        assert!((m / (4.0 / 3.0 * PI * 8.0) - 1.0).abs() < 0.1, "{m}");
    }

    #[test]
    fn cone_mesh_distance_matches_cone_metric() {
        let space = build_cone(3.0, &CrossSection::circle(3.0), 0.5, 4.0, 32).unwrap();
        let m = space.cone().unwrap().samples;
        let a = 10 * m;
        let b = 20 * m + m / 4;
        let (r1, r2) = (space.radius_of(a).unwrap(), space.radius_of(b).unwrap());
        let dz = 3.0 * (m / 4) as f64 / m as f64;
        let exact = (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * dz.cos()).sqrt();
        assert!((space.geodesic_distance(a, b) / exact - 1.0).abs() < 0.02);
    }

    #[test]
    fn masked_distances_and_safe_radius() {
        let p = build_path(6).unwrap();
        let mask = [true, true, false, true, true, true];
        let d = p.distances_within(0, &mask);
        assert_eq!(d[1], 1.0);
        assert!(d[3].is_infinite());
        assert_eq!(p.safe_radius(2), 2.0);
        assert_eq!(p.distances(1, 1.5).ball(1.0).count(), 3);
    }

    #[test]
    fn bishop_gromov_ratio_flags_boundary() {
        let g = build_lattice(2, 3.0, 0.25).unwrap();
        let c = g.nearest_vertex(&[0.0, 0.0]).unwrap();
        let prof = g.bishop_gromov_profile(c, &[1.0, 2.0, 4.0]).unwrap();
        assert!((prof.ratio[1] / PI - 1.0).abs() < 0.1);
        assert_eq!(prof.contaminated, vec![false, false, true]);
        assert!(g.bishop_gromov_profile(c, &[2.0, 1.0]).is_err());
    }
}
