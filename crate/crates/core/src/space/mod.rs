//! Metric measure spaces: weighted graphs and radial model cones.

mod build;
mod cross;
pub mod io;
mod metric;
mod radial;

pub use build::{build_cone, build_cylinder, build_lattice, build_path, LATTICE_BUDGET};
pub use cross::{CrossSection, CrossSectionMesh};
pub use metric::{BallProfile, DistanceMap};
pub(crate) use radial::angle_between;
pub use radial::{ConePoint, RadialCross, RadialField, RadialSpace};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected weighted edge, stored once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub length: f64,
}

/// Compressed adjacency of a symmetric conductance network.
#[derive(Debug, Clone, Default)]
pub struct Network {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    lengths: Vec<f64>,
}

impl Network {
    pub fn from_edges(n: usize, edges: &[Edge]) -> Self {
        let mut degree = vec![0usize; n + 1];
        for e in edges {
            degree[e.a + 1] += 1;
            degree[e.b + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree.clone();
        let m = offsets[n];
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; m];
        let mut weights = vec![0.0; m];
        let mut lengths = vec![0.0; m];
        for e in edges {
            for (s, t) in [(e.a, e.b), (e.b, e.a)] {
                let k = fill[s];
                targets[k] = t as u32;
                weights[k] = e.weight;
                lengths[k] = e.length;
                fill[s] += 1;
            }
        }
        Network {
            offsets,
            targets,
            weights,
            lengths,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Neighbours of `x` as `(y, weight, length)`.
    #[inline]
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let r = self.offsets[x]..self.offsets[x + 1];
        self.targets[r.clone()]
            .iter()
            .zip(&self.weights[r.clone()])
            .zip(&self.lengths[r])
            .map(|((&y, &w), &l)| (y as usize, w, l))
    }

    #[inline]
    pub fn degree_weight(&self, x: usize) -> f64 {
        self.weights[self.offsets[x]..self.offsets[x + 1]].iter().sum()
    }

    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }
}

/// Regular grid bookkeeping, used for the metric stencil and flow interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub shape: Vec<usize>,
    pub h: f64,
    pub periodic: Vec<bool>,
    pub origin: Vec<f64>,
}

impl GridLayout {
    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&c, &s)| acc * s + c)
    }

    pub fn coords(&self, mut idx: usize, out: &mut [usize]) {
        for k in (0..self.shape.len()).rev() {
            out[k] = idx % self.shape[k];
            idx /= self.shape[k];
        }
    }
}

/// Product structure of a built cone mesh: vertex `i * samples + j` sits on
/// shell `radii[i]` above cross-section sample `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeLayout {
    pub radii: Vec<f64>,
    pub samples: usize,
    /// Cross-section pairs `(j, k, d_Z)` used as metric shortcuts.
    pub cross_links: Vec<(usize, usize, f64)>,
    pub cross_measure: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Layout {
    Grid(GridLayout),
    Cone(ConeLayout),
}

/// Weighted graph backend.
#[derive(Debug)]
pub struct GraphSpace {
    dim: f64,
    label: String,
    pos_dim: usize,
    positions: Vec<f64>,
    measures: Vec<f64>,
    edges: Vec<Edge>,
    boundary: Vec<bool>,
    layout: Option<Layout>,
    net: Network,
    stencil: Vec<(Vec<isize>, f64)>,
    cache: metric::DistanceCache,
}

impl Clone for GraphSpace {
    fn clone(&self) -> Self {
        GraphSpace {
            dim: self.dim,
            label: self.label.clone(),
            pos_dim: self.pos_dim,
            positions: self.positions.clone(),
            measures: self.measures.clone(),
            edges: self.edges.clone(),
            boundary: self.boundary.clone(),
            layout: self.layout.clone(),
            net: self.net.clone(),
            stencil: self.stencil.clone(),
            cache: metric::DistanceCache::default(),
        }
    }
}

/// Raw parts of a graph space, validated by [`GraphSpace::new`].
#[derive(Debug, Clone, Default)]
pub struct GraphParts {
    pub dim: f64,
    pub label: String,
    /// One position per vertex, all of the same length, or empty.
    pub positions: Vec<Vec<f64>>,
    pub measures: Vec<f64>,
    pub edges: Vec<Edge>,
    pub boundary: Vec<bool>,
    pub layout: Option<Layout>,
}

impl GraphSpace {
    pub fn new(parts: GraphParts) -> Result<Self> {
        let n = parts.measures.len();
        if n == 0 {
            return Err(Error::Malformed("graph has no vertices".into()));
        }
        if !(parts.dim >= 1.0) {
            return Err(Error::param(format!("dimension N = {} < 1", parts.dim)));
        }
        if let Some(i) = parts.measures.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::Malformed(format!("vertex {i} has non-positive measure")));
        }
        for e in &parts.edges {
            if e.a >= n || e.b >= n || e.a == e.b {
                return Err(Error::Malformed(format!("bad edge {}-{}", e.a, e.b)));
            }
            if !(e.weight > 0.0 && e.length > 0.0 && e.weight.is_finite() && e.length.is_finite())
            {
                return Err(Error::Malformed(format!(
                    "edge {}-{} needs positive weight and length",
                    e.a, e.b
                )));
            }
        }
        let pos_dim = parts.positions.first().map_or(0, Vec::len);
        if !parts.positions.is_empty()
            && (parts.positions.len() != n || parts.positions.iter().any(|p| p.len() != pos_dim))
        {
            return Err(Error::Malformed("inconsistent vertex positions".into()));
        }
        let boundary = if parts.boundary.is_empty() {
            vec![false; n]
        } else if parts.boundary.len() == n {
            parts.boundary
        } else {
            return Err(Error::Malformed("boundary flags length mismatch".into()));
        };
        let net = Network::from_edges(n, &parts.edges);
        let stencil = match &parts.layout {
            Some(Layout::Grid(g)) => {
                if g.shape.iter().product::<usize>() != n {
                    return Err(Error::Malformed("grid layout does not match vertex count".into()));
                }
                metric::grid_stencil(g)
            }
            Some(Layout::Cone(c)) => {
                if c.radii.len() * c.samples != n {
                    return Err(Error::Malformed("cone layout does not match vertex count".into()));
                }
                Vec::new()
            }
            None => Vec::new(),
        };
        let space = GraphSpace {
            dim: parts.dim,
            label: parts.label,
            pos_dim,
            positions: parts.positions.into_iter().flatten().collect(),
            measures: parts.measures,
            edges: parts.edges,
            boundary,
            layout: parts.layout,
            net,
            stencil,
            cache: metric::DistanceCache::default(),
        };
        if !space.is_connected() {
            return Err(Error::Malformed("graph is not connected".into()));
        }
        Ok(space)
    }

    fn is_connected(&self) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for (y, _, _) in self.net.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }

    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    /// Dimension parameter N.
    pub fn dim(&self) -> f64 {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn measure(&self, x: usize) -> f64 {
        self.measures[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.net.neighbors(x)
    }

    /// Builder-flagged outer boundary (patch faces, cone end shells, path ends).
    pub fn is_boundary(&self, x: usize) -> bool {
        self.boundary[x]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn position(&self, x: usize) -> Option<&[f64]> {
        (self.pos_dim > 0).then(|| &self.positions[x * self.pos_dim..(x + 1) * self.pos_dim])
    }

    pub fn position_dim(&self) -> usize {
        self.pos_dim
    }

    pub fn layout(&self) -> Option<&Layout> {
        self.layout.as_ref()
    }

    pub fn grid(&self) -> Option<&GridLayout> {
        match &self.layout {
            Some(Layout::Grid(g)) => Some(g),
            _ => None,
        }
    }

    pub fn cone(&self) -> Option<&ConeLayout> {
        match &self.layout {
            Some(Layout::Cone(c)) => Some(c),
            _ => None,
        }
    }

    /// Euclidean norm of the stored position, if any.
    pub fn radius_of(&self, x: usize) -> Option<f64> {
        if let Some(c) = self.cone() {
            return Some(c.radii[x / c.samples]);
        }
        self.position(x).map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// Vertex closest to a point, by stored positions.
    pub fn nearest_vertex(&self, p: &[f64]) -> Option<usize> {
        if self.pos_dim != p.len() {
            return None;
        }
        (0..self.len()).min_by(|&a, &b| {
            let da = dist2(self.position(a).unwrap(), p);
            let db = dist2(self.position(b).unwrap(), p);
            da.total_cmp(&db)
        })
    }

    /// Vertices whose position satisfies a predicate.
    pub fn select(&self, pred: impl Fn(&[f64]) -> bool) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| self.position(x).is_some_and(&pred))
            .collect()
    }

    /// A copy with each vertex measure multiplied by `factor(x)`.
    pub fn with_scaled_measures(&self, label: &str, factor: impl Fn(usize) -> f64) -> Result<Self> {
        let mut s = self.clone();
        for (x, m) in s.measures.iter_mut().enumerate() {
            *m *= factor(x);
            if !(*m > 0.0) {
                return Err(Error::param("scaled measure must stay positive"));
            }
        }
        s.label = label.to_string();
        Ok(s)
    }

    pub(crate) fn stencil(&self) -> &[(Vec<isize>, f64)] {
        &self.stencil
    }

    pub(crate) fn cache(&self) -> &metric::DistanceCache {
        &self.cache
    }

    pub(crate) fn parts(&self) -> GraphParts {
        GraphParts {
            dim: self.dim,
            label: self.label.clone(),
            positions: (0..self.len())
                .filter_map(|x| self.position(x).map(<[f64]>::to_vec))
                .collect(),
            measures: self.measures.clone(),
            edges: self.edges.clone(),
            boundary: self.boundary.clone(),
            layout: self.layout.clone(),
        }
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Either backend.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Space {
    Graph(GraphSpace),
    Radial(RadialSpace),
}

impl Space {
    pub fn dim(&self) -> f64 {
        match self {
            Space::Graph(g) => g.dim(),
            Space::Radial(r) => r.dim,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Space::Graph(g) => g.label(),
            Space::Radial(r) => &r.label,
        }
    }

    pub fn as_graph(&self) -> Result<&GraphSpace> {
        match self {
            Space::Graph(g) => Ok(g),
            Space::Radial(_) => Err(Error::param("operation needs a graph backend")),
        }
    }
}
