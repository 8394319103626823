//! Continuous gradient fields interpolated from vertex data.

use nalgebra::{DMatrix, DVector};

use crate::cone::cone_distance;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::space::{angle_between, ConeLayout, GraphSpace, GridLayout};

/// Multilinear interpolation of vertex values and central-difference gradients on a grid.
struct GridField<'a> {
    layout: &'a GridLayout,
    values: Vec<f64>,
    grads: Vec<Option<Vec<f64>>>,
}

/// Cone mesh: linear in `r` between shells, kernel-weighted across the cross-section.
struct ConeField<'a> {
    layout: &'a ConeLayout,
    dirs: Vec<Vec<f64>>,
    values: Vec<f64>,
    /// `(∂_r u, tangential gradient)` per vertex.
    grads: Vec<Option<(f64, Vec<f64>)>>,
    cross_scale: f64,
    lift: f64,
    support: f64,
}

enum Backend<'a> {
    Grid(GridField<'a>),
    Cone(ConeField<'a>),
}

/// `u` and `∇u` at arbitrary points of an embedded graph space.
pub struct GradientField<'a> {
    backend: Backend<'a>,
}

impl<'a> GradientField<'a> {
    /// Build from vertex values; undefined vertices make their cells unusable.
    pub fn new(space: &'a GraphSpace, u: &Field) -> Result<Self> {
        if u.len() != space.len() {
            return Err(Error::param("field length does not match the space"));
        }
        let backend = if let Some(g) = space.grid() {
            Backend::Grid(GridField::new(g, u))
        } else if let Some(c) = space.cone() {
            Backend::Cone(ConeField::new(space, c, u)?)
        } else {
            return Err(Error::pre("continuous flow needs a grid or cone layout"));
        };
        Ok(GradientField { backend })
    }

    /// Ambient dimension of the points.
    pub fn dim(&self) -> usize {
        match &self.backend {
            Backend::Grid(g) => g.layout.shape.len(),
            Backend::Cone(c) => c.dirs[0].len(),
        }
    }

    /// `(u, ∇u)` at `p`, `None` outside the resolved cells.
    pub fn sample(&self, p: &[f64]) -> Option<(f64, Vec<f64>)> {
        match &self.backend {
            Backend::Grid(g) => g.sample(p),
            Backend::Cone(c) => c.sample(p),
        }
    }

    pub fn value(&self, p: &[f64]) -> Option<f64> {
        self.sample(p).map(|s| s.0)
    }

    /// Nearest point of the underlying space (identity on grids).
    pub fn normalize(&self, p: &mut [f64]) {
        if let Backend::Cone(c) = &self.backend {
            c.normalize(p);
        }
    }

    /// Distance of the modelled continuum between two points.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        match &self.backend {
            Backend::Grid(g) => g.distance(p, q),
            Backend::Cone(c) => c.distance(p, q),
        }
    }
}

impl<'a> GridField<'a> {
    fn new(layout: &'a GridLayout, u: &Field) -> Self {
        let d = layout.shape.len();
        let n = u.len();
        let mut coords = vec![0usize; d];
        let mut grads = Vec::with_capacity(n);
        for x in 0..n {
            if !u.defined(x) {
                grads.push(None);
                continue;
            }
            layout.coords(x, &mut coords);
            let mut g = vec![0.0; d];
            let mut ok = true;
            for k in 0..d {
                let step = |delta: isize| -> Option<usize> {
                    let m = layout.shape[k] as isize;
                    let mut c = coords[k] as isize + delta;
                    if layout.periodic[k] {
                        c = c.rem_euclid(m);
                    } else if c < 0 || c >= m {
                        return None;
                    }
                    let mut cc = coords.clone();
                    cc[k] = c as usize;
                    let y = layout.index(&cc);
                    u.defined(y).then_some(y)
                };
                g[k] = match (step(-1), step(1)) {
                    (Some(a), Some(b)) => (u.value(b) - u.value(a)) / (2.0 * layout.h),
                    (None, Some(b)) => (u.value(b) - u.value(x)) / layout.h,
                    (Some(a), None) => (u.value(x) - u.value(a)) / layout.h,
                    (None, None) => {
                        ok = false;
                        0.0
                    }
                };
            }
            grads.push(ok.then_some(g));
        }
        GridField {
            layout,
            values: u.values().to_vec(),
            grads,
        }
    }

    fn sample(&self, p: &[f64]) -> Option<(f64, Vec<f64>)> {
        let l = self.layout;
        let d = l.shape.len();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for k in 0..d {
            let s = (p[k] - l.origin[k]) / l.h;
            let m = l.shape[k];
            if l.periodic[k] {
                let s = s.rem_euclid(m as f64);
                base[k] = (s.floor() as usize).min(m - 1);
                frac[k] = s - base[k] as f64;
            } else {
                if !(s >= 0.0 && s <= (m - 1) as f64) {
                    return None;
                }
                base[k] = (s.floor() as usize).min(m.saturating_sub(2));
                frac[k] = s - base[k] as f64;
            }
        }
        let mut value = 0.0;
        let mut grad = vec![0.0; d];
        let mut corner = vec![0usize; d];
        for code in 0..(1usize << d) {
            let mut w = 1.0;
            for k in 0..d {
                let bit = (code >> k) & 1;
                let mut c = base[k] + bit;
                if l.periodic[k] {
                    c %= l.shape[k];
                }
                corner[k] = c;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
            }
            if w == 0.0 {
                continue;
            }
            let x = l.index(&corner);
            let g = self.grads[x].as_ref()?;
            value += w * self.values[x];
            for k in 0..d {
                grad[k] += w * g[k];
            }
        }
        Some((value, grad))
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let l = self.layout;
        (0..p.len())
            .map(|k| {
                let mut dk = (p[k] - q[k]).abs();
                if l.periodic[k] {
                    let period = l.shape[k] as f64 * l.h;
                    dk = dk.rem_euclid(period);
                    dk = dk.min(period - dk);
                }
                dk * dk
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Wendland C² kernel on `[0, 1]`.
fn wendland(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - s).powi(4) * (4.0 * s + 1.0)
    }
}

impl<'a> ConeField<'a> {
    #[allow(clippy::needless_range_loop)]
    fn new(space: &GraphSpace, layout: &'a ConeLayout, u: &Field) -> Result<Self> {
        let m = layout.samples;
        let shells = layout.radii.len();
        let r0 = layout.radii[0];
        let mut dirs = Vec::with_capacity(m);
        for j in 0..m {
            let p = space
                .position(j)
                .ok_or_else(|| Error::pre("cone flow needs an embedded cross-section"))?;
            dirs.push(p.iter().map(|c| c / r0).collect::<Vec<f64>>());
        }
        let k = dirs[0].len();
        let cross_scale = norm(&dirs[0][..k - 1]);
        let lift = dirs[0][k - 1];
        let mut adj = vec![Vec::new(); m];
        for &(a, b, _) in &layout.cross_links {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut spacing: f64 = 0.0;
        for j in 0..m {
            let nearest = adj[j]
                .iter()
                .map(|&b| {
                    let d: Vec<f64> = dirs[b].iter().zip(&dirs[j]).map(|(x, y)| x - y).collect();
                    norm(&d)
                })
                .fold(f64::INFINITY, f64::min);
            if nearest.is_finite() {
                spacing = spacing.max(nearest);
            }
        }
        if !(spacing > 0.0) {
            return Err(Error::pre("cross-section has no links"));
        }
        let mut grads = Vec::with_capacity(shells * m);
        for i in 0..shells {
            let r = layout.radii[i];
            for j in 0..m {
                let x = i * m + j;
                if !u.defined(x) {
                    grads.push(None);
                    continue;
                }
                let radial = radial_derivative(&layout.radii, i, |ii| {
                    let y = ii * m + j;
                    u.defined(y).then(|| u.value(y))
                });
                let tangential = tangential_gradient(&dirs, &adj[j], j, r, |b| {
                    let y = i * m + b;
                    u.defined(y).then(|| u.value(y) - u.value(x))
                });
                grads.push(radial.zip(tangential));
            }
        }
        Ok(ConeField {
            layout,
            dirs,
            values: u.values().to_vec(),
            grads,
            cross_scale,
            lift,
            support: 1.5 * spacing,
        })
    }

    fn project_dir(&self, p: &[f64]) -> Option<(f64, Vec<f64>)> {
        let k = p.len();
        let r = norm(p);
        let c = norm(&p[..k - 1]);
        if !(r > 0.0 && c > 0.0) {
            return None;
        }
        let mut n: Vec<f64> = p[..k - 1].iter().map(|x| x * self.cross_scale / c).collect();
        n.push(self.lift);
        Some((r, n))
    }

    fn normalize(&self, p: &mut [f64]) {
        if let Some((r, n)) = self.project_dir(p) {
            for (a, b) in p.iter_mut().zip(&n) {
                *a = r * b;
            }
        }
    }

    fn sample(&self, p: &[f64]) -> Option<(f64, Vec<f64>)> {
        let radii = &self.layout.radii;
        let m = self.layout.samples;
        let (r, n) = self.project_dir(p)?;
        if !(r >= radii[0] && r <= *radii.last().unwrap()) {
            return None;
        }
        let i = radii.partition_point(|&s| s <= r).clamp(1, radii.len() - 1) - 1;
        let dr = radii[i + 1] - radii[i];
        let lam = (r - radii[i]) / dr;
        // Cubic Hermite in `r` for the value, linear for the gradient.
        let (l2, l3) = (lam * lam, lam * lam * lam);
        let hermite = [
            (2.0 * l3 - 3.0 * l2 + 1.0, (l3 - 2.0 * l2 + lam) * dr),
            (-2.0 * l3 + 3.0 * l2, (l3 - l2) * dr),
        ];
        let k = n.len();
        let mut wsum = 0.0;
        let mut value = 0.0;
        let mut radial = 0.0;
        let mut tangential = vec![0.0; k];
        for j in 0..m {
            let d: Vec<f64> = self.dirs[j].iter().zip(&n).map(|(x, y)| x - y).collect();
            let w = wendland(norm(&d) / self.support);
            if w == 0.0 {
                continue;
            }
            for (k, (shell, ws)) in [(i, 1.0 - lam), (i + 1, lam)].into_iter().enumerate() {
                let x = shell * m + j;
                let (gr, gt) = self.grads[x].as_ref()?;
                let (hv, hd) = hermite[k];
                value += w * (hv * self.values[x] + hd * gr);
                let wt = w * ws;
                radial += wt * gr;
                for c in 0..k {
                    tangential[c] += wt * gt[c];
                }
            }
            wsum += w;
        }
        if !(wsum > 0.0) {
            return None;
        }
        // Keep the tangential part orthogonal to the radial direction at `n`.
        let along = dot(&tangential, &n);
        let grad = (0..k)
            .map(|c| (radial * n[c] + tangential[c] - along * n[c]) / wsum)
            .collect();
        Some((value / wsum, grad))
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let (Some((r1, n1)), Some((r2, n2))) = (self.project_dir(p), self.project_dir(q)) else {
            return f64::NAN;
        };
        let k = n1.len();
        cone_distance(r1, r2, self.cross_scale * angle_between(&n1[..k - 1], &n2[..k - 1]))
    }
}

/// Three-point derivative along the shell index, exact on quadratics in `r`.
fn radial_derivative(radii: &[f64], i: usize, f: impl Fn(usize) -> Option<f64>) -> Option<f64> {
    let last = radii.len() - 1;
    let (a, b, c) = match i {
        0 => (0, 1, 2.min(last)),
        _ if i == last => (last.saturating_sub(2), last - 1, last),
        _ => (i - 1, i, i + 1),
    };
    let (fa, fb, fc) = (f(a)?, f(b)?, f(c)?);
    let (xa, xb, xc, x) = (radii[a], radii[b], radii[c], radii[i]);
    if a == c || b == c {
        return Some((fb - fa) / (xb - xa));
    }
    // Derivative of the Lagrange interpolant through three nodes.
    let la = (2.0 * x - xb - xc) / ((xa - xb) * (xa - xc));
    let lb = (2.0 * x - xa - xc) / ((xb - xa) * (xb - xc));
    let lc = (2.0 * x - xa - xb) / ((xc - xa) * (xc - xb));
    Some(fa * la + fb * lb + fc * lc)
}

/// Weighted least-squares gradient in the cross-section tangent plane at radius `r`.
fn tangential_gradient(
    dirs: &[Vec<f64>],
    nbrs: &[usize],
    j: usize,
    r: f64,
    diff: impl Fn(usize) -> Option<f64>,
) -> Option<Vec<f64>> {
    let k = dirs[j].len();
    let nj = &dirs[j];
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &b in nbrs {
        let du = diff(b)?;
        let mut d: Vec<f64> = dirs[b].iter().zip(nj).map(|(x, y)| r * (x - y)).collect();
        let along = dot(&d, nj);
        for c in 0..k {
            d[c] -= along * nj[c];
        }
        let w = 1.0 / dot(&d, &d).max(1e-300);
        let sw = w.sqrt();
        rows.extend(d.iter().map(|v| v * sw));
        rhs.push(du * sw);
    }
    if rhs.is_empty() {
        return Some(vec![0.0; k]);
    }
    let a = DMatrix::from_row_slice(rhs.len(), k, &rows);
    let b = DVector::from_vec(rhs);
    let g = a.svd(true, true).solve(&b, 1e-10).ok()?;
    Some(g.iter().copied().collect())
}
