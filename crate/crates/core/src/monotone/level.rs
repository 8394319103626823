use serde::Serialize;

use crate::calculus::gradient_norm;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::space::GraphSpace;

/// Below this, `|∇u|` is treated as vanishing.
pub const GRADIENT_FLOOR: f64 = 1e-12;

/// A field together with its vertex gradient norm, ready for level-set integrals.
#[derive(Debug, Clone)]
pub struct LevelData<'a> {
    pub(crate) space: &'a GraphSpace,
    pub(crate) u: &'a Field,
    pub(crate) grad: Field,
}

/// One edge crossing a level.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Crossing {
    pub weight: f64,
    pub length: f64,
    /// `|u(b) - u(a)|`.
    pub jump: f64,
    /// `|∇u|` at the crossing point, harmonically interpolated.
    pub grad: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoareaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_gap: f64,
}

impl<'a> LevelData<'a> {
    pub fn new(space: &'a GraphSpace, u: &'a Field) -> Result<Self> {
        let grad = gradient_norm(space, u);
        Self::with_gradient(space, u, grad)
    }

    /// Use a supplied representative of `|∇u|`.
    pub fn with_gradient(space: &'a GraphSpace, u: &'a Field, grad: Field) -> Result<Self> {
        if u.len() != space.len() || grad.len() != space.len() {
            return Err(Error::param("field length does not match the space"));
        }
        Ok(LevelData { space, u, grad })
    }

    pub fn gradient(&self) -> &Field {
        &self.grad
    }

    /// Range of `u` over vertices where the gradient is defined.
    pub fn range(&self) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, v) in self.u.iter() {
            if self.grad.defined(x) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if lo < hi {
            Ok((lo, hi))
        } else {
            Err(Error::pre("field has no resolved range"))
        }
    }

    pub(crate) fn check_level(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.range()?;
        if !(t > lo && t < hi) {
            return Err(Error::pre(format!("level {t} outside the open range ({lo}, {hi})")));
        }
        Ok(())
    }

    /// `{u < t}` over the defined vertices.
    pub fn level_set(&self, t: f64) -> Vec<usize> {
        self.u.iter().filter(|&(_, v)| v < t).map(|(x, _)| x).collect()
    }

    /// Edges with `u(a) < t <= u(b)`, both ends carrying a gradient.
    pub(crate) fn crossings(&self, t: f64) -> Vec<Crossing> {
        let mut out = Vec::new();
        for e in self.space.edges() {
            if !(self.grad.defined(e.a) && self.grad.defined(e.b)) {
                continue;
            }
            let (ua, ub) = (self.u.value(e.a), self.u.value(e.b));
            let (lo, hi, glo, ghi) = if ua < ub {
                (ua, ub, self.grad.value(e.a), self.grad.value(e.b))
            } else {
                (ub, ua, self.grad.value(e.b), self.grad.value(e.a))
            };
            if !(lo < t && t <= hi) {
                continue;
            }
            let theta = (t - lo) / (hi - lo);
            let grad = if glo > 0.0 && ghi > 0.0 {
                1.0 / ((1.0 - theta) / glo + theta / ghi)
            } else {
                0.0
            };
            out.push(Crossing {
                weight: e.weight,
                length: e.length,
                jump: hi - lo,
                grad,
            });
        }
        out
    }

    /// Perimeter of `{u < t}` from the flux through the cut edges.
    ///
    /// Each crossing contributes `w |Δu| / |∇u|`; on lattices this is the
    /// face area weighted by the normal component, so it does not inherit the
    /// staircase excess of a face count.
    pub fn perimeter(&self, t: f64) -> Result<f64> {
        self.check_level(t)?;
        Ok(self
            .crossings(t)
            .iter()
            .filter(|c| c.grad > GRADIENT_FLOOR)
            .map(|c| c.weight * c.jump / c.grad)
            .sum())
    }

    /// Plain `Σ w ℓ` over the cut edges (one `h^(N-1)` face per cut on lattices).
    pub fn face_perimeter(&self, t: f64) -> Result<f64> {
        self.check_level(t)?;
        Ok(self.crossings(t).iter().map(|c| c.weight * c.length).sum())
    }

    /// `∫_a^b perimeter(t) dt` against the same integral evaluated edge by edge.
    ///
    /// Along an edge `1/|∇u|` is affine in the crossing parameter, so the
    /// right side is exact; the left side uses trapezoids on `steps` levels.
    pub fn coarea_check(&self, a: f64, b: f64, steps: usize) -> Result<CoareaCheck> {
        self.check_level(a)?;
        self.check_level(b)?;
        if !(a < b) || steps < 2 {
            return Err(Error::param("coarea check needs a < b and at least 2 steps"));
        }
        let dt = (b - a) / steps as f64;
        let mut lhs = 0.0;
        for k in 0..=steps {
            let t = a + k as f64 * dt;
            let p = self.perimeter(t)?;
            lhs += if k == 0 || k == steps { 0.5 * p } else { p } * dt;
        }
        let mut rhs = 0.0;
        for e in self.space.edges() {
            if !(self.grad.defined(e.a) && self.grad.defined(e.b)) {
                continue;
            }
            let (ua, ub) = (self.u.value(e.a), self.u.value(e.b));
            let (lo, hi, glo, ghi) = if ua < ub {
                (ua, ub, self.grad.value(e.a), self.grad.value(e.b))
            } else {
                (ub, ua, self.grad.value(e.b), self.grad.value(e.a))
            };
            let (s0, s1) = (lo.max(a), hi.min(b));
            if !(s1 > s0) || glo <= GRADIENT_FLOOR || ghi <= GRADIENT_FLOOR {
                continue;
            }
            let th = |s: f64| (s - lo) / (hi - lo);
            let (p, q) = (th(s0), th(s1));
            // ∫ (1-θ)/g_lo + θ/g_hi dθ over [p, q], times dt/dθ = hi - lo
            let inv = (q - p) / glo + (q * q - p * p) / 2.0 * (1.0 / ghi - 1.0 / glo);
            rhs += e.weight * (hi - lo) * (hi - lo) * inv;
        }
        Ok(CoareaCheck {
            lhs,
            rhs,
            relative_gap: (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE),
        })
    }
}

/// `{u < t}`.
pub fn level_set(u: &Field, t: f64) -> Vec<usize> {
    u.iter().filter(|&(_, v)| v < t).map(|(x, _)| x).collect()
}

/// Flux perimeter of `{u < t}`.
pub fn perimeter(space: &GraphSpace, u: &Field, t: f64) -> Result<f64> {
    LevelData::new(space, u)?.perimeter(t)
}
