use rayon::prelude::*;
use serde::Serialize;

use super::level::{LevelData, GRADIENT_FLOOR};
use crate::calculus::{gradient_inner, gradient_norm};
use crate::cone::{harmonic_exponent_constant, kappa};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::space::{RadialField, RadialSpace};

/// Floor applied to `u` before negative powers.
pub const U_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum UEstimator {
    /// Sum over the edges cut by the level.
    CutEdge,
    /// Hat-mollified volume integral through the coarea identity.
    Mollified,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MonotoneReport {
    pub beta: f64,
    pub t_grid: Vec<f64>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    /// Second estimator of `U`, used for the slack.
    #[serde(rename = "UMollified")]
    pub u_mollified: Vec<f64>,
    #[serde(rename = "UprimeFlux")]
    pub uprime_flux: Vec<f64>,
    #[serde(rename = "UprimeFd")]
    pub uprime_fd: Vec<f64>,
    pub lower_bound: Vec<f64>,
    pub monotone: bool,
    /// `t ↦ U'(t) t²` non-decreasing within slack.
    pub uprime_t2_monotone: bool,
    /// Lower bound respected gridwise within slack.
    pub lower_bound_holds: bool,
    pub slack: f64,
    /// Sup of `U` over the grid points in `(0, 1/2)`.
    pub sup_below_half: f64,
    /// Vertices dropped from the flux estimator because `u` or `|∇u|` vanished.
    pub excluded_vertices: usize,
}

fn check_beta(beta: f64, n: f64) -> Result<f64> {
    if !(beta > -2.0) {
        return Err(Error::param(format!("β = {beta} must exceed -2")));
    }
    if !(n > 2.0) {
        return Err(Error::param(format!("U_β needs N > 2 (got {n})")));
    }
    Ok(kappa(n))
}

/// `max(0, 1 - |s|/ε) / ε`.
fn hat(s: f64, eps: f64) -> f64 {
    (1.0 - s.abs() / eps).max(0.0) / eps
}

impl LevelData<'_> {
    fn dim(&self) -> f64 {
        self.space.dim()
    }

    /// Median `|Δu|` over the edges cut by `t`.
    fn level_resolution(&self, t: f64) -> f64 {
        let mut jumps: Vec<f64> = self.crossings(t).iter().map(|c| c.jump).collect();
        if jumps.is_empty() {
            return 0.0;
        }
        jumps.sort_by(f64::total_cmp);
        jumps[jumps.len() / 2]
    }

    fn check_eps(&self, t: f64, eps: f64) -> Result<()> {
        let res = self.level_resolution(t);
        if !(eps > 0.0) || eps < 0.5 * res {
            return Err(Error::pre(format!(
                "ε = {eps} below the grid resolution {res:.3e} at level {t}"
            )));
        }
        Ok(())
    }

    /// `U_β(t)`; `eps` is the mollifier half-width and is ignored by the cut-edge estimator.
    pub fn u_beta(&self, beta: f64, t: f64, estimator: UEstimator, eps: f64) -> Result<f64> {
        let k = check_beta(beta, self.dim())?;
        self.check_level(t)?;
        match estimator {
            UEstimator::CutEdge => {
                let s: f64 = self
                    .crossings(t)
                    .iter()
                    .filter(|c| c.grad > GRADIENT_FLOOR)
                    .map(|c| c.weight * c.jump * c.grad.powf(beta))
                    .sum();
                Ok(s * t.powf(-beta * k))
            }
            UEstimator::Mollified => {
                self.check_eps(t, eps)?;
                // The weight u^(-βκ) sits inside the integral so the mollifier
                // does not smear the t-power across the band.
                let s: f64 = self
                    .grad
                    .iter()
                    .map(|(x, g)| {
                        let ux = self.u.value(x);
                        let d = hat(ux - t, eps);
                        if d == 0.0 || ux < U_FLOOR {
                            return 0.0;
                        }
                        self.space.measure(x) * d * g.powf(beta + 2.0) * ux.powf(-beta * k)
                    })
                    .sum();
                Ok(s)
            }
        }
    }

    /// `g = |∇u|^β / u^(βκ)` where `u > 0` and `|∇u|` clears the floor.
    fn flux_weight(&self, beta: f64) -> Result<(Field, usize)> {
        let k = check_beta(beta, self.dim())?;
        let n = self.space.len();
        let mut values = vec![f64::NAN; n];
        let mut mask = vec![false; n];
        let mut excluded = 0;
        for (x, g) in self.grad.iter() {
            let ux = self.u.value(x);
            if g < GRADIENT_FLOOR || ux < U_FLOOR {
                excluded += 1;
                continue;
            }
            values[x] = g.powf(beta) / ux.powf(beta * k);
            mask[x] = true;
        }
        Ok((Field::new(values, mask)?, excluded))
    }

    /// Mollified `∫_{u=t} ⟨∇u/|∇u|, ∇g⟩ dPer`, and the count of vertices dropped for a vanishing gradient.
    pub fn u_beta_derivative(&self, beta: f64, t: f64, eps: f64) -> Result<(f64, usize)> {
        self.check_level(t)?;
        self.check_eps(t, eps)?;
        let (g, excluded) = self.flux_weight(beta)?;
        let inner = gradient_inner(self.space, self.u, &g);
        Ok((self.flux_sum(&inner, t, eps), excluded))
    }

    fn flux_sum(&self, inner: &Field, t: f64, eps: f64) -> f64 {
        inner
            .iter()
            .map(|(x, v)| self.space.measure(x) * hat(self.u.value(x) - t, eps) * v)
            .sum()
    }

    /// `(C_{β,N} / t²) Σ_{u<t} μ u² |∇(|∇v|^(β/2))|²` with `v = u^(1/(2-N))`.
    pub fn second_order_lower_bound(&self, beta: f64, t: f64) -> Result<f64> {
        let n = self.dim();
        if !(n > 2.0) {
            return Err(Error::param(format!("lower bound needs N > 2 (got {n})")));
        }
        let c = harmonic_exponent_constant(beta, n)?;
        if c == 0.0 {
            return Ok(0.0);
        }
        if c < 0.0 {
            return Err(Error::pre(format!(
                "β = {beta} below (N-2)/(N-1) = {}",
                (n - 2.0) / (n - 1.0)
            )));
        }
        // Builder-boundary vertices miss neighbours, which biases the second
        // difference; v is undefined where u vanishes.
        let v = self
            .u
            .restrict(|x| !self.space.is_boundary(x) && self.u.value(x) >= U_FLOOR)
            .map(|x| x.powf(1.0 / (2.0 - n)));
        let gv = gradient_norm(self.space, &v);
        let q = gv.map(|g| g.powf(beta / 2.0));
        let gq = gradient_norm(self.space, &q);
        let s: f64 = gq
            .iter()
            .filter(|&(x, _)| self.u.value(x) < t)
            .map(|(x, g)| {
                let ux = self.u.value(x);
                self.space.measure(x) * ux * ux * g * g
            })
            .sum();
        Ok(c / (t * t) * s)
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 5 {
        return Err(Error::pre(format!("t-grid too coarse: {} points, need 5", t_grid.len())));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid[0] <= 0.0 {
        return Err(Error::param("t-grid must be positive and strictly increasing"));
    }
    Ok(())
}

/// Centred differences, one-sided at the ends.
pub(crate) fn finite_difference(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let m = ts.len();
    (0..m)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
            (ys[b] - ys[a]) / (ts[b] - ts[a])
        })
        .collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    beta: f64,
    t_grid: &[f64],
    u: Vec<f64>,
    u_mollified: Vec<f64>,
    uprime_flux: Vec<f64>,
    lower_bound: Vec<f64>,
    excluded_vertices: usize,
    min_slack: f64,
) -> MonotoneReport {
    let uprime_fd = finite_difference(t_grid, &u);
    // Median rather than max: the mollified band clips the solved range at the grid ends.
    let gaps: Vec<f64> = u.iter().zip(&u_mollified).map(|(a, b)| (a - b).abs()).collect();
    let disagreement = median(&gaps);
    let slack = (0.02 * median(&u).abs()).max(10.0 * disagreement).max(min_slack);
    let monotone = u.windows(2).all(|w| w[1] >= w[0] - slack);
    let t2: Vec<f64> = uprime_flux.iter().zip(t_grid).map(|(d, t)| d * t * t).collect();
    let uprime_t2_monotone = t2.windows(2).all(|w| w[1] >= w[0] - slack);
    let lower_bound_holds = uprime_flux
        .iter()
        .zip(&uprime_fd)
        .zip(&lower_bound)
        .all(|((f, d), l)| *f >= l - slack && *d >= l - slack);
    let sup_below_half = t_grid
        .iter()
        .zip(&u)
        .filter(|(t, _)| **t < 0.5)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    MonotoneReport {
        beta,
        t_grid: t_grid.to_vec(),
        u,
        u_mollified,
        uprime_flux,
        uprime_fd,
        lower_bound,
        monotone,
        uprime_t2_monotone,
        lower_bound_holds,
        slack,
        sup_below_half,
        excluded_vertices,
    }
}

/// All estimators over `t_grid`, evaluated concurrently.
pub fn monotonicity_report(data: &LevelData<'_>, beta: f64, t_grid: &[f64]) -> Result<MonotoneReport> {
    check_grid(t_grid)?;
    check_beta(beta, data.dim())?;
    let spacing = t_grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let eps = 2.0 * spacing;
    let rows: Vec<(f64, f64, f64, usize, f64)> = t_grid
        .par_iter()
        .map(|&t| -> Result<_> {
            let cut = data.u_beta(beta, t, UEstimator::CutEdge, eps)?;
            let moll = data.u_beta(beta, t, UEstimator::Mollified, eps)?;
            let (flux, excl) = data.u_beta_derivative(beta, t, eps)?;
            let lower = if harmonic_exponent_constant(beta, data.dim()).is_ok_and(|c| c >= 0.0) {
                data.second_order_lower_bound(beta, t)?
            } else {
                f64::NEG_INFINITY
            };
            Ok((cut, moll, flux, excl, lower))
        })
        .collect::<Result<_>>()?;
    let excluded = rows.iter().map(|r| r.3).max().unwrap_or(0);
    Ok(assemble(
        beta,
        t_grid,
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| r.2).collect(),
        rows.iter().map(|r| r.4).collect(),
        excluded,
        0.0,
    ))
}

/// Radius bracket for inverting a radial field.
fn bracket(space: &RadialSpace) -> (f64, f64) {
    let lo = space.r_min.max(1e-9);
    let hi = if space.r_max.is_finite() { space.r_max } else { 1e9 };
    (lo, hi)
}

/// Exact `U_β(t) = t^(-βκ) m_Z r^(N-1) |u'(r)|^(β+1)` on the level radius.
pub fn u_beta_radial(space: &RadialSpace, u: &RadialField, beta: f64, t: f64) -> Result<f64> {
    let k = check_beta(beta, space.dim)?;
    let (lo, hi) = bracket(space);
    let r = u.invert(t, lo, hi)?;
    Ok(t.powf(-beta * k) * space.density(r) * u.d1(r).abs().powf(beta + 1.0))
}

/// Flux form of `U'_β` on the level radius, in closed form.
pub fn u_beta_derivative_radial(space: &RadialSpace, u: &RadialField, beta: f64, t: f64) -> Result<f64> {
    let k = check_beta(beta, space.dim)?;
    let (lo, hi) = bracket(space);
    let r = u.invert(t, lo, hi)?;
    let (v, d1, d2) = (u.value(r), u.d1(r), u.d2(r));
    if d1.abs() < GRADIENT_FLOOR {
        return Err(Error::pre("|∇u| vanishes on the level"));
    }
    // g = |u'|^β u^(-βκ); g' = β|u'|^(β-1) sgn(u') u'' u^(-βκ) - βκ |u'|^β u' u^(-βκ-1)
    let g1 = beta * d1.abs().powf(beta - 1.0) * d1.signum() * d2 * v.powf(-beta * k)
        - beta * k * d1.abs().powf(beta) * d1 * v.powf(-beta * k - 1.0);
    Ok(space.density(r) * d1.signum() * g1)
}

/// `(C_{β,N}/t²) ∫_{u<t} u² |(|v'|^(β/2))'|² dm`, `v = u^(1/(2-N))`, by composite Simpson in `log r`.
pub fn second_order_lower_bound_radial(space: &RadialSpace, u: &RadialField, beta: f64, t: f64) -> Result<f64> {
    let n = space.dim;
    if !(n > 2.0) {
        return Err(Error::param(format!("lower bound needs N > 2 (got {n})")));
    }
    let c = harmonic_exponent_constant(beta, n)?;
    if c == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = bracket(space);
    let rt = u.invert(t, lo, hi)?;
    let decreasing = u.d1(rt) < 0.0;
    let (a, b) = if decreasing { (rt, hi.min(rt * 1e6)) } else { (lo, rt) };
    let p = 1.0 / (2.0 - n);
    let integrand = |r: f64| {
        let (w, w1, w2) = (u.value(r), u.d1(r), u.d2(r));
        // v' = p u^(p-1) u', v'' = p (p-1) u^(p-2) u'² + p u^(p-1) u''
        let v1 = p * w.powf(p - 1.0) * w1;
        let v2 = p * (p - 1.0) * w.powf(p - 2.0) * w1 * w1 + p * w.powf(p - 1.0) * w2;
        let q1 = 0.5 * beta * v1.abs().powf(0.5 * beta - 1.0) * v1.signum() * v2;
        space.density(r) * w * w * q1 * q1
    };
    let panels = 4000;
    let (la, lb) = (a.ln(), b.ln());
    let h = (lb - la) / panels as f64;
    let mut s = 0.0;
    for i in 0..=panels {
        let x = la + i as f64 * h;
        let r = x.exp();
        let wgt = if i == 0 || i == panels { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        s += wgt * integrand(r) * r;
    }
    Ok(c / (t * t) * s * h / 3.0)
}

/// Report for an exact radial field.
pub fn monotonicity_report_radial(
    space: &RadialSpace,
    u: &RadialField,
    beta: f64,
    t_grid: &[f64],
) -> Result<MonotoneReport> {
    check_grid(t_grid)?;
    let mut vals = Vec::with_capacity(t_grid.len());
    let mut flux = Vec::with_capacity(t_grid.len());
    let mut lower = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        vals.push(u_beta_radial(space, u, beta, t)?);
        flux.push(u_beta_derivative_radial(space, u, beta, t)?);
        lower.push(if harmonic_exponent_constant(beta, space.dim).is_ok_and(|c| c >= 0.0) {
            second_order_lower_bound_radial(space, u, beta, t)?
        } else {
            f64::NEG_INFINITY
        });
    }
    let same = vals.clone();
    Ok(assemble(beta, t_grid, vals, same, flux, lower, 0, 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn euclidean_potential_gives_constant_functional() {
        let s = RadialSpace::euclidean(3);
        let u = RadialField::exterior_potential(3.0, 1.0, f64::INFINITY);
        for beta in [0.5, 1.0, 3.0] {
            for t in [0.1, 0.4, 0.9] {
                assert!((u_beta_radial(&s, &u, beta, t).unwrap() - 4.0 * PI).abs() < 1e-9);
                assert!(u_beta_derivative_radial(&s, &u, beta, t).unwrap().abs() < 1e-9);
                assert!(second_order_lower_bound_radial(&s, &u, beta, t).unwrap().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn radial_flux_matches_difference_quotient() {
        let s = RadialSpace::euclidean(3);
        let u = RadialField::exterior_potential(3.0, 1.0, 5.0);
        let (t, h) = (0.4, 1e-5);
        let fd = (u_beta_radial(&s, &u, 2.0, t + h).unwrap() - u_beta_radial(&s, &u, 2.0, t - h).unwrap())
            / (2.0 * h);
        let flux = u_beta_derivative_radial(&s, &u, 2.0, t).unwrap();
        assert!((fd - flux).abs() < 1e-5 * flux.abs().max(1.0), "{fd} {flux}");
    }

    #[test]
    fn grid_and_parameter_checks() {
        let s = RadialSpace::euclidean(3);
        let u = RadialField::exterior_potential(3.0, 1.0, f64::INFINITY);
        assert!(matches!(
            monotonicity_report_radial(&s, &u, 1.0, &[0.2, 0.4]),
            Err(Error::Precondition(_))
        ));
        assert!(monotonicity_report_radial(&s, &u, 1.0, &[0.5, 0.4, 0.3, 0.2, 0.1]).is_err());
        assert!(u_beta_radial(&s, &u, -3.0, 0.5).is_err());
        assert!(u_beta_radial(&RadialSpace::euclidean(2), &u, 1.0, 0.5).is_err());
        let rep = monotonicity_report_radial(&s, &u, 1.0, &[0.1, 0.3, 0.5, 0.7, 0.9]).unwrap();
        assert!(rep.monotone && rep.lower_bound_holds);
    }
}
