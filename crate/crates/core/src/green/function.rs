use serde::Serialize;
use statrs::function::gamma::{gamma, gamma_lr};

use super::heat::{Expansion, HeatKernelEngine};
use crate::error::{Error, Result};
use crate::field::{indicator, Field};
use crate::linalg::{scaled_residual, solve_dirichlet, SolveStats};
use crate::space::GraphSpace;

/// Green function with a Dirichlet shell.
#[derive(Debug, Clone)]
pub struct ShellGreen {
    pub field: Field,
    pub pole: usize,
    pub radius: Option<f64>,
    pub shell: Vec<bool>,
    pub stats: SolveStats,
    /// `R^(2-N) / ((N-2) |S^(N-1)|)`: the value the free Green function keeps at the shell.
    pub shell_offset: f64,
}

fn unit_sphere_area(n: f64) -> f64 {
    // 2 π^(n/2) / Γ(n/2), with Γ on half-integers and integers done by recursion.
    let half = n / 2.0;
    let mut g = if (half - half.round()).abs() < 1e-12 {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    let mut a = if g == 1.0 { 1.0 } else { 0.5 };
    while a < half - 1e-12 {
        g *= a;
        a += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(half) / g
}

/// Solve `Σ_y w_xy (G(y) - G(x)) = -[x = pole]` with `G = 0` on the shell.
///
/// The shell holds the builder-flagged vertices and, when `radius` is given,
/// every vertex at distance at least `radius` from the pole.
pub fn shell_green(space: &GraphSpace, pole: usize, radius: Option<f64>, tol: f64) -> Result<ShellGreen> {
    let n = space.len();
    if pole >= n {
        return Err(Error::param(format!("pole {pole} out of range")));
    }
    let shell: Vec<bool> = match radius {
        Some(r) => {
            if !(r > 0.0) {
                return Err(Error::param("shell radius must be positive"));
            }
            let map = space.distances(pole, r);
            (0..n).map(|x| space.is_boundary(x) || map.get(x) >= r).collect()
        }
        None => space.boundary_flags().to_vec(),
    };
    if shell[pole] {
        return Err(Error::pre("pole lies on the shell"));
    }
    if !shell.iter().any(|&s| s) {
        return Err(Error::pre("no Dirichlet shell: a finite graph without one has no Green function"));
    }
    let mut values = vec![0.0; n];
    let mut source = vec![0.0; n];
    source[pole] = 1.0;
    let stats = solve_dirichlet(space.network(), &shell, &mut values, Some(&source), tol, 40 * n + 1000)?;
    let dim = space.dim();
    let shell_offset = match radius {
        Some(r) if dim > 2.0 => r.powf(2.0 - dim) / ((dim - 2.0) * unit_sphere_area(dim)),
        _ => 0.0,
    };
    Ok(ShellGreen {
        field: Field::full(values),
        pole,
        radius,
        shell,
        stats,
        shell_offset,
    })
}

/// Max scaled residual of the Green equation off the pole and the shell.
pub fn green_harmonic_residual(space: &GraphSpace, g: &ShellGreen) -> f64 {
    let at: Vec<usize> = (0..space.len()).filter(|&x| !g.shell[x] && x != g.pole).collect();
    scaled_residual(space.network(), &at, g.field.values(), None)
}

/// `∫ p_t(x, ·) dt` over a finite window.
#[derive(Debug, Clone)]
pub struct TimeIntegral {
    pub field: Field,
    pub t_min: f64,
    pub t_max: f64,
    /// `∫_{t_max}^∞ (4πt)^(-N/2) exp(-d²/4t) dt` per vertex, `d` the distance to the pole.
    pub free_tail: Field,
    /// `1 / m(X)`: rate at which the integral keeps growing on a finite graph.
    pub equilibrium_rate: f64,
    pub evaluations: usize,
}

impl TimeIntegral {
    /// Window integral plus the free-space tail.
    pub fn corrected(&self) -> Field {
        let values = (0..self.field.len())
            .map(|y| self.field.value(y) + self.free_tail.value(y))
            .collect();
        Field::full(values)
    }
}

struct Simpson<'a> {
    exp: &'a Expansion,
    tol: f64,
    evaluations: usize,
}

impl Simpson<'_> {
    /// Integrand in `τ = log t`: `e^τ c(e^τ)`.
    fn eval(&mut self, tau: f64) -> Vec<f64> {
        self.evaluations += 1;
        let t = tau.exp();
        let mut w = self.exp.weights(t);
        for v in w.iter_mut() {
            *v *= t;
        }
        w
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        a: f64,
        b: f64,
        fa: &[f64],
        fm: &[f64],
        fb: &[f64],
        whole: &[f64],
        tol: f64,
        depth: usize,
    ) -> Result<Vec<f64>> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let simpson = |fa: &[f64], fm: &[f64], fb: &[f64], h: f64| -> Vec<f64> {
            (0..fa.len()).map(|k| h / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k])).collect()
        };
        let left = simpson(fa, &flm, fm, m - a);
        let right = simpson(fm, &frm, fb, b - m);
        let err = (0..whole.len())
            .map(|k| (left[k] + right[k] - whole[k]).abs())
            .fold(0.0, f64::max);
        let combined: Vec<f64> = (0..whole.len())
            .map(|k| left[k] + right[k] + (left[k] + right[k] - whole[k]) / 15.0)
            .collect();
        if err <= 15.0 * tol {
            return Ok(combined);
        }
        if depth >= 40 {
            return Err(Error::NonConvergence {
                iterations: self.evaluations,
                residual: err,
            });
        }
        let l = self.step(a, m, fa, &flm, fm, &left, tol / 2.0, depth + 1)?;
        let r = self.step(m, b, fm, &frm, fb, &right, tol / 2.0, depth + 1)?;
        Ok(l.iter().zip(&r).map(|(p, q)| p + q).collect())
    }

    fn integrate(&mut self, ta: f64, tb: f64) -> Result<Vec<f64>> {
        let (a, b) = (ta.ln(), tb.ln());
        // Split into unit τ-panels so the narrow peak cannot hide between samples.
        let panels = ((b - a).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        let mut total = vec![0.0; self.exp.dim()];
        for p in 0..panels {
            let (lo, hi) = (a + p as f64 * h, a + (p + 1) as f64 * h);
            let fa = self.eval(lo);
            let fm = self.eval(0.5 * (lo + hi));
            let fb = self.eval(hi);
            let whole: Vec<f64> = (0..fa.len()).map(|k| h / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k])).collect();
            let part = self.step(lo, hi, &fa, &fm, &fb, &whole, self.tol / panels as f64, 0)?;
            for (t, v) in total.iter_mut().zip(part) {
                *t += v;
            }
        }
        Ok(total)
    }
}

/// `∫_T^∞ (4πt)^(-n/2) exp(-d²/4t) dt`.
pub(crate) fn gaussian_tail(n: f64, d: f64, t_max: f64) -> f64 {
    if n <= 2.0 {
        return f64::INFINITY;
    }
    let a = n / 2.0 - 1.0;
    let c = (4.0 * std::f64::consts::PI).powf(-n / 2.0);
    let x = d * d / (4.0 * t_max);
    if x < 1e-300 {
        return c * t_max.powf(-a) / a;
    }
    // Substituting s = d²/4t turns the tail into a lower incomplete gamma.
    c * (d * d / 4.0).powf(-a) * gamma(a) * gamma_lr(a, x)
}

fn window(engine: &HeatKernelEngine<'_>, x: usize, pieces: &[(f64, f64)], t_max: f64, tol: f64) -> Result<TimeIntegral> {
    let exp = engine.expansion(x, t_max)?;
    let mut s = Simpson {
        exp: &exp,
        tol,
        evaluations: 0,
    };
    let mut coef = vec![0.0; exp.dim()];
    for &(a, b) in pieces {
        for (c, v) in coef.iter_mut().zip(s.integrate(a, b)?) {
            *c += v;
        }
    }
    let values = exp.synthesize(&coef);
    let space = engine.space();
    Ok(TimeIntegral {
        field: Field::full(values),
        t_min: pieces[0].0,
        t_max,
        free_tail: {
            let map = space.distances(x, f64::INFINITY);
            Field::full((0..space.len()).map(|y| gaussian_tail(space.dim(), map.get(y), t_max)).collect())
        },
        equilibrium_rate: 1.0 / space.total_measure(),
        evaluations: s.evaluations,
    })
}

/// `∫_0^{t_max} p_t(x, ·) dt`, with the quadrature split at `t_split`.
pub fn green_function(engine: &HeatKernelEngine<'_>, x: usize, t_split: f64, t_max: f64) -> Result<TimeIntegral> {
    if !(t_split > 0.0 && t_split < t_max) {
        return Err(Error::param("need 0 < tSplit < tMax"));
    }
    // Below t_split·e^-40 the integrand is at most that width times 1/μ(x).
    let t0 = t_split * (-40f64).exp();
    window(engine, x, &[(t0, t_split), (t_split, t_max)], t_max, 1e-10)
}

/// `∫_ε^{t_max} p_t(x, ·) dt`.
pub fn quasi_green(engine: &HeatKernelEngine<'_>, x: usize, eps: f64, t_max: f64) -> Result<TimeIntegral> {
    if !(eps > 0.0 && eps < t_max) {
        return Err(Error::param("need 0 < ε < tMax"));
    }
    window(engine, x, &[(eps, t_max)], t_max, 1e-10)
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenExterior {
    #[serde(skip)]
    pub field: Field,
    pub lambda: f64,
    /// Max scaled residual of `L(λG) = 0` on `Ω` away from the pole.
    pub harmonic_residual: f64,
    /// `min over ∂Ω` of `λG`; equals 1 by construction.
    pub boundary_min: f64,
    /// Largest `λG` on vertices adjacent to the shell.
    pub outer_max: f64,
}

/// Scale `G` by `(min_{∂Ω} G)^(-1)`, where `∂Ω` is the set of `Ω^c` vertices adjacent to `Ω`.
pub fn green_as_exterior_solution(space: &GraphSpace, g: &ShellGreen, omega_c: &[usize]) -> Result<GreenExterior> {
    let n = space.len();
    let inside = indicator(n, omega_c);
    if !inside[g.pole] {
        return Err(Error::pre("pole must lie in Ω^c"));
    }
    let boundary: Vec<usize> = omega_c
        .iter()
        .copied()
        .filter(|&x| space.neighbors(x).any(|(y, _, _)| !inside[y]))
        .collect();
    if boundary.is_empty() {
        return Err(Error::pre("Ω^c has no boundary vertices"));
    }
    let gmin = boundary.iter().map(|&x| g.field.value(x)).fold(f64::INFINITY, f64::min);
    if !(gmin > 0.0) {
        return Err(Error::pre("G is not positive on ∂Ω"));
    }
    let lambda = 1.0 / gmin;
    let field = g.field.map(|v| lambda * v);
    let omega: Vec<usize> = (0..n).filter(|&x| !inside[x] && !g.shell[x]).collect();
    let harmonic_residual = scaled_residual(space.network(), &omega, field.values(), None);
    let outer_max = (0..n)
        .filter(|&x| !g.shell[x] && space.neighbors(x).any(|(y, _, _)| g.shell[y]))
        .map(|x| field.value(x))
        .fold(0.0, f64::max);
    Ok(GreenExterior {
        boundary_min: boundary.iter().map(|&x| field.value(x)).fold(f64::INFINITY, f64::min),
        field,
        lambda,
        harmonic_residual,
        outer_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_path;

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2.0) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_sphere_area(3.0) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_sphere_area(4.0) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn path_green_is_tent() {
        // Pole in the middle of a unit path with both ends grounded: G = distance to the far end / 2.
        let s = build_path(5).unwrap();
        let g = shell_green(&s, 2, None, 1e-12).unwrap();
        let v = g.field.values();
        assert!((v[2] - 1.0).abs() < 1e-10 && (v[1] - 0.5).abs() < 1e-10);
        assert!(green_harmonic_residual(&s, &g) < 1e-10);
    }

    #[test]
    fn window_integral_matches_closed_form_on_path() {
        // On the two-vertex path, p_t(0,0) = (1 + e^{-2t}) / 2.
        let s = build_path(2).unwrap();
        let eng = HeatKernelEngine::new(&s);
        let q = quasi_green(&eng, 0, 0.1, 2.0).unwrap();
        let exact = 0.5 * 1.9 + 0.25 * ((-0.2f64).exp() - (-4.0f64).exp());
        assert!((q.field.value(0) - exact).abs() < 1e-9);
    }

    #[test]
    fn gaussian_tail_closed_form_in_three_dimensions() {
        // ∫_T^∞ (4πt)^(-3/2) e^(-d²/4t) dt = erf(d / 2√T) / (4πd)
        let (d, t) = (2.0f64, 3.0f64);
        let exact = statrs::function::erf::erf(d / (2.0 * t.sqrt())) / (4.0 * std::f64::consts::PI * d);
        assert!((gaussian_tail(3.0, d, t) / exact - 1.0).abs() < 1e-9);
        let at_pole = (4.0 * std::f64::consts::PI).powf(-1.5) * 2.0 / t.sqrt();
        assert!((gaussian_tail(3.0, 0.0, t) - at_pole).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_windows() {
        let s = build_path(3).unwrap();
        let eng = HeatKernelEngine::new(&s);
        assert!(green_function(&eng, 0, 2.0, 1.0).is_err());
        assert!(quasi_green(&eng, 0, 0.0, 1.0).is_err());
    }
}
