//! Adaptive Runge-Kutta integration of `ẋ = -∇u`.

use std::cell::Cell;

use nalgebra::DVector;
use ode_solvers::dop_shared::{IntegrationError, OutputType, System};
use ode_solvers::Dopri5;
use serde::Serialize;

use super::FlowField;
use crate::error::{Error, Result};
use crate::space::io::fmt_num;

/// Below this gradient norm the flow is considered stalled.
pub const STAGNATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowStatus {
    Completed,
    /// Left the region where the field is resolved, or crossed a level bound.
    Exited,
    Stagnated,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Stop when `u` leaves `[lo, hi]`, locating the crossing.
    pub level_bounds: Option<(f64, f64)>,
    pub max_steps: u32,
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        FlowOptions {
            rtol: tol,
            atol: tol,
            level_bounds: None,
            max_steps: 200_000,
        }
    }

    /// Default for interpolated graph fields.
    pub fn graph() -> Self {
        Self::with_tol(1e-5)
    }

    /// Default for closed-form radial fields.
    pub fn radial() -> Self {
        Self::with_tol(1e-8)
    }

    pub fn within(mut self, lo: f64, hi: f64) -> Self {
        self.level_bounds = Some((lo, hi));
        self
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Trajectory {
    pub start: Vec<f64>,
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub u_values: Vec<f64>,
    pub steps: u32,
    pub rejected: u32,
    pub evaluations: u32,
    pub status: FlowStatus,
    /// Time at which the path left the region, when it did.
    pub exit_time: Option<f64>,
}

impl Trajectory {
    pub fn end(&self) -> &[f64] {
        self.points.last().expect("trajectory has its start point")
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory has its start time")
    }

    /// Sum of chord lengths under the field's distance.
    pub fn length(&self, field: &dyn FlowField) -> f64 {
        self.points
            .windows(2)
            .map(|w| field.distance(&w[0], &w[1]))
            .sum()
    }

    /// CSV with header `t,x0,..,u`.
    pub fn to_csv(&self) -> String {
        let dim = self.start.len();
        let mut out = String::from("t");
        for k in 0..dim {
            out.push_str(&format!(",x{k}"));
        }
        out.push_str(",u\n");
        for ((t, p), u) in self.times.iter().zip(&self.points).zip(&self.u_values) {
            out.push_str(&fmt_num(*t));
            for c in p {
                out.push(',');
                out.push_str(&fmt_num(*c));
            }
            out.push(',');
            out.push_str(&fmt_num(*u));
            out.push('\n');
        }
        out
    }
}

enum Stop {
    Domain,
    Level,
    Stagnated,
}

struct Accepted {
    t: f64,
    y: DVector<f64>,
    dy: DVector<f64>,
    u: f64,
}

struct Recorder {
    log: Vec<Accepted>,
    stop: Option<(Stop, Option<Accepted>)>,
}

struct Ode<'a> {
    field: &'a dyn FlowField,
    bounds: Option<(f64, f64)>,
    outside: Cell<bool>,
    rec: &'a mut Recorder,
}

impl System<f64, DVector<f64>> for Ode<'_> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        match self.field.sample(y.as_slice()) {
            Some((_, g)) => {
                for (d, gk) in dy.iter_mut().zip(g) {
                    *d = -gk;
                }
            }
            None => {
                self.outside.set(true);
                dy.fill(0.0);
            }
        }
    }

    fn solout(&mut self, t: f64, y: &DVector<f64>, dy: &DVector<f64>) -> bool {
        let sample = self.field.sample(y.as_slice());
        let Some((u, g)) = sample.filter(|_| !self.outside.get()) else {
            self.rec.stop = Some((Stop::Domain, None));
            return true;
        };
        let here = Accepted {
            t,
            y: y.clone(),
            dy: dy.clone(),
            u,
        };
        if let Some((lo, hi)) = self.bounds {
            if u < lo || u > hi {
                self.rec.stop = Some((Stop::Level, Some(here)));
                return true;
            }
        }
        let stalled = g.iter().map(|c| c * c).sum::<f64>().sqrt() < STAGNATION_FLOOR;
        self.rec.log.push(here);
        if stalled {
            self.rec.stop = Some((Stop::Stagnated, None));
            return true;
        }
        false
    }
}

/// Cubic Hermite point between two accepted states at fraction `s`.
fn hermite(a: &Accepted, b: &Accepted, s: f64) -> DVector<f64> {
    let h = b.t - a.t;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    &a.y * h00 + &a.dy * (h10 * h) + &b.y * h01 + &b.dy * (h11 * h)
}

/// Locate the level crossing between the last inside state and the first outside one.
fn locate_crossing(
    field: &dyn FlowField,
    a: &Accepted,
    b: &Accepted,
    (lo, hi): (f64, f64),
) -> Option<(f64, DVector<f64>, f64)> {
    let bound = if b.u < lo { lo } else { hi };
    let side = |u: f64| (u - bound).signum();
    let inside = side(a.u);
    let (mut s0, mut s1) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (s0 + s1);
        let (u, _) = field.sample(hermite(a, b, mid).as_slice())?;
        if side(u) == inside {
            s0 = mid;
        } else {
            s1 = mid;
        }
    }
    let s = 0.5 * (s0 + s1);
    let y = hermite(a, b, s);
    let u = field.sample(y.as_slice())?.0;
    Some((a.t + s * (b.t - a.t), y, u))
}

/// Integrate `ẋ = -∇u` from `start` up to time `t_end` (negative runs backwards).
///
/// The path stops early where the field is no longer resolved or, with level
/// bounds, where `u` crosses them; the returned trajectory is then flagged.
pub fn integrate_flow(
    field: &dyn FlowField,
    start: &[f64],
    t_end: f64,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    if start.len() != field.dim() {
        return Err(Error::param(format!(
            "start point has dimension {}, field expects {}",
            start.len(),
            field.dim()
        )));
    }
    if !t_end.is_finite() {
        return Err(Error::param("flow time must be finite"));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::param("tolerances must be positive"));
    }
    let (u0, g0) = field
        .sample(start)
        .ok_or_else(|| Error::pre("start point outside the resolved region"))?;
    if let Some((lo, hi)) = opts.level_bounds {
        if !(u0 >= lo && u0 <= hi) {
            return Err(Error::pre(format!("u = {u0} at the start is outside [{lo}, {hi}]")));
        }
    }
    if g0.iter().map(|c| c * c).sum::<f64>().sqrt() < STAGNATION_FLOOR {
        return Err(Error::pre("|∇u| below the stagnation floor at the start"));
    }
    let mut traj = Trajectory {
        start: start.to_vec(),
        times: vec![0.0],
        points: vec![start.to_vec()],
        u_values: vec![u0],
        steps: 0,
        rejected: 0,
        evaluations: 0,
        status: FlowStatus::Completed,
        exit_time: None,
    };
    if t_end == 0.0 {
        return Ok(traj);
    }
    let y0 = DVector::from_column_slice(start);
    let first = Accepted {
        t: 0.0,
        y: y0.clone(),
        dy: DVector::from_iterator(g0.len(), g0.iter().map(|c| -c)),
        u: u0,
    };
    let mut rec = Recorder {
        log: vec![first],
        stop: None,
    };
    let ode = Ode {
        field,
        bounds: opts.level_bounds,
        outside: Cell::new(false),
        rec: &mut rec,
    };
    let mut solver = Dopri5::from_param(
        ode,
        0.0,
        t_end,
        t_end.abs(),
        y0,
        opts.rtol,
        opts.atol,
        0.9,
        0.04,
        0.2,
        10.0,
        t_end.abs(),
        0.0,
        opts.max_steps,
        1000,
        OutputType::Sparse,
    );
    let stats = solver.integrate().map_err(|e| match e {
        IntegrationError::MaxNumStepReached { x, n_step } => {
            Error::Integration(format!("more than {n_step} steps needed (stopped at t = {x})"))
        }
        other => Error::Integration(other.to_string()),
    })?;
    traj.steps = stats.accepted_steps;
    traj.rejected = stats.rejected_steps;
    traj.evaluations = stats.num_eval;
    drop(solver);
    let Recorder { log, stop } = rec;
    for a in log.iter().skip(1) {
        let mut p: Vec<f64> = a.y.iter().copied().collect();
        field.normalize(&mut p);
        traj.times.push(a.t);
        traj.points.push(p);
        traj.u_values.push(a.u);
    }
    match stop {
        None => {}
        Some((Stop::Domain, _)) => {
            traj.status = FlowStatus::Exited;
            traj.exit_time = Some(traj.end_time());
        }
        Some((Stop::Stagnated, _)) => traj.status = FlowStatus::Stagnated,
        Some((Stop::Level, beyond)) => {
            traj.status = FlowStatus::Exited;
            let last = log.last().expect("log holds the start");
            let crossing = beyond
                .as_ref()
                .and_then(|b| locate_crossing(field, last, b, opts.level_bounds.unwrap()));
            if let Some((t, y, u)) = crossing {
                let mut p: Vec<f64> = y.iter().copied().collect();
                field.normalize(&mut p);
                traj.times.push(t);
                traj.points.push(p);
                traj.u_values.push(u);
            }
            traj.exit_time = Some(traj.end_time());
        }
    }
    Ok(traj)
}

/// `F_t(x)` for a single time, failing if the path leaves the region first.
pub fn flow_point(
    field: &dyn FlowField,
    start: &[f64],
    t: f64,
    opts: &FlowOptions,
) -> Result<Vec<f64>> {
    let traj = integrate_flow(field, start, t, opts)?;
    match traj.status {
        FlowStatus::Completed => Ok(traj.end().to_vec()),
        FlowStatus::Exited => Err(Error::pre(format!(
            "flow left the region at t = {:.6} before t = {t}",
            traj.end_time()
        ))),
        FlowStatus::Stagnated => Err(Error::pre("flow stagnated before reaching the requested time")),
    }
}

/// `Pr(x) = F_{½ log(u(x)/T)}(x)`.
pub fn projection(
    field: &dyn FlowField,
    x: &[f64],
    level: f64,
    opts: &FlowOptions,
) -> Result<Vec<f64>> {
    if !(level > 0.0) {
        return Err(Error::param("projection level must be positive"));
    }
    let (u, _) = field
        .sample(x)
        .ok_or_else(|| Error::pre("point outside the resolved region"))?;
    if !(u > 0.0) {
        return Err(Error::pre(format!("u = {u} is not positive at the point")));
    }
    let t = 0.5 * (u / level).ln();
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    flow_point(field, x, t, opts)
}
