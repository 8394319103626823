//! Acceptance suite: one test per criterion, each printing a single
//! `criterion NN PASS|FAIL` line. Run with `--nocapture` to see the lines.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use monocone::cone::*;
use monocone::flow::*;
use monocone::green::*;
use monocone::monotone::*;
use monocone::potential::*;
use monocone::space::*;
use monocone::Field;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const CAPACITY_REL: f64 = 0.10;
const CAPACITY_SECONDS: f64 = 60.0;
const EXTERIOR_SUP: f64 = 0.05;
const RADIAL_U_TOL: f64 = 1e-10;
const LATTICE_U_SPREAD: f64 = 0.05;
const FLUX_FD_REL: f64 = 0.10;
const KATO_TRIALS: usize = 100_000;
const KATO_SECONDS: f64 = 10.0;
const GREEN_REL: f64 = 0.15;
const GREEN_HARMONIC: f64 = 1e-8;
const FLOW_TOL: f64 = 1e-7;
const PUSHFORWARD_REL: f64 = 0.05;
const KS_MAX: f64 = 0.05;
const COSINE_EXACT: f64 = 1e-10;
const WIENER_ALPHA: (f64, f64) = (0.8, 1.2);
const GRADIENT_C_MAX: f64 = 2.0;

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id:02} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// The ℝ³ lattice (h = 0.25, extent 8) with the unit ball and its centre.
struct BallFixture {
    space: GraphSpace,
    center: usize,
    ball: Vec<usize>,
}

fn ball_fixture() -> &'static BallFixture {
    static CELL: OnceLock<BallFixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let space = build_lattice(3, 8.0, 0.25).unwrap();
        let center = space.nearest_vertex(&[0.0; 3]).unwrap();
        let ball = space.select(|p| norm(p) <= 1.0 + 1e-9);
        BallFixture { space, center, ball }
    })
}

fn exterior(fix: &BallFixture, r_out: f64) -> ExteriorSolution {
    let mut spec = ExteriorSpec::new(fix.ball.clone(), r_out);
    spec.center = Some(fix.center);
    solve_exterior(&fix.space, &spec, 1e-10).unwrap()
}

fn ball_exterior() -> &'static ExteriorSolution {
    static CELL: OnceLock<ExteriorSolution> = OnceLock::new();
    CELL.get_or_init(|| exterior(ball_fixture(), 8.0))
}

/// Whole-space exterior potential of the unit ball, extrapolated from two truncations.
fn ball_far_field() -> &'static Field {
    static CELL: OnceLock<Field> = OnceLock::new();
    CELL.get_or_init(|| {
        let fix = ball_fixture();
        let inner = exterior(fix, 6.0);
        extrapolate_far_field(&fix.space, &inner, ball_exterior()).unwrap().field
    })
}

#[test]
fn criterion_01_ball_capacity() {
    let fix = ball_fixture();
    let container = fix.space.select(|p| norm(p) <= 8.0 + 1e-9);
    let clock = Instant::now();
    let res = solve_obstacle(&fix.space, &fix.ball, &container, 1e-8).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    // Energy of the truncated radial potential between radii 1 and 8.
    let oracle = 4.0 * PI * 8.0 / 7.0;
    let rel = (res.capacity / oracle - 1.0).abs();
    verdict(
        1,
        "ball capacity",
        rel <= CAPACITY_REL && secs < CAPACITY_SECONDS,
        format!("cap {:.4} vs {oracle:.4} ({:.2}% off, limit 10%), {secs:.1} s", res.capacity, 100.0 * rel),
    );
}

#[test]
fn criterion_02_exterior_accuracy() {
    let space = build_lattice(3, 8.0, 0.125).unwrap();
    let center = space.nearest_vertex(&[0.0; 3]).unwrap();
    let mut spec = ExteriorSpec::new(space.select(|p| norm(p) <= 1.0 + 1e-9), 8.0);
    spec.center = Some(center);
    let sol = solve_exterior(&space, &spec, 1e-10).unwrap();
    let mut worst: f64 = 0.0;
    for (x, v) in sol.field.iter() {
        let r = norm(space.position(x).unwrap());
        if (1.5..=5.0).contains(&r) {
            let exact = (1.0 / r - 1.0 / 8.0) / (1.0 - 1.0 / 8.0);
            worst = worst.max((v - exact).abs());
        }
    }
    verdict(
        2,
        "exterior solution",
        worst <= EXTERIOR_SUP,
        format!("sup |u - exact| on 1.5 <= r <= 5 is {worst:.4} (limit {EXTERIOR_SUP})"),
    );
}

fn t_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn criterion_03_monotone_quantity() {
    let n = 3.0;
    let betas = [(n - 2.0) / (n - 1.0), 1.0, 2.0, 3.0];
    let radial = RadialSpace::euclidean(3);
    let u = RadialField::exterior_potential(n, 1.0, f64::INFINITY);
    let mut radial_dev: f64 = 0.0;
    for &beta in &betas {
        for t in t_grid(0.1, 0.9, 17) {
            let value = u_beta_radial(&radial, &u, beta, t).unwrap();
            radial_dev = radial_dev.max((value - 4.0 * PI).abs());
        }
    }

    let fix = ball_fixture();
    let data = LevelData::new(&fix.space, ball_far_field()).unwrap();
    let grid = t_grid(0.2, 0.8, 7);
    let mut spread: f64 = 0.0;
    let mut monotone = true;
    for &beta in &betas {
        let rep = monotonicity_report(&data, beta, &grid).unwrap();
        let (lo, hi) = rep.u.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        let mean = rep.u.iter().sum::<f64>() / rep.u.len() as f64;
        spread = spread.max((hi - lo) / mean);
        // Also hold the increments to the 2%-of-mean floor alone.
        let floor = 0.02 * mean;
        monotone &= rep.monotone && rep.u.windows(2).all(|w| w[1] >= w[0] - floor);
        println!("  beta {beta:.3}: U {:?} slack {:.3e}", rep.u, rep.slack);
    }
    verdict(
        3,
        "monotone quantity",
        radial_dev <= RADIAL_U_TOL && spread <= LATTICE_U_SPREAD && monotone,
        format!(
            "radial |U - 4π| {radial_dev:.2e} (limit {RADIAL_U_TOL:e}); lattice spread {:.2}% (limit 5%), non-decreasing within 2% of mean U {monotone}",
            100.0 * spread
        ),
    );
}

#[test]
fn criterion_04_derivative_consistency() {
    let space = build_lattice(3, 8.0, 0.125).unwrap();
    let a = 1.5;
    let u = Field::from_positions(&space, |p| {
        let d1 = ((p[0] - a).powi(2) + p[1] * p[1] + p[2] * p[2]).sqrt();
        let d2 = ((p[0] + a).powi(2) + p[1] * p[1] + p[2] * p[2]).sqrt();
        (0.5 * (1.0 / d1 + 1.0 / d2)).min(1.0)
    })
    .unwrap();
    let data = LevelData::new(&space, &u).unwrap();
    let grid = t_grid(0.3, 0.7, 9);
    let mut worst: f64 = 0.0;
    let mut bounded = true;
    for beta in [0.5, 1.0, 2.0, 3.0] {
        let rep = monotonicity_report(&data, beta, &grid).unwrap();
        for i in 1..grid.len() - 1 {
            let fd = (rep.u[i + 1] - rep.u[i - 1]) / (grid[i + 1] - grid[i - 1]);
            worst = worst.max((rep.uprime_flux[i] / fd - 1.0).abs());
            bounded &= fd >= rep.lower_bound[i] - rep.slack;
        }
        bounded &= rep.lower_bound_holds;
    }
    verdict(
        4,
        "derivative consistency",
        worst <= FLUX_FD_REL && bounded,
        format!("flux vs FD worst {:.2}% (limit 10%), lower bound respected {bounded}", 100.0 * worst),
    );
}

#[test]
fn criterion_05_kato_sweep() {
    let clock = Instant::now();
    let s = kato_search(&[2, 3, 4, 5, 6], KATO_TRIALS, &[0.1, 1.0, 10.0], 0).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    verdict(
        5,
        "kato sweep",
        s.violations == 0 && s.worst_ratio >= 1.0 && secs < KATO_SECONDS,
        format!(
            "{} trials, {} violations, min rhs/lhs {:.6} (n {}, t {}), {secs:.2} s",
            s.trials, s.violations, s.worst_ratio, s.worst_n, s.worst_t
        ),
    );
}

#[test]
fn criterion_06_green_function() {
    let fix = ball_fixture();
    let radius = 8.0;
    let g = shell_green(&fix.space, fix.center, Some(radius), 1e-10).unwrap();
    let mut shell_worst: f64 = 0.0;
    for d in [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] {
        let s = d / 3f64.sqrt();
        for p in [[d, 0.0, 0.0], [0.0, d, 0.0], [s, s, s]] {
            let y = fix.space.nearest_vertex(&p).unwrap();
            let dy = norm(fix.space.position(y).unwrap());
            let exact = 1.0 / (4.0 * PI * dy) - 1.0 / (4.0 * PI * radius);
            shell_worst = shell_worst.max((g.field.value(y) / exact - 1.0).abs());
        }
    }
    let harmonic = green_harmonic_residual(&fix.space, &g);

    let coarse = build_lattice(3, 6.0, 0.5).unwrap();
    let c = coarse.nearest_vertex(&[0.0; 3]).unwrap();
    let engine = HeatKernelEngine::new(&coarse);
    let time = green_function(&engine, c, 0.1, 3.0).unwrap().corrected();
    let shell = shell_green(&coarse, c, Some(6.0), 1e-10).unwrap();
    let mut time_worst: f64 = 0.0;
    for d in [1.0, 1.5, 2.0, 3.0, 4.0] {
        let y = coarse.nearest_vertex(&[d, 0.0, 0.0]).unwrap();
        let free = shell.field.value(y) + shell.shell_offset;
        time_worst = time_worst.max((time.value(y) / free - 1.0).abs());
    }
    verdict(
        6,
        "green function",
        shell_worst <= GREEN_REL && time_worst <= GREEN_REL && harmonic <= GREEN_HARMONIC,
        format!(
            "shell vs closed form {:.2}%, time integral vs shell {:.2}% (limit 15%), off-pole residual {harmonic:.1e}",
            100.0 * shell_worst,
            100.0 * time_worst
        ),
    );
}

#[test]
fn criterion_07_parabolicity() {
    let cases = [
        ("R3 lattice", build_lattice(3, 8.0, 0.5).unwrap(), Parabolicity::Nonparabolic),
        ("R2 lattice", build_lattice(2, 30.0, 0.5).unwrap(), Parabolicity::Parabolic),
        ("cylinder", build_cylinder(2.0 * PI, 40.0, 0.25).unwrap(), Parabolicity::Parabolic),
    ];
    let mut wrong = Vec::new();
    let mut detail = Vec::new();
    for (name, space, expected) in &cases {
        let x = space.nearest_vertex(&vec![0.0; space.position_dim()]).unwrap();
        let rep = nonparabolic_test(space, x, 100.0).unwrap();
        detail.push(format!("{name} {:?} (exponent {:.2})", rep.classification, rep.exponent));
        if rep.classification != *expected {
            wrong.push(*name);
        }
    }
    verdict(
        7,
        "parabolicity",
        wrong.is_empty(),
        format!("{}; misclassified {wrong:?}", detail.join(", ")),
    );
}

#[test]
fn criterion_08_flow_laws() {
    let field = RadialGradient::new(RadialField::cone_function(), 1e-3, 100.0).unwrap();
    let opts = FlowOptions::with_tol(1e-12);
    let times = t_grid(0.0, 1.0, 11);
    let mut level: f64 = 0.0;
    let mut dist: f64 = 0.0;
    let mut group: f64 = 0.0;
    for r0 in [0.7, 1.5, 3.0, 6.0] {
        let x = [r0];
        let u0 = field.sample(&x).unwrap().0;
        let pts: Vec<Vec<f64>> = times.iter().map(|&t| flow_point(&field, &x, t, &opts).unwrap()).collect();
        for (i, &t) in times.iter().enumerate() {
            let ut = field.sample(&pts[i]).unwrap().0;
            level = level.max((ut * (2.0 * t).exp() - u0).abs());
            for (j, &s) in times.iter().enumerate() {
                let expected = ((-t).exp() - (-s).exp()).abs() * (2.0 * u0).sqrt();
                dist = dist.max((field.distance(&pts[i], &pts[j]) - expected).abs());
                if t + s <= 1.0 {
                    let composed = flow_point(&field, &pts[i], s, &opts).unwrap();
                    let direct = flow_point(&field, &x, t + s, &opts).unwrap();
                    group = group.max(field.distance(&composed, &direct));
                }
            }
        }
    }

    let mesh = build_cone(3.0, &CrossSection::sphere(0.8), 0.5, 4.0, 24).unwrap();
    let u = Field::from_fn(&mesh, |x| 0.5 * mesh.radius_of(x).unwrap().powi(2));
    let gf = GradientField::new(&mesh, &u).unwrap();
    let samples = mesh.cone().unwrap().samples;
    let mut mesh_level: f64 = 0.0;
    let mut mesh_dist: f64 = 0.0;
    for (shell, k) in [(16, 7), (20, 40), (23, 101)] {
        let x = mesh.position(shell * samples + k).unwrap().to_vec();
        let u0 = gf.value(&x).unwrap();
        let traj = integrate_flow(&gf, &x, 1.0, &FlowOptions::with_tol(1e-11)).unwrap();
        for (p, (&t, &v)) in traj.points.iter().zip(traj.times.iter().zip(&traj.u_values)) {
            mesh_level = mesh_level.max((v * (2.0 * t).exp() - u0).abs());
            let expected = (1.0 - (-t).exp()) * (2.0 * u0).sqrt();
            mesh_dist = mesh_dist.max((gf.distance(&x, p) - expected).abs());
        }
    }
    let worst = level.max(dist).max(group).max(mesh_level).max(mesh_dist);
    verdict(
        8,
        "flow laws",
        worst <= FLOW_TOL,
        format!(
            "radial: level {level:.1e}, distance {dist:.1e}, group {group:.1e}; cone mesh: level {mesh_level:.1e}, distance {mesh_dist:.1e} (limit {FLOW_TOL:e})"
        ),
    );
}

#[test]
fn criterion_09_measure_scaling() {
    let space = build_cone(3.0, &CrossSection::sphere(0.8), 0.5, 4.0, 96).unwrap();
    let u = Field::from_fn(&space, |x| 0.5 * space.radius_of(x).unwrap().powi(2));
    let push = measure_pushforward_check(&space, &u, 0.2, (0.3, 6.0)).unwrap();
    let dis = disintegration_histogram(&space, &u, (0.3, 6.0), 20).unwrap();
    verdict(
        9,
        "measure scaling",
        push.relative_error <= PUSHFORWARD_REL && dis.ks_distance <= KS_MAX,
        format!(
            "ratio {:.4} vs e^(Nt) {:.4} ({:.2}% off, limit 5%); KS {:.2e} (limit {KS_MAX})",
            push.ratio,
            push.expected,
            100.0 * push.relative_error,
            dis.ks_distance
        ),
    );
}

fn bump(space: &GraphSpace, c: &[f64], width: f64, amp: f64) -> GraphSpace {
    space
        .with_scaled_measures("bumped", |x| {
            let p = space.position(x).unwrap();
            let d2: f64 = p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            1.0 + amp * (-d2 / (width * width)).exp()
        })
        .unwrap()
}

#[test]
fn criterion_10_rigidity_discrimination() {
    let mut wrong = Vec::new();
    let mut lines = Vec::new();
    let mut judge = |name: String, r: &RigidityResidual, tol: f64, cone: bool| {
        let v = r.verdict(tol);
        let ok = if cone { v == ConeVerdict::Cone } else { v == ConeVerdict::NotCone };
        lines.push(format!("{name}: {:.2e}/{tol:.2e} {v:?}", r.worst()));
        if !ok {
            wrong.push(name);
        }
    };

    for (name, cross) in [("sphere(0.8)", CrossSection::sphere(0.8)), ("circle(3)", CrossSection::circle(3.0))] {
        let radial = RadialSpace::cone(3.0, &cross).unwrap();
        let u = RadialField::exterior_potential(3.0, 0.5, f64::INFINITY);
        let r = rigidity_residual_radial(&radial, &u, &t_grid(0.6, 4.0, 40)).unwrap();
        judge(format!("radial {name}"), &r, RADIAL_U_TOL, true);

        let mesh = build_cone(3.0, &cross, 0.5, 4.0, 48).unwrap();
        let tol = mesh_tolerance(&mesh, 0.5).unwrap();
        let u = Field::from_fn(&mesh, |x| 0.5 / mesh.radius_of(x).unwrap());
        judge(format!("mesh {name}"), &rigidity_residual(&mesh, &u, None, 3.0).unwrap(), tol, true);
        let p0 = mesh.position(mesh.len() / 2).unwrap().to_vec();
        let bumped = bump(&mesh, &p0, 0.7, 0.1);
        judge(format!("bumped mesh {name}"), &rigidity_residual(&bumped, &u, None, 3.0).unwrap(), tol, false);
    }

    let lattice = build_lattice(3, 8.0, 0.25).unwrap();
    let (r_lo, r_hi) = (4.0, 7.0);
    let tol = mesh_tolerance(&lattice, r_lo).unwrap();
    let u = Field::from_positions(&lattice, |p| (0.5 / norm(p)).min(1.0)).unwrap();
    let region: Vec<bool> = (0..lattice.len())
        .map(|x| (r_lo..=r_hi).contains(&norm(lattice.position(x).unwrap())))
        .collect();
    judge(
        "lattice".into(),
        &rigidity_residual(&lattice, &u, Some(&region), 3.0).unwrap(),
        tol,
        true,
    );
    for c in [[5.0, 0.0, 0.0], [3.0, 3.0, 0.0], [0.0, 0.0, 5.5]] {
        let bumped = bump(&lattice, &c, 1.0, 0.1);
        let r = rigidity_residual(&bumped, &u, Some(&region), 3.0).unwrap();
        judge(format!("bumped lattice {c:?}"), &r, tol, false);
    }
    let count = lines.len();
    verdict(
        10,
        "rigidity discrimination",
        wrong.is_empty() && count >= 6,
        format!("{count} spaces, misclassified {wrong:?}; {}", lines.join("; ")),
    );
}

#[test]
fn criterion_11_cosine_formula() {
    let space = RadialSpace::euclidean(3).with_range(0.05, 50.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = 1.0;
    let pairs: Vec<(ConePoint, ConePoint)> = (0..1000)
        .map(|_| {
            let z = loop {
                let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = norm(&v);
                if n > 0.1 && n <= 1.0 {
                    break v.iter().map(|c| c / n).collect::<Vec<_>>();
                }
            };
            let r = rng.gen_range(1.0..4.0);
            let spread = 0.3 / r;
            let w: Vec<f64> = z.iter().map(|c| c + rng.gen_range(-spread..spread)).collect();
            let n = norm(&w);
            let x = ConePoint { r, z };
            let y = ConePoint {
                r: r + rng.gen_range(-0.3..0.3),
                z: w.iter().map(|c| c / n).collect(),
            };
            (x, y)
        })
        .collect();
    let exact = cosine_check_radial(&space, &RadialField::cone_function(), 2.0, &pairs, rho, &FlowOptions::with_tol(1e-13))
        .unwrap();

    let mesh = build_cone(3.0, &CrossSection::sphere(0.8), 0.5, 4.0, 48).unwrap();
    let tol = mesh_tolerance(&mesh, 0.5).unwrap();
    let u = Field::from_fn(&mesh, |x| 0.5 * mesh.radius_of(x).unwrap().powi(2));
    let m = mesh.cone().unwrap().samples;
    let mesh_pairs: Vec<(usize, usize)> = (0..200)
        .map(|_| {
            let shell = rng.gen_range(12..40);
            let k = rng.gen_range(0..m);
            let other = (k + rng.gen_range(0..8)) % m;
            (shell * m + k, (shell + rng.gen_range(0..3)) * m + other)
        })
        .collect();
    let built = cosine_check(&mesh, &u, 2.0, &mesh_pairs, rho, &FlowOptions::with_tol(1e-11)).unwrap();
    verdict(
        11,
        "cosine formula",
        exact.checked >= 1000 && exact.max_residual <= COSINE_EXACT && built.max_residual <= tol,
        format!(
            "exact: {} pairs, max {:.1e} (limit {COSINE_EXACT:e}); mesh: {} pairs, max {:.1e} (limit {tol:.2e})",
            exact.checked, exact.max_residual, built.checked, built.max_residual
        ),
    );
}

#[test]
fn criterion_12_capacity_suite() {
    let path = build_path(3).unwrap();
    let path_cap = solve_obstacle(&path, &[1], &[0, 1, 2], 1e-12).unwrap().capacity;

    let space = build_lattice(3, 4.0, 0.25).unwrap();
    let ball = space.select(|p| norm(p) <= 1.0 + 1e-9);
    let container = space.select(|p| norm(p) <= 3.5 + 1e-9);
    let tol = 1e-8;
    let res = solve_obstacle(&space, &ball, &container, tol).unwrap();
    let lift = lift_check(&space, &res, 0.5, tol).unwrap();

    let larger = space.select(|p| norm(p) <= 2.0 + 1e-9);
    let bigger = solve_obstacle(&space, &larger, &container, tol).unwrap();
    let comparators = [
        ("constant 1", Field::from_fn(&space, |_| 1.0)),
        ("potential of B_2", bigger.potential.clone()),
        ("1.5 u", res.potential.map(|v| 1.5 * v)),
    ];
    let mut comparison = true;
    for (name, v) in &comparators {
        let rep = comparison_check(&space, &res, v, 1e-7).unwrap();
        println!("  comparator {name}: worst {:.1e}", rep.worst_violation);
        comparison &= rep.holds;
    }

    // Dyadic levels between the mesh scale and the curvature scale of the unit sphere.
    let fine = build_lattice(3, 2.0, 0.0625).unwrap();
    let edge = fine.nearest_vertex(&[1.0, 0.0, 0.0]).unwrap();
    let radii = [0.0625, 0.125, 0.25];
    let exact = Field::from_positions(&fine, |p| (1.0 / norm(p)).min(1.0)).unwrap();
    let fit = wiener_decay_fit(&fine, &exact, edge, &radii).unwrap();
    let alpha_ok = !fit.flagged && (WIENER_ALPHA.0..=WIENER_ALPHA.1).contains(&fit.alpha);
    let fine_ball = fine.select(|p| norm(p) <= 1.0 + 1e-9);
    let fine_container = fine.select(|p| norm(p) <= 1.75 + 1e-9);
    let solved = solve_obstacle(&fine, &fine_ball, &fine_container, tol).unwrap();
    let solved_fit = wiener_decay_fit(&fine, &solved.potential, edge, &radii).unwrap();
    println!("  Wiener alpha of the solved potential (staircase boundary): {:.3}", solved_fit.alpha);
    verdict(
        12,
        "capacity suite",
        path_cap == 2.0 && lift.agrees && comparison && alpha_ok,
        format!(
            "path capacity {path_cap}; lift diff {:.1e} (limit {:.0e}); comparison {comparison}; Wiener alpha {:.3}",
            lift.max_diff,
            10.0 * tol,
            fit.alpha
        ),
    );
}

#[test]
fn criterion_13_decay_estimates() {
    let fix = ball_fixture();
    // Whole-space exterior potential: the truncated solve vanishes on its shell,
    // where no decay bound of the untruncated problem can hold.
    let rep = decay_check(&fix.space, ball_far_field(), fix.center).unwrap();
    verdict(
        13,
        "decay estimates",
        rep.lower_ok && rep.lower_violations == 0 && rep.gradient_constant <= GRADIENT_C_MAX,
        format!(
            "lower bound margin {:.3} over {} vertices ({} violations); gradient constant {:.3} (limit {GRADIENT_C_MAX})",
            rep.lower_margin, rep.checked_vertices, rep.lower_violations, rep.gradient_constant
        ),
    );
}
