use std::path::{Path, PathBuf};

use monocone::cone::{
    cone_function, cross_section, dd_prime_check, kato_search, mesh_tolerance, rigidity_residual, RigidityResidual,
};
use monocone::flow::{integrate_flow, FlowOptions, GradientField};
use monocone::green::{green_function, nonparabolic_test, shell_green, HeatKernelEngine};
use monocone::monotone::{monotonicity_report, LevelData};
use monocone::pipeline::{cosine_stage, pipeline_cone_report, pipeline_cone_report_radial, PipelineOptions};
use monocone::potential::{extrapolate_far_field, solve_exterior, solve_obstacle, ExteriorSpec};
use monocone::space::io::{field_from_csv, field_to_csv, fmt_num, set_from_json, set_to_json, space_from_json, space_to_json};
use monocone::space::{build_cone, build_cylinder, build_lattice, build_path, CrossSection};
use monocone::{Field, GraphSpace, RadialSpace, Space};
use serde_json::json;

use crate::args::*;
use crate::output::{read_text, Artifacts, CliError};

type Out = Result<Artifacts, CliError>;

fn load_space(path: &Path) -> Result<Space, CliError> {
    Ok(space_from_json(&read_text(path)?)?)
}

fn load_graph(path: &Path) -> Result<GraphSpace, CliError> {
    match load_space(path)? {
        Space::Graph(g) => Ok(g),
        Space::Radial(_) => Err(CliError::Config(format!("{}: command needs a graph space", path.display()))),
    }
}

fn load_field(path: &Path, space: &GraphSpace) -> Result<Field, CliError> {
    Ok(field_from_csv(&read_text(path)?, space.len())?)
}

fn load_set(path: &Path, space: &GraphSpace) -> Result<Vec<usize>, CliError> {
    Ok(set_from_json(&read_text(path)?, space.len())?)
}

fn check_vertex(space: &GraphSpace, x: usize) -> Result<(), CliError> {
    if x >= space.len() {
        return Err(CliError::Config(format!("vertex {x} out of range ({} vertices)", space.len())));
    }
    Ok(())
}

pub fn dispatch(cmd: &Command, seed: u64) -> Out {
    match cmd {
        Command::Space(SpaceCmd::Build(b)) => build(b),
        Command::Space(SpaceCmd::Info(a)) => info(a),
        Command::Space(SpaceCmd::Select(a)) => select(a),
        Command::Solve(SolveCmd::Exterior(a)) => exterior(a),
        Command::Solve(SolveCmd::Obstacle(a)) => obstacle(a),
        Command::Green(a) => green(a),
        Command::Parabolicity(a) => parabolicity(a),
        Command::Monotone(a) => monotone(a),
        Command::Cone(ConeCmd::Rigidity(a)) => rigidity(a),
        Command::Cone(ConeCmd::Cosine(a)) => cosine(a, seed),
        Command::Cone(ConeCmd::CrossSection(a)) => section(a),
        Command::Kato(a) => kato(a, seed),
        Command::Flow(a) => flow(a),
        Command::Pipeline(a) => pipeline(a, seed),
    }
}

fn build(cmd: &BuildCmd) -> Out {
    let (space, out) = match cmd {
        BuildCmd::Lattice { n, extent, h, out } => (Space::Graph(build_lattice(*n, *extent, *h)?), out),
        BuildCmd::Cone { n, cross, size, r_min, r_max, shells, out } => {
            let cs = match cross {
                CrossKind::Circle => CrossSection::circle(*size),
                CrossKind::Sphere => CrossSection::sphere(*size),
            };
            (Space::Graph(build_cone(*n, &cs, *r_min, *r_max, *shells)?), out)
        }
        BuildCmd::Cylinder { circumference, length, h, out } => {
            (Space::Graph(build_cylinder(*circumference, *length, *h)?), out)
        }
        BuildCmd::Path { vertices, out } => (Space::Graph(build_path(*vertices)?), out),
        BuildCmd::Radial { n, cross, size, out } => {
            let size = || size.ok_or_else(|| CliError::Config("--size is required for this cross-section".into()));
            let space = match cross {
                RadialKind::Euclidean => {
                    if n.fract() != 0.0 || *n < 1.0 {
                        return Err(CliError::Config(format!("euclidean cone needs an integer N, got {n}")));
                    }
                    RadialSpace::euclidean(*n as usize)
                }
                RadialKind::Circle => RadialSpace::cone(*n, &CrossSection::circle(size()?))?,
                RadialKind::Sphere => RadialSpace::cone(*n, &CrossSection::sphere(size()?))?,
            };
            (Space::Radial(space), out)
        }
    };
    let text = space_to_json(&space)?;
    Ok(Artifacts::default()
        .file(out, text)
        .summary(json!({ "label": space.label(), "N": space.dim() })))
}

fn info(a: &InfoArgs) -> Out {
    let summary = match load_space(&a.space)? {
        Space::Graph(g) => {
            let boundary = g.boundary_flags().iter().filter(|&&b| b).count();
            let nearest = match &a.nearest {
                Some(p) if p.len() != g.position_dim() => {
                    return Err(CliError::Config(format!(
                        "point has {} coordinates, space positions have {}",
                        p.len(),
                        g.position_dim()
                    )))
                }
                Some(p) => g.nearest_vertex(p),
                None => None,
            };
            json!({
                "nearestVertex": nearest,
                "backend": "graph",
                "label": g.label(),
                "N": g.dim(),
                "vertices": g.len(),
                "edges": g.edges().len(),
                "boundaryVertices": boundary,
                "totalMeasure": g.total_measure(),
            })
        }
        Space::Radial(r) => json!({
            "backend": "radial",
            "label": r.label,
            "N": r.dim,
            "crossSectionMass": r.cross_section_mass,
            "rMin": r.r_min,
            "rMax": r.r_max,
        }),
    };
    let art = Artifacts::default();
    let art = match &a.out {
        Some(p) => art.json(p, &summary)?,
        None => art,
    };
    Ok(art.summary(summary))
}

fn select(a: &SelectArgs) -> Out {
    let space = load_graph(&a.space)?;
    if a.center.len() != space.position_dim() {
        return Err(CliError::Config(format!(
            "centre has {} coordinates, space positions have {}",
            a.center.len(),
            space.position_dim()
        )));
    }
    if !(a.radius >= 0.0) {
        return Err(CliError::Config("radius must be non-negative".into()));
    }
    let r2 = a.radius * a.radius;
    let set = space.select(|p| {
        let d2: f64 = p.iter().zip(&a.center).map(|(x, c)| (x - c) * (x - c)).sum();
        (d2 <= r2 * (1.0 + 1e-12)) != a.outside
    });
    let mut text = set_to_json(&set);
    text.push('\n');
    Ok(Artifacts::default().file(&a.out, text).summary(json!({ "selected": set.len() })))
}

fn exterior(a: &ExteriorArgs) -> Out {
    let space = load_graph(&a.space)?;
    let omega_c = load_set(&a.omega_c, &space)?;
    let spec = ExteriorSpec { omega_c, r_out: a.rout, center: a.center };
    let sol = solve_exterior(&space, &spec, a.tol)?;
    let mut summary = json!({
        "iterations": sol.stats.iterations,
        "residual": sol.stats.residual,
        "center": sol.center,
        "shellNeighborMax": sol.shell_neighbor_max,
        "truncationTight": sol.truncation_tight,
    });
    let field = match a.extrapolate_from {
        None => sol.field,
        Some(r1) => {
            let inner_spec = ExteriorSpec { r_out: Some(r1), center: Some(sol.center), ..spec };
            let inner = solve_exterior(&space, &inner_spec, a.tol)?;
            let far = extrapolate_far_field(&space, &inner, &sol)?;
            summary["farField"] = json!({ "amplitude": far.amplitude, "fitResidual": far.fit_residual });
            far.field
        }
    };
    Ok(Artifacts::default().file(&a.out, field_to_csv(&field)).summary(summary))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn obstacle(a: &ObstacleArgs) -> Out {
    let space = load_graph(&a.space)?;
    let e = load_set(&a.e, &space)?;
    let b = load_set(&a.b, &space)?;
    let res = solve_obstacle(&space, &e, &b, a.tol)?;
    let potential_file = sibling(&a.out, ".potential.csv");
    let report = json!({
        "capacity": res.capacity,
        "iterations": res.iterations,
        "residual": res.residual,
        "activeSet": res.active_set,
        "potentialFile": potential_file.file_name().map(|f| f.to_string_lossy()),
    });
    Ok(Artifacts::default()
        .file(&potential_file, field_to_csv(&res.potential))
        .json(&a.out, &report)?
        .summary(json!({ "capacity": res.capacity, "iterations": res.iterations })))
}

fn green(a: &GreenArgs) -> Out {
    let space = load_graph(&a.space)?;
    check_vertex(&space, a.pole)?;
    let (field, summary) = match a.method {
        GreenMethod::Shell => {
            let g = shell_green(&space, a.pole, a.radius, a.tol)?;
            let s = json!({ "iterations": g.stats.iterations, "shellOffset": g.shell_offset });
            (g.field, s)
        }
        GreenMethod::Time => {
            let engine = HeatKernelEngine::new(&space);
            let g = green_function(&engine, a.pole, a.t_split, a.t_max)?;
            let s = json!({ "evaluations": g.evaluations, "equilibriumRate": g.equilibrium_rate });
            (g.corrected(), s)
        }
    };
    Ok(Artifacts::default().file(&a.out, field_to_csv(&field)).summary(summary))
}

fn parabolicity(a: &ParabolicityArgs) -> Out {
    let space = load_graph(&a.space)?;
    check_vertex(&space, a.center)?;
    let rep = nonparabolic_test(&space, a.center, a.smax)?;
    let summary = json!({
        "classification": rep.classification,
        "exponent": rep.exponent,
        "integral": rep.integral,
        "sMax": rep.s_max,
    });
    let art = match &a.out {
        Some(p) => Artifacts::default().json(p, &rep)?,
        None => Artifacts::default(),
    };
    Ok(art.summary(summary))
}

fn monotone(a: &MonotoneArgs) -> Out {
    let space = load_graph(&a.space)?;
    let u = load_field(&a.field, &space)?;
    let data = LevelData::new(&space, &u)?;
    let rep = monotonicity_report(&data, a.beta, &a.tgrid.0)?;
    let mut csv = String::from("t,U,Uprime_flux,Uprime_fd,lower_bound\n");
    for k in 0..rep.t_grid.len() {
        let row = [rep.t_grid[k], rep.u[k], rep.uprime_flux[k], rep.uprime_fd[k], rep.lower_bound[k]];
        csv.push_str(&row.map(fmt_num).join(","));
        csv.push('\n');
    }
    Ok(Artifacts::default().file(&a.out, csv).summary(json!({
        "monotone": rep.monotone,
        "lowerBoundHolds": rep.lower_bound_holds,
        "slack": rep.slack,
        "excludedVertices": rep.excluded_vertices,
    })))
}

/// Space, potential and the level region shared by the cone commands.
struct ConeInput {
    space: GraphSpace,
    u: Field,
    region: Vec<bool>,
}

fn cone_input(a: &FieldInput) -> Result<ConeInput, CliError> {
    if !(0.0 < a.t_min && a.t_min < a.t_max && a.t_max < 1.0) {
        return Err(CliError::Config("need 0 < t-min < t-max < 1".into()));
    }
    let space = load_graph(&a.space)?;
    let u = load_field(&a.field, &space)?;
    let region = (0..space.len())
        .map(|x| u.defined(x) && u.value(x) >= a.t_min && u.value(x) <= a.t_max)
        .collect();
    Ok(ConeInput { space, u, region })
}

fn residual(input: &ConeInput, n: f64) -> Result<RigidityResidual, CliError> {
    Ok(rigidity_residual(&input.space, &input.u, Some(&input.region), n)?)
}

/// Smallest distance from the centroid of the saturated set `{u = 1}` to the region.
fn rho_min(input: &ConeInput) -> f64 {
    let held: Vec<&[f64]> = input
        .u
        .iter()
        .filter(|&(_, v)| v >= 1.0 - 1e-12)
        .filter_map(|(x, _)| input.space.position(x))
        .collect();
    if held.is_empty() {
        return f64::INFINITY;
    }
    let mut c = vec![0.0; held[0].len()];
    for p in &held {
        for (ck, pk) in c.iter_mut().zip(p.iter()) {
            *ck += pk / held.len() as f64;
        }
    }
    (0..input.space.len())
        .filter(|&x| input.region[x])
        .filter_map(|x| input.space.position(x))
        .map(|p| p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min)
}

fn rigidity(a: &RigidityArgs) -> Out {
    let input = cone_input(&a.input)?;
    let res = residual(&input, a.input.n)?;
    let tol = mesh_tolerance(&input.space, rho_min(&input))?;
    let report = json!({ "residual": res, "tolerance": tol, "verdict": res.verdict(tol) });
    Ok(Artifacts::default()
        .json(&a.out, &report)?
        .summary(json!({ "worst": res.worst(), "tolerance": tol, "verdict": res.verdict(tol) })))
}

fn cosine(a: &CosineArgs, seed: u64) -> Out {
    let input = cone_input(&a.input)?;
    let res = residual(&input, a.input.n)?;
    let (level, rep) = cosine_stage(
        &input.space,
        &input.u,
        a.input.n,
        &input.region,
        res.normalization,
        a.pairs,
        a.rho,
        seed,
    )?;
    let report = json!({ "level": level, "normalization": res.normalization, "cosine": rep });
    Ok(Artifacts::default()
        .json(&a.out, &report)?
        .summary(json!({ "maxResidual": rep.max_residual, "checked": rep.checked })))
}

fn section(a: &SectionArgs) -> Out {
    let input = cone_input(&a.input)?;
    let res = residual(&input, a.input.n)?;
    let cone_fn = cone_function(&input.u, a.input.n, res.normalization)?;
    let level = match a.level {
        Some(l) => l,
        None => {
            let mut vals: Vec<f64> = cone_fn.iter().filter(|&(x, _)| input.region[x]).map(|(_, v)| v).collect();
            if vals.is_empty() {
                return Err(monocone::Error::Precondition("region holds no vertices".into()).into());
            }
            vals.sort_by(f64::total_cmp);
            vals[vals.len() / 2]
        }
    };
    let sample = cross_section(&input.space, &cone_fn, level, a.samples)?;
    let dd = dd_prime_check(&sample);
    let summary = json!({
        "level": level,
        "components": sample.components,
        "rescaledDiameter": sample.rescaled_diameter,
        "cFit": dd.c_fit,
    });
    Ok(Artifacts::default()
        .json(&a.out, &json!({ "sample": sample, "ddPrime": dd }))?
        .summary(summary))
}

fn kato(a: &KatoArgs, seed: u64) -> Out {
    let rep = kato_search(&a.n, a.trials, &a.t, seed)?;
    let value = serde_json::to_value(&rep)?;
    let art = match &a.out {
        Some(p) => Artifacts::default().json(p, &rep)?,
        None => Artifacts::default(),
    };
    Ok(art.summary(value))
}

fn flow(a: &FlowArgs) -> Out {
    let space = load_graph(&a.space)?;
    check_vertex(&space, a.start)?;
    let u = load_field(&a.field, &space)?;
    let field = GradientField::new(&space, &u)?;
    let start = space
        .position(a.start)
        .ok_or_else(|| monocone::Error::Precondition("flow needs vertex positions".into()))?
        .to_vec();
    let traj = integrate_flow(&field, &start, a.tend, &FlowOptions::with_tol(a.tol))?;
    Ok(Artifacts::default().file(&a.out, traj.to_csv()).summary(json!({
        "status": traj.status,
        "endTime": traj.end_time(),
        "steps": traj.steps,
    })))
}

fn pipeline(a: &PipelineArgs, seed: u64) -> Out {
    let opts = PipelineOptions {
        betas: a.betas.clone(),
        t_grid: a.tgrid.0.clone(),
        solver_tol: a.tol,
        pairs: a.pairs,
        rho: a.rho,
        seed,
    };
    let rep = match load_space(&a.space)? {
        Space::Graph(g) => {
            let path = a
                .omega_c
                .as_ref()
                .ok_or_else(|| CliError::Config("--omega-c is required for graph spaces".into()))?;
            let spec = ExteriorSpec { omega_c: load_set(path, &g)?, r_out: a.rout, center: None };
            pipeline_cone_report(&g, &spec, &opts)?
        }
        Space::Radial(r) => pipeline_cone_report_radial(&r, a.r_in, a.rout.unwrap_or(f64::INFINITY), &opts)?,
    };
    let summary = json!({
        "monotone": rep.monotone.iter().map(|m| (m.beta, m.monotone)).collect::<Vec<_>>(),
        "rigidityWorst": rep.rigidity.worst(),
        "verdict": rep.verdict,
        "cosineMaxResidual": rep.cosine.max_residual,
    });
    Ok(Artifacts::default().json(&a.out, &rep)?.summary(summary))
}
