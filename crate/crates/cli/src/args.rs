use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "monocone", version, about = "Potentials, monotone quantities and cone rigidity on graphs")]
pub struct Cli {
    /// Seed for every randomized stage.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "MONOCONE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build or inspect a space file.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Exterior and obstacle solves.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Green function with a pole.
    Green(GreenArgs),
    /// Volume-growth parabolicity test.
    Parabolicity(ParabolicityArgs),
    /// Monotone functional report along a grid of levels.
    Monotone(MonotoneArgs),
    /// Cone-rigidity diagnostics.
    #[command(subcommand)]
    Cone(ConeCmd),
    /// Random search for violations of the refined Kato inequality.
    Kato(KatoArgs),
    /// Gradient-flow trajectory from a vertex.
    Flow(FlowArgs),
    /// Exterior solve, monotone reports, rigidity and cosine law in one run.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceCmd {
    #[command(subcommand)]
    Build(BuildCmd),
    Info(InfoArgs),
    /// Write the vertices within a Euclidean ball of the positions as a set file.
    Select(SelectArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SelectArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Comma-separated centre.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub center: Vec<f64>,
    #[arg(long)]
    pub radius: f64,
    /// Select the complement of the ball instead.
    #[arg(long)]
    pub outside: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuildCmd {
    /// Cubical lattice `[-extent, extent]^N` with spacing `h`.
    Lattice {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        extent: f64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cone mesh over a circle or sphere with geometric shells.
    Cone {
        #[arg(long)]
        n: f64,
        #[arg(long, value_enum)]
        cross: CrossKind,
        /// Circle angle or sphere radius.
        #[arg(long)]
        size: f64,
        #[arg(long)]
        r_min: f64,
        #[arg(long)]
        r_max: f64,
        #[arg(long)]
        shells: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flat cylinder, periodic around.
    Cylinder {
        #[arg(long)]
        circumference: f64,
        #[arg(long)]
        length: f64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Path graph with unit weights.
    Path {
        #[arg(long)]
        vertices: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analytic cone; `euclidean` ignores `--size`.
    Radial {
        #[arg(long)]
        n: f64,
        #[arg(long, value_enum, default_value = "euclidean")]
        cross: RadialKind,
        #[arg(long)]
        size: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossKind {
    Circle,
    Sphere,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialKind {
    Euclidean,
    Circle,
    Sphere,
}

#[derive(Debug, Args, Serialize)]
pub struct InfoArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Report the vertex nearest to this comma-separated point.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub nearest: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveCmd {
    Exterior(ExteriorArgs),
    Obstacle(ObstacleArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ExteriorArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// JSON array of vertex ids held at one.
    #[arg(long)]
    pub omega_c: PathBuf,
    /// Truncation radius; without it only the builder boundary is pinned to zero.
    #[arg(long)]
    pub rout: Option<f64>,
    #[arg(long)]
    pub center: Option<usize>,
    /// Second, smaller truncation radius; the output becomes the two-radius far-field estimate.
    #[arg(long, requires = "rout")]
    pub extrapolate_from: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ObstacleArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub e: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Result JSON; the potential goes to a sibling `.potential.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenMethod {
    Shell,
    Time,
}

#[derive(Debug, Args, Serialize)]
pub struct GreenArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub pole: usize,
    #[arg(long, value_enum, default_value = "shell")]
    pub method: GreenMethod,
    /// Shell radius for the shell method.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Start of the time window handled by the heat kernel.
    #[arg(long, default_value_t = 0.1)]
    pub t_split: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ParabolicityArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub center: usize,
    #[arg(long, default_value_t = f64::INFINITY)]
    pub smax: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `a:b:n`, `n` evenly spaced points from `a` to `b`.
#[derive(Debug, Clone, Serialize)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected a:b:n, got {s:?}"));
    };
    let a: f64 = a.parse().map_err(|e| format!("bad start: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("bad end: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("bad count: {e}"))?;
    match n {
        0 => Err("grid needs at least one point".into()),
        1 => Ok(Grid(vec![a])),
        _ => Ok(Grid((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct MonotoneArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, value_parser = parse_grid)]
    pub tgrid: Grid,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeCmd {
    Rigidity(RigidityArgs),
    Cosine(CosineArgs),
    CrossSection(SectionArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct FieldInput {
    #[arg(long)]
    pub space: PathBuf,
    /// Harmonic potential with values in `[0, 1]`.
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub n: f64,
    /// Levels of the potential bounding the checked region.
    #[arg(long, default_value_t = 0.2)]
    pub t_min: f64,
    #[arg(long, default_value_t = 0.8)]
    pub t_max: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RigidityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: FieldInput,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CosineArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: FieldInput,
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SectionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: FieldInput,
    /// Level of the cone function; defaults to its median over the region.
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long, default_value_t = 40)]
    pub samples: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct KatoArgs {
    /// Matrix dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
    pub t: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FlowArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub start: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub tend: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Held set for graph spaces.
    #[arg(long)]
    pub omega_c: Option<PathBuf>,
    #[arg(long)]
    pub rout: Option<f64>,
    /// Inner radius on the radial backend.
    #[arg(long, default_value_t = 1.0)]
    pub r_in: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0])]
    pub betas: Vec<f64>,
    #[arg(long, value_parser = parse_grid, default_value = "0.2:0.8:7")]
    pub tgrid: Grid,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.2:0.6:3").unwrap().0;
        assert_eq!(g.len(), 3);
        assert!((g[1] - 0.4).abs() < 1e-15 && (g[2] - 0.6).abs() < 1e-15);
        assert_eq!(parse_grid("1:2:1").unwrap().0, vec![1.0]);
        assert!(parse_grid("0.2:0.6").is_err());
        assert!(parse_grid("a:1:3").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
