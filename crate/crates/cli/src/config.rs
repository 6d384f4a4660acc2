//! Command-line arguments and the optional TOML config. A flag given on the
//! command line wins over the same key in the config file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::output::Failure;

#[derive(Parser, Debug)]
#[command(name = "pinchlab", version, about = "Eigenvalue pinching diagnostics for triangle meshes in space forms")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Sectional curvature δ of the ambient space form.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub ambient_delta: Option<f64>,
    /// Input mesh (OFF or OBJ).
    #[arg(long, global = true)]
    pub mesh: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative residual target of the eigensolver.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for random perturbations and profiles.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with the same keys, plus one table per command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a fixture mesh.
    Generate(GenerateArgs),
    /// Full pinching report of one mesh.
    Analyze(AnalyzeArgs),
    /// Riccati comparison and certificate rows.
    Rigidity(RigidityArgs),
    /// One report per amplitude or per glued-family ε.
    Sweep(SweepArgs),
    /// Built-in demonstration run.
    Example(ExampleArgs),
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Icosphere,
    Perturbed,
    Glued,
    Revolution,
}

#[derive(Args, Debug, Default)]
pub struct GenerateArgs {
    pub family: Option<Family>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub subdiv: Option<u32>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// `random` or `zonal:<degree>`.
    #[arg(long)]
    pub wave: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub ntheta: Option<usize>,
    /// Number of glued spheres.
    #[arg(long)]
    pub spheres: Option<usize>,
    /// Equatorial radius of the spheroid of revolution.
    #[arg(long)]
    pub equatorial: Option<f64>,
    /// Polar semi-axis of the spheroid of revolution.
    #[arg(long)]
    pub polar: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct AnalyzeArgs {
    /// Also write per-vertex H, |B|, |X|, ψ and Δr as CSV.
    #[arg(long)]
    pub fields: Option<PathBuf>,
    #[arg(long)]
    pub slack: Option<f64>,
    /// Bound A on |M|^{1/n}‖H‖∞ to flag.
    #[arg(long)]
    pub area_bound: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct RigidityArgs {
    /// `constant:K:R`, `linear:MU:DELTA:R`, `bump:MU:DELTA:R:CENTER:WIDTH:DEPTH` or `random:N`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub profiles: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Time steps per unit of R.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Directory for per-profile solution tables.
    #[arg(long)]
    pub solutions: Option<PathBuf>,
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Amplitude,
    Eps,
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    #[arg(long)]
    pub axis: Option<Axis>,
    /// Comma-separated amplitudes or ε values, one report each.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub subdiv: Option<u32>,
    /// `random` or `zonal:<degree>`.
    #[arg(long)]
    pub wave: Option<String>,
    /// Radial resolution of the glued family.
    #[arg(long)]
    pub nr: Option<usize>,
    /// Angular resolution of the glued family.
    #[arg(long)]
    pub ntheta: Option<usize>,
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExampleName {
    #[default]
    Sphere,
    Perturbed,
    Glued,
}

#[derive(Args, Debug, Default)]
pub struct ExampleArgs {
    pub name: Option<ExampleName>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub ambient_delta: Option<f64>,
    pub mesh: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub generate: GenerateSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
    #[serde(default)]
    pub rigidity: RigiditySection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    pub family: Option<Family>,
    pub radius: Option<f64>,
    pub subdiv: Option<u32>,
    pub amplitude: Option<f64>,
    pub wave: Option<String>,
    pub eps: Option<f64>,
    pub nr: Option<usize>,
    pub ntheta: Option<usize>,
    pub spheres: Option<usize>,
    pub equatorial: Option<f64>,
    pub polar: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    pub fields: Option<PathBuf>,
    pub slack: Option<f64>,
    pub area_bound: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct RigiditySection {
    pub profiles: Option<Vec<String>>,
    pub eps: Option<Vec<f64>>,
    pub steps: Option<usize>,
    pub solutions: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Option<Axis>,
    pub values: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub subdiv: Option<u32>,
    pub wave: Option<String>,
    pub nr: Option<usize>,
    pub ntheta: Option<usize>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Settings shared by every command after merging.
#[derive(Debug, Clone)]
pub struct Common {
    pub delta: f64,
    pub mesh: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tol: f64,
    pub seed: u64,
}

pub fn common(g: &GlobalArgs, f: &FileConfig) -> Common {
    Common {
        delta: g.ambient_delta.or(f.ambient_delta).unwrap_or(0.0),
        mesh: g.mesh.clone().or_else(|| f.mesh.clone()),
        out: g.out.clone().or_else(|| f.out.clone()),
        tol: g.tol.or(f.tol).unwrap_or(1e-10),
        seed: g.seed.or(f.seed).unwrap_or(7),
    }
}

/// Command-line list when given, config list otherwise.
pub fn list_or<T: Clone>(cli: &[T], file: &Option<Vec<T>>) -> Vec<T> {
    if cli.is_empty() {
        file.clone().unwrap_or_default()
    } else {
        cli.to_vec()
    }
}
