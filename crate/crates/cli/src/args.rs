//! Flags and the JSON run configuration.
//!
//! Every command's parameters are a struct of optional fields that is both a
//! clap argument group and a serde object, so a config document
//! `{command, params{...}, output{path, format}}` and the command line are
//! merged key by key, flags winning.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "sectorheat", version, about = "Short-time Dirichlet heat-trace coefficients of curvilinear polygons")]
pub struct Cli {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the result here instead of stdout (a `.log` sidecar is added).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Corner coefficient c½(α) as a Hadamard finite part.
    C12(C12Args),
    /// Heat traces of a separable model domain on a geometric time grid.
    Trace(TraceArgs),
    /// Fit short-time expansion coefficients to a trace CSV.
    Fit(FitArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::C12(_) => "c12",
            Command::Trace(_) => "trace",
            Command::Fit(_) => "fit",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Fast,
    Accurate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// Images when α = π/m, the Bessel series otherwise.
    Auto,
    Images,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DomainName {
    Disk,
    HalfDisk,
    Square,
    Rectangle,
    Sector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Polarops,
    ConicScaling,
    KernelOracle,
    TdSubleading,
    Pi2,
    Fits,
    Zeta,
    Mcmahon,
    All,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct C12Args {
    /// Corner angle in radians, in (0, 2π) and away from π.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    #[arg(long, value_enum)]
    pub kernel: Option<Kernel>,
    /// Orientation of ∇F(0); defaults to the reference corner.
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceArgs {
    #[arg(long, value_enum)]
    pub domain: Option<DomainName>,
    /// Radius of disk, half-disk and sector domains.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Rectangle side lengths.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Opening angle of a circular sector.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Bound on the omitted eigenvalue tail at every time.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitArgs {
    /// Trace CSV as written by `trace`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated exponents; defaults to −1, −½, …, 7/2.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub exponents: Option<Vec<f64>>,
    /// Compare with the geometric prediction for this domain.
    #[arg(long, value_enum)]
    pub predict: Option<DomainName>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Right-angle corner value used in predictions; defaults to 1/(16√π).
    #[arg(long)]
    pub c12: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Option<Suite>,
    /// Finite-part profile for the `pi2` suite.
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Seed of the random sample points.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub command: Option<String>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub output: OutputSpec,
}

pub fn read_config(path: &Path) -> CliResult<ConfigDoc> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Overlays the non-null fields of `flags` on `base` and decodes the result.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, base: &Map<String, Value>) -> CliResult<T> {
    let mut merged = base.clone();
    match serde_json::to_value(flags) {
        Ok(Value::Object(m)) => {
            for (k, v) in m {
                if !v.is_null() {
                    merged.insert(k, v);
                }
            }
        }
        Ok(_) => unreachable!("argument structs serialize to objects"),
        Err(e) => return Err(CliError::Usage(e.to_string())),
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid parameters: {e}")))
}

/// Fully resolved invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Combines the config document (if any) with the command line.
pub fn resolve(cli: Cli) -> CliResult<RunConfig> {
    let doc = match &cli.config {
        Some(p) => read_config(p)?,
        None => ConfigDoc::default(),
    };
    let name = match (&cli.command, &doc.command) {
        (Some(c), Some(d)) if c.name() != d => {
            return Err(CliError::Usage(format!("config command '{d}' conflicts with '{}'", c.name())))
        }
        (Some(c), _) => c.name().to_string(),
        (None, Some(d)) => d.clone(),
        (None, None) => return Err(CliError::Usage("no command given (see --help)".into())),
    };
    let p = &doc.params;
    let command = match (name.as_str(), cli.command) {
        ("c12", c) => Command::C12(merge(&as_c12(c), p)?),
        ("trace", c) => Command::Trace(merge(&as_trace(c), p)?),
        ("fit", c) => Command::Fit(merge(&as_fit(c), p)?),
        ("verify", c) => Command::Verify(merge(&as_verify(c), p)?),
        (other, _) => return Err(CliError::Usage(format!("unknown command '{other}'"))),
    };
    Ok(RunConfig {
        command,
        output_path: cli.output.or(doc.output.path),
        format: cli.format.or(doc.output.format),
    })
}

fn as_c12(c: Option<Command>) -> C12Args {
    match c {
        Some(Command::C12(a)) => a,
        _ => C12Args::default(),
    }
}

fn as_trace(c: Option<Command>) -> TraceArgs {
    match c {
        Some(Command::Trace(a)) => a,
        _ => TraceArgs::default(),
    }
}

fn as_fit(c: Option<Command>) -> FitArgs {
    match c {
        Some(Command::Fit(a)) => a,
        _ => FitArgs::default(),
    }
}

fn as_verify(c: Option<Command>) -> VerifyArgs {
    match c {
        Some(Command::Verify(a)) => a,
        _ => VerifyArgs::default(),
    }
}
