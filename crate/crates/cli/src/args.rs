use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "contact-bench",
    version,
    about = "Contact process experiments on finite graphs",
    long_about = "Contact process experiments on finite graphs.\n\nGraph specs: line:N, star:N, tree:N:SEED, file:PATH.\nThe seed falls back to CONTACT_BENCH_SEED, then 0."
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Common {
    /// Graph spec: line:N, star:N, tree:N:SEED or file:PATH.
    #[arg(long, global = true)]
    pub graph: Option<String>,
    /// Infection rate per directed edge.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Base seed (default: $CONTACT_BENCH_SEED, else 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replicas: Option<usize>,
    /// Censoring cap for extinction times.
    #[arg(long, global = true)]
    pub time_cap: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// JSON file whose keys mirror the flags; flags win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads for replicas; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub c_line: Option<f64>,
    #[arg(long, global = true)]
    pub c_star: Option<f64>,
    #[arg(long, global = true)]
    pub c_coup: Option<f64>,
    #[arg(long, global = true)]
    pub c_split: Option<f64>,
    #[arg(long, global = true)]
    pub c_eps: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build a graph and print it (JSON, or an edge list with --format csv).
    Gen(GenArgs),
    /// One trajectory sampled on a time grid.
    Simulate(SimulateArgs),
    /// Monte Carlo mean extinction time from full occupancy.
    MeanTau(MeanTauArgs),
    /// Exact mean extinction time, CDF or survival from the Markov chain.
    Exact(ExactArgs),
    /// Exponential-law test of mean-normalized extinction times.
    Exp1(Exp1Args),
    /// Decoupling probability against full occupancy over time.
    Coupling(CouplingArgs),
    /// Balanced edge split, iterated split and centroid of a tree.
    Split(SplitArgs),
    /// Decompose a tree into a high-degree vertex, medium subtrees or few pieces.
    Classify(ClassifyArgs),
    /// Check an extinction-time inequality.
    Bounds(BoundsArgs),
    /// Mean extinction time across sizes of a family, with log-slope fit.
    Growth(GrowthArgs),
    /// Calibrate the line and star constants.
    Calibrate(CalibrateArgs),
    /// Check duality and path search against forward evolution.
    DualCheck(DualCheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Simulate(_) => "simulate",
            Command::MeanTau(_) => "mean-tau",
            Command::Exact(_) => "exact",
            Command::Exp1(_) => "exp1",
            Command::Coupling(_) => "coupling",
            Command::Split(_) => "split",
            Command::Classify(_) => "classify",
            Command::Bounds(_) => "bounds",
            Command::Growth(_) => "growth",
            Command::Calibrate(_) => "calibrate",
            Command::DualCheck(_) => "dual-check",
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenArgs {}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    /// Initial infected set: full, empty, or a comma list of vertices.
    #[arg(long)]
    pub start: Option<String>,
    /// Checkpoints: START:STOP:STEP or a comma list.
    #[arg(long)]
    pub t_grid: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MeanTauArgs {}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExactArgs {
    /// Also report P[tau <= t] on this grid.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Also report P[alive at t] from --start.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub start: Option<String>,
    /// Truncation error of transient probabilities.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Exp1Args {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub resamples: Option<usize>,
    /// Test these samples (one number per line, or a replica CSV) instead of simulating.
    #[arg(long)]
    pub samples_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CouplingArgs {
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub t_grid: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SplitArgs {
    #[arg(long)]
    pub degree_bound: Option<usize>,
    /// Split iteratively into this many parts.
    #[arg(long)]
    pub parts: Option<usize>,
    #[arg(long)]
    pub min_size: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Level3,
    Level4,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClassifyArgs {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub a_const: Option<f64>,
    /// Exponent slack of the level-4 thresholds.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Attract,
    Product,
    Floor,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub kind: Option<BoundKind>,
    /// Grid for the attract bound.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Force Monte Carlo for the attract bound.
    #[arg(long)]
    #[serde(default)]
    pub mc: bool,
    /// Parts for the product bound: comma lists separated by '/'.
    #[arg(long)]
    pub parts: Option<String>,
    /// Floor bound exponent slack.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Line,
    Star,
    RandomTree,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GrowthArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Comma list of vertex counts, increasing.
    #[arg(long)]
    pub sizes: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CalibrateArgs {
    /// Total replicas the calibration may spend.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DualCheckArgs {
    #[arg(long)]
    pub fixtures: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
}

fn is_unset(v: &Value) -> bool {
    matches!(v, Value::Null | Value::Bool(false))
}

/// Fills flags left unset on the command line from a JSON config object.
/// Keys must name a shared flag or a flag of the chosen subcommand.
pub fn merge_config(cli: Cli, config: &Value) -> Result<Cli, CliError> {
    let Value::Object(entries) = config else {
        return Err(CliError::Usage("config file must hold a JSON object".into()));
    };
    let config_path = cli.common.config.clone();
    let name = cli.command.name();
    let to_map = |v: Value| match v {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    let mut common = to_map(serde_json::to_value(&cli.common).expect("flags serialize"));
    let mut command = match serde_json::to_value(&cli.command).expect("flags serialize") {
        Value::Object(mut m) => to_map(m.remove(name).unwrap_or(Value::Null)),
        _ => Map::new(),
    };
    for (key, value) in entries {
        let slot = if common.contains_key(key) {
            common.get_mut(key)
        } else {
            command.get_mut(key)
        };
        match slot {
            Some(current) if is_unset(current) => *current = value.clone(),
            Some(_) => {}
            None if key == "config" => {}
            None => {
                return Err(CliError::Usage(format!(
                    "config key {key:?} is not a flag of `{name}`"
                )))
            }
        }
    }
    let bad = |e: serde_json::Error| CliError::Usage(format!("config file: {e}"));
    let mut common: Common = serde_json::from_value(Value::Object(common)).map_err(bad)?;
    common.config = config_path;
    let mut wrapped = Map::new();
    wrapped.insert(name.to_string(), Value::Object(command));
    let command: Command = serde_json::from_value(Value::Object(wrapped)).map_err(bad)?;
    Ok(Cli { common, command })
}
