use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Monte Carlo logical error rates, fits and overhead planning for
/// concatenated codes.
#[derive(Debug, Parser)]
#[command(name = "ftlab", version)]
pub struct Cli {
    /// Worker threads for shot-level parallelism (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Estimate logical CNOT error rates by Monte Carlo.
    Simulate(SimulateArgs),
    /// Fit scaling constants to simulate outputs.
    Fit(FitArgs),
    /// Compose a concatenation chain level by level.
    Compose(ComposeArgs),
    /// Find the chain with the smallest overhead reaching a target.
    Optimize(OptimizeArgs),
    /// Application error-rate targets.
    Targets(TargetsArgs),
    /// Re-run the configuration embedded in an earlier output file.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    Full,
    Simplified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountingArg {
    /// Leading-order verification terms for Hamming codes, post-selection otherwise.
    Auto,
    PostselectOnly,
    LeadingOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdleArg {
    Gaps,
    Lockstep,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteanePrepArg {
    Goto,
    Conventional,
}

fn count(s: &str) -> Result<u64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("{s:?} is not a non-negative integer"));
    }
    Ok(v as u64)
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// c4, c6, c4c6, steane, c4steane, hamming, or a compact name such as q5 or steane:2.
    #[arg(long)]
    pub code: String,
    #[arg(long)]
    pub level: Option<u8>,
    /// Hamming parameter of `--code hamming`.
    #[arg(long)]
    pub r: Option<u8>,
    /// Label of the Hamming code concatenated above (default r + 1).
    #[arg(long)]
    pub r_next: Option<u8>,
    /// Physical error rates, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    /// Idle error model: p, p/2 or p/10.
    #[arg(long, default_value = "p")]
    pub gamma: String,
    #[arg(long, default_value = "1e6", value_parser = count)]
    pub shots: u64,
    /// Shots per forced-failure run of the leading-order accounting.
    #[arg(long, default_value = "1e4", value_parser = count)]
    pub verification_shots: u64,
    #[arg(long, default_value_t = 10)]
    pub rounds: u32,
    #[arg(long, value_enum, default_value_t = VariantArg::Full)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = AccountingArg::Auto)]
    pub accounting: AccountingArg,
    #[arg(long, value_enum, default_value_t = IdleArg::Gaps)]
    pub idle: IdleArg,
    #[arg(long, value_enum, default_value_t = SteanePrepArg::Goto)]
    pub steane_prep: SteanePrepArg,
    /// Skip error detection of C4/C6 Bell pairs.
    #[arg(long)]
    pub no_bell_ed: bool,
    #[arg(long, env = "FTLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// simulate outputs (JSON or CSV).
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Base constants whose fitted entries are replaced (default: bundled).
    #[arg(long)]
    pub constants: Option<PathBuf>,
    /// Also fit the exponent of every group.
    #[arg(long)]
    pub free_exponent: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct PlanCommon {
    #[arg(long, default_value = "p")]
    pub gamma: String,
    /// Constants JSON (default: bundled).
    #[arg(long)]
    pub constants: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ComposeArgs {
    /// Chain such as c4c6:5+q5+q6+q7+q7, or table1.
    #[arg(long)]
    pub chain: String,
    #[arg(long, value_delimiter = ',', default_value = "1e-3")]
    pub p: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: PlanCommon,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct OptimizeArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 1e-24)]
    pub target: f64,
    /// c4c6, surface, steane, c4steane or all.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub underlying: Vec<String>,
    /// Also report the bare surface code reaching the target.
    #[arg(long)]
    pub bare_surface: bool,
    #[arg(long, default_value_t = 8)]
    pub max_underlying_level: u8,
    #[arg(long, default_value_t = 10)]
    pub max_hamming_levels: usize,
    #[arg(long, default_value_t = 401)]
    pub max_surface_distance: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: PlanCommon,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct TargetsArgs {
    #[arg(long, default_value_t = 2048)]
    pub n_bits: u32,
    #[arg(long, default_value_t = 5e17)]
    pub ops_per_second: f64,
    #[arg(long, default_value_t = 2.6e6)]
    pub seconds: f64,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Output file of an earlier run.
    pub file: PathBuf,
    /// Destination (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
