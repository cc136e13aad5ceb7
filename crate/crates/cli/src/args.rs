use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linag_core::refinement::DEFAULT_TOLERANCE;

#[derive(Debug, Parser)]
#[command(name = "linag", version, about = "Verify cascades of linear assume/guarantee contracts")]
pub struct Cli {
    /// Run every stage on the current thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether UPSTREAM ⊗ DOWNSTREAM refines COMPOSITE.
    Refine(RefineArgs),
    /// Decide whether an affine closed loop satisfies a contract.
    Satisfy(SatisfyArgs),
    /// Check extendability of one-step constraint triples.
    Extend(ExtendArgs),
    /// Verify and simulate the two-vehicle example end to end.
    Casestudy(CasestudyArgs),
    /// Write the two-vehicle contracts, system and scenario as input files.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ToleranceArg {
    /// Non-positivity tolerance for LP values.
    #[arg(long, env = "LINAG_TOL", default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Print the JSON report on stdout instead of the text summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtendPolicy {
    /// Report problems but keep the refinement verdict.
    Warn,
    /// Fail the run unless every triple is certified extendable.
    Fail,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    pub upstream: PathBuf,
    pub downstream: PathBuf,
    pub composite: PathBuf,
    /// Steps spanned by the downstream-assumption implication (1 or 2) [default: 1].
    #[arg(long)]
    pub horizon_ii: Option<usize>,
    /// Steps spanned by the composite-guarantee implication (1 or 2) [default: 1].
    #[arg(long)]
    pub horizon_iii: Option<usize>,
    /// Pick horizons from the guarantee structure; explicit flags win.
    #[arg(long)]
    pub auto_horizon: bool,
    #[command(flatten)]
    pub tol: ToleranceArg,
    /// Also check the extendability of the stacked assumption/guarantee triples.
    #[arg(long)]
    pub check_extendability: bool,
    #[arg(long, value_enum, default_value_t = ExtendPolicy::Warn)]
    pub extendability_policy: ExtendPolicy,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Debug, Args)]
pub struct SatisfyArgs {
    pub system: PathBuf,
    pub contract: PathBuf,
    pub init: PathBuf,
    #[command(flatten)]
    pub tol: ToleranceArg,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    /// Triple files `{V1, V0, v0}`.
    #[arg(required_unless_present = "cascade")]
    pub files: Vec<PathBuf>,
    /// Check the three stacked triples of a cascade instead
    /// (UPSTREAM DOWNSTREAM COMPOSITE).
    #[arg(long, num_args = 3, value_names = ["UPSTREAM", "DOWNSTREAM", "COMPOSITE"], conflicts_with = "files")]
    pub cascade: Option<Vec<PathBuf>>,
    #[command(flatten)]
    pub out: ReportArgs,
}

#[derive(Debug, Args)]
pub struct CasestudyArgs {
    /// Scenario file; built-in defaults when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parameter override `key=value`, applied after the scenario is loaded.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(flatten)]
    pub tol: ToleranceArg,
    /// Output directory for traces, headway.csv and summary.json.
    #[arg(long, default_value = "casestudy-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}
