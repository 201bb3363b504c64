//! `thinfilm` command-line tool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thinfilm::commands::{self, Report};
use thinfilm::config::{self, *};
use thinfilm::core::wkbj::{MatchRoot, YConvention};
use thinfilm::core::StartKind;
use thinfilm::output::{Format, Sink};
use thinfilm::UsageError;

#[derive(Parser)]
#[command(name = "thinfilm", version, about = "Self-similar focusing solutions of the thin film equation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file with keys for the subcommand, flat or under a table named after it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: $THINFILM_OUT_DIR or the working directory].
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Do not print the summary.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Far-field constants C1(alpha), C2(alpha) of n = 0 shots on an alpha grid.
    LinearScan(LinearScanArgs),
    /// Linear eigenvalues alpha_k from coincident zeros of C1 and C2.
    LinearEigen(LinearEigenArgs),
    /// Nonlinear branches alpha_k(n) by minimal-growth shooting.
    NonlinearBranch(BranchArgs),
    /// Oscillatory component phi(s) of a maximal solution and its periodicity.
    Osc(OscArgs),
    /// Small-n WKBJ identities and inner/outer matching.
    WkbjCheck(WkbjArgs),
    /// Hoelder and Sobolev regularity of the focusing trace.
    Regularity(RegularityArgs),
}

#[derive(Args, Serialize)]
struct LinearScanArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<u32>,
    /// Origin normalisation: sh1 or sh2.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<StartKind>,
    /// Explicit comma-separated alpha grid.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_start: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_stop: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_step: Option<f64>,
    /// Fit window `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rel_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_fail_fraction: Option<f64>,
}

#[derive(Args, Serialize)]
struct LinearEigenArgs {
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dims: Option<Vec<u32>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    offset: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    coincidence: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x_tol: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
}

#[derive(Args, Serialize)]
struct BranchArgs {
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ks: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dims: Option<Vec<u32>>,
    /// Increasing n values, the first in (0, 1e-3].
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_grid: Option<Vec<f64>>,
    /// Mobility floor.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    y_star: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    check_delta: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    radius_check: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    radius_tol: Option<f64>,
}

#[derive(Args, Serialize)]
struct OscArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    s_hat_end: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ds_hat: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    floor: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rel_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    stride: Option<usize>,
    /// Comma-separated n values to classify for periodicity.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    scan: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    limit: Option<bool>,
}

#[derive(Args, Serialize)]
struct WkbjArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ns: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    band: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    /// Inner constant `re,im`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k1: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_convention)]
    #[serde(skip_serializing_if = "Option::is_none")]
    convention: Option<YConvention>,
    #[arg(long, value_parser = parse_root)]
    #[serde(skip_serializing_if = "Option::is_none")]
    root: Option<MatchRoot>,
}

#[derive(Args, Serialize)]
struct RegularityArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<u32>,
    /// alpha_1, alpha_2, ... in branch order.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<Vec<f64>>,
}

fn parse_convention(s: &str) -> Result<YConvention, String> {
    match s {
        "consistent" => Ok(YConvention::Consistent),
        "as-printed" => Ok(YConvention::AsPrinted),
        _ => Err("expected consistent or as-printed".into()),
    }
}

fn parse_root(s: &str) -> Result<MatchRoot, String> {
    match s {
        "growing" => Ok(MatchRoot::Growing),
        "real" => Ok(MatchRoot::Real),
        _ => Err("expected growing or real".into()),
    }
}

fn execute<C, A>(name: &'static str, common: &Common, args: &A, run: fn(&C, Sink) -> anyhow::Result<Report>) -> anyhow::Result<Report>
where
    C: serde::de::DeserializeOwned + Serialize + Default,
    A: Serialize,
{
    let cfg: C = config::resolve(name, common.config.as_deref(), args)?;
    let dir = config::output_dir(common.out_dir.as_deref());
    let sink = Sink::new(dir, common.format, name, serde_json::to_value(&cfg)?)?;
    run(&cfg, sink)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let result = match &cli.command {
        Command::LinearScan(a) => execute::<LinearScanConfig, _>("linear-scan", c, a, commands::linear_scan),
        Command::LinearEigen(a) => execute::<LinearEigenConfig, _>("linear-eigen", c, a, commands::linear_eigen),
        Command::NonlinearBranch(a) => execute::<BranchConfig, _>("nonlinear-branch", c, a, commands::nonlinear_branch),
        Command::Osc(a) => execute::<OscConfig, _>("osc", c, a, commands::osc),
        Command::WkbjCheck(a) => execute::<WkbjConfig, _>("wkbj-check", c, a, commands::wkbj_check),
        Command::Regularity(a) => execute::<RegularityConfig, _>("regularity", c, a, commands::regularity),
    };
    match result {
        Ok(report) => {
            if !c.quiet {
                for line in &report.lines {
                    println!("{line}");
                }
                for f in &report.files {
                    println!("wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
