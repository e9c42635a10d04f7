//! `embedlab`: data emission for embeddability, cost and accessibility questions.
//!
//! Exit status is 0 on success, 2 when the computation succeeded with a
//! negative verdict, and 1 on error (with a JSON object on stderr).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::CliError;

#[derive(Parser, Debug)]
#[command(name = "embedlab", version, about = "Markovian embeddability toolkit")]
pub struct Cli {
    /// Seed for every randomized search or sample.
    #[arg(long, global = true, env = "EMBEDLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel scans; defaults to the number of logical cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format for tabular commands.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classical embeddability verdict with reason and generator witness.
    EmbedCheck(EmbedCheckArgs),
    /// Explicit quantum Markovian realization of a stochastic matrix.
    Qembed(QembedArgs),
    /// Classification of the 3×3 circulant family on an N×N grid.
    RegionScan(RegionScanArgs),
    /// Classical and quantum time costs against memory size.
    CostTable(CostTableArgs),
    /// Image and fixed-point statistics of random functions.
    Typicality(TypicalityArgs),
    /// States reachable from p with fixed point gamma.
    AccessRegion(AccessRegionArgs),
    /// Stepwise evolution along an extremal circle of a qubit.
    QubitPath(QubitPathArgs),
    /// Classical and quantum free energies and asymmetry along a trajectory.
    FreeEnergyAudit(FreeEnergyAuditArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct MatrixSource {
    /// Stochastic matrix as JSON `{"d": n, "entries": [[...]]}` with `entries[i][j] = P(i|j)`.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Circulant with first row `(1 − a − b, a, b)`.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub circulant: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct EmbedCheckArgs {
    #[command(flatten)]
    pub source: MatrixSource,
}

#[derive(Args, Debug)]
pub struct QembedArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    /// Time used for stages that only converge in the infinite-time limit.
    #[arg(long, default_value_t = embedlab::linalg::DEFAULT_T_TRUNC)]
    pub t_trunc: f64,
}

#[derive(Args, Debug)]
pub struct RegionScanArgs {
    /// Points per axis; `a = i/(N−1)`, `b = j/(N−1)`.
    #[arg(long)]
    pub grid: usize,
}

#[derive(Args, Debug)]
pub struct CostTableArgs {
    /// `f1`, `f2`, or a JSON file with `{"table": [...]}` or a 0/1 matrix.
    #[arg(long)]
    pub function: String,
    /// Bits per register for the named functions (`d = 2^s`).
    #[arg(long, default_value_t = 32)]
    pub bits: u32,
    /// Comma-separated memory sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub mem: Vec<u128>,
}

#[derive(Args, Debug)]
pub struct TypicalityArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Args, Debug)]
pub struct AccessRegionArgs {
    /// Initial distribution as JSON `{"d": n, "entries": [...]}`.
    #[arg(long)]
    pub p: PathBuf,
    /// Fixed point of the dynamics, same format as `--p`.
    #[arg(long)]
    pub gamma: PathBuf,
    /// Optional target distribution to test for membership.
    #[arg(long)]
    pub q: Option<PathBuf>,
    /// Use the linear-programming oracle.
    #[arg(long, conflicts_with = "closed_form")]
    pub lp: bool,
    /// Use closed forms (qubit intervals, majorisation for uniform fixed points).
    #[arg(long)]
    pub closed_form: bool,
}

#[derive(Args, Debug)]
pub struct QubitPathArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: f64,
    /// Signed z step: positive follows the upper circle, negative the lower one.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

#[derive(Args, Debug)]
pub struct FreeEnergyAuditArgs {
    /// CSV with header `t,x,y,z` (qubit Bloch vectors) or `t,p0,p1,...` (populations).
    #[arg(long)]
    pub trajectory: PathBuf,
    /// Comma-separated energy levels.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub levels: Vec<f64>,
    #[arg(long)]
    pub beta: f64,
}

/// Whether a successful run reached a positive or negative verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Positive,
    Negative,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new("invalid_input", e.to_string()))?;
    }
    let mut sink = output::Sink::open(cli.out.as_deref())?;
    let outcome = commands::dispatch(&cli, &mut sink)?;
    sink.finish()?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            CliError::new("usage", e.to_string().trim_end()).report();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(Outcome::Positive) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(2),
        Err(e) => {
            e.report();
            ExitCode::from(1)
        }
    }
}
