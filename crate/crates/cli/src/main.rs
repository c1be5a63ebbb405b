//! `pmstat`: batch experiments on convergence defects of real sequences
//! in partial metric spaces.
//!
//! Exit status is 0 on success, 1 when a checked claim or axiom fails and
//! 2 on usage or configuration errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "pmstat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace defects over the grid and classify them.
    Analyze(AnalyzeArgs),
    /// Fit the growth exponent of the exception count.
    EstimateOrder(EstimateArgs),
    /// Check inclusion results, run the counterexample search and the
    /// worked examples.
    Theorems(TheoremsArgs),
    /// Check the partial metric axioms on seeded samples or a table.
    Axioms(AxiomsArgs),
}

#[derive(Args)]
pub struct Common {
    /// TOML experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Verdict tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args)]
pub struct Inputs {
    /// square, constant:V, eventually:V:FROM[:HEAD], poly:GAMMA[:V],
    /// tail:LAMBDA[:neg] or table:PATH.
    #[arg(long)]
    pub sequence: Option<String>,
    /// max, neg_min, usual or custom:PATH.
    #[arg(long)]
    pub metric: Option<String>,
    /// identity, affine:A, log or table:PATH.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    /// Comma-separated indices.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub inputs: Inputs,
    /// stat, lambda_stat, cesaro, v_lambda.
    #[arg(long, value_delimiter = ',')]
    pub functional: Vec<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
}

#[derive(Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Orders to classify against the fitted exponent.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
}

#[derive(Args)]
pub struct TheoremsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub inputs: Inputs,
    /// Theorem id (e.g. T3.6i) or `all`; repeatable.
    #[arg(long)]
    pub case: Vec<String>,
    /// Every result plus the worked examples.
    #[arg(long)]
    pub all: bool,
    /// exact, verdict or both.
    #[arg(long)]
    pub mode: Option<String>,
    /// Random search trials.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub examples: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long)]
    pub n0: Option<usize>,
}

#[derive(Args)]
pub struct AxiomsArgs {
    /// max, neg_min, usual or custom:PATH.
    #[arg(long, default_value = "max")]
    pub metric: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::EstimateOrder(a) => commands::estimate_order(a),
        Command::Theorems(a) => commands::theorems(a),
        Command::Axioms(a) => commands::axioms(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
