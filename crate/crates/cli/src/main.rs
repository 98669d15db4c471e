//! `ncsvm` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ncsvm::penalty::DEFAULT_LAMBDA;
use ncsvm::{PenaltyConfig, PenaltyKind, SolverConfig};

#[derive(Parser, Debug)]
#[command(
    name = "ncsvm",
    version,
    about = "Sparse linear SVMs with nonconvex penalties, trained by ADMM"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model and write model.json, trace.csv and report.json.
    Train(TrainArgs),
    /// Apply a saved model to a LIBSVM file.
    Predict(PredictArgs),
    /// Grid search over (rho1, rho2) with a stratified train/test split.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, default_value = "scad", value_parser = parse_kind)]
    pub penalty: PenaltyKind,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Defaults to 3.7 for scad, 3 for mcp and 1 otherwise.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub rho1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = ncsvm::admm::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = ncsvm::admm::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn config(&self) -> ncsvm::Result<SolverConfig> {
        let theta = self.theta.unwrap_or_else(|| self.penalty.default_theta());
        let penalty = PenaltyConfig::new(self.penalty, self.lambda, theta)?;
        let cfg = SolverConfig {
            penalty,
            rho1: self.rho1,
            rho2: self.rho2,
            beta: self.beta,
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_kind(s: &str) -> Result<PenaltyKind, String> {
    s.parse().map_err(|e: ncsvm::Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Held-out data scored after training.
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    /// Hold out this fraction per class and score on it.
    #[arg(long, conflicts_with = "test_data")]
    pub split_fraction: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Model output path (default: <out-dir>/model.json).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Use this test set instead of splitting `--data`.
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub split_fraction: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Pairs "r1:r2,r1:r2,..."; defaults to the full 6x6 grid.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
