mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit codes: 0 success, 1 usage, 2 plan not realizable, 3 integrity failure, 4 suite failures.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    NotRealizable(String),
    Integrity(String),
    SuiteFailed(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::NotRealizable(_) => 2,
            Failure::Integrity(_) => 3,
            Failure::SuiteFailed(_) => 4,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<greedylab::Error>() {
            Some(greedylab::Error::NotRealizable(m)) => Failure::NotRealizable(m.clone()),
            Some(greedylab::Error::Integrity(m)) => Failure::Integrity(m.clone()),
            _ => Failure::Usage(e),
        }
    }
}

impl From<greedylab::Error> for Failure {
    fn from(e: greedylab::Error) -> Self {
        Failure::from(anyhow::Error::new(e))
    }
}

#[derive(Parser)]
#[command(
    name = "greedylab",
    version,
    about = "Greedy-algorithm constants: build spaces, estimate constants, replay proofs"
)]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a construction or a reference space and write it as JSON.
    Build(BuildArgs),
    /// Lower bound (with witness) for one constant.
    Estimate(EstimateArgs),
    /// Lower-bound curves for Phi, phi and rho on a t-grid.
    Curve(CurveArgs),
    /// Run proof-replay suites.
    Verify(VerifyArgs),
    /// Summary of a space: certificates, recorded bounds and a panel of estimates.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Toy,
    Fidelity,
}

#[derive(Args)]
pub struct BuildArgs {
    /// tqg-sep, lucc-not-qglc, qglc-not-lucc, fqg-not-ucc, lp, weak-lp or quasi-lp.
    #[arg(long)]
    pub construction: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "toy")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    pub m1: usize,
    #[arg(long = "m2-margin", default_value_t = 2.05)]
    pub m2_margin: f64,
    #[arg(long = "c-max", default_value_t = 1.0)]
    pub c_max: f64,
    /// Separation level for fidelity mode.
    #[arg(long = "M")]
    pub level: Option<f64>,
    /// Block count for fqg-not-ucc.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "pX", default_value_t = 1.0)]
    pub p_x: f64,
    #[arg(long = "pY", default_value_t = 2.0)]
    pub p_y: f64,
    /// Dimension for the reference spaces.
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Constant name, e.g. Ktq, Kql, Phi(0.5), beta(4,2), FundFn(3).
    #[arg(long)]
    pub constant: String,
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Phi, phi, rho or all.
    #[arg(long, default_value = "all")]
    pub curve: String,
    /// "start:end:count", values in (0, 1].
    #[arg(long = "t-grid", default_value = "0.125:1:8")]
    pub t_grid: String,
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: String,
    /// Space file; defaults to the canonical basis of l2 in dimension 8.
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "t-grid", default_value = "0.25:1:4")]
    pub t_grid: String,
    /// Search budget for the constant-relations suite.
    #[arg(long, default_value_t = 2_000)]
    pub budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json for a .json output path and csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, default_value_t = 2_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "t-grid", default_value = "0.25:1:4")]
    pub t_grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage(anyhow::anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.into()))?;
    }
    match cli.command {
        Command::Build(a) => commands::build(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Curve(a) => commands::curve(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Report(a) => commands::report(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(e) => eprintln!("error: {e:#}"),
                Failure::NotRealizable(report) => eprintln!("{report}"),
                Failure::Integrity(m) => eprintln!("integrity failure: {m}"),
                Failure::SuiteFailed(n) => eprintln!("{n} suite(s) reported failures"),
            }
            ExitCode::from(f.code())
        }
    }
}
