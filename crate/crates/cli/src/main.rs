mod analyze;
mod estimate;
mod input;
mod manifest;
mod predict;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lrdht_core::ingest::WindowMode;

/// Exit codes: 0 success, 2 usage, 3 data, 4 verification failure.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "lrdht", version, about = "Long-range dependence and heavy-tail diagnostics")]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory or file, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a linear process and its products.
    Simulate(simulate::SimulateArgs),
    /// Convergence/divergence table for price files, return series or ensembles.
    Analyze(analyze::AnalyzeArgs),
    /// Estimate σ and α₁ from verdict tables (or raw inputs).
    Estimate(estimate::EstimateArgs),
    /// Run the self-check suites.
    Verify(verify::VerifyArgs),
    /// Verdict table implied by given σ and α₁.
    TablePredict(predict::PredictArgs),
}

/// Grid and running-mean settings shared by `analyze` and `estimate`.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Powers s, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    s_list: Vec<u32>,

    /// Exponents 1/p, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.7,0.8,0.9,1.0")]
    exponents: Vec<f64>,

    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,

    #[arg(long, default_value_t = 0.005)]
    rho: f64,

    /// 1-based index where the verdict averages begin.
    #[arg(long, default_value_t = 601)]
    start: usize,

    /// Rescale start and verdict offsets to the series length.
    #[arg(long)]
    proportional: bool,

    /// Price column in CSV inputs.
    #[arg(long, default_value = "Adj Close")]
    column: String,

    /// Column of TSV ensembles to analyse (default `d`).
    #[arg(long)]
    series_column: Option<String>,

    /// Return window for price files.
    #[arg(long, value_enum, default_value_t = WindowArg::Auto)]
    window: WindowArg,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum WindowArg {
    Auto,
    Dates,
    Offsets,
    Full,
}

impl From<WindowArg> for WindowMode {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Auto => WindowMode::Auto,
            WindowArg::Dates => WindowMode::Dates,
            WindowArg::Offsets => WindowMode::Offsets,
            WindowArg::Full => WindowMode::Full,
        }
    }
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl From<lrdht_core::Error> for Failure {
    fn from(e: lrdht_core::Error) -> Self {
        let code = if e.is_data_error() { EXIT_DATA } else { EXIT_USAGE };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::data(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

fn run(cli: Cli) -> CliResult<u8> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let argv: Vec<String> = std::env::args().collect();
    let ctx = Context {
        seed: cli.seed,
        out: cli.out,
        argv,
    };
    match cli.command {
        Command::Simulate(a) => simulate::run(&ctx, a),
        Command::Analyze(a) => analyze::run(&ctx, a),
        Command::Estimate(a) => estimate::run(&ctx, a),
        Command::Verify(a) => verify::run(&ctx, a),
        Command::TablePredict(a) => predict::run(&ctx, a),
    }
}

pub struct Context {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub argv: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
