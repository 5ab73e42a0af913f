use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::CliError;

#[derive(Parser)]
#[command(name = "weakbmo", version, about = "Rearrangements, weak L-infinity, BMO and coverings on finite metric measure spaces")]
struct Cli {
    /// Relative tolerance for identities that hold exactly.
    #[arg(long, global = true, default_value_t = weakbmo::numeric::EXACT_TOL)]
    tol_exact: f64,
    /// Relative tolerance for equality of optimal constants.
    #[arg(long, global = true, default_value_t = weakbmo::numeric::CONST_TOL)]
    tol_const: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a space and a function to a directory.
    Gen(GenArgs),
    /// Distribution function, rearrangement and weak-L-infinity constants.
    Analyze(AnalyzeArgs),
    /// BMO norm, tail-oscillation constant and per-ball table.
    BmoReport(BmoArgs),
    /// Covering of F ∩ B0 by balanced balls.
    Cover(CoverArgs),
    /// Mean oscillation of the dyadic counterexample over its test balls.
    Counterexample(CounterexampleArgs),
    /// Randomized check of every property; exit 1 on a violation.
    Verify(VerifyArgs),
    /// CSV tables from an analyze or bmo-report JSON file.
    PlotData(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Dyadic,
    LogExample,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Masses {
    Unit,
    Dyadic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Uniform,
    Lattice,
    Ultrametric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Template {
    Gaussian,
    LogSingular,
    Quantized,
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    /// Truncation of the dyadic space.
    #[arg(long = "K", default_value_t = 40)]
    k: usize,
    /// Dimension (log example) or number of atoms (random).
    #[arg(long)]
    n: Option<usize>,
    /// Cells per axis of the log example grid.
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, value_enum, default_value = "unit")]
    masses: Masses,
    #[arg(long, value_enum, default_value = "uniform")]
    layout: Layout,
    #[arg(long, value_enum, default_value = "gaussian")]
    template: Template,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    function: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BmoArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    function: PathBuf,
    #[arg(long, default_value_t = 3.0)]
    rho: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CoverArgs {
    #[command(subcommand)]
    action: Option<CoverAction>,
    #[arg(long)]
    space: Option<PathBuf>,
    /// Center id and radius of B0, as `id,radius`.
    #[arg(long)]
    ball: Option<String>,
    /// JSON list of the atom ids in F.
    #[arg(long = "F")]
    f: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CoverAction {
    /// Randomized covering suite.
    Verify(SuiteArgs),
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = weakbmo::verify::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(long = "K", default_value_t = 40)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = weakbmo::verify::DEFAULT_SEED)]
    seed: u64,
    /// Instances per suite; defaults to 500, 300 and 200.
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    analysis: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tolerances = weakbmo::verify::Tolerances { exact: cli.tol_exact, constant: cli.tol_const };
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Analyze(args) => commands::analyze(args, tolerances),
        Command::BmoReport(args) => commands::bmo_report(args, tolerances),
        Command::Cover(args) => commands::cover(args, tolerances),
        Command::Counterexample(args) => commands::counterexample(args),
        Command::Verify(args) => commands::verify(args, tolerances),
        Command::PlotData(args) => commands::plot_data(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
