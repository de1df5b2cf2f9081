//! `hoqmc` command-line front end.
//!
//! Exit status: 0 when every requested check passes, 1 when some check
//! fails (the failures are listed in the report and on stderr), 2 on usage
//! or runtime errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hoqmc", version, about = "Higher-order scrambled digital nets")]
struct Cli {
    /// Worker threads for replications (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the points of a (possibly scrambled and interlaced) net.
    Points(PointsArgs),
    /// RMSE convergence table over a range of m.
    Converge(ConvergeArgs),
    /// Compute t and check the elementary-interval counts.
    Verify(VerifyArgs),
    /// Executable checks of the variance analysis.
    #[command(subcommand)]
    Theory(TheoryCommand),
}

#[derive(Subcommand, Debug)]
enum TheoryCommand {
    /// Compare the closed-form Owen expectation with Monte Carlo on a random case grid.
    OwenCheck(OwenCheckArgs),
    /// Exact gain coefficients of an interlaced digital net against their bound.
    Gain(GainArgs),
    /// Scrambled-estimator variance against the truncated Walsh decomposition.
    Vardecomp(VardecompArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NetScramble {
    None,
    Owen,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ConvergeScramble {
    None,
    Owen,
    Linear,
    /// Plain Monte Carlo with i.i.d. uniform points.
    Mc,
}

#[derive(Args, Debug)]
struct NetArgs {
    /// vdc, sobol, faure or zero (all-zero matrices). Defaults to vdc in one
    /// dimension, sobol in base 2 and faure otherwise.
    #[arg(long)]
    construction: Option<String>,
    #[arg(long, default_value_t = 2)]
    b: u32,
    #[arg(long)]
    m: u32,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PointsArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Coordinates of the generated net, before interlacing.
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// Interlacing factor d; the output has s / d coordinates.
    #[arg(long, default_value_t = 1)]
    interlace: usize,
    #[arg(long, value_enum, default_value_t = NetScramble::None)]
    scramble: NetScramble,
    #[arg(long, default_value_t = hoqmc::estimator::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    replication: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[arg(long, default_value = "example1")]
    integrand: String,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 6)]
    m_min: u32,
    #[arg(long, default_value_t = 14)]
    m_max: u32,
    #[arg(long, default_value_t = hoqmc::estimator::DEFAULT_REPLICATIONS)]
    reps: usize,
    #[arg(long, value_enum, default_value_t = ConvergeScramble::Owen)]
    scramble: ConvergeScramble,
    #[arg(long, default_value_t = hoqmc::estimator::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    b: u32,
    #[arg(long)]
    construction: Option<String>,
    /// Fail (exit 1) unless the fitted slope is at most this value.
    #[arg(long, allow_hyphen_values = true)]
    max_slope: Option<f64>,
    /// CSV table; the JSON summary goes next to it with extension `.json`.
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    net: NetArgs,
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// Check the net obtained by interlacing groups of this many coordinates.
    #[arg(long, default_value_t = 1)]
    interlace: usize,
    /// Claimed t to check; defaults to the computed one.
    #[arg(long)]
    t: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OwenCheckArgs {
    #[arg(long, default_value_t = 50)]
    cases: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = hoqmc::estimator::DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct GainArgs {
    /// Construction of the underlying net (vdc, sobol, faure).
    #[arg(long)]
    net: Option<String>,
    #[arg(long, default_value_t = 2)]
    b: u32,
    #[arg(long)]
    m: u32,
    /// Coordinates after interlacing.
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// A single level vector of length s * d, comma separated.
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<u32>>,
    /// Without --l, every nonzero level with |l|_1 up to this (default m + 4).
    #[arg(long)]
    max_norm: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VardecompArgs {
    #[arg(long, default_value = "example1")]
    integrand: String,
    #[arg(long)]
    construction: Option<String>,
    #[arg(long, default_value_t = 2)]
    b: u32,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 5)]
    m: u32,
    /// Largest |l|_1 kept in the decomposition.
    #[arg(long, default_value_t = 12)]
    budget: u32,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = hoqmc::estimator::DEFAULT_SEED)]
    seed: u64,
    /// Relative tolerance on the truncated sum.
    #[arg(long, default_value_t = 0.1)]
    rel: f64,
    /// Standard errors allowed on the empirical variance.
    #[arg(long, default_value_t = 4.0)]
    z: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Points(a) => commands::points(a),
        Command::Converge(a) => commands::converge(a),
        Command::Verify(a) => commands::verify(a),
        Command::Theory(TheoryCommand::OwenCheck(a)) => commands::owen_check(a),
        Command::Theory(TheoryCommand::Gain(a)) => commands::gain(a),
        Command::Theory(TheoryCommand::Vardecomp(a)) => commands::vardecomp(a),
    };
    match outcome {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in &failures {
                eprintln!("FAIL {} {}", f.id, f.detail);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
