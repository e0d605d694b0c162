//! `tensorid` command line interface.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
pub mod reference;
pub mod table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_DEFECT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "tensorid",
    version,
    about = "Certify uniqueness of tensor rank decompositions"
)]
pub struct Cli {
    /// More log output on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generic identifiability of a shape at a rank.
    Generic(GenericArgs),
    /// Identifiability of one decomposition read from JSON.
    Specific(SpecificArgs),
    /// Generic check at r̄ for every shape up to a size bound.
    Sweep(SweepArgs),
    /// Largest provable rank for m x n x n shapes.
    Table(TableArgs),
    /// Derived quantities of a shape.
    ExpectedRank(ExpectedRankArgs),
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Prime of the first round of attempts.
    #[arg(long, default_value_t = tensorid::DEFAULT_PRIME)]
    pub prime: u32,
    /// Attempts per prime.
    #[arg(long, default_value_t = 3)]
    pub retries: usize,
    /// Prime of the second round.
    #[arg(long, default_value_t = tensorid::ESCALATION_PRIME)]
    pub escalate_prime: u32,
    /// Skip the second round.
    #[arg(long)]
    pub no_escalate: bool,
    /// Check the Hessian at every sampled point.
    #[arg(long)]
    pub all_points: bool,
    /// Ignore the catalog of known exceptions.
    #[arg(long)]
    pub no_catalog: bool,
    #[arg(long, env = "TENSORID_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl SearchArgs {
    pub fn config(&self) -> tensorid::GenericConfig {
        tensorid::GenericConfig {
            prime: self.prime,
            retries: self.retries,
            escalate_prime: (!self.no_escalate).then_some(self.escalate_prime),
            all_points: self.all_points,
            seed: self.seed,
            use_catalog: !self.no_catalog,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenericArgs {
    /// Dimensions, e.g. `5,5,5` (sorted automatically).
    #[arg(long)]
    pub shape: String,
    /// Defaults to r̄.
    #[arg(long)]
    pub rank: Option<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SpecificArgs {
    /// Decomposition JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Exact rational arithmetic (default).
    #[arg(long, conflicts_with = "prime")]
    pub exact: bool,
    /// Work over GF(q); a pass is only modular evidence.
    #[arg(long)]
    pub prime: Option<u32>,
    /// Exterior power of the Young flattening; defaults to floor(n3/2).
    #[arg(long)]
    pub p: Option<usize>,
    /// Contractions to stack (1-3); defaults to trying 1, 2, 3 in turn.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub rotations: Option<u8>,
    /// Assume the point is nonsingular instead of certifying it.
    #[arg(long)]
    pub skip_smoothness: bool,
    /// Work on the input factors instead of the multilinear-rank core.
    #[arg(long)]
    pub no_compress: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub max_pi: usize,
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSONL output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep existing records and skip their shapes.
    #[arg(long)]
    pub resume: bool,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Inclusive range of m, e.g. `5..8`.
    #[arg(long, default_value = "2..9")]
    pub rows: String,
    /// Inclusive range of n, e.g. `5..6`.
    #[arg(long, default_value = "4..9")]
    pub cols: String,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ExpectedRankArgs {
    #[arg(long)]
    pub shape: String,
    #[arg(long)]
    pub json: bool,
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    let mut out = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Generic(a) => commands::generic(a, &mut out),
        Command::Specific(a) => commands::specific(a, &mut out),
        Command::Sweep(a) => commands::sweep(a, &mut out),
        Command::Table(a) => commands::table(a, &mut out),
        Command::ExpectedRank(a) => commands::expected_rank(a, &mut out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_IO, e.to_string())
    }
}
