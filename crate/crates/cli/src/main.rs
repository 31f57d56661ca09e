use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Env var that relocates relative output paths.
pub const OUT_DIR_ENV: &str = "SPC_CACHING_OUT_DIR";

#[derive(Parser)]
#[command(name = "spc-caching", version, about = "Low-subpacketization coded caching toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a scheme and write it to a scheme file.
    Construct(ConstructArgs),
    /// Print the delivery schedule of a scheme file.
    Schedule(ScheduleArgs),
    /// Run placement and delivery over a random corpus and check every decode.
    Simulate(SimulateArgs),
    /// Rate and subpacketization comparison against the MN scheme.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Proposed,
    Mn,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum, default_value = "proposed")]
    kind: Kind,
    /// Proposed: alphabet size, cache ratio is 1/q.
    #[arg(long)]
    q: Option<usize>,
    /// Proposed: number of parallel classes.
    #[arg(long)]
    k: Option<usize>,
    /// MN: number of users.
    #[arg(long = "K")]
    users: Option<usize>,
    /// MN: cache ratio M/N, e.g. 1/2.
    #[arg(long)]
    ratio: Option<String>,
    /// Number of files in the library.
    #[arg(long, default_value_t = 1)]
    files: usize,
    /// Output scheme file; relative paths resolve against $SPC_CACHING_OUT_DIR.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    scheme: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// Library size N (defaults to the count stored in the scheme file).
    #[arg(long)]
    files: Option<usize>,
    /// File size F in bytes.
    #[arg(long, default_value_t = 4096)]
    file_size: usize,
    /// Corpus seed; also seeds --random demands unless --demand-seed is set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma separated 1-based file indices, one per user.
    #[arg(long, group = "demand")]
    demands: Option<String>,
    /// File holding demand vectors, one comma separated line each.
    #[arg(long, group = "demand")]
    demands_file: Option<PathBuf>,
    /// Number of random demand vectors.
    #[arg(long, group = "demand")]
    random: Option<usize>,
    /// Every demand vector in [N]^K (refused above 10^6 runs).
    #[arg(long, group = "demand")]
    exhaustive: bool,
    #[arg(long)]
    demand_seed: Option<u64>,
    /// Dump transmissions as hex (single demand vector only).
    #[arg(long)]
    hex: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 2)]
    q: u64,
    #[arg(long, default_value_t = 2)]
    k_min: u64,
    #[arg(long)]
    k_max: u64,
    #[arg(long, conflicts_with = "table")]
    csv: bool,
    #[arg(long)]
    table: bool,
    /// Add the memory-sharing columns (q = 2, k ≡ 1 mod 3).
    #[arg(long)]
    memshare: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Schedule(a) => commands::schedule(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
