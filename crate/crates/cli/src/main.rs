use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod manifest;

#[derive(Parser, Debug)]
#[command(name = "pccc", version, about = "Bounds, simulation and EXIT analysis for punctured turbo codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Directory for CSV files and manifests.
    #[arg(long, env = "PCCC_OUT_DIR", default_value = "pccc-out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Free effective distances and the non-systematic improvement condition.
    Check(CheckArgs),
    /// Union bounds of the parent (S) and non-systematic (NS) codes.
    Bound(BoundArgs),
    /// Monte Carlo bit error rate simulation.
    Ber(BerArgs),
    /// EXIT transfer characteristics or averaged decoding trajectories.
    Exit(ExitArgs),
    /// Rank puncturing patterns of equal rate.
    Rank(RankArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Constituent code, e.g. `1,5/7`.
    code: String,
    /// Child and parent rates.
    #[arg(long, num_args = 2, value_names = ["CHILD", "PARENT"], default_values = ["1/2", "1/3"])]
    rates: Vec<String>,
    /// Largest parity weight searched for weight-2 events.
    #[arg(long, default_value_t = 60)]
    j_max: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BoundKind {
    S,
    Ns,
    Both,
}

#[derive(Args, Debug)]
struct BoundArgs {
    code: String,
    /// Interleaver size.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = BoundKind::Both)]
    kind: BoundKind,
    /// Eb/N0 values in dB: `start:stop:step` or a comma list.
    #[arg(long, default_value = "0:7:0.25")]
    grid: String,
    #[arg(long, default_value_t = pccc::wef::DEFAULT_W_MAX)]
    w_max: usize,
    #[arg(long, default_value_t = pccc::wef::DEFAULT_J_MAX)]
    j_max: usize,
    /// Directory caching combined enumerators between runs.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct BerArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// `parent`, `NS`, `PS` or `p=<period>;s=<mask>;p1=<mask>;p2=<mask>`.
    #[arg(long)]
    pattern: Option<String>,
    /// Eb/N0 values in dB: `start:stop:step` or a comma list.
    #[arg(long)]
    ebno: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    max_frames: Option<u64>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `random` or `identity`.
    #[arg(long)]
    interleaver: Option<String>,
    #[arg(long)]
    interleaver_seed: Option<u64>,
    #[arg(long)]
    batch: Option<usize>,
    /// Error-free channel.
    #[arg(long)]
    noiseless: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ExitMode {
    Curve,
    Trajectory,
}

#[derive(Args, Debug)]
struct ExitArgs {
    code: String,
    #[arg(long, default_value = "parent")]
    pattern: String,
    /// Eb/N0 values in dB.
    #[arg(long)]
    ebno: String,
    #[arg(long, value_enum, default_value_t = ExitMode::Curve)]
    mode: ExitMode,
    /// Bits per estimation block (curve mode).
    #[arg(long, default_value_t = 100_000)]
    block_len: usize,
    /// Blocks averaged per I_A point (curve mode).
    #[arg(long, default_value_t = 10)]
    blocks: usize,
    /// A-priori information grid (curve mode).
    #[arg(long)]
    ia_grid: Option<String>,
    /// Tunnel test ignores I_A at or above 1 − eps.
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Interleaver size (trajectory mode).
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Frames averaged (trajectory mode).
    #[arg(long, default_value_t = 100)]
    frames: usize,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    interleaver_seed: u64,
    /// Error-free channel (trajectory mode).
    #[arg(long)]
    noiseless: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct RankArgs {
    code: String,
    /// Interleaver size; also the transfer-curve block length.
    #[arg(long)]
    n: usize,
    /// Target Eb/N0 in dB.
    #[arg(long)]
    ebno: f64,
    /// One pattern per line, optionally preceded by a label: `name p=..;s=..;p1=..;p2=..`.
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long, default_value_t = 10)]
    blocks: usize,
    /// Block length of the exhaustive distance search.
    #[arg(long, default_value_t = 10)]
    small_n: usize,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => commands::check(a),
        Command::Bound(a) => commands::bound(a),
        Command::Ber(a) => commands::ber(a),
        Command::Exit(a) => commands::exit(a),
        Command::Rank(a) => commands::rank(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
