//! `k3iso`: decisions, grid scans, form solving and period-model checks.
//!
//! Exit codes: `0` yes, `1` no, `2` unknown for `decide`; `0` success for the
//! other commands; `3` for any error, with a JSON error object on the output.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use k3iso_core::decide::Series;
use k3iso_core::qsolve::Strategy;

use crate::io::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "k3iso",
    version,
    about = "Decide when moduli of sheaves on a K3 surface are isomorphic to it"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide one instance given as JSON `{"r", "s", "d", "lattice", "full"}`.
    Decide {
        #[command(flatten)]
        io: InputOutput,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Decide every valid cell of a grid; rows come out in cell order.
    Scan(ScanArgs),
    /// Solve `γx² − δy² = m` under congruences, from `{"gamma", "delta", "m", "constraints"}`.
    SolveForm {
        #[command(flatten)]
        io: InputOutput,
        #[arg(long, value_enum, default_value_t = StrategyArg::OrbitWalk)]
        strategy: StrategyArg,
        /// Also cross-check against the bounded scan with `--bound`.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 10_000)]
        bound: u64,
    },
    /// Period-model report for `{"a", "b", "c", "d1", "d2"}` or a list of them.
    VerifyModel {
        #[command(flatten)]
        io: InputOutput,
    },
}

#[derive(Args, Debug)]
struct InputOutput {
    /// JSON input file, `-` for stdin.
    #[arg(long, default_value = "-")]
    input: PathBuf,
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, default_value_t = 1)]
    r_min: i64,
    #[arg(long)]
    r_max: i64,
    #[arg(long, default_value_t = 1)]
    s_min: i64,
    #[arg(long)]
    s_max: i64,
    #[arg(long, default_value_t = 1)]
    d_min: i64,
    #[arg(long, default_value_t = 1)]
    d_max: i64,
    #[arg(long)]
    max_n_half: i64,
    #[arg(long)]
    max_gamma_delta: i64,
    /// Treat each lattice as the full Picard lattice of a general surface.
    #[arg(long)]
    full: bool,
    /// Keep only rows certified by this series.
    #[arg(long, value_enum)]
    series: Option<SeriesArg>,
    /// Fill the `oracle` column by bounded enumeration up to `--bound`.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 10_000)]
    bound: u64,
    /// Worker threads; 0 picks the number of CPUs.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SeriesArg {
    A,
    B,
}

impl From<SeriesArg> for Series {
    fn from(s: SeriesArg) -> Series {
        match s {
            SeriesArg::A => Series::A,
            SeriesArg::B => Series::B,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StrategyArg {
    OrbitWalk,
    Substitution,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::OrbitWalk => Strategy::OrbitWalk,
            StrategyArg::Substitution => Strategy::Substitution,
        }
    }
}

const EXIT_ERROR: u8 = 3;

fn run(cli: Cli) -> Result<u8, (Failure, PathBuf)> {
    match cli.command {
        Command::Decide { io, format } => {
            commands::decide(&io.input, &io.out, format == Format::Csv).map_err(|e| (e, io.out))
        }
        Command::Scan(args) => {
            let out = args.out.clone();
            commands::scan(args).map(|()| 0).map_err(|e| (e, out))
        }
        Command::SolveForm {
            io,
            strategy,
            oracle,
            bound,
        } => commands::solve_form(&io.input, &io.out, strategy.into(), oracle.then_some(bound))
            .map(|()| 0)
            .map_err(|e| (e, io.out)),
        Command::VerifyModel { io } => commands::verify_model(&io.input, &io.out)
            .map(|()| 0)
            .map_err(|e| (e, io.out)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((failure, out)) => {
            io::report_failure(&failure, &out);
            ExitCode::from(EXIT_ERROR)
        }
    }
}
