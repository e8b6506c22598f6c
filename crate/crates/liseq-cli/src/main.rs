//! `liseq`: parse, sequentialize, explore and cross-check parameterized
//! programs.
//!
//! Exit codes: 0 success, 1 property mismatch, 2 usage or input error,
//! 3 inconclusive because a bound cut the search short.

mod commands;
mod corpus;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use liseq::lang::Type;
use liseq::param_oracle::Bounds;
use liseq::seq_explorer::ExplorerBounds;

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "liseq", version, about = "Lazy sequentialization of parameterized programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explore the concurrent program directly under a k-round bound.
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        #[command(flatten)]
        out: JsonArg,
    },
    /// Emit the lazy sequentialization.
    Lazy(TransformArgs),
    /// Emit the eager sequentialization.
    Eager(TransformArgs),
    /// Explore a sequential program.
    Run {
        file: PathBuf,
        /// Statement map written by `lazy` or `eager`.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Record every `linear_int` activation.
        #[arg(long)]
        io: bool,
        #[command(flatten)]
        bounds: BoundArgs,
        #[command(flatten)]
        out: JsonArg,
    },
    /// List the linear interfaces of the program with k rounds.
    Interfaces {
        file: PathBuf,
        /// Keep only interfaces whose first input `init` can produce.
        #[arg(long)]
        initial: bool,
        #[command(flatten)]
        bounds: BoundArgs,
        #[command(flatten)]
        out: JsonArg,
    },
    /// Build the pushdown system for k rounds and decide reachability.
    Pds {
        file: PathBuf,
        /// Print size counts against their envelopes.
        #[arg(long)]
        stats: bool,
        /// Largest number of locations to build.
        #[arg(long, default_value_t = 500_000)]
        budget: usize,
        #[command(flatten)]
        bounds: BoundArgs,
        #[command(flatten)]
        out: JsonArg,
    },
    /// Cross-check the oracle with the lazy and eager translations.
    Compare {
        file: PathBuf,
        /// Skip the eager translation.
        #[arg(long)]
        no_eager: bool,
        /// Also check the pushdown system, building at most this many locations.
        #[arg(long, value_name = "BUDGET")]
        pds: Option<usize>,
        #[command(flatten)]
        bounds: BoundArgs,
        #[command(flatten)]
        out: JsonArg,
    },
    /// Compare every corpus program against its expected verdicts.
    Corpus {
        /// Corpus directory; defaults to `$LISEQ_CORPUS`, then `corpus`.
        dir: Option<PathBuf>,
        /// Rewrite the expected verdicts from this run.
        #[arg(long)]
        bless: bool,
        /// Round bounds to record when blessing (`-k` is not used here).
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        rounds: Vec<usize>,
        #[command(flatten)]
        bounds: BoundArgs,
        #[command(flatten)]
        out: JsonArg,
    },
    /// Pretty-print a program (`.sp` files are read as sequential).
    Fmt {
        file: PathBuf,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
        #[arg(long, value_parser = parse_range)]
        int_range: Option<Type>,
    },
}

#[derive(Args)]
struct TransformArgs {
    file: PathBuf,
    #[arg(short = 'k', default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Output program; standard output if absent.
    #[arg(short = 'o')]
    output: Option<PathBuf>,
    /// Statement map; defaults to `<output stem>.map.json` beside `-o`.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, value_parser = parse_range)]
    int_range: Option<Type>,
}

#[derive(Args, Clone)]
struct BoundArgs {
    /// Rounds.
    #[arg(short = 'k', default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    max_threads: u64,
    /// Steps per scheduled segment; unbounded if absent.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: Option<u64>,
    /// Call-stack depth.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    max_depth: u64,
    /// States explored before giving up.
    #[arg(long, default_value_t = 4_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: u64,
    /// Range of bare `int` declarations.
    #[arg(long, value_parser = parse_range, value_name = "LO:HI")]
    int_range: Option<Type>,
}

impl BoundArgs {
    fn bounds(&self) -> Bounds {
        Bounds {
            k: self.k as usize,
            max_threads: self.max_threads as usize,
            max_steps: self.max_steps.map(|s| s as usize),
            max_depth: self.max_depth as usize,
            max_states: self.max_states as usize,
        }
    }

    fn explorer(&self, record_io: bool) -> ExplorerBounds {
        ExplorerBounds {
            max_depth: self.max_depth as usize,
            max_root_depth: self.max_threads as usize,
            max_states: self.max_states as usize,
            record_io,
        }
    }
}

#[derive(Args, Clone)]
struct JsonArg {
    /// Also write the report as JSON.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<Type, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok(Type::int(lo, hi))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    use commands as c;
    match cli.command {
        Command::Oracle { file, bounds, out } => c::oracle(&file, &bounds, &out),
        Command::Lazy(t) => c::transform(&t, false),
        Command::Eager(t) => c::transform(&t, true),
        Command::Run {
            file,
            map,
            io,
            bounds,
            out,
        } => c::run(&file, map.as_deref(), io, &bounds, &out),
        Command::Interfaces {
            file,
            initial,
            bounds,
            out,
        } => c::interfaces(&file, initial, &bounds, &out),
        Command::Pds {
            file,
            stats,
            budget,
            bounds,
            out,
        } => c::pds(&file, stats, budget, &bounds, &out),
        Command::Compare {
            file,
            no_eager,
            pds,
            bounds,
            out,
        } => c::compare(&file, !no_eager, pds, &bounds, &out),
        Command::Corpus {
            dir,
            bless,
            rounds,
            bounds,
            out,
        } => corpus::run(dir, bless, &rounds, &bounds, &out),
        Command::Fmt { file, output, int_range } => c::fmt(&file, output.as_deref(), int_range),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            match &e {
                // Diagnostics carry their own prefix and position.
                CliError::Parse(text) => eprintln!("{}", text.trim_end()),
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
