use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psatz_cli::commands::{run_check, run_info, run_interpolate};
use psatz_cli::Flags;

/// Nonlinear interpolants for pairs of semi-algebraic systems.
#[derive(Parser)]
#[command(name = "psatz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize and validate an interpolant for every disjunct pair.
    Interpolate {
        problem: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Validate a given `q > 0` against the problem by sampling.
    Check {
        problem: PathBuf,
        interpolant: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Predicted SDP dimensions per degree bound.
    Info {
        problem: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    /// auto, general or archimedean
    #[arg(long)]
    mode: Option<String>,
    /// Initial degree bound (even).
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    max_degree: Option<u32>,
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    feas_tol: Option<f64>,
    /// Sample attempts per side.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    margin: Option<f64>,
    /// Decimals for printed coefficients.
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long)]
    json: bool,
    /// Worker threads for disjunct pairs.
    #[arg(long)]
    parallel: Option<usize>,
    /// Write the final SDP of each pair in sparse block format.
    #[arg(long, value_name = "PATH")]
    dump_sdp: Option<PathBuf>,
}

impl From<Opts> for Flags {
    fn from(o: Opts) -> Self {
        Flags {
            mode: o.mode,
            degree: o.degree,
            max_degree: o.max_degree,
            gap_tol: o.gap_tol,
            feas_tol: o.feas_tol,
            samples: o.samples,
            seed: o.seed,
            margin: o.margin,
            precision: o.precision,
            json: o.json,
            parallel: o.parallel,
            dump_sdp: o.dump_sdp,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let (outcome, json) = match cli.command {
        Command::Interpolate { problem, opts } => {
            let f = Flags::from(opts);
            (run_interpolate(&problem, &f), f.json)
        }
        Command::Check {
            problem,
            interpolant,
            opts,
        } => {
            let f = Flags::from(opts);
            (run_check(&problem, &interpolant, &f), f.json)
        }
        Command::Info { problem, opts } => {
            let f = Flags::from(opts);
            (run_info(&problem, &f), f.json)
        }
    };
    let out = outcome.render(json);
    if outcome.exit >= 64 && !json {
        eprint!("{out}");
    } else {
        print!("{out}");
    }
    ExitCode::from(outcome.exit as u8)
}
