//! `mbk`: index sets, thresholds, monomial norms and p-monomial basis kernels
//! of Reinhardt monomial polyhedra from the command line.

mod commands;
mod error;

use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, ExitCode};

#[derive(Parser, Debug)]
#[command(
    name = "mbk",
    version,
    about = "Monomial L^p geometry of Reinhardt monomial polyhedra"
)]
#[command(
    after_help = "Exit codes: 0 success, 2 input validation, 3 undecidable/boundary, \
4 verification failure, 5 budget exhausted.\n\
Domains are JSON objects or shorthand such as omega_a:1,1,1,2, type1:1,1, type2:1,2, disc, \
hartogs:3/2, hartogs(2,inverted,swapped), hartogs:sqrt(2), product(disc,disc), dilate(disc,0.5), \
union(a,b), intersection(a,b)."
)]
pub struct Cli {
    /// Worker threads for parallel evaluation.
    #[arg(long, global = true, env = "MBK_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug)]
pub(crate) enum Command {
    /// Enumerate the p-allowable indices of a box and print the conditions.
    Sp {
        #[arg(long)]
        domain: String,
        /// Exact exponent, e.g. 2 or 3/2.
        #[arg(long)]
        p: String,
        /// Box as lo:hi per coordinate, e.g. -4:4,-4:4.
        #[arg(long = "box", allow_hyphen_values = true)]
        index_box: String,
        #[command(flatten)]
        output: Output,
    },
    /// Threshold exponents, each confirmed by a witness unless --no-verify.
    Thresholds {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        no_verify: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form monomial norm, optionally against the quadrature oracle.
    Norm {
        #[arg(long)]
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Truncated p-monomial basis kernel at one pair of points.
    Kernel {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        p: String,
        /// Comma-separated complex coordinates, e.g. 0.5,0.1+0.2i.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long, default_value_t = 200)]
        truncation: u32,
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Run a property suite (or `all`) and emit a pass/fail table.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// sup |K_q - K_p| over a compact grid for q_k = p + 2^-k.
    Continuity {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long, default_value_t = 0.3)]
        margin: f64,
        #[arg(long, default_value_t = 9)]
        points: usize,
        #[arg(long, default_value_t = 5)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        truncation: u32,
        #[arg(long, default_value_t = 1e-12)]
        rel_tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Kernels of dilations r_j = 1 - 1/(j+1) of a domain against the domain.
    Ramadanov {
        #[arg(long, default_value = "disc")]
        domain: String,
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 12)]
        count: usize,
        #[arg(long, default_value_t = 0.3)]
        margin: f64,
        #[arg(long, default_value_t = 9)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest |alpha|_1 whose norms are tracked.
        #[arg(long, default_value_t = 3)]
        track: u32,
        #[arg(long, default_value_t = 400)]
        truncation: u32,
        #[arg(long, default_value_t = 1e-12)]
        rel_tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Run a command described by a JSON config whose keys mirror the flags.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() {
    let code = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() {
                ExitCode::Validation
            } else {
                ExitCode::Success
            };
            let _ = e.print();
            code
        }
    };
    process::exit(code as i32);
}

fn run(cli: Cli) -> ExitCode {
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::Validation;
        }
    }
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::Success,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn reparse(argv: Vec<String>) -> Result<Command, CliError> {
    Cli::try_parse_from(argv)
        .map(|c| c.command)
        .map_err(|e| CliError::Invalid(e.to_string()))
}
