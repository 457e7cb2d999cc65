//! `cosetcov`: experiments on coset covering numbers of balls.
//!
//! Exit codes: 0 success, 1 infeasible input, 2 budget exhausted,
//! 64 usage or configuration error, 70 internal bound violation,
//! 74 I/O failure.

mod commands;
pub mod config;
mod output;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(cosetcov_core::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl From<cosetcov_core::Error> for CliError {
    fn from(e: cosetcov_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cosetcov_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(E::Infeasible(_)) => EXIT_INFEASIBLE,
            CliError::Core(E::Budget { .. }) => EXIT_BUDGET,
            CliError::Core(E::BoundViolation { .. }) => EXIT_SOFTWARE,
            CliError::Core(E::Invalid(_) | E::Parse { .. } | E::Unsupported(_)) => EXIT_USAGE,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "cosetcov",
    version,
    about = "Coset covering numbers of balls in marked groups"
)]
pub struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
pub struct Common {
    /// INI experiment file; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// group registry name (Z^d, free:k, heisenberg, lamplighter:m, sl3z)
    #[arg(long, global = true, allow_hyphen_values = true)]
    group: Option<String>,
    /// custom symmetric generating set, comma separated
    #[arg(long, global = true, allow_hyphen_values = true)]
    gens: Option<String>,
    /// artifact directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// do not print tables
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the ball B_r
    Ball {
        #[arg(long)]
        r: Option<String>,
    },
    /// Growth function and doubling ratios up to r
    Growth {
        #[arg(long)]
        r: Option<String>,
        /// doubling ratios are taken over r0 < r
        #[arg(long, default_value_t = 0)]
        r0: usize,
    },
    /// Schreier ball of a subgroup, optionally the roster minimum
    Schreier {
        #[arg(long, allow_hyphen_values = true)]
        subgroup: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        roster: Option<String>,
        #[arg(long)]
        dedup: Option<String>,
    },
    /// Cover the ball by roster cosets
    Cover {
        #[arg(long)]
        roster: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        greedy: bool,
        #[arg(long)]
        lp: bool,
        /// greedy, exact, lp or all (combined with the flags above)
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        node_budget: Option<u64>,
        #[arg(long)]
        dedup: Option<String>,
        /// write the set system in the exchange format (single r)
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Monte Carlo walk statistics
    Walk {
        #[arg(long, allow_hyphen_values = true)]
        measure: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// extra checkpoints, comma separated
        #[arg(long)]
        checkpoints: Option<String>,
        /// per-n speed table
        #[arg(long)]
        speed: bool,
        /// cautiousness probe factor at the checkpoints
        #[arg(long)]
        epsilon: Option<String>,
        /// record hits of H*e for this subgroup descriptor
        #[arg(long, allow_hyphen_values = true)]
        track: Option<String>,
    },
    /// Coset probabilities against 4/(min mu sqrt n)
    Lyons {
        #[arg(long, allow_hyphen_values = true)]
        subgroup: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        element: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        measure: Option<String>,
        /// Monte Carlo fallback trials when the exact chain is over budget
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Consolidated lower and upper bounds per radius
    Bounds {
        #[arg(long)]
        roster: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        measure: Option<String>,
        #[arg(long)]
        speed_n: Option<usize>,
        /// linear or sqrt:K
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        c: Option<String>,
        /// greedy or exact roster covers
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        node_budget: Option<u64>,
    },
    /// Exact l2 decay of the coset distribution
    Decay {
        #[arg(long, allow_hyphen_values = true)]
        subgroup: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// walk uniformly on S instead of S with the identity
        #[arg(long)]
        no_identity: bool,
        #[arg(long, allow_hyphen_values = true)]
        measure: Option<String>,
        #[arg(long)]
        chain_budget: Option<usize>,
    },
    /// Finite-index sandwich between G marked by T and H marked by S
    Sandwich {
        /// H as a subgroup descriptor of G
        #[arg(long, allow_hyphen_values = true)]
        subgroup: Option<String>,
        /// S, the generating set of H
        #[arg(long, allow_hyphen_values = true)]
        subgroup_gens: Option<String>,
        #[arg(long)]
        roster: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        node_budget: Option<u64>,
    },
    /// Lift optimal covers of the abelianization back to the group
    Lift {
        /// roster on the abelianization
        #[arg(long)]
        roster: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        node_budget: Option<u64>,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli.common, cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cosetcov: {e}");
            e.exit_code()
        }
    }
}
