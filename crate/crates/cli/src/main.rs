//! `rankframe`: setup, analysis and reports for the ranked-data frame transform.
//!
//! Exit codes: 0 success, 2 invalid input, 3 resource refusal, 1 anything else.

mod commands;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::tables::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rankframe::Error),

    #[error("{0}")]
    Invalid(String),

    #[error("{0}")]
    Resource(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Core(rankframe::Error::Resource(_) | rankframe::Error::TooLarge { .. }) => 3,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Csv(_) | CliError::Json(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rankframe",
    version,
    about = "Tight spectral Parseval frames for ranked data"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Cached,
    Streamed,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    /// Cache root or cache directory.
    #[arg(long, env = "RANKFRAME_CACHE")]
    pub cache: Option<PathBuf>,

    /// Execution mode; `auto` follows the memory estimate.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Memory budget for cached index maps, in GiB.
    #[arg(long, default_value_t = 8.0)]
    pub memory_budget_gib: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build spectra, graphs, lifting paths and characteristic matrices, and write a cache.
    Setup {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        cache: CacheArgs,
        /// Keep only the first K shapes of H_n.
        #[arg(long, conflicts_with = "all_shapes")]
        shapes: Option<usize>,
        /// Every partition of n instead of H_n.
        #[arg(long)]
        all_shapes: bool,
        /// Closed-form eigenvectors for hook shapes.
        #[arg(long)]
        hook_fastpath: bool,
        /// Rebuild even when a valid cache exists.
        #[arg(long)]
        force: bool,
    },
    /// Compute analysis coefficients of a ballot file.
    Analyze {
        #[command(flatten)]
        cache: CacheArgs,
        #[arg(long)]
        ballots: PathBuf,
        /// Keep the first K shapes of the cache.
        #[arg(long)]
        shapes: Option<usize>,
        /// Keep only this shape (repeatable), e.g. "3,1".
        #[arg(long = "shape")]
        shape: Vec<String>,
        /// Keep the first M eigenvectors of each shape.
        #[arg(long)]
        max_eigs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Energy per (shape, eigenvalue) as CSV.
    Energy {
        #[command(flatten)]
        cache: CacheArgs,
        /// Ballots to analyze.
        #[arg(long, required_unless_present = "coefficients")]
        ballots: Option<PathBuf>,
        /// A table written by `analyze`.
        #[arg(long, conflicts_with = "ballots")]
        coefficients: Option<PathBuf>,
        /// Add shapes outside the cache through the conjugate sign trick.
        #[arg(long)]
        conjugates: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The K coefficients of largest magnitude.
    Top {
        #[arg(long)]
        coefficients: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// JSON map from candidate number to name.
        #[arg(long)]
        names: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize from coefficients and report the relative reconstruction error.
    Reconstruct {
        #[command(flatten)]
        cache: CacheArgs,
        #[arg(long)]
        ballots: PathBuf,
        #[arg(long)]
        coefficients: PathBuf,
        /// Write the reconstructed signal as CSV (ranking,value).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Graph Fourier transform magnitudes (lambda, norm).
    Gft {
        #[command(flatten)]
        cache: CacheArgs,
        #[arg(long)]
        ballots: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Values of B_πᵀ f on the Schreier graph of a lifting.
    Project {
        #[arg(long)]
        ballots: PathBuf,
        /// Shape, e.g. "8,2".
        #[arg(long)]
        shape: String,
        /// Lifting in block-label format, e.g. "12456790|38".
        #[arg(long)]
        blocks: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest eigenvalue per shape and dominance monotonicity check.
    Conjecture {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| CliError::Resource(format!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::Setup {
            n,
            cache,
            shapes,
            all_shapes,
            hook_fastpath,
            force,
        } => commands::setup(n, &cache, shapes, all_shapes, hook_fastpath, force),
        Command::Analyze {
            cache,
            ballots,
            shapes,
            shape,
            max_eigs,
            out,
            format,
        } => commands::analyze(&cache, &ballots, shapes, &shape, max_eigs, &out, format),
        Command::Energy {
            cache,
            ballots,
            coefficients,
            conjugates,
            out,
        } => commands::energy(
            &cache,
            ballots.as_deref(),
            coefficients.as_deref(),
            conjugates,
            out.as_deref(),
        ),
        Command::Top {
            coefficients,
            k,
            names,
            out,
        } => commands::top(&coefficients, k, names.as_deref(), out.as_deref()),
        Command::Reconstruct {
            cache,
            ballots,
            coefficients,
            out,
        } => commands::reconstruct(&cache, &ballots, &coefficients, out.as_deref()),
        Command::Gft {
            cache,
            ballots,
            out,
        } => commands::gft(&cache, &ballots, out.as_deref()),
        Command::Project {
            ballots,
            shape,
            blocks,
            out,
        } => commands::project(&ballots, &shape, &blocks, out.as_deref()),
        Command::Conjecture { n, out } => commands::conjecture(n, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
