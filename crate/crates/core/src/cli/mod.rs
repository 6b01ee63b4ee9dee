//! The `chroma` command line.
//!
//! Exit status: 0 on success, 1 for bad input (including a schedule that
//! fails validation), 2 for internal errors.

pub mod cache;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{error::ErrorKind, ArgGroup, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};

pub use cache::{CacheStatus, TableCache, CACHE_ENV};
pub use config::{parse_p_grid, CampaignConfig, PGrid};

#[derive(Debug, Parser)]
#[command(
    name = "chroma",
    version,
    about = "Triangular 4.8.8 color codes: decoding, failure rates and thresholds"
)]
pub struct Cli {
    /// Print JSON instead of human-readable tables.
    #[arg(long, global = true)]
    pub json: bool,
    /// Master seed for sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Two-qubit depolarizing channel after each CNOT: 16 uniform pairs or
    /// 15 nontrivial ones.
    #[arg(long, global = true, value_name = "16|15")]
    pub dp_variant: Option<u32>,
    /// Worker threads (default: all logical CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON campaign configuration; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Lookup-table cache directory (also read from CHROMA_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Linear,
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    X,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SawModelArg {
    Capacity,
    Phenom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LatticeArg {
    #[value(name = "4.8.8")]
    Square488,
    Prism,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a code and list its faces.
    BuildCode {
        #[arg(long, short)]
        distance: usize,
    },
    /// Check a schedule for collisions and stabilizer preservation.
    #[command(group(ArgGroup::new("source").required(true).args(["file", "schedule"])))]
    ValidateSchedule {
        #[arg(long = "code-distance", visible_alias = "distance")]
        code_distance: usize,
        /// Schedule JSON file.
        #[arg(long)]
        file: Option<PathBuf>,
        /// A bundled schedule: noninterleaved, interleaved or clockwise.
        #[arg(long)]
        schedule: Option<String>,
        /// Also enumerate single faults and report hook weights.
        #[arg(long)]
        hooks: bool,
        /// Write the schedule being checked to this file.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Minimum-weight decoding of one syndrome or a syndrome history.
    #[command(group(ArgGroup::new("input").required(true).args(["syndrome", "history"])))]
    Decode {
        #[arg(long, short)]
        distance: usize,
        /// Hex syndrome; bit f is check f.
        #[arg(long)]
        syndrome: Option<String>,
        /// Comma-separated hex syndromes, one per round, as measured.
        #[arg(long)]
        history: Option<String>,
        /// Treat the last round of a history as error free.
        #[arg(long)]
        final_round_perfect: bool,
    },
    /// Exact failure polynomial under code-capacity noise.
    Exact {
        #[arg(long, short)]
        distance: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evaluate the polynomial at these p.
        #[arg(long = "eval", value_delimiter = ',')]
        eval: Vec<f64>,
    },
    /// Monte Carlo failure rates over a grid of distances and p.
    Mc {
        /// capacity, phenom or circuit.
        #[arg(long)]
        model: Option<String>,
        /// Circuit-level schedule: noninterleaved or interleaved.
        #[arg(long)]
        schedule: Option<String>,
        /// Comma-separated distances.
        #[arg(long)]
        distances: Option<String>,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long)]
        p_grid: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        /// Extraction rounds per trial (default: the distance).
        #[arg(long)]
        rounds: Option<usize>,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-size-scaling fit of a Monte Carlo CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "linear")]
        form: FormArg,
        /// Required when the CSV holds both check types.
        #[arg(long, value_enum)]
        check_type: Option<CheckArg>,
        /// `lo:hi` range of p_fail admitted to the fit.
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Self-avoiding-walk lower bound on the threshold.
    Saw {
        #[arg(long, value_enum)]
        model: SawModelArg,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        delta_max: Option<u32>,
    },
    /// Thresholds of transversal gates from the memory thresholds.
    Gates {
        #[arg(long, default_value_t = 0.0305)]
        p_qec: f64,
        #[arg(long, default_value_t = 0.1056)]
        p_capacity: f64,
    },
    /// Count self-avoiding polygons per unit cell.
    SapCount {
        #[arg(long, value_enum, default_value = "4.8.8")]
        lattice: LatticeArg,
        #[arg(long)]
        l_max: usize,
    },
}

/// Settings shared by every subcommand after merging flags, config and
/// environment.
#[derive(Clone, Debug)]
pub struct Settings {
    pub json: bool,
    pub seed: u64,
    pub dp_variant: crate::noise::DpVariant,
    pub threads: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub config: CampaignConfig,
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let config = match &cli.config {
            Some(path) => CampaignConfig::load(path)?,
            None => CampaignConfig::default(),
        };
        let dp = cli.dp_variant.or(config.dp_variant).unwrap_or(16);
        let cache_dir = cli
            .cache_dir
            .clone()
            .or_else(|| config.cache_dir.clone())
            .or_else(|| {
                std::env::var_os(CACHE_ENV)
                    .filter(|v| !v.is_empty())
                    .map(PathBuf::from)
            });
        let threads = cli.threads.or(config.threads);
        if threads == Some(0) {
            return Err(Error::InvalidInput("--threads must be at least 1".into()));
        }
        Ok(Settings {
            json: cli.json,
            seed: cli.seed.or(config.seed).unwrap_or(0),
            dp_variant: config::parse_dp_variant(dp)?,
            threads,
            cache_dir,
            config,
        })
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Internal(_) => 2,
        _ => 1,
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let settings = Settings::resolve(&cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = settings.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| commands::dispatch(&cli.command, &settings))
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run_cli(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match std::panic::catch_unwind(move || execute(cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            2
        }
    }
}
