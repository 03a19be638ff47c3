mod commands;
mod config;
mod rules;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Parser, Debug)]
#[command(name = "dynamarket", version, about = "Supermarket model on dynamic hypergraphs: simulate, sweep, solve, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads for replica parallelism (default: all cores)
    #[arg(long, global = true, env = "DYNAMARKET_THREADS")]
    threads: Option<usize>,
    /// Master seed, overriding the config
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (default: standard output, or the config's `out`)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Burn-in time, overriding the config and the default rule
    #[arg(long, global = true)]
    pub burn_in: Option<f64>,
    /// Largest state space the oracle will enumerate
    #[arg(long, global = true, default_value_t = dynamarket::oracle::DEFAULT_STATE_CAP)]
    pub cap_states: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one replica described by a config file and print its summary as JSON
    Simulate {
        /// Sectioned `key = value` config file
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a parameter grid and write one CSV row per point, replica and statistic
    Sweep {
        /// Sectioned `key = value` config file
        #[arg(long)]
        config: PathBuf,
    },
    /// Exact stationary laws and closed-form bounds
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Run the acceptance suite and report every criterion
    Verify {
        /// Comma-separated criterion ids (default: all)
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum System {
    /// Full queue-and-partition chain; the marginal of vertex 0
    Supermarket,
    /// Two queues on one static edge; the law of the total length
    JsqPair,
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Stationary distribution of a small system by generator solve
    Exact {
        #[arg(long, value_enum, default_value = "supermarket")]
        system: System,
        /// Arrival rate per vertex, in (0, 1)
        #[arg(long)]
        lambda: f64,
        /// Queue truncation level
        #[arg(long = "K")]
        k: u32,
        /// Number of vertices
        #[arg(long, default_value_t = 4)]
        n: u32,
        /// Half the block size
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Number of layers
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Swap rate per stub
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Zero-on-update chain on the hyperstar, with the lower bound per length
    ZeroOnUpdate {
        /// Arrival rate per vertex, in (0, 1)
        #[arg(long)]
        lambda: f64,
        /// Half the block size
        #[arg(long)]
        r: u32,
        /// Number of layers
        #[arg(long)]
        d: u32,
        /// Swap rate per stub
        #[arg(long)]
        kappa: f64,
        /// Queue truncation level
        #[arg(long = "K")]
        k: u32,
    },
    /// Table of closed-form tail bounds
    Bounds {
        /// Arrival rate per vertex, in (0, 1)
        #[arg(long)]
        lambda: f64,
        /// Closed-neighbourhood size
        #[arg(long)]
        m: u32,
        /// Largest length to tabulate
        #[arg(long)]
        k_max: u32,
        /// Also tabulate the finite-kappa stationary bound
        #[arg(long)]
        kappa: Option<f64>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Usage(_) => 2,
            Self::Runtime(_) => 3,
            Self::Verification(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let result = match &cli.command {
        Command::Simulate { config } => commands::simulate(config, &cli.global),
        Command::Sweep { config } => sweep::run(config, &cli.global),
        Command::Oracle { which } => commands::oracle(which, &cli.global),
        Command::Verify { criteria } => commands::verify(criteria, &cli.global),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
