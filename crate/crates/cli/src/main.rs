//! Command-line front end: analyze closed-form counts, build and verify
//! delivery schedules, simulate zero-forcing delivery, and sweep parameter
//! grids.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod grid;

#[derive(Parser)]
#[command(name = "hcnet", version, about = "Hypercube cache-aided interference network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for generated files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form subpacketization, gap, and planner output for one
    /// configuration.
    Analyze(ConfigArgs),
    /// Build the delivery schedule, verify exact cover, and export both.
    Schedule {
        #[command(flatten)]
        common: ConfigArgs,
        /// Also export every transmitter and receiver cache manifest.
        #[arg(long)]
        manifests: bool,
    },
    /// Solve per-step precoders and verify noiseless decoding end to end.
    Simulate {
        #[command(flatten)]
        common: ConfigArgs,
        /// Channel seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Noise variance for the optional noisy demo pass.
        #[arg(long)]
        noise: Option<f64>,
        /// Residual tolerance override.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evaluate the closed-form reports over a (d, t, delta) grid and/or
    /// explicit configs.
    Sweep {
        /// Grid spec, e.g. "d=3,4,5;t=1:8;delta=1,2".
        #[arg(long, default_value = "")]
        grid: String,
        /// Config files whose network rows are appended to the sweep.
        #[arg(long = "config")]
        configs: Vec<PathBuf>,
        /// Output directory for sweep.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run() -> anyhow::Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => {
            let run = config::load(&args.config)?;
            commands::analyze(&run, args.out.as_deref())
        }
        Command::Schedule { common, manifests } => {
            let run = config::load(&common.config)?;
            let out = common.out.unwrap_or_else(|| PathBuf::from("out"));
            commands::schedule(&run, &out, manifests)
        }
        Command::Simulate {
            common,
            seed,
            noise,
            tol,
        } => {
            let mut run = config::load(&common.config)?;
            if let Some(seed) = seed {
                run.channel_seed = seed;
            }
            if let Some(noise) = noise {
                run.noise_variance = noise;
            }
            if let Some(tol) = tol {
                run.residual_tolerance = tol;
            }
            commands::simulate(&run, common.out.as_deref())
        }
        Command::Sweep { grid, configs, out } => {
            let grid = grid::parse_grid(&grid)?;
            let explicit = configs
                .iter()
                .map(|path| config::load(path).map(|run| run.network))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let out = out.unwrap_or_else(|| PathBuf::from("out"));
            commands::sweep(&grid, &explicit, &out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code.clamp(0, 255) as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code::USAGE as u8)
        }
    }
}
