use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use celm_cli::commands::{grid, reproduce, train, wundt};
use celm_core::arousal::WundtParams;

#[derive(Parser)]
#[command(name = "celm", version, about = "Curiosity-driven evolving RBF classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train once on a split and write a run report
    Train {
        /// CSV dataset, label in the last column
        #[arg(long)]
        data: PathBuf,
        /// Run config JSON (split sizes plus model settings)
        #[arg(long)]
        config: PathBuf,
        /// Where to write the run report JSON
        #[arg(long)]
        out: PathBuf,
        /// Override both the split seed and the model seed
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the per-sample training log here
        #[arg(long)]
        steps: Option<PathBuf>,
    },
    /// Search threshold tuples, then rerun the winner across seeds
    Grid {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Where to write the grid report JSON
        #[arg(long)]
        out: PathBuf,
        /// Grid axes JSON; defaults to the recommended ranges at 0.1 steps
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Number of seeds (runs use seeds 1..=N)
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Select thresholds on test accuracy instead of an inner
        /// validation split (upper bound, not an honest protocol)
        #[arg(long)]
        oracle: bool,
    },
    /// Rerun the whole benchmark table from a manifest
    Reproduce {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for reproduction.md and reproduction.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate a Wundt hedonic curve as CSV
    Wundt(WundtArgs),
}

#[derive(Args)]
struct WundtArgs {
    /// Where to write the CSV
    #[arg(long)]
    out: PathBuf,
    /// Grid resolution over [0, 1]
    #[arg(long, default_value_t = 1001)]
    points: usize,
    #[arg(long, default_value_t = 1.0)]
    r_max: f64,
    #[arg(long, default_value_t = 1.0)]
    p_max: f64,
    #[arg(long, default_value_t = 10.0)]
    rho_r: f64,
    #[arg(long, default_value_t = 10.0)]
    rho_p: f64,
    #[arg(long, default_value_t = 0.25)]
    r_min: f64,
    #[arg(long, default_value_t = 0.75)]
    p_min: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train {
            data,
            config,
            out,
            seed,
            steps,
        } => train::cmd_train(&data, &config, &out, seed, steps.as_deref()).map(|_| ()),
        Command::Grid {
            data,
            config,
            out,
            grid,
            seeds,
            oracle,
        } => grid::cmd_grid(&data, &config, grid.as_deref(), seeds, &out, oracle).map(|_| ()),
        Command::Reproduce { manifest, out } => {
            reproduce::cmd_reproduce(&manifest, &out).map(|_| ())
        }
        Command::Wundt(args) => {
            let params = WundtParams {
                r_max: args.r_max,
                p_max: args.p_max,
                rho_r: args.rho_r,
                rho_p: args.rho_p,
                r_min: args.r_min,
                p_min: args.p_min,
            };
            wundt::cmd_wundt(&args.out, args.points, &params)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
