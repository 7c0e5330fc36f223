#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod failure;
mod ops;
mod run;
mod symbols;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Overrides;
use failure::Failure;

/// Batch verification of fractional-harmonic-extension estimates.
///
/// Exit status: 0 pass, 1 validation failure, 2 config error, 3 numerical error.
#[derive(Parser)]
#[command(name = "fracharm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every estimate listed in a JSON config and write reports.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Spectral identities, the classical symbol and the quadrature oracle.
    OpsCheck {
        #[arg(long = "grid-n", default_value_t = 1)]
        grid_n: usize,
        /// Defaults to 256 in 1-D and 64 in 2-D.
        #[arg(long = "grid-N")]
        grid_points: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
        #[arg(long = "tolerance-scale", default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// Precompute the Poisson symbol table for order s into the cache directory.
    SymbolCache {
        s: f64,
        #[arg(long = "grid-n", default_value_t = 1)]
        grid_n: usize,
        /// Target directory; defaults to $FRACHARM_CACHE_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunFlags {
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    #[arg(long = "grid-N")]
    grid_points: Option<usize>,
    #[arg(long)]
    period: Option<f64>,
    #[arg(long = "t-min")]
    t_min: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long = "t-levels")]
    t_levels: Option<usize>,
    /// Replaces every seed list in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplies the stability and zero-RHS tolerances.
    #[arg(long = "tolerance-scale")]
    tolerance_scale: Option<f64>,
}

impl From<RunFlags> for Overrides {
    fn from(f: RunFlags) -> Self {
        Overrides {
            grid_n: f.grid_n,
            grid_points: f.grid_points,
            period: f.period,
            t_min: f.t_min,
            t_max: f.t_max,
            t_levels: f.t_levels,
            seed: f.seed,
            out: f.out,
            tolerance_scale: f.tolerance_scale,
        }
    }
}

fn run_command(path: PathBuf, flags: RunFlags) -> Result<(), Failure> {
    let plan = config::load(&path, &flags.into())?;
    let outcome = run::execute(&plan)?;
    for r in &outcome.reports {
        println!(
            "{:<16} N={:<5} C={:.4e} validation={:.4e} stability={:.4} {}",
            r.estimate_id.as_str(),
            r.grid.points,
            r.fitted_constant,
            r.validation_max_ratio,
            r.dilation_stability,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    println!("wrote {} files to {}", outcome.files.len(), plan.out.display());
    let failed = outcome.failed();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(failed.join("\n")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, flags } => run_command(config, flags),
        Command::OpsCheck {
            grid_n,
            grid_points,
            period,
            seed,
            tolerance_scale,
        } => {
            let o = ops::OpsOptions {
                dim: grid_n,
                points: grid_points.unwrap_or_else(|| ops::OpsOptions::default_points(grid_n)),
                period,
                seed,
                tolerance_scale,
            };
            ops::run_checks(&o).and_then(|rows| {
                print!("{}", ops::render(&rows));
                let failed: Vec<String> = rows.iter().filter(|r| !r.pass()).map(|r| r.name.clone()).collect();
                if failed.is_empty() {
                    Ok(())
                } else {
                    Err(Failure::Validation(format!("failed: {}", failed.join(", "))))
                }
            })
        }
        Command::SymbolCache { s, grid_n, out } => match out.or_else(symbols::cache_dir) {
            Some(dir) => symbols::store(&dir, s, grid_n).map(|p| println!("{}", p.display())),
            None => Err(Failure::Config(format!("no target directory: pass --out or set {}", symbols::CACHE_ENV))),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracharm: {e}");
            e.exit_code()
        }
    }
}
