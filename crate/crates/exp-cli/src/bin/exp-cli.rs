use std::path::PathBuf;

use clap::{Parser, Subcommand};
use exp_cli::{config::ExperimentConfig, plots, runner};
use sme_core::estimate_wmax_lower;
use sysid_sim::{simulate, Trajectory};

#[derive(Parser)]
#[command(
    name = "exp-cli",
    about = "Set-membership identification experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory from a config and write it as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Estimate from a saved trajectory: membership-set diameter, minimax
    /// residual, and the least-squares region diameter.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
    },
    /// Evaluate the failure-bound table for the configured constants.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full experiment preset.
    Experiment {
        /// rates-toy | inflated-jet | dim-sweep | tracking-tube | bounds-table
        id: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the plot script for an experiment's CSV outputs.
    Plots {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run() -> Result<(), Box<dyn std::error::Error>> {
    match Cli::parse().command {
        Command::Simulate {
            config,
            out,
            seed,
            horizon,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let model = config.system_model()?;
            let dist = config.disturbance_model(model.n_x())?;
            let policy = config.input_policy(model.n_u())?;
            let t_len = horizon
                .or_else(|| config.t_grid.last().copied())
                .unwrap_or(256);
            let traj = simulate(&model, &policy, &dist, &config.x0(model.n_x()), t_len, seed)?;
            traj.save_csv(&out)?;
            println!("wrote {} steps to {}", traj.len(), out.display());
        }
        Command::Estimate { config, trajectory } => {
            let config = ExperimentConfig::load(&config)?;
            let model = config.system_model()?;
            let dist = config.disturbance_model(model.n_x())?;
            let traj = Trajectory::load_csv(&trajectory, model.n_x(), model.n_u(), 0)?;
            let mut set = sme_core::MembershipSet::from_trajectory(&traj, dist.w_max)?;
            let method = config.diameter_method();
            let report = set.diameter(method, config.diameter_budget.unwrap_or(128))?;
            let fit = estimate_wmax_lower(&traj)?;
            let lse_cfg = config.lse.clone().unwrap_or_default();
            let region = lse_baseline::ay_region(
                &traj,
                lse_cfg.lambda,
                lse_cfg.delta,
                model.theta().norm(),
                lse_baseline::variance_proxy_for(&dist.kind),
            )?;
            println!("samples: {}", traj.len());
            println!("membership diameter ({:?}): {:.6e}", report.method, report.value);
            println!("minimax residual: {:.6e}", fit.w_bar);
            println!("least-squares region diameter: {:.6e}", region.diameter());
        }
        Command::Bounds { config, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(dir) = out {
                config.out_dir = dir;
            }
            config.id = "bounds-table".into();
            let summary = runner::run_experiment(&config)?;
            for f in summary.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Experiment { id, config, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            if config.id != id {
                return Err(format!(
                    "config declares experiment '{}' but '{id}' was requested",
                    config.id
                )
                .into());
            }
            if let Some(dir) = out {
                config.out_dir = dir;
            }
            let summary = runner::run_experiment(&config)?;
            println!(
                "experiment {} (config {}) finished",
                summary.experiment, summary.config_hash
            );
            for f in summary.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Plots { config, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(dir) = out {
                config.out_dir = dir;
            }
            for f in plots::emit_plot_scripts(&config)? {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}
