//! Command-line entry point: train / sweep / eval / selftest.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leoris_harness::{
    evaluate_checkpoint, run_sweep, run_training, ExperimentConfig, SweepMode,
};

#[derive(Parser)]
#[command(name = "leoris", about = "RSMA satellite downlink simulator and learning lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured agent over all seeds and write metrics.csv,
    /// a config snapshot and per-seed checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override the seed list with a single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one scenario variable over a list of values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of: p_sat_max, p_ris_max, uav_altitude, csi_error_variance,
        /// num_users, num_ris_elements, num_sat_antennas, ris_mode.
        #[arg(long)]
        var: String,
        /// Comma-separated values (numbers, or mode names for ris_mode).
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        /// train: retrain each cell; eval: evaluate frozen checkpoints.
        #[arg(long, default_value = "train")]
        mode: String,
        /// Checkpoint directory for --mode eval.
        #[arg(long)]
        checkpoints: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint without learning.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the built-in oracle/property suite.
    Selftest,
}

fn real_main() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config).map_err(|e| e.to_string())?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            if let Some(dir) = out {
                cfg.out_dir = dir.display().to_string();
            }
            let rows = run_training(&cfg).map_err(|e| e.to_string())?;
            let final_seed_rows: Vec<&_> =
                rows.iter().filter(|r| r.episode + 1 == cfg.episodes).collect();
            println!(
                "trained {} seeds x {} episodes; outputs in {}",
                cfg.seeds.len(),
                cfg.episodes,
                cfg.out_dir
            );
            for r in final_seed_rows {
                println!(
                    "  seed {}: final mean reward {:.4}, EE {:.6}, reliability {:.3}",
                    r.seed, r.mean_reward, r.mean_ee, r.reliability
                );
            }
            Ok(())
        }
        Command::Sweep { config, var, values, mode, checkpoints, out } => {
            let mut cfg = ExperimentConfig::load(&config).map_err(|e| e.to_string())?;
            if let Some(dir) = out {
                cfg.out_dir = dir.display().to_string();
            }
            let mode = match mode.as_str() {
                "train" => SweepMode::Train,
                "eval" => SweepMode::Eval {
                    checkpoint_dir: checkpoints
                        .ok_or_else(|| "schema error: --mode eval needs --checkpoints".to_string())?,
                },
                other => return Err(format!("schema error: unknown sweep mode `{other}`")),
            };
            let rows = run_sweep(&cfg, &var, &values, &mode).map_err(|e| e.to_string())?;
            println!("sweep over {var}: {} values; sweep.csv in {}", rows.len(), cfg.out_dir);
            for r in rows {
                println!(
                    "  {var}={}: median EE {:.6} (IQR {:.6}), reliability {:.3}",
                    r.value, r.median_ee, r.iqr_ee, r.median_reliability
                );
            }
            Ok(())
        }
        Command::Eval { checkpoint, config, episodes, seed } => {
            let cfg = ExperimentConfig::load(&config).map_err(|e| e.to_string())?;
            let (agg, _) = evaluate_checkpoint(&checkpoint, &cfg, episodes, seed)
                .map_err(|e| e.to_string())?;
            println!(
                "eval over {} episodes: mean reward {:.4}, EE {:.6}, sum rate {:.4}, reliability {:.3}",
                agg.episodes, agg.mean_reward, agg.mean_ee, agg.mean_sum_rate, agg.reliability
            );
            Ok(())
        }
        Command::Selftest => {
            if leoris_harness::selftest::run() {
                Ok(())
            } else {
                Err("selftest failed".to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
