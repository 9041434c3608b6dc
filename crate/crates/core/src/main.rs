use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tsc_lab::agent::Checkpoint;
use tsc_lab::harness::{
    compare, qvalue_sweep, run_episode, run_training, write_compare_csv, write_sweep_csv,
    DqnController, ExperimentConfig,
};
use tsc_lab::sim::TrajectoryWriter;
use tsc_lab::traffic::{generate_flow, FlowDataset, FlowProfile};

#[derive(Parser)]
#[command(
    name = "tsc-lab",
    version,
    about = "Traffic signal control experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Val,
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Train a DQN controller and keep the best validation checkpoint.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average travel time of a checkpoint's greedy policy on one flow half.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        flow: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: Split,
        /// Write per-tick vehicle positions to this CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Evaluate every configured controller on every flow's val and test halves.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's repeat count.
        #[arg(long)]
        repeats: Option<u32>,
    },
    /// Q(switch) - Q(keep) over a grid of queue lengths on two lanes.
    Sweep {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 5)]
        grid_max: usize,
        #[arg(long)]
        out: PathBuf,
        /// Lanes for the two axes, e.g. `0,1`.
        #[arg(long, value_parser = parse_pair)]
        lanes: Option<(usize, usize)>,
    },
    /// Generate a synthetic flow file.
    Genflow {
        /// e.g. `uniform:rate=0.05,lanes=8` or
        /// `clustered:size=5,inter=60,within=2,weights=3/1/3/1`
        #[arg(long)]
        profile: FlowProfile,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3600)]
        duration: u32,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or("expected two comma-separated lanes")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((parse(a)?, parse(b)?))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let outcome = run_training(&cfg)?;
            let s = &outcome.summary;
            println!(
                "best epoch {} val {:.2}s test {:.2}s (fixed-time val {:.2}s test {:.2}s)",
                s.best_epoch,
                s.best_val_avg_travel_time_s,
                s.test_avg_travel_time_s,
                s.fixed_val_avg_travel_time_s,
                s.fixed_test_avg_travel_time_s
            );
            println!("metrics: {}", outcome.metrics_path.display());
            println!("checkpoint: {}", outcome.checkpoint_path.display());
        }
        Command::Eval {
            checkpoint,
            flow,
            split,
            trajectory,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let spec = Arc::new(ckpt.task()?.intersection_spec()?);
            let flow = FlowDataset::from_path(&flow)?;
            let half = flow.duration / 2;
            let window = match split {
                Split::Val => flow.window(0, half, format!("{}:val", flow.label)),
                Split::Test => flow.window(half, flow.duration, format!("{}:test", flow.label)),
            };
            let mut ctrl = DqnController::from_checkpoint(&ckpt, &spec)?;
            let mut writer = match &trajectory {
                Some(path) => Some(TrajectoryWriter::new(BufWriter::new(
                    File::create(path).with_context(|| format!("creating {}", path.display()))?,
                ))),
                None => None,
            };
            let stats = run_episode(&mut ctrl, spec, Arc::new(window), |sim| match &mut writer {
                Some(w) => w.record(sim),
                None => Ok(()),
            })?;
            if let Some(w) = writer {
                w.finish()?;
            }
            println!("avg_travel_time_s {:.3}", stats.avg_travel_time);
            println!("mean_reward {:.3}", stats.mean_reward);
        }
        Command::Compare {
            config,
            out,
            repeats,
        } => {
            let mut cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(r) = repeats {
                if r == 0 {
                    bail!("--repeats must be at least 1");
                }
                cfg.repeats = r;
            }
            let rows = compare(&cfg)?;
            write_compare_csv(&rows, &out)?;
            for r in &rows {
                println!(
                    "{:<8} {:<40} {:<5} {:>8.2}",
                    r.controller, r.flow, r.split, r.avg_travel_time_s
                );
            }
        }
        Command::Sweep {
            checkpoint,
            grid_max,
            out,
            lanes,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let rows = qvalue_sweep(&ckpt, lanes, grid_max)?;
            write_sweep_csv(&rows, &out)?;
            println!("{} rows written to {}", rows.len(), out.display());
        }
        Command::Genflow {
            profile,
            seed,
            out,
            duration,
        } => {
            let flow = generate_flow(&profile, seed, duration)?;
            flow.save(&out)?;
            println!(
                "{} vehicles over {}s -> {}",
                flow.vehicles.len(),
                duration,
                out.display()
            );
        }
    }
    Ok(())
}
