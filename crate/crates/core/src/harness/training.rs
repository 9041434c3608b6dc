use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agent::{Checkpoint, DqnAgent, TaskDescriptor};
use crate::baselines::FixedTime;
use crate::env::{ActionSpace, Env};
use crate::error::{write_string, Error, Result};
use crate::traffic::{FlowDataset, IntersectionSpec};

use super::config::ExperimentConfig;
use super::eval::{evaluate, run_episode, write_csv, DqnController, EpisodeStats};

/// One epoch is this many weight updates.
pub const UPDATES_PER_EPOCH: u64 = 900;

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "best_checkpoint.json";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub epoch: u32,
    pub weight_updates: u64,
    pub mean_reward: f64,
    pub val_avg_travel_time_s: f64,
    pub wall_clock_s: f64,
    pub transitions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub best_epoch: u32,
    pub best_val_avg_travel_time_s: f64,
    /// The best checkpoint evaluated on the test window.
    pub test_avg_travel_time_s: f64,
    pub fixed_val_avg_travel_time_s: f64,
    pub fixed_test_avg_travel_time_s: f64,
    pub weight_updates: u64,
    pub transitions: u64,
    pub episodes: u64,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub rows: Vec<MetricsRow>,
    pub summary: TrainingSummary,
    pub best: Checkpoint,
    pub checkpoint_path: PathBuf,
    pub metrics_path: PathBuf,
}

struct Evaluator {
    spec: Arc<IntersectionSpec>,
    val: Arc<FlowDataset>,
    space: ActionSpace,
    config: ExperimentConfig,
    start: Instant,
    rows: Vec<MetricsRow>,
    best: Option<(u32, f64, Checkpoint)>,
}

impl Evaluator {
    fn record(&mut self, epoch: u32, agent: &DqnAgent) -> Result<()> {
        let mut ctrl = DqnController::new(
            agent.online().clone(),
            self.config.state_variant,
            self.space,
        )?;
        let EpisodeStats {
            avg_travel_time,
            mean_reward,
            ..
        } = run_episode(&mut ctrl, self.spec.clone(), self.val.clone(), |_| Ok(()))?;
        let wall_clock_s = if self.config.record_wall_clock {
            self.start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        self.rows.push(MetricsRow {
            epoch,
            weight_updates: agent.updates(),
            mean_reward,
            val_avg_travel_time_s: avg_travel_time,
            wall_clock_s,
            transitions: agent.env_steps(),
        });
        if self
            .best
            .as_ref()
            .is_none_or(|(_, b, _)| avg_travel_time < *b)
        {
            let task = TaskDescriptor::new(
                &self.spec,
                self.config.state_variant,
                self.config.action_mode,
                self.config.decision_process,
            );
            self.best = Some((epoch, avg_travel_time, agent.to_checkpoint(Some(task))));
        }
        Ok(())
    }
}

/// Trains on the training flows, cycling through them one episode at a time,
/// and evaluates the greedy policy on the validation window every
/// `eval_every` epochs plus once before training. Writes the metrics CSV, the
/// best checkpoint and a summary into the output directory.
pub fn run_training(config: &ExperimentConfig) -> Result<TrainingOutcome> {
    config.validate()?;
    let start = Instant::now();
    let spec = Arc::new(config.spec()?);
    let split = config.split()?;
    let train: Vec<Arc<FlowDataset>> = split.train.into_iter().map(Arc::new).collect();
    let val = Arc::new(split.val);
    let test = split.test;

    let space = ActionSpace::new(config.action_mode, spec.num_phases());
    let state_dim = config
        .state_variant
        .dimension(spec.num_lanes(), spec.num_phases());
    let dqn = crate::agent::DqnConfig {
        seed: config.seed,
        ..config.dqn.clone()
    };
    let target_updates = config.total_epochs as u64 * UPDATES_PER_EPOCH;
    let planned = target_updates + dqn.warmup() as u64;
    let mut agent = DqnAgent::new(state_dim, space.num_actions(), dqn.clone(), planned)?;

    let mut eval = Evaluator {
        spec: spec.clone(),
        val,
        space,
        config: config.clone(),
        start,
        rows: Vec::new(),
        best: None,
    };
    eval.record(0, &agent)?;

    let eval_interval = config.eval_every as u64 * UPDATES_PER_EPOCH;
    let mut episodes = 0u64;
    while agent.updates() < target_updates {
        let flow = train[(episodes % train.len() as u64) as usize].clone();
        episodes += 1;
        let mut env = Env::new(
            spec.clone(),
            flow,
            config.state_variant,
            config.action_mode,
            config.decision_process,
            dqn.gamma,
        )?;
        while !env.is_terminal() && agent.updates() < target_updates {
            let state = env.observation();
            let action = agent.act(&state)?;
            let transition = env.step(action)?;
            if agent.observe(transition)?.is_some() && agent.updates() % eval_interval == 0 {
                eval.record((agent.updates() / UPDATES_PER_EPOCH) as u32, &agent)?;
            }
        }
    }
    if eval.rows.last().map(|r| r.epoch) != Some(config.total_epochs) {
        eval.record(config.total_epochs, &agent)?;
    }

    let (best_epoch, best_val, best) = eval.best.take().expect("initial evaluation ran");
    let mut best_ctrl = DqnController::from_checkpoint(&best, &spec)?;
    let test_att = evaluate(&mut best_ctrl, &spec, &test)?;
    let fixed_val = evaluate(&mut FixedTime::default(), &spec, &eval.val)?;
    let fixed_test = evaluate(&mut FixedTime::default(), &spec, &test)?;

    let summary = TrainingSummary {
        best_epoch,
        best_val_avg_travel_time_s: best_val,
        test_avg_travel_time_s: test_att,
        fixed_val_avg_travel_time_s: fixed_val,
        fixed_test_avg_travel_time_s: fixed_test,
        weight_updates: agent.updates(),
        transitions: agent.env_steps(),
        episodes,
        wall_clock_s: if config.record_wall_clock {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        },
    };

    let out = config.output_dir.clone();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let metrics_path = out.join(METRICS_FILE);
    let checkpoint_path = out.join(CHECKPOINT_FILE);
    write_csv(&eval.rows, &metrics_path)?;
    best.save(&checkpoint_path)?;
    write_string(
        &out.join(SUMMARY_FILE),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;

    Ok(TrainingOutcome {
        rows: eval.rows,
        summary,
        best,
        checkpoint_path,
        metrics_path,
    })
}
