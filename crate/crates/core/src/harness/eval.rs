use std::path::Path;
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::agent::{argmax, Checkpoint, QNetwork};
use crate::baselines::{Controller, FixedTime, RandomController, Sotl1, Sotl2, SotlParams};
use crate::env::{decode_action, observe, reward, ActionSpace, StateVariant};
use crate::error::{Error, Result};
use crate::sim::SimState;
use crate::traffic::{FlowDataset, IntersectionSpec};

use super::config::{ExperimentConfig, SotlGrid};

/// Greedy (ε = 0) policy of a trained network.
#[derive(Debug, Clone)]
pub struct DqnController {
    net: QNetwork,
    variant: StateVariant,
    space: ActionSpace,
}

impl DqnController {
    pub fn new(net: QNetwork, variant: StateVariant, space: ActionSpace) -> Result<Self> {
        if net.output_dim() != space.num_actions() {
            return Err(Error::DimensionMismatch {
                expected: space.num_actions(),
                actual: net.output_dim(),
            });
        }
        Ok(DqnController {
            net,
            variant,
            space,
        })
    }

    /// Network and task from a checkpoint; the spec must match its lane and
    /// phase counts.
    pub fn from_checkpoint(ckpt: &Checkpoint, spec: &IntersectionSpec) -> Result<Self> {
        let task = ckpt.task()?;
        let net = ckpt.network()?;
        let dim = task
            .state_variant
            .dimension(spec.num_lanes(), spec.num_phases());
        if net.input_dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: net.input_dim(),
            });
        }
        Self::new(
            net,
            task.state_variant,
            ActionSpace::new(task.action_mode, spec.num_phases()),
        )
    }
}

impl Controller for DqnController {
    fn name(&self) -> &str {
        "dqn"
    }

    fn decide(&mut self, sim: &SimState) -> Result<usize> {
        let q = self.net.forward(&observe(sim, self.variant))?;
        decode_action(self.space, argmax(&q)?, sim.signal().current_phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub avg_travel_time: f64,
    /// Mean per-tick reward, i.e. minus the mean total queue.
    pub mean_reward: f64,
    pub ticks: u32,
}

/// Runs one full episode to the flow duration, consulting the controller on
/// every non-yellow tick. `on_tick` sees the state after each tick.
pub fn run_episode(
    controller: &mut dyn Controller,
    spec: Arc<IntersectionSpec>,
    flow: Arc<FlowDataset>,
    mut on_tick: impl FnMut(&SimState) -> Result<()>,
) -> Result<EpisodeStats> {
    if flow.vehicles.is_empty() {
        return Err(Error::EmptyFlow);
    }
    flow.check_against(&spec)?;
    let horizon = flow.duration;
    let mut sim = SimState::new(spec, flow);
    let mut reward_sum = 0.0;
    while sim.clock() < horizon {
        if !sim.is_yellow() {
            let target = controller.decide(&sim)?;
            sim.command_signal(target)?;
        }
        sim.tick();
        reward_sum += reward(&sim);
        on_tick(&sim)?;
    }
    Ok(EpisodeStats {
        avg_travel_time: sim.avg_travel_time()?,
        mean_reward: reward_sum / horizon as f64,
        ticks: horizon,
    })
}

pub fn evaluate(
    controller: &mut dyn Controller,
    spec: &IntersectionSpec,
    flow: &FlowDataset,
) -> Result<f64> {
    let stats = run_episode(
        controller,
        Arc::new(spec.clone()),
        Arc::new(flow.clone()),
        |_| Ok(()),
    )?;
    Ok(stats.avg_travel_time)
}

/// Builds a controller by name. `seed` only affects `random`.
pub fn make_controller(
    name: &str,
    spec: &IntersectionSpec,
    sotl: SotlParams,
    seed: u64,
    checkpoint: Option<&Checkpoint>,
) -> Result<Box<dyn Controller + Send>> {
    Ok(match name {
        "fixed" => Box::new(FixedTime::default()),
        "random" => Box::new(RandomController::new(seed)),
        "sotl1" => Box::new(Sotl1::for_spec(sotl, spec)),
        "sotl2" => Box::new(Sotl2::for_spec(sotl, spec)),
        "dqn" => {
            let ckpt = checkpoint.ok_or_else(|| {
                Error::InvalidConfig("the dqn controller needs a checkpoint".into())
            })?;
            Box::new(DqnController::from_checkpoint(ckpt, spec)?)
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown controller {other:?}"
            )))
        }
    })
}

/// Best SOTL-2.0 parameters by mean travel time over `flows`.
pub fn sotl_grid_search(
    spec: &IntersectionSpec,
    flows: &[FlowDataset],
    grid: &SotlGrid,
    base: SotlParams,
) -> Result<(SotlParams, f64)> {
    let mut best: Option<(SotlParams, f64)> = None;
    for &theta in &grid.theta {
        for &mu in &grid.mu {
            for &min_green in &grid.min_green {
                let params = SotlParams {
                    theta,
                    mu,
                    min_green,
                    ..base
                };
                let mut total = 0.0;
                for flow in flows {
                    total += evaluate(&mut Sotl2::for_spec(params, spec), spec, flow)?;
                }
                let score = total / flows.len() as f64;
                if best.is_none_or(|(_, b)| score < b) {
                    best = Some((params, score));
                }
            }
        }
    }
    best.ok_or_else(|| Error::InvalidConfig("empty SOTL grid".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub controller: String,
    pub flow: String,
    pub split: String,
    pub avg_travel_time_s: f64,
}

/// Every configured flow is halved into validation and test windows; each
/// controller runs on both. With `repeats > 1` the seeded controllers run
/// once per seed and the mean is reported.
pub fn compare(config: &ExperimentConfig) -> Result<Vec<CompareRow>> {
    config.validate()?;
    let spec = config.spec()?;
    let flows = config.load_flows()?;
    if flows.is_empty() {
        return Err(Error::InvalidConfig(
            "compare needs at least one flow".into(),
        ));
    }
    let checkpoint = config
        .checkpoint
        .as_ref()
        .map(|p| Checkpoint::load(&config.resolve(p)))
        .transpose()?;

    let mut windows = Vec::new();
    for flow in &flows {
        let half = flow.duration / 2;
        windows.push((
            flow.label.clone(),
            "val",
            flow.window(0, half, flow.label.clone()),
        ));
        windows.push((
            flow.label.clone(),
            "test",
            flow.window(half, flow.duration, flow.label.clone()),
        ));
    }

    let sotl = match &config.sotl_grid {
        Some(grid) => {
            let val: Vec<FlowDataset> = windows
                .iter()
                .filter(|(_, split, _)| *split == "val")
                .map(|(_, _, f)| f.clone())
                .collect();
            sotl_grid_search(&spec, &val, grid, config.sotl)?.0
        }
        None => config.sotl,
    };

    let jobs: Vec<(&String, &(String, &str, FlowDataset))> = config
        .controllers
        .iter()
        .flat_map(|c| windows.iter().map(move |w| (c, w)))
        .collect();
    let results: Vec<Result<f64>> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(name, (_, _, flow))| {
                let spec = &spec;
                let checkpoint = checkpoint.as_ref();
                scope.spawn(move || -> Result<f64> {
                    let mut total = 0.0;
                    for r in 0..config.repeats {
                        let seed = config.seed + r as u64;
                        let mut ctrl = make_controller(name, spec, sotl, seed, checkpoint)?;
                        total += evaluate(ctrl.as_mut(), spec, flow)?;
                    }
                    Ok(total / config.repeats as f64)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("evaluation thread panicked"))
            .collect()
    });

    jobs.iter()
        .zip(results)
        .map(|((name, (label, split, _)), result)| {
            Ok(CompareRow {
                controller: name.to_string(),
                flow: label.clone(),
                split: split.to_string(),
                avg_travel_time_s: result?,
            })
        })
        .collect()
}

pub fn write_compare_csv(rows: &[CompareRow], path: &Path) -> Result<()> {
    write_csv(rows, path)
}

pub(crate) fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
