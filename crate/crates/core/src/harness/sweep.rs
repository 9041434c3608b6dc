use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agent::Checkpoint;
use crate::env::{decode_action, observe, ActionSpace};
use crate::error::{Error, Result};
use crate::sim::SimState;
use crate::traffic::FlowDataset;

use super::eval::write_csv;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n1: usize,
    pub n2: usize,
    pub q_keep: f64,
    pub q_switch: f64,
    /// `q_switch - q_keep`; positive means the network would switch.
    pub q_diff: f64,
}

/// Default lane pair: the first lane green in phase 0 and the first lane
/// green in phase 1.
fn default_lanes(mask0: &[bool], mask1: &[bool]) -> Option<(usize, usize)> {
    let a = mask0.iter().position(|&g| g)?;
    let b = mask1.iter().position(|&g| g)?;
    Some((a, b))
}

/// Q(switch) - Q(keep) over artificial states with `n1` vehicles queued on
/// the first lane and `n2` on the second, nothing else, phase 0 green.
pub fn qvalue_sweep(
    ckpt: &Checkpoint,
    lane_pair: Option<(usize, usize)>,
    grid_max: usize,
) -> Result<Vec<SweepRow>> {
    if grid_max < 1 {
        return Err(Error::InvalidConfig("grid_max must be at least 1".into()));
    }
    let task = ckpt.task()?;
    let spec = Arc::new(task.intersection_spec()?);
    if spec.num_phases() != 2 {
        return Err(Error::InvalidConfig(format!(
            "the sweep needs a two-phase checkpoint, got {} phases",
            spec.num_phases()
        )));
    }
    let space = ActionSpace::new(task.action_mode, 2);
    let net = ckpt.network()?;
    let dim = task
        .state_variant
        .dimension(spec.num_lanes(), spec.num_phases());
    if net.input_dim() != dim || net.output_dim() != space.num_actions() {
        return Err(Error::ArchitectureMismatch(
            net.sizes().to_vec(),
            vec![dim, space.num_actions()],
        ));
    }
    let (a, b) = match lane_pair {
        Some(pair) => pair,
        None => default_lanes(spec.green_mask(0), spec.green_mask(1))
            .ok_or_else(|| Error::InvalidConfig("phase without green lanes".into()))?,
    };
    if a >= spec.num_lanes() || b >= spec.num_lanes() || a == b {
        return Err(Error::InvalidConfig(format!("bad lane pair ({a}, {b})")));
    }
    let keep = (0..space.num_actions())
        .find(|&act| decode_action(space, act, 0).ok() == Some(0))
        .expect("some action keeps");
    let switch = (0..space.num_actions())
        .find(|&act| decode_action(space, act, 0).ok() == Some(1))
        .expect("some action switches");

    let flow = Arc::new(FlowDataset::empty(1));
    let mut rows = Vec::with_capacity((grid_max + 1).pow(2));
    for n1 in 0..=grid_max {
        for n2 in 0..=grid_max {
            let mut sim = SimState::new(spec.clone(), flow.clone());
            let mut id = 0;
            for (lane, n) in [(a, n1), (b, n2)] {
                let length = spec.lanes[lane].length_m;
                for k in 0..n {
                    sim.place_vehicle(lane, length - k as f64 * spec.min_spacing(), id)?;
                    id += 1;
                }
            }
            let q = net.forward(&observe(&sim, task.state_variant))?;
            rows.push(SweepRow {
                n1,
                n2,
                q_keep: q[keep],
                q_switch: q[switch],
                q_diff: q[switch] - q[keep],
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_csv(rows, path)
}
