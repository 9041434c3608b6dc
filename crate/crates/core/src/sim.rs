//! Deterministic 1-second-tick simulation of one intersection.
//!
//! Kinematics are deliberately simple: every vehicle jumps to the furthest
//! feasible position each tick, bounded by its free-flow speed, the leader
//! (minus the jam spacing) and the stop line when its movement is not green.
//! Only the vehicle at the head of a lane at the start of a tick may cross, so
//! a green lane discharges at most one vehicle per second.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::traffic::{FlowDataset, IntersectionSpec};

/// Below this speed (m/s) a vehicle counts as waiting.
pub const WAITING_SPEED_MS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Waiting,
    Approaching,
}

impl Status {
    fn from_speed(speed: f64) -> Self {
        if speed < WAITING_SPEED_MS {
            Status::Waiting
        } else {
            Status::Approaching
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalState {
    pub current_phase: usize,
    pub yellow_remaining: u32,
    /// Meaningful only while `yellow_remaining > 0`.
    pub pending_phase: usize,
    pub time_in_phase: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: u32,
    pub lane: usize,
    /// Meters from lane entry; the stop line sits at the lane length.
    pub position: f64,
    pub speed: f64,
    pub status: Status,
    pub spawn_time: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Queued {
    id: u32,
    spawn_time: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletedTrip {
    pub id: u32,
    pub spawn_time: u32,
    pub exit_time: u32,
}

impl CompletedTrip {
    pub fn travel_time(&self) -> u32 {
        self.exit_time - self.spawn_time
    }
}

/// Per-lane sensor readings: waiting count, approaching count, mean distance
/// to the stop line and mean speed of the approaching vehicles.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LaneMetrics {
    pub waiting: usize,
    pub approaching: usize,
    pub mean_distance: f64,
    pub mean_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub tick: u32,
    pub vehicle: u32,
    pub lane: usize,
    pub position: f64,
    pub speed: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    clock: u32,
    spec: Arc<IntersectionSpec>,
    flow: Arc<FlowDataset>,
    signal: SignalState,
    /// Vehicles per lane, head of the queue (largest position) first.
    lanes: Vec<Vec<VehicleState>>,
    backlog: Vec<VecDeque<Queued>>,
    completed: Vec<CompletedTrip>,
    cursor: usize,
    /// Vehicles injected directly with [`SimState::place_vehicle`].
    placed: usize,
}

impl SimState {
    /// Fresh simulation at clock 0, phase 0 green. The flow's movements must be
    /// valid for `spec` (see [`FlowDataset::check_against`]).
    pub fn new(spec: Arc<IntersectionSpec>, flow: Arc<FlowDataset>) -> Self {
        debug_assert!(flow.check_against(&spec).is_ok());
        let j = spec.num_lanes();
        SimState {
            clock: 0,
            signal: SignalState {
                current_phase: 0,
                yellow_remaining: 0,
                pending_phase: 0,
                time_in_phase: 0,
            },
            lanes: vec![Vec::new(); j],
            backlog: vec![VecDeque::new(); j],
            completed: Vec::new(),
            cursor: 0,
            placed: 0,
            spec,
            flow,
        }
    }

    pub fn clock(&self) -> u32 {
        self.clock
    }

    pub fn spec(&self) -> &IntersectionSpec {
        &self.spec
    }

    pub fn spec_arc(&self) -> &Arc<IntersectionSpec> {
        &self.spec
    }

    pub fn flow(&self) -> &FlowDataset {
        &self.flow
    }

    pub fn signal(&self) -> &SignalState {
        &self.signal
    }

    pub fn is_yellow(&self) -> bool {
        self.signal.yellow_remaining > 0
    }

    pub fn lane_vehicles(&self, lane: usize) -> &[VehicleState] {
        &self.lanes[lane]
    }

    pub fn completed(&self) -> &[CompletedTrip] {
        &self.completed
    }

    pub fn spawned(&self) -> usize {
        self.cursor + self.placed
    }

    pub fn on_network(&self) -> usize {
        self.lanes.iter().map(Vec::len).sum()
    }

    pub fn in_backlog(&self) -> usize {
        self.backlog.iter().map(VecDeque::len).sum()
    }

    /// Whether `lane` may discharge right now: green and not in yellow.
    pub fn lane_has_right_of_way(&self, lane: usize) -> bool {
        !self.is_yellow() && self.spec.lane_green(self.signal.current_phase, lane)
    }

    /// Requests a phase change. Returns whether a yellow period was started;
    /// requests for the current phase or during yellow are ignored.
    pub fn command_signal(&mut self, target_phase: usize) -> Result<bool> {
        let count = self.spec.num_phases();
        if target_phase >= count {
            return Err(Error::InvalidPhase {
                phase: target_phase,
                count,
            });
        }
        if target_phase == self.signal.current_phase || self.is_yellow() {
            return Ok(false);
        }
        self.signal.yellow_remaining = self.spec.yellow_duration;
        self.signal.pending_phase = target_phase;
        Ok(true)
    }

    /// Advances one second: spawn, move, admit from backlog, update signal.
    pub fn tick(&mut self) {
        let now = self.clock;
        let exit_time = now + 1;

        while let Some(v) = self.flow.vehicles.get(self.cursor) {
            if v.spawn_time > now {
                break;
            }
            let lane = self.spec.lane_of_movement(v.movement);
            self.backlog[lane].push_back(Queued {
                id: v.id,
                spawn_time: v.spawn_time,
            });
            self.cursor += 1;
        }

        let s_min = self.spec.min_spacing();
        let yellow = self.is_yellow();
        let phase = self.signal.current_phase;
        for (j, lane) in self.lanes.iter_mut().enumerate() {
            let length = self.spec.lanes[j].length_m;
            let vmax = self.spec.lanes[j].vmax_ms;
            let green = !yellow && self.spec.lane_green(phase, j);
            let mut leader_bound: Option<f64> = None;
            let mut exited = false;
            for (k, v) in lane.iter_mut().enumerate() {
                let free = v.position + vmax;
                if k == 0 && green && free >= length {
                    self.completed.push(CompletedTrip {
                        id: v.id,
                        spawn_time: v.spawn_time,
                        exit_time,
                    });
                    exited = true;
                    continue;
                }
                let mut target = free.min(length);
                if let Some(bound) = leader_bound {
                    target = target.min(bound);
                }
                let target = target.max(v.position);
                v.speed = target - v.position;
                v.position = target;
                v.status = Status::from_speed(v.speed);
                leader_bound = Some(target - s_min);
            }
            if exited {
                lane.remove(0);
            }

            if let Some(&head) = self.backlog[j].front() {
                let room = match lane.last() {
                    None => Some(vmax),
                    Some(rear) if rear.position >= s_min => Some((rear.position - s_min).min(vmax)),
                    Some(_) => None,
                };
                if let Some(speed) = room {
                    self.backlog[j].pop_front();
                    lane.push(VehicleState {
                        id: head.id,
                        lane: j,
                        position: 0.0,
                        speed,
                        status: Status::from_speed(speed),
                        spawn_time: head.spawn_time,
                    });
                }
            }
        }

        if self.signal.yellow_remaining > 0 {
            self.signal.yellow_remaining -= 1;
            if self.signal.yellow_remaining == 0 {
                self.signal.current_phase = self.signal.pending_phase;
                self.signal.time_in_phase = 0;
            }
        } else {
            self.signal.time_in_phase += 1;
        }
        self.clock = exit_time;
    }

    pub fn lane_metrics(&self) -> Vec<LaneMetrics> {
        self.lanes
            .iter()
            .enumerate()
            .map(|(j, lane)| {
                let length = self.spec.lanes[j].length_m;
                let mut m = LaneMetrics::default();
                let (mut dist, mut speed) = (0.0, 0.0);
                for v in lane {
                    match v.status {
                        Status::Waiting => m.waiting += 1,
                        Status::Approaching => {
                            m.approaching += 1;
                            dist += length - v.position;
                            speed += v.speed;
                        }
                    }
                }
                if m.approaching > 0 {
                    m.mean_distance = dist / m.approaching as f64;
                    m.mean_speed = speed / m.approaching as f64;
                }
                m
            })
            .collect()
    }

    /// Mean travel time over every spawned vehicle; trips still open at the
    /// current clock count as `clock - spawn_time`.
    pub fn avg_travel_time(&self) -> Result<f64> {
        let open = self
            .lanes
            .iter()
            .flatten()
            .map(|v| v.spawn_time)
            .chain(self.backlog.iter().flatten().map(|q| q.spawn_time));
        mean_travel_time(&self.completed, open, self.clock)
    }

    /// Inserts a vehicle directly onto a lane, behind everything already
    /// there. Intended for scenario setup; the vehicle counts as spawned.
    pub fn place_vehicle(&mut self, lane: usize, position: f64, id: u32) -> Result<()> {
        let length = self.spec.lanes[lane].length_m;
        if !(0.0..=length).contains(&position) {
            return Err(Error::InvalidFlow(format!(
                "position {position} outside lane"
            )));
        }
        if let Some(rear) = self.lanes[lane].last() {
            if rear.position - position < self.spec.min_spacing() {
                return Err(Error::InvalidFlow(format!(
                    "position {position} too close to vehicle at {}",
                    rear.position
                )));
            }
        }
        self.lanes[lane].push(VehicleState {
            id,
            lane,
            position,
            speed: 0.0,
            status: Status::Waiting,
            spawn_time: self.clock,
        });
        self.placed += 1;
        Ok(())
    }

    pub fn trajectory(&self) -> impl Iterator<Item = TrajectoryRecord> + '_ {
        self.lanes.iter().flatten().map(|v| TrajectoryRecord {
            tick: self.clock,
            vehicle: v.id,
            lane: v.lane,
            position: v.position,
            speed: v.speed,
            status: v.status,
        })
    }
}

/// Mean of completed travel times plus truncated `horizon - spawn` for open
/// trips.
pub fn mean_travel_time(
    completed: &[CompletedTrip],
    open_spawn_times: impl IntoIterator<Item = u32>,
    horizon: u32,
) -> Result<f64> {
    let mut total: u64 = completed.iter().map(|c| c.travel_time() as u64).sum();
    let mut count = completed.len();
    for spawn in open_spawn_times {
        total += horizon.saturating_sub(spawn) as u64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyFlow);
    }
    Ok(total as f64 / count as f64)
}

/// CSV writer for per-tick vehicle records.
pub struct TrajectoryWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(writer: W) -> Self {
        TrajectoryWriter {
            inner: csv::Writer::from_writer(writer),
        }
    }

    pub fn record(&mut self, sim: &SimState) -> Result<()> {
        for rec in sim.trajectory() {
            self.inner.serialize(rec)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::io("<trajectory>", e))
    }
}
