//! The simulator as an RL environment.
//!
//! Observations are `[w | a | d | s]` blocks (variant-dependent prefix) followed
//! by a one-hot phase block. Counts are normalized by lane jam capacity,
//! distances by lane length and speeds by the lane speed limit.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SimState;
use crate::traffic::{FlowDataset, IntersectionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateVariant {
    /// Total vehicles per lane plus phase.
    #[serde(rename = "LIT")]
    Lit,
    #[serde(rename = "WA")]
    Wa,
    #[serde(rename = "WAD")]
    Wad,
    #[serde(rename = "WADS")]
    Wads,
}

impl StateVariant {
    /// Number of per-lane blocks before the phase one-hot.
    pub fn lane_blocks(self) -> usize {
        match self {
            StateVariant::Lit => 1,
            StateVariant::Wa => 2,
            StateVariant::Wad => 3,
            StateVariant::Wads => 4,
        }
    }

    pub fn dimension(self, lanes: usize, phases: usize) -> usize {
        self.lane_blocks() * lanes + phases
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionMode {
    /// Keep (0) or advance to the next phase (1).
    Cyclic,
    /// Pick any phase directly.
    Acyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionProcess {
    /// Act every second; commands during yellow are ignored.
    Mdp,
    /// Act only outside yellow; a switch spans the whole yellow period.
    Smdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionSpace {
    pub mode: ActionMode,
    pub num_phases: usize,
}

impl ActionSpace {
    pub fn new(mode: ActionMode, num_phases: usize) -> Self {
        ActionSpace { mode, num_phases }
    }

    pub fn num_actions(&self) -> usize {
        match self.mode {
            ActionMode::Cyclic => 2,
            ActionMode::Acyclic => self.num_phases,
        }
    }
}

/// Maps an action index to the phase it requests.
pub fn decode_action(space: ActionSpace, action: usize, current_phase: usize) -> Result<usize> {
    let count = space.num_actions();
    if action >= count {
        return Err(Error::InvalidAction { action, count });
    }
    Ok(match space.mode {
        ActionMode::Cyclic if action == 0 => current_phase,
        ActionMode::Cyclic => (current_phase + 1) % space.num_phases,
        ActionMode::Acyclic => action,
    })
}

pub type Observation = Vec<f64>;

pub fn observe(sim: &SimState, variant: StateVariant) -> Observation {
    let spec = sim.spec();
    let (j, i) = (spec.num_lanes(), spec.num_phases());
    let metrics = sim.lane_metrics();
    let mut obs = vec![0.0; variant.dimension(j, i)];
    let unit = |x: f64| x.clamp(0.0, 1.0);
    for (lane, m) in metrics.iter().enumerate() {
        let cap = spec.lane_capacity(lane) as f64;
        let w = unit(m.waiting as f64 / cap);
        let a = unit(m.approaching as f64 / cap);
        match variant {
            StateVariant::Lit => obs[lane] = unit(w + a),
            _ => {
                obs[lane] = w;
                obs[j + lane] = a;
                if variant != StateVariant::Wa {
                    obs[2 * j + lane] = unit(m.mean_distance / spec.lanes[lane].length_m);
                }
                if variant == StateVariant::Wads {
                    obs[3 * j + lane] = unit(m.mean_speed / spec.lanes[lane].vmax_ms);
                }
            }
        }
    }
    obs[variant.lane_blocks() * j + sim.signal().current_phase] = 1.0;
    obs
}

/// Negative total queue length.
pub fn reward(sim: &SimState) -> f64 {
    -(sim.lane_metrics().iter().map(|m| m.waiting).sum::<usize>() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_state: Observation,
    /// Simulator ticks spanned by the transition.
    pub duration: u32,
    pub terminal: bool,
}

/// One episode over one flow.
#[derive(Debug, Clone)]
pub struct Env {
    sim: SimState,
    variant: StateVariant,
    space: ActionSpace,
    process: DecisionProcess,
    gamma: f64,
    horizon: u32,
    tick_reward_sum: f64,
}

impl Env {
    /// The episode ends at the flow duration.
    pub fn new(
        spec: Arc<IntersectionSpec>,
        flow: Arc<FlowDataset>,
        variant: StateVariant,
        mode: ActionMode,
        process: DecisionProcess,
        gamma: f64,
    ) -> Result<Self> {
        flow.check_against(&spec)?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidConfig(format!(
                "gamma {gamma} outside [0, 1]"
            )));
        }
        let space = ActionSpace::new(mode, spec.num_phases());
        if space.num_actions() < 2 {
            return Err(Error::InvalidConfig("need at least 2 actions".into()));
        }
        let horizon = flow.duration;
        Ok(Env {
            sim: SimState::new(spec, flow),
            variant,
            space,
            process,
            gamma,
            horizon,
            tick_reward_sum: 0.0,
        })
    }

    pub fn sim(&self) -> &SimState {
        &self.sim
    }

    pub fn variant(&self) -> StateVariant {
        self.variant
    }

    pub fn action_space(&self) -> ActionSpace {
        self.space
    }

    pub fn process(&self) -> DecisionProcess {
        self.process
    }

    pub fn state_dim(&self) -> usize {
        self.variant
            .dimension(self.sim.spec().num_lanes(), self.sim.spec().num_phases())
    }

    pub fn observation(&self) -> Observation {
        observe(&self.sim, self.variant)
    }

    pub fn is_terminal(&self) -> bool {
        self.sim.clock() >= self.horizon
    }

    /// Undiscounted sum of per-tick rewards so far.
    pub fn tick_reward_sum(&self) -> f64 {
        self.tick_reward_sum
    }

    pub fn step(&mut self, action: usize) -> Result<Transition> {
        match self.process {
            DecisionProcess::Mdp => self.mdp_step(action),
            DecisionProcess::Smdp => self.smdp_step(action),
        }
    }

    fn tick(&mut self) -> f64 {
        self.sim.tick();
        let r = reward(&self.sim);
        self.tick_reward_sum += r;
        r
    }

    fn command(&mut self, action: usize) -> Result<bool> {
        let target = decode_action(self.space, action, self.sim.signal().current_phase)?;
        self.sim.command_signal(target)
    }

    /// One tick per decision. During yellow the command has no effect.
    pub fn mdp_step(&mut self, action: usize) -> Result<Transition> {
        if self.is_terminal() {
            return Err(Error::EpisodeTerminal);
        }
        let state = self.observation();
        self.command(action)?;
        let reward = self.tick();
        Ok(Transition {
            state,
            action,
            reward,
            next_state: self.observation(),
            duration: 1,
            terminal: self.is_terminal(),
        })
    }

    /// A keep spans one tick with reward `γ·r₁`; a switch spans the yellow
    /// period plus one green tick with reward `Σ_{t=1}^{ψ+1} γ^t r_t`. A switch
    /// cut short by the horizon covers only the ticks that remain.
    pub fn smdp_step(&mut self, action: usize) -> Result<Transition> {
        if self.is_terminal() {
            return Err(Error::EpisodeTerminal);
        }
        if self.sim.is_yellow() {
            return Err(Error::MidYellow);
        }
        let state = self.observation();
        let switched = self.command(action)?;
        let span = if switched {
            self.sim.spec().yellow_duration + 1
        } else {
            1
        };
        let mut reward = 0.0;
        let mut discount = 1.0;
        let mut duration = 0;
        while duration < span && !self.is_terminal() {
            discount *= self.gamma;
            reward += discount * self.tick();
            duration += 1;
        }
        Ok(Transition {
            state,
            action,
            reward,
            next_state: self.observation(),
            duration,
            terminal: self.is_terminal(),
        })
    }
}

impl fmt::Display for StateVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateVariant::Lit => "LIT",
            StateVariant::Wa => "WA",
            StateVariant::Wad => "WAD",
            StateVariant::Wads => "WADS",
        })
    }
}

impl FromStr for StateVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LIT" => Ok(StateVariant::Lit),
            "WA" => Ok(StateVariant::Wa),
            "WAD" => Ok(StateVariant::Wad),
            "WADS" => Ok(StateVariant::Wads),
            _ => Err(Error::InvalidConfig(format!("unknown state variant {s:?}"))),
        }
    }
}
