//! Rule-based reference controllers.
//!
//! Every controller is consulted once per non-yellow tick and answers with the
//! phase it wants; asking for the current phase means keep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sim::{SimState, Status};
use crate::traffic::IntersectionSpec;

pub const FIXED_GREEN_S: u32 = 20;

pub trait Controller {
    fn name(&self) -> &str;
    fn decide(&mut self, sim: &SimState) -> Result<usize>;
}

/// Cyclic plan: `⌊green_clock / green_time⌋ mod I`.
pub fn fixed_policy(green_clock: u64, green_time: u32, num_phases: usize) -> usize {
    ((green_clock / green_time as u64) % num_phases as u64) as usize
}

pub fn random_policy(rng: &mut impl Rng, num_phases: usize) -> usize {
    rng.gen_range(0..num_phases)
}

/// Fixed-time plan. The green clock only advances on green ticks, so every
/// phase receives exactly `green_time` seconds of green.
#[derive(Debug, Clone)]
pub struct FixedTime {
    green_time: u32,
    green_clock: u64,
}

impl FixedTime {
    pub fn new(green_time: u32) -> Self {
        assert!(green_time > 0);
        FixedTime {
            green_time,
            green_clock: 0,
        }
    }
}

impl Default for FixedTime {
    fn default() -> Self {
        Self::new(FIXED_GREEN_S)
    }
}

impl Controller for FixedTime {
    fn name(&self) -> &str {
        "fixed"
    }

    fn decide(&mut self, sim: &SimState) -> Result<usize> {
        let target = fixed_policy(self.green_clock, self.green_time, sim.spec().num_phases());
        if target == sim.signal().current_phase {
            self.green_clock += 1;
        }
        Ok(target)
    }
}

#[derive(Debug, Clone)]
pub struct RandomController {
    rng: ChaCha8Rng,
}

impl RandomController {
    pub fn new(seed: u64) -> Self {
        RandomController {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Controller for RandomController {
    fn name(&self) -> &str {
        "random"
    }

    fn decide(&mut self, sim: &SimState) -> Result<usize> {
        Ok(random_policy(&mut self.rng, sim.spec().num_phases()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SotlParams {
    /// Switching threshold on κ, in vehicle-seconds.
    pub theta: f64,
    /// Platoon cut-off: an approaching group smaller than this is not split.
    pub mu: u32,
    /// Minimum green seconds before any switch.
    pub min_green: u32,
    pub detection_distance: f64,
}

impl Default for SotlParams {
    fn default() -> Self {
        SotlParams {
            theta: 50.0,
            mu: 3,
            min_green: 5,
            detection_distance: 80.0,
        }
    }
}

/// Vehicles within `distance` of the stop line on each lane, moving or not.
pub fn detected_counts(sim: &SimState, distance: f64) -> Vec<u32> {
    (0..sim.spec().num_lanes())
        .map(|j| {
            let length = sim.spec().lanes[j].length_m;
            sim.lane_vehicles(j)
                .iter()
                .filter(|v| length - v.position <= distance)
                .count() as u32
        })
        .collect()
}

/// Approaching vehicles within `distance` on lanes that are green now.
pub fn vehicles_near_green(sim: &SimState, distance: f64) -> u32 {
    let phase = sim.signal().current_phase;
    (0..sim.spec().num_lanes())
        .filter(|&j| sim.spec().lane_green(phase, j))
        .map(|j| {
            let length = sim.spec().lanes[j].length_m;
            sim.lane_vehicles(j)
                .iter()
                .filter(|v| v.status == Status::Approaching && length - v.position <= distance)
                .count() as u32
        })
        .sum()
}

fn phase_lanes(spec: &IntersectionSpec) -> Vec<Vec<bool>> {
    (0..spec.num_phases())
        .map(|p| spec.green_mask(p).to_vec())
        .collect()
}

/// Cut-off SOTL: per-phase counters integrate red-lane vehicles; only the next
/// phase in the cycle can be switched to.
#[derive(Debug, Clone)]
pub struct Sotl1 {
    params: SotlParams,
    phase_lanes: Vec<Vec<bool>>,
    counters: Vec<u64>,
    phi_green: u32,
}

impl Sotl1 {
    pub fn new(params: SotlParams, phase_lanes: Vec<Vec<bool>>) -> Self {
        let n = phase_lanes.len();
        Sotl1 {
            params,
            phase_lanes,
            counters: vec![0; n],
            phi_green: 0,
        }
    }

    pub fn for_spec(params: SotlParams, spec: &IntersectionSpec) -> Self {
        Self::new(params, phase_lanes(spec))
    }

    pub fn counters(&self) -> &[u64] {
        &self.counters
    }

    pub fn step(&mut self, counts: &[u32], current_phase: usize) -> usize {
        self.phi_green += 1;
        let green = &self.phase_lanes[current_phase];
        for (k, lanes) in self.phase_lanes.iter().enumerate() {
            self.counters[k] += lanes
                .iter()
                .zip(counts)
                .zip(green)
                .filter(|((in_phase, _), is_green)| **in_phase && !**is_green)
                .map(|((_, &c), _)| c as u64)
                .sum::<u64>();
        }
        let next = (current_phase + 1) % self.phase_lanes.len();
        if self.phi_green > self.params.min_green && self.counters[next] as f64 > self.params.theta
        {
            self.counters[next] = 0;
            self.phi_green = 0;
            return next;
        }
        current_phase
    }
}

impl Controller for Sotl1 {
    fn name(&self) -> &str {
        "sotl1"
    }

    fn decide(&mut self, sim: &SimState) -> Result<usize> {
        let counts = detected_counts(sim, self.params.detection_distance);
        Ok(self.step(&counts, sim.signal().current_phase))
    }
}

/// Multi-phase SOTL with per-lane integrals ρ. κ of a phase is the sum of ρ
/// over its lanes; choosing a phase clears ρ on every lane it turns green, so
/// the cleared vehicles drop out of every phase sharing those lanes.
#[derive(Debug, Clone)]
pub struct Sotl2 {
    params: SotlParams,
    phase_lanes: Vec<Vec<bool>>,
    rho: Vec<u64>,
    kappa: Vec<u64>,
    phi_green: u32,
}

impl Sotl2 {
    pub fn new(params: SotlParams, phase_lanes: Vec<Vec<bool>>) -> Self {
        let (i, j) = (phase_lanes.len(), phase_lanes[0].len());
        Sotl2 {
            params,
            phase_lanes,
            rho: vec![0; j],
            kappa: vec![0; i],
            phi_green: 0,
        }
    }

    pub fn for_spec(params: SotlParams, spec: &IntersectionSpec) -> Self {
        Self::new(params, phase_lanes(spec))
    }

    pub fn rho(&self) -> &[u64] {
        &self.rho
    }

    /// κ as computed during the last step.
    pub fn kappa(&self) -> &[u64] {
        &self.kappa
    }

    /// Overrides the integrals, e.g. to start from a recorded state.
    pub fn set_rho(&mut self, rho: Vec<u64>) {
        assert_eq!(rho.len(), self.rho.len());
        self.rho = rho;
    }

    pub fn set_phi_green(&mut self, seconds: u32) {
        self.phi_green = seconds;
    }

    /// `counts[j]`: vehicles within detection distance on lane `j`. Lanes green
    /// under `current_phase` are being served and do not integrate.
    pub fn step(&mut self, counts: &[u32], near_green: u32, current_phase: usize) -> usize {
        self.phi_green += 1;
        let green = &self.phase_lanes[current_phase];
        for ((rho, &c), &g) in self.rho.iter_mut().zip(counts).zip(green) {
            if !g {
                *rho += c as u64;
            }
        }
        for (k, lanes) in self.phase_lanes.iter().enumerate() {
            self.kappa[k] = lanes
                .iter()
                .zip(&self.rho)
                .filter(|(in_phase, _)| **in_phase)
                .map(|(_, r)| r)
                .sum();
        }
        let gate_open = !(0 < near_green && near_green < self.params.mu);
        if self.phi_green > self.params.min_green && gate_open {
            let mut best = 0;
            for k in 1..self.kappa.len() {
                if self.kappa[k] > self.kappa[best] {
                    best = k;
                }
            }
            if self.kappa[best] as f64 > self.params.theta {
                for (rho, &in_phase) in self.rho.iter_mut().zip(&self.phase_lanes[best]) {
                    if in_phase {
                        *rho = 0;
                    }
                }
                if best != current_phase {
                    self.phi_green = 0;
                }
                return best;
            }
        }
        current_phase
    }
}

impl Controller for Sotl2 {
    fn name(&self) -> &str {
        "sotl2"
    }

    fn decide(&mut self, sim: &SimState) -> Result<usize> {
        let counts = detected_counts(sim, self.params.detection_distance);
        let near = vehicles_near_green(sim, self.params.detection_distance);
        Ok(self.step(&counts, near, sim.signal().current_phase))
    }
}
