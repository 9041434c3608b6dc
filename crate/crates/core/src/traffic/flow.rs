use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::topology::{IntersectionSpec, DEFAULT_BODY_LENGTH_M};
use crate::error::{read_to_string, write_string, Error, Result};

fn default_body_length() -> f64 {
    DEFAULT_BODY_LENGTH_M
}

fn is_default_body_length(v: &f64) -> bool {
    *v == DEFAULT_BODY_LENGTH_M
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vehicle {
    pub id: u32,
    #[serde(rename = "spawn_time_s")]
    pub spawn_time: u32,
    pub movement: usize,
    #[serde(
        rename = "body_length_m",
        default = "default_body_length",
        skip_serializing_if = "is_default_body_length"
    )]
    pub body_length: f64,
}

impl Vehicle {
    pub fn new(id: u32, spawn_time: u32, movement: usize) -> Self {
        Vehicle {
            id,
            spawn_time,
            movement,
            body_length: DEFAULT_BODY_LENGTH_M,
        }
    }
}

/// A spawn schedule: vehicles sorted by spawn time, all strictly before
/// `duration`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDataset {
    #[serde(rename = "duration_s")]
    pub duration: u32,
    #[serde(default)]
    pub label: String,
    pub vehicles: Vec<Vehicle>,
}

impl FlowDataset {
    pub fn new(vehicles: Vec<Vehicle>, duration: u32, label: impl Into<String>) -> Result<Self> {
        let flow = FlowDataset {
            duration,
            label: label.into(),
            vehicles,
        };
        flow.validate()?;
        Ok(flow)
    }

    pub fn empty(duration: u32) -> Self {
        FlowDataset {
            duration,
            label: String::new(),
            vehicles: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .vehicles
            .windows(2)
            .any(|w| w[0].spawn_time > w[1].spawn_time)
        {
            return Err(Error::InvalidFlow(
                "vehicles not sorted by spawn time".into(),
            ));
        }
        if let Some(v) = self.vehicles.iter().find(|v| v.spawn_time >= self.duration) {
            return Err(Error::InvalidFlow(format!(
                "vehicle {} spawns at {} s, outside duration {} s",
                v.id, v.spawn_time, self.duration
            )));
        }
        if let Some(v) = self
            .vehicles
            .iter()
            .find(|v| !(v.body_length.is_finite() && v.body_length > 0.0))
        {
            return Err(Error::InvalidFlow(format!(
                "vehicle {} has bad body length",
                v.id
            )));
        }
        Ok(())
    }

    /// Checks every movement id against an intersection.
    pub fn check_against(&self, spec: &IntersectionSpec) -> Result<()> {
        self.validate()?;
        match self
            .vehicles
            .iter()
            .find(|v| v.movement >= spec.movements.len())
        {
            Some(v) => Err(Error::InvalidFlow(format!(
                "vehicle {} uses movement {} but the intersection has {}",
                v.id,
                v.movement,
                spec.movements.len()
            ))),
            None => Ok(()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let flow: FlowDataset = serde_json::from_str(text)
            .map_err(|e| Error::InvalidFlow(format!("schema violation: {e}")))?;
        flow.validate()?;
        Ok(flow)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("flow serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_json())
    }

    /// Sub-window `[start, end)` re-based to start at zero.
    pub fn window(&self, start: u32, end: u32, label: impl Into<String>) -> FlowDataset {
        FlowDataset {
            duration: end - start,
            label: label.into(),
            vehicles: self
                .vehicles
                .iter()
                .filter(|v| v.spawn_time >= start && v.spawn_time < end)
                .map(|v| Vehicle {
                    spawn_time: v.spawn_time - start,
                    ..v.clone()
                })
                .collect(),
        }
    }
}

/// Demand generators standing in for recorded trajectories.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowProfile {
    /// Independent Poisson arrivals on each of `lanes` lanes.
    Uniform { rate_per_lane: f64, lanes: usize },
    /// Platoons of `cluster_size` vehicles, one lane per platoon drawn by weight.
    Clustered {
        cluster_size: u32,
        inter_cluster_gap: u32,
        within_gap: u32,
        lane_weights: Vec<f64>,
    },
}

impl FlowProfile {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidProfile(msg.into()));
        match self {
            FlowProfile::Uniform {
                rate_per_lane,
                lanes,
            } => {
                if !rate_per_lane.is_finite() || *rate_per_lane < 0.0 {
                    return bad("rate must be a non-negative number");
                }
                if *lanes == 0 {
                    return bad("lanes must be >= 1");
                }
            }
            FlowProfile::Clustered {
                cluster_size,
                inter_cluster_gap,
                within_gap,
                lane_weights,
            } => {
                if *cluster_size == 0 {
                    return bad("cluster size must be >= 1");
                }
                if *inter_cluster_gap == 0 || *within_gap == 0 {
                    return bad("gaps must be positive");
                }
                if lane_weights.is_empty()
                    || lane_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
                    || lane_weights.iter().sum::<f64>() <= 0.0
                {
                    return bad("lane weights must be non-negative with a positive sum");
                }
            }
        }
        Ok(())
    }
}

fn weighted_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            return i;
        }
        draw -= w;
    }
    // rounding at the upper end
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Deterministic in `(profile, seed, duration)`. Movement `j` rides lane `j`.
pub fn generate_flow(profile: &FlowProfile, seed: u64, duration: u32) -> Result<FlowDataset> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (spawn_time, lane)
    let mut spawns: Vec<(u32, usize)> = Vec::new();
    match profile {
        FlowProfile::Uniform {
            rate_per_lane,
            lanes,
        } => {
            if *rate_per_lane > 0.0 {
                for lane in 0..*lanes {
                    let mut t = 0.0f64;
                    loop {
                        let u: f64 = rng.gen();
                        t += -(1.0 - u).ln() / rate_per_lane;
                        if t >= duration as f64 {
                            break;
                        }
                        spawns.push((t.floor() as u32, lane));
                    }
                }
            }
        }
        FlowProfile::Clustered {
            cluster_size,
            inter_cluster_gap,
            within_gap,
            lane_weights,
        } => {
            let mut start = 0u32;
            while start < duration {
                let lane = weighted_index(lane_weights, &mut rng);
                for i in 0..*cluster_size {
                    let t = start + i * within_gap;
                    if t < duration {
                        spawns.push((t, lane));
                    }
                }
                start = match start.checked_add(*inter_cluster_gap) {
                    Some(s) => s,
                    None => break,
                };
            }
        }
    }
    spawns.sort();
    let vehicles = spawns
        .into_iter()
        .enumerate()
        .map(|(id, (t, lane))| Vehicle::new(id as u32, t, lane))
        .collect();
    FlowDataset::new(vehicles, duration, format!("{profile}@{seed}"))
}

pub struct DatasetSplit {
    pub train: Vec<FlowDataset>,
    pub val: FlowDataset,
    pub test: FlowDataset,
}

/// Holds one dataset out: its first half validates, its second half tests.
pub fn split_dataset(datasets: &[FlowDataset], holdout_index: usize) -> Result<DatasetSplit> {
    if datasets.len() < 2 {
        return Err(Error::TooFewDatasets(datasets.len()));
    }
    let holdout = datasets.get(holdout_index).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "holdout index {holdout_index} out of range for {} datasets",
            datasets.len()
        ))
    })?;
    if holdout.duration < 2 {
        return Err(Error::InvalidFlow("holdout too short to halve".into()));
    }
    let half = holdout.duration / 2;
    let val = holdout.window(0, half, format!("{}:val", holdout.label));
    let test = holdout.window(half, holdout.duration, format!("{}:test", holdout.label));
    let train = datasets
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != holdout_index)
        .map(|(_, d)| d.clone())
        .collect();
    Ok(DatasetSplit { train, val, test })
}

impl fmt::Display for FlowProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowProfile::Uniform {
                rate_per_lane,
                lanes,
            } => write!(f, "uniform:rate={rate_per_lane},lanes={lanes}"),
            FlowProfile::Clustered {
                cluster_size,
                inter_cluster_gap,
                within_gap,
                lane_weights,
            } => {
                let weights: Vec<String> = lane_weights.iter().map(|w| w.to_string()).collect();
                write!(
                    f,
                    "clustered:size={cluster_size},inter={inter_cluster_gap},within={within_gap},weights={}",
                    weights.join("/")
                )
            }
        }
    }
}

/// `uniform:rate=0.05,lanes=8` or
/// `clustered:size=5,inter=60,within=2,weights=3/1/3/1`.
impl FromStr for FlowProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidProfile(msg);
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("expected <kind>:<params>, got {s:?}")))?;
        let mut params = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {item:?}")))?;
            params.insert(k.trim(), v.trim());
        }
        fn take<T: FromStr>(
            params: &mut std::collections::BTreeMap<&str, &str>,
            key: &str,
        ) -> Result<T> {
            let raw = params
                .remove(key)
                .ok_or_else(|| Error::InvalidProfile(format!("missing {key}")))?;
            raw.parse()
                .map_err(|_| Error::InvalidProfile(format!("bad value for {key}: {raw:?}")))
        }
        let profile = match kind.trim() {
            "uniform" => FlowProfile::Uniform {
                rate_per_lane: take(&mut params, "rate")?,
                lanes: take(&mut params, "lanes")?,
            },
            "clustered" => {
                let weights: String = take(&mut params, "weights")?;
                let lane_weights = weights
                    .split('/')
                    .map(|w| {
                        w.trim()
                            .parse::<f64>()
                            .map_err(|_| bad(format!("bad weight {w:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FlowProfile::Clustered {
                    cluster_size: take(&mut params, "size")?,
                    inter_cluster_gap: take(&mut params, "inter")?,
                    within_gap: take(&mut params, "within")?,
                    lane_weights,
                }
            }
            other => return Err(bad(format!("unknown profile kind {other:?}"))),
        };
        if let Some(key) = params.keys().next() {
            return Err(bad(format!("unknown parameter {key:?}")));
        }
        profile.validate()?;
        Ok(profile)
    }
}
