use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::DqnConfig;
use crate::baselines::SotlParams;
use crate::env::{ActionMode, DecisionProcess, StateVariant};
use crate::error::{read_to_string, Error, Result};
use crate::traffic::{generate_flow, split_dataset, DatasetSplit, FlowDataset, IntersectionSpec};

/// Where an intersection comes from: `builtin:two_phase`, `builtin:eight`, or
/// a JSON file path.
pub fn load_spec(source: &str, base: &Path) -> Result<IntersectionSpec> {
    match source {
        "builtin:two_phase" => Ok(IntersectionSpec::two_phase()),
        "builtin:eight" => Ok(IntersectionSpec::default_eight()),
        other if other.starts_with("builtin:") => Err(Error::InvalidConfig(format!(
            "unknown builtin intersection {other:?}"
        ))),
        path => IntersectionSpec::from_path(&base.join(path)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FlowSource {
    Path {
        path: PathBuf,
    },
    Profile {
        profile: String,
        seed: u64,
        #[serde(default = "default_duration")]
        duration: u32,
    },
}

fn default_duration() -> u32 {
    3600
}

impl FlowSource {
    pub fn load(&self, base: &Path) -> Result<FlowDataset> {
        match self {
            FlowSource::Path { path } => FlowDataset::from_path(&base.join(path)),
            FlowSource::Profile {
                profile,
                seed,
                duration,
            } => generate_flow(&profile.parse()?, *seed, *duration),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SotlGrid {
    pub theta: Vec<f64>,
    pub mu: Vec<u32>,
    pub min_green: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub intersection: String,
    pub flows: Vec<FlowSource>,
    /// Index of the flow split into validation and test halves; the last one
    /// when unset.
    pub holdout: Option<usize>,
    pub state_variant: StateVariant,
    pub action_mode: ActionMode,
    pub decision_process: DecisionProcess,
    pub dqn: DqnConfig,
    pub sotl: SotlParams,
    /// Truncates every flow to this many seconds.
    pub horizon: Option<u32>,
    pub eval_every: u32,
    pub total_epochs: u32,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// When false the wall-clock column is written as 0 so metrics files are
    /// byte-comparable across runs.
    pub record_wall_clock: bool,
    /// Controllers for `compare`: fixed, random, sotl1, sotl2, dqn.
    pub controllers: Vec<String>,
    /// Checkpoint used by the `dqn` controller in `compare`.
    pub checkpoint: Option<PathBuf>,
    pub repeats: u32,
    /// When set, `compare` tunes SOTL parameters on the validation halves.
    pub sotl_grid: Option<SotlGrid>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            intersection: "builtin:two_phase".into(),
            flows: Vec::new(),
            holdout: None,
            state_variant: StateVariant::Wad,
            action_mode: ActionMode::Acyclic,
            decision_process: DecisionProcess::Smdp,
            dqn: DqnConfig::default(),
            sotl: SotlParams::default(),
            horizon: None,
            eval_every: 50,
            total_epochs: 200,
            seed: 0,
            output_dir: PathBuf::from("runs/default"),
            record_wall_clock: true,
            controllers: ["fixed", "random", "sotl1", "sotl2"]
                .map(String::from)
                .to_vec(),
            checkpoint: None,
            repeats: 1,
            sotl_grid: None,
            base_dir: PathBuf::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Relative input paths inside the file resolve against its directory;
    /// `output_dir` stays relative to the working directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::from_toml(&read_to_string(path)?)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.eval_every == 0 {
            return Err(Error::InvalidConfig("eval_every must be at least 1".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        if self.sotl.theta <= 0.0 || self.sotl.min_green < 1 {
            return Err(Error::InvalidConfig(
                "SOTL needs theta > 0 and min_green >= 1".into(),
            ));
        }
        if self.horizon == Some(0) {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        self.dqn.validate()
    }

    pub fn spec(&self) -> Result<IntersectionSpec> {
        load_spec(&self.intersection, &self.base_dir)
    }

    pub fn load_flows(&self) -> Result<Vec<FlowDataset>> {
        self.flows
            .iter()
            .map(|source| {
                let flow = source.load(&self.base_dir)?;
                Ok(match self.horizon {
                    Some(h) if h < flow.duration => flow.window(0, h, flow.label.clone()),
                    _ => flow,
                })
            })
            .collect()
    }

    pub fn split(&self) -> Result<DatasetSplit> {
        let flows = self.load_flows()?;
        let holdout = self.holdout.unwrap_or(flows.len().saturating_sub(1));
        split_dataset(&flows, holdout)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toml_uses_defaults() {
        let config = ExperimentConfig::from_toml(
            r#"
            flows = [
                { profile = "uniform:rate=0.05,lanes=4", seed = 1, duration = 600 },
                { profile = "uniform:rate=0.05,lanes=4", seed = 2, duration = 600 },
            ]
            [dqn]
            batch_size = 32
            "#,
        )
        .unwrap();
        assert_eq!(config.eval_every, 50);
        assert_eq!(config.dqn.batch_size, 32);
        assert_eq!(config.dqn.gamma, 0.99);
        let split = config.split().unwrap();
        assert_eq!(split.train.len(), 1);
        assert_eq!(split.val.duration, 300);
    }

    #[test]
    fn rejects_unknown_fields_and_zero_eval_every() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("eval_every = 0").is_err());
    }

    #[test]
    fn horizon_truncates_flows() {
        let config = ExperimentConfig {
            flows: vec![FlowSource::Profile {
                profile: "uniform:rate=0.1,lanes=4".into(),
                seed: 3,
                duration: 1000,
            }],
            horizon: Some(200),
            ..ExperimentConfig::default()
        };
        let flows = config.load_flows().unwrap();
        assert_eq!(flows[0].duration, 200);
        assert!(flows[0].vehicles.iter().all(|v| v.spawn_time < 200));
    }

    #[test]
    fn toml_round_trip() {
        let config = ExperimentConfig {
            flows: vec![FlowSource::Path {
                path: "a.json".into(),
            }],
            sotl_grid: Some(SotlGrid {
                theta: vec![10.0, 50.0],
                mu: vec![3],
                min_green: vec![5],
            }),
            ..ExperimentConfig::default()
        };
        assert_eq!(
            ExperimentConfig::from_toml(&config.to_toml()).unwrap(),
            config
        );
    }
}
