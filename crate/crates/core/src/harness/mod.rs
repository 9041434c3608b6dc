//! Experiment orchestration: configs, training with periodic validation,
//! controller comparison and the Q-value sweep.

mod config;
mod eval;
mod sweep;
mod training;

pub use config::{load_spec, ExperimentConfig, FlowSource, SotlGrid};
pub use eval::{
    compare, evaluate, make_controller, run_episode, sotl_grid_search, write_compare_csv,
    CompareRow, DqnController, EpisodeStats,
};
pub use sweep::{qvalue_sweep, write_sweep_csv, SweepRow};
pub use training::{
    run_training, MetricsRow, TrainingOutcome, TrainingSummary, CHECKPOINT_FILE, METRICS_FILE,
    SUMMARY_FILE, UPDATES_PER_EPOCH,
};
