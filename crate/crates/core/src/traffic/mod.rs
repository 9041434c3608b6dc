//! Static domain model: intersection topology, phases and vehicle flows.

mod flow;
mod topology;

pub use flow::{generate_flow, split_dataset, DatasetSplit, FlowDataset, FlowProfile, Vehicle};
pub use topology::{
    enumerate_phases, load_intersection, Approach, ConflictMatrix, IntersectionSpec, Lane,
    Movement, Phase, Turn, DEFAULT_BODY_LENGTH_M, DEFAULT_LANE_LENGTH_M, DEFAULT_VMAX_MS,
    DEFAULT_YELLOW_S, MIN_SPACING_M,
};
