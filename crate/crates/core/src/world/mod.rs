//! Sensor grid, group mobility workload and batch segmentation.

mod grid;
pub mod io;
mod mobility;
mod segment;

pub use grid::{hop_distance, Location, SensorGrid};
pub use mobility::{
    grid_line, leader_path, simulate_group, simulate_group_from, simulate_random_walk, Item,
    LocationSequence, ScenarioConfig,
};
pub use segment::{desegment, segment_and_align, Segment, SegmentKind};
