//! Map and camera data model, depth/XYZ conversion and pair differences.

mod camera;
mod maps;
mod pairs;

pub use camera::{depth_to_xyz, xyz_to_depth, PinholeCamera, Pose};
pub use maps::{DepthMap, Point, SegMask, XyzMap};
pub(crate) use maps::ensure_dims;
pub use pairs::{
    build_pair_set, default_dilations, pair_differences, Direction, PairDifferences, PairSegment,
    PairSet, AXIS_COUNT, DEFAULT_DILATIONS,
};
