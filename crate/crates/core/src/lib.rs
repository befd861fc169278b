//! Camera-agnostic XYZ-map geometry: invariant pairwise losses, evaluation
//! metrics, procedural vessel scenes and a ray-cast ground-truth renderer.

pub mod error;
pub mod geometry;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod pipeline;
pub mod procgen;
pub mod render;

pub use error::{Error, Result};
pub use geometry::{DepthMap, PinholeCamera, Point, Pose, SegMask, XyzMap};
