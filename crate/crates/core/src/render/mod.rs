//! Ray-cast ground truth: depth, XYZ maps and depth-difference masks.

mod bvh;
mod cast;
mod clean;

pub use bvh::{bvh_build, intersect_triangle, Aabb, Bvh, Hit, Ray, MAX_LEAF_SIZE};
pub use cast::{
    depth_difference_mask, render_depth, render_meshes, render_scene, render_scene_with, Geometry, RenderOptions,
    RenderOutput, Role, MASK_EPSILON,
};
pub use clean::{clean_depth, clean_depth_with, CLEAN_RADIUS};
