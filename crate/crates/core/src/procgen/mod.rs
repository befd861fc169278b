//! Procedural vessels, liquid fills, opening disks and randomized scenes.

mod mesh;
mod profile;
mod scene;

pub use mesh::{
    flat_liquid_fill, icosphere, opening_plane, profile_to_mesh, row_heights, MeshLabel, TriMesh,
    DEGENERATE_AREA,
};
pub use profile::{
    generate_profile, generate_profile_from, Interval, ProfileConfig, ProfileTerm, TermKind,
    VesselProfile,
};
pub use scene::{
    assemble_scene, CameraConfig, GroundPlane, SceneConfig, SceneRecord, INVARIANT_TOLERANCE,
};
