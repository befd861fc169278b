//! File formats: PFM maps, PGM masks, OBJ meshes, scene manifests and reports.

mod manifest;
mod obj;
mod pfm;
mod pgm;
mod report;

pub use manifest::{
    artifact_name, find_manifests, manifest_name, ArtifactKind, ObjectFiles, ProfileSummary, SceneManifest,
    MANIFEST_FORMAT_VERSION,
};
pub use obj::{encode_obj, write_obj};
pub use pfm::{
    decode_depth_pfm, decode_xyz_pfm, encode_depth_pfm, encode_xyz_pfm, read_depth_pfm, read_xyz_pfm,
    write_depth_pfm, write_xyz_pfm, DEPTH_SENTINEL,
};
pub use pgm::{decode_pgm, encode_pgm, read_pgm, write_pgm, MASK_THRESHOLD};
pub use report::{Absence, AggregateRow, EvalMode, ReportDocument, ReportRow, RowMetrics};
