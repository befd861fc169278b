//! Wavefront OBJ export of triangle meshes.

use std::fmt::Write as _;
use std::path::Path;

use super::pfm::write_bytes;
use crate::error::Result;
use crate::procgen::TriMesh;

/// Vertices in shortest round-trip decimal form, 1-based faces.
pub fn encode_obj(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(mesh.vertices.len() * 48 + mesh.triangles.len() * 24);
    let _ = writeln!(s, "o {}", mesh.label.as_str());
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

pub fn write_obj(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    write_bytes(path.as_ref(), encode_obj(mesh).as_bytes())
}
