//! Per-scene JSON manifest and the fixed artifact naming scheme.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pfm::write_bytes;
use crate::error::{Error, Result};
use crate::geometry::PinholeCamera;
use crate::metrics::MaterialVector;
use crate::procgen::{GroundPlane, ProfileTerm, SceneConfig, SceneRecord};
use crate::render::Role;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// Artifact kind, the last component of a file name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArtifactKind {
    Depth,
    Xyz,
    Mask,
    Mesh,
}

impl ArtifactKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ArtifactKind::Depth => "depth",
            ArtifactKind::Xyz => "xyz",
            ArtifactKind::Mask => "mask",
            ArtifactKind::Mesh => "mesh",
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            ArtifactKind::Depth | ArtifactKind::Xyz => "pfm",
            ArtifactKind::Mask => "pgm",
            ArtifactKind::Mesh => "obj",
        }
    }
}

/// `<seed>_<role>_<kind>.<ext>`
pub fn artifact_name(seed: u64, role: Role, kind: ArtifactKind) -> String {
    format!("{seed}_{role}_{}.{}", kind.as_str(), kind.extension())
}

pub fn manifest_name(seed: u64) -> String {
    format!("{seed}_manifest.json")
}

/// File names (relative to the manifest) of one object's artifacts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectFiles {
    pub depth: String,
    pub xyz: String,
    pub mask: String,
    pub mesh: String,
}

impl ObjectFiles {
    pub fn for_role(seed: u64, role: Role) -> Self {
        ObjectFiles {
            depth: artifact_name(seed, role, ArtifactKind::Depth),
            xyz: artifact_name(seed, role, ArtifactKind::Xyz),
            mask: artifact_name(seed, role, ArtifactKind::Mask),
            mesh: artifact_name(seed, role, ArtifactKind::Mesh),
        }
    }

    pub fn all(&self) -> [&str; 4] {
        [&self.depth, &self.xyz, &self.mask, &self.mesh]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub base_radius: f64,
    pub height: f64,
    pub samples: usize,
    pub terms: Vec<ProfileTerm>,
}

/// Everything needed to regenerate a scene, plus the names of its artifacts.
/// Field order is fixed so identical scenes serialise to identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub format_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub config: SceneConfig,
    pub camera: PinholeCamera,
    pub profile: ProfileSummary,
    pub fill_fraction: f64,
    pub ground_plane: GroundPlane,
    pub vessel_material: MaterialVector,
    pub content_material: MaterialVector,
    pub files: BTreeMap<String, ObjectFiles>,
}

impl SceneManifest {
    pub fn new(scene: &SceneRecord, config: &SceneConfig) -> Self {
        let files = Role::ALL
            .iter()
            .map(|&r| (r.as_str().to_string(), ObjectFiles::for_role(scene.seed, r)))
            .collect();
        SceneManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: scene.seed,
            config: config.clone(),
            camera: scene.camera.clone(),
            profile: ProfileSummary {
                base_radius: scene.profile.base_radius(),
                height: scene.profile.height(),
                samples: scene.profile.samples(),
                terms: scene.profile.terms().to_vec(),
            },
            fill_fraction: scene.fill_fraction,
            ground_plane: scene.ground_plane.clone(),
            vessel_material: scene.vessel_material,
            content_material: scene.content_material,
            files,
        }
    }

    pub fn files_for(&self, role: Role) -> Result<&ObjectFiles> {
        self.files
            .get(role.as_str())
            .ok_or_else(|| Error::InvalidConfig(format!("manifest for seed {} lists no {role} files", self.seed)))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(manifest_name(self.seed));
        write_bytes(&path, self.to_json().as_bytes())?;
        Ok(path)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<SceneManifest> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: SceneManifest = serde_json::from_str(&text).map_err(|source| Error::Manifest {
            path: path.to_path_buf(),
            source,
        })?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "{}: unsupported manifest format_version {}",
                path.display(),
                m.format_version
            )));
        }
        Ok(m)
    }
}

/// Manifests in `dir`, ordered by seed.
pub fn find_manifests(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let seed = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix("_manifest.json"))
            .and_then(|s| s.parse::<u64>().ok());
        if let Some(seed) = seed {
            found.push((seed, path));
        }
    }
    found.sort();
    Ok(found.into_iter().map(|(_, p)| p).collect())
}
