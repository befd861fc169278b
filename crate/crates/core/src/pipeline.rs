//! Batch generation, manifest replay and evaluation over artifact directories.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{default_dilations, SegMask, XyzMap};
use crate::io::{
    artifact_name, read_pgm, read_xyz_pfm, write_depth_pfm, write_obj, write_pgm, write_xyz_pfm, Absence,
    ArtifactKind, EvalMode, ReportDocument, ReportRow, RowMetrics, SceneManifest,
};
use crate::metrics::{estimate_alignment, evaluate, seg_eval, Alignment};
use crate::procgen::{assemble_scene, SceneConfig, SceneRecord};
use crate::render::{render_scene, RenderOutput, Role};

#[derive(Clone, Debug)]
pub struct GeneratedScene {
    pub manifest: SceneManifest,
    pub manifest_path: PathBuf,
    /// Every file written, manifest last.
    pub files: Vec<PathBuf>,
}

fn mesh_of(scene: &SceneRecord, role: Role) -> &crate::procgen::TriMesh {
    match role {
        Role::Vessel => &scene.vessel,
        Role::Content => &scene.content,
        Role::Opening => &scene.opening,
    }
}

/// Writes maps, masks and meshes of every object, then the manifest.
pub fn write_scene(scene: &SceneRecord, render: &RenderOutput, cfg: &SceneConfig, out: &Path) -> Result<GeneratedScene> {
    let manifest = SceneManifest::new(scene, cfg);
    let mut files = Vec::new();
    for role in Role::ALL {
        let f = manifest.files_for(role)?;
        let p = out.join(&f.depth);
        write_depth_pfm(&p, render.depth(role))?;
        files.push(p);
        let p = out.join(&f.xyz);
        write_xyz_pfm(&p, render.xyz(role))?;
        files.push(p);
        let p = out.join(&f.mask);
        write_pgm(&p, render.mask(role))?;
        files.push(p);
        let p = out.join(&f.mesh);
        write_obj(&p, mesh_of(scene, role))?;
        files.push(p);
    }
    let manifest_path = manifest.write(out)?;
    files.push(manifest_path.clone());
    Ok(GeneratedScene {
        manifest,
        manifest_path,
        files,
    })
}

/// Assembles, renders and writes one scene.
pub fn generate_scene(seed: u64, cfg: &SceneConfig, out: &Path) -> Result<GeneratedScene> {
    let scene = assemble_scene(seed, cfg)?;
    let render = render_scene(&scene)?;
    write_scene(&scene, &render, cfg, out)
}

/// Generates every seed in parallel; results come back in input order and a
/// failing seed does not affect the others.
pub fn generate_batch(seeds: &[u64], cfg: &SceneConfig, out: &Path) -> Vec<(u64, Result<GeneratedScene>)> {
    seeds
        .par_iter()
        .map(|&s| (s, generate_scene(s, cfg, out)))
        .collect()
}

/// Regenerates the scene recorded in a manifest into `out`. The regenerated
/// scene must match the recorded one.
pub fn replay_manifest(path: &Path, out: &Path) -> Result<GeneratedScene> {
    let recorded = SceneManifest::read(path)?;
    replay(&recorded, out)
}

pub fn replay(recorded: &SceneManifest, out: &Path) -> Result<GeneratedScene> {
    let scene = assemble_scene(recorded.seed, &recorded.config)?;
    let fresh = SceneManifest::new(&scene, &recorded.config);
    if fresh.camera != recorded.camera || fresh.profile != recorded.profile || fresh.fill_fraction != recorded.fill_fraction
    {
        return Err(Error::InvalidConfig(format!(
            "manifest for seed {} does not match the regenerated scene",
            recorded.seed
        )));
    }
    let render = render_scene(&scene)?;
    write_scene(&scene, &render, &recorded.config, out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalOptions {
    pub mode: EvalMode,
    /// Pair dilations for scale estimation; `None` picks the defaults for
    /// the image size.
    pub dilations: Option<Vec<usize>>,
}

struct GroundTruth {
    xyz: XyzMap,
    mask: SegMask,
}

fn read_gt(manifest: &SceneManifest, dir: &Path, role: Role) -> Result<GroundTruth> {
    let f = manifest.files_for(role)?;
    Ok(GroundTruth {
        xyz: read_xyz_pfm(dir.join(&f.xyz))?,
        mask: read_pgm(dir.join(&f.mask))?,
    })
}

fn prediction_path(dir: &Path, seed: u64, role: Role, kind: ArtifactKind) -> Result<PathBuf> {
    let p = dir.join(artifact_name(seed, role, kind));
    if p.is_file() {
        Ok(p)
    } else {
        Err(Error::MissingPrediction(p))
    }
}

fn absence(e: Error) -> Absence {
    match e {
        Error::MissingPrediction(p) => Absence::MissingPrediction(p.display().to_string()),
        e => Absence::Error(e.to_string()),
    }
}

/// Scores every object of one scene. Problems are reported per row.
pub fn evaluate_scene(manifest: &SceneManifest, gt_dir: &Path, pred_dir: &Path, opts: &EvalOptions) -> Vec<ReportRow> {
    let seed = manifest.seed;
    let rows = |f: &dyn Fn(Role) -> Result<Option<RowMetrics>>| -> Vec<ReportRow> {
        Role::ALL
            .iter()
            .map(|&object| ReportRow {
                seed,
                object,
                result: match f(object) {
                    Ok(Some(m)) => Ok(m),
                    Ok(None) => Err(Absence::NotVisible),
                    Err(e) => Err(absence(e)),
                },
            })
            .collect()
    };

    if opts.mode == EvalMode::Segmentation {
        return rows(&|role| {
            let gt = read_gt(manifest, gt_dir, role)?;
            let pred = read_pgm(prediction_path(pred_dir, seed, role, ArtifactKind::Mask)?)?;
            Ok(Some(RowMetrics::Segmentation(seg_eval(&pred, &gt.mask)?)))
        });
    }

    let dilations = opts
        .dilations
        .clone()
        .unwrap_or_else(|| default_dilations(manifest.camera.width(), manifest.camera.height()));
    let load = |role: Role| -> Result<(GroundTruth, XyzMap)> {
        let gt = read_gt(manifest, gt_dir, role)?;
        let pred = read_xyz_pfm(prediction_path(pred_dir, seed, role, ArtifactKind::Xyz)?)?;
        Ok((gt, pred))
    };
    let align = |gt: &GroundTruth, pred: &XyzMap| -> Result<Alignment> {
        pred.require_valid_on(&gt.mask)?;
        estimate_alignment(pred, &gt.xyz, &gt.mask, &dilations)
    };
    // vessel-scale mode shares one alignment across all objects
    let shared: Option<Result<Alignment>> = (opts.mode == EvalMode::VesselScale).then(|| {
        let (gt, pred) = load(Role::Vessel)?;
        align(&gt, &pred)
    });
    rows(&|role| {
        let (gt, pred) = load(role)?;
        if gt.mask.is_empty() {
            return Ok(None);
        }
        let alignment = match &shared {
            Some(Ok(a)) => *a,
            Some(Err(e)) => return Err(Error::InvalidConfig(format!("vessel alignment failed: {e}"))),
            None => align(&gt, &pred)?,
        };
        let aligned = alignment.apply(&pred, &gt.mask)?;
        Ok(Some(RowMetrics::Points(evaluate(&aligned, &gt.xyz, &gt.mask)?)))
    })
}

/// Evaluates predictions in `pred_dir` against each manifest's artifacts
/// (read from the manifest's directory).
pub fn evaluate_batch(manifests: &[PathBuf], pred_dir: &Path, opts: &EvalOptions) -> Result<ReportDocument> {
    let loaded = manifests
        .iter()
        .map(|p| SceneManifest::read(p).map(|m| (m, p.parent().unwrap_or(Path::new(".")).to_path_buf())))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ReportRow> = loaded
        .par_iter()
        .flat_map_iter(|(m, dir)| evaluate_scene(m, dir, pred_dir, opts))
        .collect();
    Ok(ReportDocument::new(opts.mode, rows))
}
