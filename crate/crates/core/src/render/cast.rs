use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bvh::{bvh_build, Bvh, Hit, Ray};
use crate::error::{Error, Result};
use crate::geometry::{depth_to_xyz, ensure_dims, DepthMap, PinholeCamera, SegMask, XyzMap};
use crate::procgen::{GroundPlane, SceneRecord, TriMesh};

/// Depth difference above which a pixel counts as covered by an object, meters.
pub const MASK_EPSILON: f64 = 1e-6;

/// Geometry visible to one ray cast: any number of meshes plus an optional
/// analytic ground plane.
#[derive(Clone, Copy, Debug, Default)]
pub struct Geometry<'a> {
    pub meshes: &'a [&'a Bvh],
    pub ground: Option<&'a GroundPlane>,
}

impl Geometry<'_> {
    fn is_empty(&self) -> bool {
        self.meshes.iter().all(|b| b.triangle_count() == 0) && self.ground.is_none()
    }
}

#[derive(Clone, Copy, Debug)]
struct PixelHit {
    t: f64,
    normal: Vector3<f64>,
}

fn plane_hit(plane: &GroundPlane, ray: &Ray) -> Option<f64> {
    let n = Vector3::from(plane.normal);
    let denom = n.dot(ray.dir());
    if denom == 0.0 {
        return None;
    }
    let t = (plane.offset - n.dot(ray.origin())) / denom;
    (t > 0.0 && t.is_finite()).then_some(t)
}

fn first_hit(geom: &Geometry, ray: &Ray) -> Option<PixelHit> {
    let mut best: Option<PixelHit> = None;
    // meshes in order; the earlier mesh keeps exact ties
    for bvh in geom.meshes {
        if let Some(Hit { t, triangle, .. }) = bvh.intersect(ray) {
            if best.is_none_or(|b| t < b.t) {
                let [a, b, c] = *bvh.triangle(triangle);
                best = Some(PixelHit {
                    t,
                    normal: (b - a).cross(&(c - a)),
                });
            }
        }
    }
    if let Some(plane) = geom.ground {
        if let Some(t) = plane_hit(plane, ray) {
            if best.is_none_or(|b| t < b.t) {
                best = Some(PixelHit {
                    t,
                    normal: Vector3::from(plane.normal),
                });
            }
        }
    }
    best.map(|mut h| {
        // face the camera
        let n = h.normal.normalize();
        h.normal = if n.dot(ray.dir()) > 0.0 { -n } else { n };
        h
    })
}

fn cast(geom: &Geometry, camera: &PinholeCamera, with_normals: bool) -> Result<(DepthMap, Option<XyzMap>)> {
    if geom.is_empty() {
        return Err(Error::EmptyScene);
    }
    let (w, h) = camera.dims();
    let pose = camera.pose();
    let origin = pose.center();
    let rt = pose.rotation.transpose();
    let rows: Vec<Vec<Option<PixelHit>>> = (0..h)
        .into_par_iter()
        .map(|v| {
            (0..w)
                .map(|u| {
                    let d_cam = camera.pixel_direction(u, v);
                    let len = d_cam.norm();
                    let ray = Ray::new(origin, rt * d_cam).ok()?;
                    first_hit(geom, &ray).map(|hit| PixelHit {
                        // ray length to optical-axis depth
                        t: hit.t / len,
                        normal: hit.normal,
                    })
                })
                .collect()
        })
        .collect();
    let hits: Vec<Option<PixelHit>> = rows.into_iter().flatten().collect();
    let depth = DepthMap::from_fn(w, h, |u, v| hits[v * w + u].map(|p| p.t))?;
    let normals = if with_normals {
        Some(XyzMap::from_fn(w, h, |u, v| {
            hits[v * w + u].map(|p| {
                let n = pose.rotation * p.normal;
                [n.x, n.y, n.z]
            })
        })?)
    } else {
        None
    };
    Ok((depth, normals))
}

/// First-hit optical-axis depth of `geom` seen through `camera`; rays that
/// miss everything leave the pixel invalid.
pub fn render_depth(geom: &Geometry, camera: &PinholeCamera) -> Result<DepthMap> {
    cast(geom, camera, false).map(|(d, _)| d)
}

/// Convenience wrapper building a BVH for each mesh.
pub fn render_meshes(meshes: &[&TriMesh], ground: Option<&GroundPlane>, camera: &PinholeCamera) -> Result<DepthMap> {
    let bvhs = meshes
        .iter()
        .filter(|m| !m.is_empty())
        .map(|m| bvh_build(m))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Bvh> = bvhs.iter().collect();
    render_depth(&Geometry { meshes: &refs, ground }, camera)
}

/// Pixels where the two depth maps disagree by more than `eps` or where only
/// one of them is valid.
pub fn depth_difference_mask(with: &DepthMap, without: &DepthMap, eps: f64) -> Result<SegMask> {
    ensure_dims(with.dims(), without.dims())?;
    let (w, h) = with.dims();
    Ok(SegMask::from_fn(w, h, |u, v| match (with.get(u, v), without.get(u, v)) {
        (Some(a), Some(b)) => (a - b).abs() > eps,
        (None, None) => false,
        _ => true,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    pub mask_epsilon: f64,
    pub normals: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            mask_epsilon: MASK_EPSILON,
            normals: false,
        }
    }
}

/// Ground-truth maps for one scene. Every depth map is valid exactly on its
/// object's mask and every XYZ map is `depth_to_xyz` of its depth map.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderOutput {
    pub vessel_depth: DepthMap,
    pub content_depth: DepthMap,
    pub opening_depth: DepthMap,
    pub vessel_xyz: XyzMap,
    pub content_xyz: XyzMap,
    pub opening_xyz: XyzMap,
    pub vessel_mask: SegMask,
    pub content_mask: SegMask,
    pub opening_mask: SegMask,
    /// Camera-frame unit normals of the full scene's first hits.
    pub normals: Option<XyzMap>,
}

impl RenderOutput {
    pub fn depth(&self, role: Role) -> &DepthMap {
        match role {
            Role::Vessel => &self.vessel_depth,
            Role::Content => &self.content_depth,
            Role::Opening => &self.opening_depth,
        }
    }

    pub fn xyz(&self, role: Role) -> &XyzMap {
        match role {
            Role::Vessel => &self.vessel_xyz,
            Role::Content => &self.content_xyz,
            Role::Opening => &self.opening_xyz,
        }
    }

    pub fn mask(&self, role: Role) -> &SegMask {
        match role {
            Role::Vessel => &self.vessel_mask,
            Role::Content => &self.content_mask,
            Role::Opening => &self.opening_mask,
        }
    }
}

/// Annotated object in a scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Vessel,
    Content,
    Opening,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Vessel, Role::Content, Role::Opening];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Vessel => "vessel",
            Role::Content => "content",
            Role::Opening => "opening",
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Role> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown object role '{s}'")))
    }
}

fn object_maps(depth: &DepthMap, mask: &SegMask, camera: &PinholeCamera) -> Result<(DepthMap, XyzMap)> {
    let depth = depth.restricted_to(mask)?;
    let xyz = depth_to_xyz(&depth, camera)?;
    Ok((depth, xyz))
}

/// Renders the scene with its own camera.
pub fn render_scene(scene: &SceneRecord) -> Result<RenderOutput> {
    render_scene_with(scene, &scene.camera, &RenderOptions::default())
}

/// Vessel maps come from the full scene, content maps from the scene with the
/// vessel removed, opening maps from the opening disk alone. An object's mask
/// holds the pixels whose depth changes when the object is removed.
pub fn render_scene_with(scene: &SceneRecord, camera: &PinholeCamera, opts: &RenderOptions) -> Result<RenderOutput> {
    if scene.vessel.is_empty() {
        return Err(Error::EmptyScene);
    }
    let vessel = bvh_build(&scene.vessel)?;
    let content = (!scene.content.is_empty()).then(|| bvh_build(&scene.content)).transpose()?;
    let ground = Some(&scene.ground_plane);

    let mut full_meshes = vec![&vessel];
    let mut no_vessel_meshes = vec![];
    if let Some(c) = &content {
        full_meshes.push(c);
        no_vessel_meshes.push(c);
    }
    let (full, normals) = cast(
        &Geometry {
            meshes: &full_meshes,
            ground,
        },
        camera,
        opts.normals,
    )?;
    let no_vessel = render_depth(
        &Geometry {
            meshes: &no_vessel_meshes,
            ground,
        },
        camera,
    )?;
    let bare = render_depth(&Geometry { meshes: &[], ground }, camera)?;

    let vessel_mask = depth_difference_mask(&full, &no_vessel, opts.mask_epsilon)?;
    let content_mask = depth_difference_mask(&no_vessel, &bare, opts.mask_epsilon)?;
    let (vessel_depth, vessel_xyz) = object_maps(&full, &vessel_mask, camera)?;
    let (content_depth, content_xyz) = object_maps(&no_vessel, &content_mask, camera)?;

    let (opening_depth, opening_mask) = if scene.opening.is_empty() {
        let (w, h) = camera.dims();
        (DepthMap::invalid(w, h), SegMask::empty(w, h))
    } else {
        let opening = bvh_build(&scene.opening)?;
        let d = render_depth(
            &Geometry {
                meshes: &[&opening],
                ground: None,
            },
            camera,
        )?;
        let m = d.valid_mask();
        (d, m)
    };
    let opening_xyz = depth_to_xyz(&opening_depth, camera)?;

    Ok(RenderOutput {
        vessel_depth,
        content_depth,
        opening_depth,
        vessel_xyz,
        content_xyz,
        opening_xyz,
        vessel_mask,
        content_mask,
        opening_mask,
        normals,
    })
}
