use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mesh::{flat_liquid_fill, opening_plane, profile_to_mesh, TriMesh};
use super::profile::{check_interval, draw, generate_profile_from, Interval, ProfileConfig, VesselProfile};
use crate::error::{Error, Result};
use crate::geometry::{PinholeCamera, Point, Pose};
use crate::metrics::{MaterialVector, IOR_RANGE};
use nalgebra::Vector3;

/// Infinite plane `{p : normal · p = offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundPlane {
    pub normal: Point,
    pub offset: f64,
}

impl GroundPlane {
    /// The `y = height` plane.
    pub fn horizontal(height: f64) -> Self {
        GroundPlane {
            normal: [0.0, 1.0, 0.0],
            offset: height,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    /// Distance from the look-at point, meters.
    pub distance: Interval,
    /// Angle above the horizon, degrees; must stay below 90.
    pub elevation_deg: Interval,
    pub azimuth_deg: Interval,
    /// Horizontal field of view, degrees.
    pub hfov_deg: Interval,
    pub width: usize,
    pub height: usize,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            distance: [0.4, 0.7],
            elevation_deg: [10.0, 60.0],
            azimuth_deg: [0.0, 360.0],
            hfov_deg: [50.0, 50.0],
            width: 256,
            height: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub profile: ProfileConfig,
    pub angular_segments: usize,
    pub vertical_segments: usize,
    pub fill_fraction: Interval,
    pub wall_clearance: f64,
    pub camera: CameraConfig,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            profile: ProfileConfig::default(),
            angular_segments: 256,
            vertical_segments: 128,
            fill_fraction: [0.2, 0.9],
            wall_clearance: 1e-4,
            camera: CameraConfig::default(),
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        check_interval("fill_fraction", self.fill_fraction)?;
        if self.fill_fraction[0] < 0.0 || self.fill_fraction[1] > 1.0 {
            return Err(Error::InvalidConfig("fill_fraction must lie in [0, 1]".into()));
        }
        let c = &self.camera;
        for (name, r) in [
            ("camera.distance", c.distance),
            ("camera.elevation_deg", c.elevation_deg),
            ("camera.azimuth_deg", c.azimuth_deg),
            ("camera.hfov_deg", c.hfov_deg),
        ] {
            check_interval(name, r)?;
        }
        if c.distance[0] <= 0.0 {
            return Err(Error::InvalidConfig("camera distance must be positive".into()));
        }
        if c.elevation_deg[0] <= -90.0 || c.elevation_deg[1] >= 90.0 {
            return Err(Error::InvalidConfig("camera elevation must lie in (-90, 90) degrees".into()));
        }
        if c.hfov_deg[0] <= 0.0 || c.hfov_deg[1] >= 180.0 {
            return Err(Error::InvalidConfig("camera field of view must lie in (0, 180) degrees".into()));
        }
        if c.width == 0 || c.height == 0 {
            return Err(Error::InvalidConfig("camera resolution must be nonzero".into()));
        }
        if !(self.wall_clearance >= 0.0 && self.wall_clearance < self.profile.min_radius) {
            return Err(Error::InvalidConfig("wall_clearance must lie in [0, min_radius)".into()));
        }
        Ok(())
    }
}

/// One generated scene: geometry, camera and materials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub seed: u64,
    pub profile: VesselProfile,
    pub camera: PinholeCamera,
    pub vessel: TriMesh,
    pub content: TriMesh,
    pub opening: TriMesh,
    pub ground_plane: GroundPlane,
    pub vessel_material: MaterialVector,
    pub content_material: MaterialVector,
    pub fill_fraction: f64,
}

fn random_material(rng: &mut ChaCha8Rng) -> MaterialVector {
    let mut unit = || rng.random_range(0.0..=1.0);
    let rgb = [unit(), unit(), unit()];
    let transmission = unit();
    let roughness = unit();
    let metallic = unit();
    let ior = MaterialVector::normalize_ior(rng.random_range(IOR_RANGE.0..=IOR_RANGE.1));
    MaterialVector {
        rgb,
        transmission,
        roughness,
        metallic,
        ior,
    }
}

/// Generates the scene for `seed`. Pure in `(seed, cfg)`.
pub fn assemble_scene(seed: u64, cfg: &SceneConfig) -> Result<SceneRecord> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile = generate_profile_from(&mut rng, &cfg.profile)?;
    let fill_fraction = draw(&mut rng, cfg.fill_fraction);
    let vessel = profile_to_mesh(&profile, cfg.angular_segments, cfg.vertical_segments)?;
    let content = flat_liquid_fill(
        &profile,
        fill_fraction,
        cfg.angular_segments,
        cfg.vertical_segments,
        cfg.wall_clearance,
    )?;
    let opening = opening_plane(&profile, cfg.angular_segments)?;
    let vessel_material = random_material(&mut rng);
    let content_material = random_material(&mut rng);

    let cc = &cfg.camera;
    let distance = draw(&mut rng, cc.distance);
    let elevation = draw(&mut rng, cc.elevation_deg).to_radians();
    let azimuth = draw(&mut rng, cc.azimuth_deg).to_radians();
    let hfov = draw(&mut rng, cc.hfov_deg);
    // look at the middle of the vessel axis
    let target = Vector3::new(0.0, profile.height() / 2.0, 0.0);
    let eye = target
        + distance
            * Vector3::new(
                elevation.cos() * azimuth.sin(),
                elevation.sin(),
                elevation.cos() * azimuth.cos(),
            );
    let pose = Pose::look_at(eye, target, Vector3::y())?;
    let camera = PinholeCamera::from_fov(cc.width, cc.height, hfov, pose)?;

    Ok(SceneRecord {
        seed,
        profile,
        camera,
        vessel,
        content,
        opening,
        ground_plane: GroundPlane::horizontal(0.0),
        vessel_material,
        content_material,
        fill_fraction,
    })
}

/// Tolerance of the containment and rim checks, meters.
pub const INVARIANT_TOLERANCE: f64 = 1e-6;
const CONTAINMENT_SAMPLES: usize = 1000;

impl SceneRecord {
    /// Checks that the liquid lies inside the vessel (1000 sampled surface
    /// points) and that the opening disk spans the rim.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let tol = INVARIANT_TOLERANCE;
        let h = self.profile.height();
        if !self.content.is_empty() {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x636f_6e74_6169_6e);
            for _ in 0..CONTAINMENT_SAMPLES {
                let t = rng.random_range(0..self.content.triangles.len());
                let [a, b, c] = self.content.corners(t);
                let (mut u, mut v) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
                if u + v > 1.0 {
                    u = 1.0 - u;
                    v = 1.0 - v;
                }
                let p: Point = std::array::from_fn(|k| a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k]));
                if p[1] < -tol || p[1] > h + tol {
                    return Err(format!("content point {p:?} outside vessel height range"));
                }
                let r = (p[0] * p[0] + p[2] * p[2]).sqrt();
                if r > self.profile.radius_at(p[1]) + tol {
                    return Err(format!(
                        "content point {p:?} at radius {r} outside wall radius {}",
                        self.profile.radius_at(p[1])
                    ));
                }
            }
        }
        let rim = self.profile.rim_radius();
        if self.opening.vertices.iter().any(|v| (v[1] - h).abs() > tol) {
            return Err("opening disk not at rim height".into());
        }
        let rmax = self
            .opening
            .vertices
            .iter()
            .map(|v| (v[0] * v[0] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max);
        if (rmax - rim).abs() > tol {
            return Err(format!("opening radius {rmax} differs from rim radius {rim}"));
        }
        for mesh in [&self.vessel, &self.content, &self.opening] {
            mesh.validate().map_err(|e| format!("{} mesh: {e}", mesh.label.as_str()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SceneConfig {
        SceneConfig {
            angular_segments: 48,
            vertical_segments: 24,
            ..SceneConfig::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = assemble_scene(11, &small()).unwrap();
        let b = assemble_scene(11, &small()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.camera, assemble_scene(12, &small()).unwrap().camera);
    }

    #[test]
    fn invariants_hold_for_many_seeds() {
        for seed in 0..40 {
            let s = assemble_scene(seed, &small()).unwrap();
            s.check_invariants().unwrap();
            assert!(!s.content.is_empty());
            for m in [s.vessel_material, s.content_material] {
                assert!(m.to_array().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn fixed_camera_ranges_fix_the_pose() {
        let mut cfg = small();
        cfg.camera.distance = [0.5, 0.5];
        cfg.camera.elevation_deg = [30.0, 30.0];
        cfg.camera.azimuth_deg = [45.0, 45.0];
        cfg.profile.height = [0.1, 0.1];
        let a = assemble_scene(1, &cfg).unwrap();
        let b = assemble_scene(2, &cfg).unwrap();
        assert_eq!(a.camera, b.camera);
        let c = a.camera.pose().center();
        assert!((c - Vector3::new(0.0, 0.05, 0.0)).norm() - 0.5 < 1e-12);
    }

    #[test]
    fn bad_config_rejected() {
        let mut cfg = small();
        cfg.fill_fraction = [0.5, 1.5];
        assert!(matches!(assemble_scene(0, &cfg), Err(Error::InvalidConfig(_))));
        let mut cfg = small();
        cfg.camera.elevation_deg = [10.0, 90.0];
        assert!(matches!(assemble_scene(0, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn violated_containment_detected() {
        let mut s = assemble_scene(5, &small()).unwrap();
        for v in s.content.vertices.iter_mut() {
            v[0] *= 1.5;
        }
        assert!(s.check_invariants().is_err());
    }
}
