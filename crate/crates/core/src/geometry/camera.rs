use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::maps::{ensure_dims, DepthMap, XyzMap};
use crate::error::{Error, Result};

/// Rigid world-to-camera transform: `p_cam = rotation * p_world + translation`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Camera at `eye` looking at `target`; camera axes are x right, y down, z forward.
    pub fn look_at(eye: Vector3<f64>, target: Vector3<f64>, world_up: Vector3<f64>) -> Result<Self> {
        let forward = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidCamera("eye coincides with target".into()))?;
        let right = forward
            .cross(&world_up)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidCamera("viewing direction parallel to up vector".into()))?;
        let down = forward.cross(&right);
        let rotation = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        Ok(Pose {
            translation: -(rotation * eye),
            rotation,
        })
    }

    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn camera_to_world(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (p - self.translation)
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }

    fn validate(&self) -> Result<()> {
        let r = &self.rotation;
        if !r.iter().chain(self.translation.iter()).all(|x| x.is_finite()) {
            return Err(Error::InvalidCamera("pose has non-finite entries".into()));
        }
        let orth = (r.transpose() * r - Matrix3::identity()).amax();
        let det = r.determinant();
        if orth > 1e-9 || (det - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCamera(format!(
                "rotation not orthonormal (error {orth:e}, det {det})"
            )));
        }
        Ok(())
    }
}

/// Distortion-free pinhole camera. Pixel `(u, v)` is addressed by its integer index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraFields")]
pub struct PinholeCamera {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    pose: Pose,
}

#[derive(Deserialize)]
struct CameraFields {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    pose: Pose,
}

impl TryFrom<CameraFields> for PinholeCamera {
    type Error = Error;

    fn try_from(c: CameraFields) -> Result<Self> {
        PinholeCamera::new(c.fx, c.fy, c.cx, c.cy, c.width, c.height, c.pose)
    }
}

impl PinholeCamera {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
        pose: Pose,
    ) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(Error::InvalidCamera(format!("focal lengths must be positive: {fx}, {fy}")));
        }
        if !(0.0..width as f64).contains(&cx) || !(0.0..height as f64).contains(&cy) {
            return Err(Error::InvalidCamera(format!(
                "principal point ({cx}, {cy}) outside {width}x{height}"
            )));
        }
        pose.validate()?;
        Ok(PinholeCamera {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            pose,
        })
    }

    /// Camera with the principal point at the image center and a horizontal field of view.
    pub fn from_fov(width: usize, height: usize, hfov_deg: f64, pose: Pose) -> Result<Self> {
        let f = (width as f64 / 2.0) / (hfov_deg.to_radians() / 2.0).tan();
        PinholeCamera::new(f, f, (width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0, width, height, pose)
    }

    /// Same intrinsics, camera frame coincides with world frame.
    pub fn intrinsics_only(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        PinholeCamera::new(fx, fy, cx, cy, width, height, Pose::identity())
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }

    pub fn fy(&self) -> f64 {
        self.fy
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    /// Camera-frame direction through pixel `(u, v)` with unit z component.
    pub fn pixel_direction(&self, u: usize, v: usize) -> Vector3<f64> {
        Vector3::new((u as f64 - self.cx) / self.fx, (v as f64 - self.cy) / self.fy, 1.0)
    }

    /// Camera-frame point at pixel `(u, v)` and optical-axis depth `z`.
    pub fn back_project(&self, u: usize, v: usize, z: f64) -> [f64; 3] {
        [(u as f64 - self.cx) * z / self.fx, (v as f64 - self.cy) * z / self.fy, z]
    }
}

/// Back-projects every valid depth pixel into the camera frame.
pub fn depth_to_xyz(depth: &DepthMap, camera: &PinholeCamera) -> Result<XyzMap> {
    ensure_dims(camera.dims(), depth.dims())?;
    XyzMap::from_fn(depth.width(), depth.height(), |u, v| {
        depth.get(u, v).map(|z| camera.back_project(u, v, z))
    })
}

/// Inverse of [`depth_to_xyz`] for camera-frame XYZ maps.
pub fn xyz_to_depth(xyz: &XyzMap, camera: &PinholeCamera) -> Result<DepthMap> {
    ensure_dims(camera.dims(), xyz.dims())?;
    for v in 0..xyz.height() {
        for u in 0..xyz.width() {
            if let Some(p) = xyz.get(u, v) {
                if p[2] <= 0.0 {
                    return Err(Error::NonPositiveDepth { u, v });
                }
            }
        }
    }
    DepthMap::from_fn(xyz.width(), xyz.height(), |u, v| xyz.get(u, v).map(|p| p[2]))
}
