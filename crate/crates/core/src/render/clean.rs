use crate::error::{Error, Result};
use crate::geometry::{ensure_dims, DepthMap, PinholeCamera, SegMask};
use crate::metrics::centroid;

/// Outlier radius around the object centre, meters.
pub const CLEAN_RADIUS: f64 = 0.10;

/// [`clean_depth_with`] at the default 10 cm radius.
pub fn clean_depth(depth: &DepthMap, camera: &PinholeCamera, mask: &SegMask) -> Result<DepthMap> {
    clean_depth_with(depth, camera, mask, CLEAN_RADIUS)
}

/// Back-projects the masked valid pixels, takes their centroid and invalidates
/// every masked pixel farther than `radius` from it. One pass; pixels outside
/// the mask are left alone.
pub fn clean_depth_with(depth: &DepthMap, camera: &PinholeCamera, mask: &SegMask, radius: f64) -> Result<DepthMap> {
    ensure_dims(camera.dims(), depth.dims())?;
    ensure_dims(mask.dims(), depth.dims())?;
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (w, h) = depth.dims();
    let point = |i: usize| depth.at(i).map(|z| camera.back_project(i % w, i / w, z));
    let points: Vec<_> = mask.indices().filter_map(point).collect();
    if points.is_empty() {
        return Ok(depth.clone());
    }
    let c = centroid(&points)?;
    let r2 = radius * radius;
    DepthMap::from_fn(w, h, |u, v| {
        let i = v * w + u;
        let z = depth.at(i)?;
        if mask.is_set(i) {
            let p = camera.back_project(u, v, z);
            let d2: f64 = (0..3).map(|k| (p[k] - c[k]).powi(2)).sum();
            (d2 <= r2).then_some(z)
        } else {
            Some(z)
        }
    })
}
