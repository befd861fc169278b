//! Evaluation of predicted XYZ maps, segmentation masks and material vectors.
//!
//! Point metrics operate on the pixels of an object mask:
//!
//! * MAE: mean Euclidean distance between same-pixel points.
//! * MAD: mean distance of ground-truth points to their centroid.
//! * MaxDst: diameter of the ground-truth point set.
//! * R²: `1 - RSS / TSS` with squared Euclidean distances.
//! * Chamfer: two-sided mean nearest-neighbour distance, image positions ignored.
//!
//! MAD and MaxDst serve as size normalisers, since predictions carry no
//! absolute scale.

mod kdtree;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_pair_set, ensure_dims, Point, SegMask, XyzMap};
use crate::losses::{scale_factor, ScaleFactor};

pub use kdtree::KdTree;
use kdtree::dist2;

/// Point count above which [`max_dst`] works on a subsample.
pub const MAX_DST_EXACT_LIMIT: usize = 5000;
const MAX_DST_SUBSAMPLE_SEED: u64 = 0x6d61_7864_7374;

#[inline]
fn dist(a: &Point, b: &Point) -> f64 {
    dist2(a, b).sqrt()
}

/// Per-axis mean of a point set.
pub fn centroid(points: &[Point]) -> Result<Point> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut c = [0.0; 3];
    for p in points {
        for a in 0..3 {
            c[a] += p[a];
        }
    }
    let n = points.len() as f64;
    Ok(c.map(|s| s / n))
}

fn masked_points(map: &XyzMap, mask: &SegMask) -> Result<Vec<Point>> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    map.points_in(mask)
}

fn masked_pairs(pred: &XyzMap, gt: &XyzMap, mask: &SegMask) -> Result<(Vec<Point>, Vec<Point>)> {
    ensure_dims(gt.dims(), pred.dims())?;
    Ok((masked_points(pred, mask)?, masked_points(gt, mask)?))
}

/// Mean Euclidean distance between predicted and ground-truth points at the same pixel.
pub fn mae_points(pred: &XyzMap, gt: &XyzMap, mask: &SegMask) -> Result<f64> {
    let (p, g) = masked_pairs(pred, gt, mask)?;
    Ok(p.iter().zip(&g).map(|(a, b)| dist(a, b)).sum::<f64>() / p.len() as f64)
}

/// Mean distance of masked ground-truth points to their centroid.
pub fn mad(gt: &XyzMap, mask: &SegMask) -> Result<f64> {
    let g = masked_points(gt, mask)?;
    let c = centroid(&g)?;
    Ok(g.iter().map(|p| dist(p, &c)).sum::<f64>() / g.len() as f64)
}

/// Largest pairwise distance among masked points.
///
/// Exact up to [`MAX_DST_EXACT_LIMIT`] points; larger sets are reduced to a
/// fixed-seed subsample of that size, which gives a lower bound.
pub fn max_dst(gt: &XyzMap, mask: &SegMask) -> Result<f64> {
    point_set_diameter(&gt.points_in(mask)?)
}

pub fn point_set_diameter(points: &[Point]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let subset: Vec<Point>;
    let pts = if points.len() > MAX_DST_EXACT_LIMIT {
        let mut rng = ChaCha8Rng::seed_from_u64(MAX_DST_SUBSAMPLE_SEED);
        let mut idx = sample(&mut rng, points.len(), MAX_DST_EXACT_LIMIT).into_vec();
        idx.sort_unstable();
        subset = idx.into_iter().map(|i| points[i]).collect();
        &subset[..]
    } else {
        points
    };
    let mut best = 0.0f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.max(dist2(a, b));
        }
    }
    Ok(best.sqrt())
}

/// `1 - RSS / TSS` over masked pixels.
pub fn r_squared(pred: &XyzMap, gt: &XyzMap, mask: &SegMask) -> Result<f64> {
    let (p, g) = masked_pairs(pred, gt, mask)?;
    let c = centroid(&g)?;
    let rss: f64 = p.iter().zip(&g).map(|(a, b)| dist2(a, b)).sum();
    let tss: f64 = g.iter().map(|q| dist2(q, &c)).sum();
    if tss <= 1e-12 {
        return Err(Error::DegenerateGt(tss));
    }
    Ok(1.0 - rss / tss)
}

fn directed_mean_nn(from: &[Point], to: &KdTree<'_>) -> f64 {
    let sum: f64 = from
        .iter()
        .map(|q| to.nearest(q).expect("non-empty target set").1.sqrt())
        .sum();
    sum / from.len() as f64
}

/// Mean nearest-predicted distance over ground-truth points plus mean
/// nearest-ground-truth distance over predicted points.
pub fn chamfer(pred: &[Point], gt: &[Point]) -> Result<f64> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::EmptySet);
    }
    let pred_tree = KdTree::build(pred);
    let gt_tree = KdTree::build(gt);
    Ok(directed_mean_nn(gt, &pred_tree) + directed_mean_nn(pred, &gt_tree))
}

/// Similarity that maps a prediction onto ground-truth scale and position:
/// `p' = scale * p + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub scale: ScaleFactor,
    pub translation: Point,
}

impl Alignment {
    /// Transformed prediction on `target` pixels; all other pixels invalid.
    pub fn apply(&self, pred: &XyzMap, target: &SegMask) -> Result<XyzMap> {
        pred.require_valid_on(target)?;
        let k = self.scale.k();
        let t = self.translation;
        pred.restricted_to(target)?
            .map_points(|p| [k * p[0] + t[0], k * p[1] + t[1], k * p[2] + t[2]])
    }
}

/// Scale from pair differences over `ref_mask`, translation by centroid matching.
pub fn estimate_alignment(pred: &XyzMap, gt: &XyzMap, ref_mask: &SegMask, dilations: &[usize]) -> Result<Alignment> {
    let pairs = build_pair_set(ref_mask, dilations)?;
    let scale = scale_factor(pred, gt, &pairs)?;
    let (p, g) = masked_pairs(pred, gt, ref_mask)?;
    let cp = centroid(&p)?;
    let cg = centroid(&g)?;
    let k = scale.k();
    Ok(Alignment {
        scale,
        translation: [cg[0] - k * cp[0], cg[1] - k * cp[1], cg[2] - k * cp[2]],
    })
}

/// Aligns `pred` using the `ref_mask` region and returns it on `target_mask`.
pub fn align_prediction(
    pred: &XyzMap,
    gt: &XyzMap,
    ref_mask: &SegMask,
    target_mask: &SegMask,
    dilations: &[usize],
) -> Result<XyzMap> {
    if target_mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    estimate_alignment(pred, gt, ref_mask, dilations)?.apply(pred, target_mask)
}

/// Point-metric row for one object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mae: f64,
    pub mad: f64,
    pub max_dst: f64,
    pub mae_over_mad: f64,
    pub mae_over_maxdst: f64,
    pub chamfer: f64,
    pub chamfer_over_mad: f64,
    pub chamfer_over_maxdst: f64,
    pub r_squared: f64,
}

/// All point metrics of an (already aligned) prediction over `mask`.
pub fn evaluate(pred: &XyzMap, gt: &XyzMap, mask: &SegMask) -> Result<EvalReport> {
    let (p, g) = masked_pairs(pred, gt, mask)?;
    let mae = mae_points(pred, gt, mask)?;
    let mad = mad(gt, mask)?;
    let max_dst = point_set_diameter(&g)?;
    let chamfer = chamfer(&p, &g)?;
    let r_squared = r_squared(pred, gt, mask)?;
    Ok(EvalReport {
        mae,
        mad,
        max_dst,
        mae_over_mad: mae / mad,
        mae_over_maxdst: mae / max_dst,
        chamfer,
        chamfer_over_mad: chamfer / mad,
        chamfer_over_maxdst: chamfer / max_dst,
        r_squared,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegReport {
    pub iou: f64,
    pub precision: f64,
    pub recall: f64,
    pub intersection: usize,
    pub union: usize,
}

/// Intersection over union, precision and recall of a predicted mask.
///
/// Both empty scores 1 everywhere; otherwise an empty side scores 0.
pub fn seg_eval(pred: &SegMask, gt: &SegMask) -> Result<SegReport> {
    ensure_dims(gt.dims(), pred.dims())?;
    let mut inter = 0usize;
    let mut union = 0usize;
    let mut n_pred = 0usize;
    let mut n_gt = 0usize;
    for (&p, &g) in pred.values().iter().zip(gt.values()) {
        inter += (p && g) as usize;
        union += (p || g) as usize;
        n_pred += p as usize;
        n_gt += g as usize;
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    if union == 0 {
        return Ok(SegReport {
            iou: 1.0,
            precision: 1.0,
            recall: 1.0,
            intersection: 0,
            union: 0,
        });
    }
    Ok(SegReport {
        iou: ratio(inter, union),
        precision: ratio(inter, n_pred),
        recall: ratio(inter, n_gt),
        intersection: inter,
        union,
    })
}

/// Physical IOR range mapped onto `[0, 1]`.
pub const IOR_RANGE: (f64, f64) = (1.0, 2.0);

/// Material properties, each in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialVector {
    pub rgb: [f64; 3],
    pub transmission: f64,
    pub roughness: f64,
    pub metallic: f64,
    /// IOR normalised from [`IOR_RANGE`].
    pub ior: f64,
}

impl MaterialVector {
    pub const LEN: usize = 7;

    /// Layout: r, g, b, transmission, roughness, metallic, ior.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() != Self::LEN {
            return Err(Error::MaterialLayout {
                expected: Self::LEN,
                found: values.len(),
            });
        }
        let m = MaterialVector {
            rgb: [values[0], values[1], values[2]],
            transmission: values[3],
            roughness: values[4],
            metallic: values[5],
            ior: values[6],
        };
        if !m.to_array().iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(Error::InvalidConfig(format!("material components outside [0, 1]: {values:?}")));
        }
        Ok(m)
    }

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.rgb[0],
            self.rgb[1],
            self.rgb[2],
            self.transmission,
            self.roughness,
            self.metallic,
            self.ior,
        ]
    }

    pub fn normalize_ior(physical: f64) -> f64 {
        ((physical - IOR_RANGE.0) / (IOR_RANGE.1 - IOR_RANGE.0)).clamp(0.0, 1.0)
    }

    pub fn physical_ior(&self) -> f64 {
        IOR_RANGE.0 + self.ior * (IOR_RANGE.1 - IOR_RANGE.0)
    }
}

/// Per-property absolute errors; colour averaged over its three channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialErrors {
    pub transmission: f64,
    pub color: f64,
    pub metallic: f64,
    pub roughness: f64,
    pub ior: f64,
}

pub fn material_mae(pred: &MaterialVector, gt: &MaterialVector) -> MaterialErrors {
    let color = pred
        .rgb
        .iter()
        .zip(&gt.rgb)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 3.0;
    MaterialErrors {
        transmission: (pred.transmission - gt.transmission).abs(),
        color,
        metallic: (pred.metallic - gt.metallic).abs(),
        roughness: (pred.roughness - gt.roughness).abs(),
        ior: (pred.ior - gt.ior).abs(),
    }
}
