//! Translation- and scale-invariant XYZ-map losses with analytic gradients.
//!
//! Every loss compares per-axis pair differences `D = p(a) - p(b)` of the
//! prediction against the ground truth, so a constant offset of the
//! prediction never changes the value. Means run jointly over pairs and axes
//! in pair-major, axis-minor order, which fixes the reduction order and makes
//! results bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ensure_dims, pair_differences, PairDifferences, PairSet, Point, SegMask, XyzMap};

/// Thresholds for estimating and controlling the scale factor K.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleConfig {
    /// Minimum number of (pair, axis) entries with `D_gt * D_pred > 0`.
    pub min_positive_entries: usize,
    /// Smallest accepted sum of `|D_pred|` over those entries.
    pub min_denominator: f64,
    /// Above this K the control term `+K` is added.
    pub upper: f64,
    /// Below this K the control term `-K` is added.
    pub lower: f64,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        ScaleConfig {
            min_positive_entries: 8,
            min_denominator: 1e-12,
            upper: 10.0,
            lower: 0.1,
        }
    }
}

impl ScaleConfig {
    /// Sign of the control term for `k`: `+1` above `upper`, `-1` below `lower`, else 0.
    pub fn control_sign(&self, k: f64) -> f64 {
        if k > self.upper {
            1.0
        } else if k < self.lower {
            -1.0
        } else {
            0.0
        }
    }
}

/// Ratio that rescales predicted pair differences to ground-truth scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactor {
    k: f64,
    valid_pair_count: usize,
}

impl ScaleFactor {
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Number of (pair, axis) entries that entered the ratio.
    pub fn valid_pair_count(&self) -> usize {
        self.valid_pair_count
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub value: f64,
    pub k_used: Option<ScaleFactor>,
    pub control_term_active: bool,
    /// Pairs (or overlap pixels for the consistency loss) averaged over.
    pub pair_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    TranslationInvariant,
    ScaleInvariant,
}

impl std::str::FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "translation" | "translation-invariant" => Ok(LossKind::TranslationInvariant),
            "scale" | "scale-invariant" => Ok(LossKind::ScaleInvariant),
            other => Err(format!("unknown loss kind `{other}` (expected translation or scale)")),
        }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn differences(pred: &XyzMap, gt: &XyzMap, pairs: &PairSet) -> Result<(PairDifferences, PairDifferences)> {
    ensure_dims(gt.dims(), pred.dims())?;
    let dg = pair_differences(gt, pairs)?;
    let dp = pair_differences(pred, pairs)?;
    if dg.is_empty() {
        return Err(Error::EmptyPairSet);
    }
    Ok((dg, dp))
}

fn mean_abs_residual(dg: &PairDifferences, dp: &PairDifferences, k: f64) -> f64 {
    let sum: f64 = dg
        .flattened()
        .zip(dp.flattened())
        .map(|(g, p)| (g - k * p).abs())
        .sum();
    sum / dg.entry_count() as f64
}

fn scale_from_differences(dg: &PairDifferences, dp: &PairDifferences, cfg: &ScaleConfig) -> Result<ScaleFactor> {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut count = 0usize;
    for (g, p) in dg.flattened().zip(dp.flattened()) {
        if g * p > 0.0 {
            num += g.abs();
            den += p.abs();
            count += 1;
        }
    }
    if count < cfg.min_positive_entries {
        return Err(Error::DegenerateScale(format!(
            "{count} positive-ratio entries, need {}",
            cfg.min_positive_entries
        )));
    }
    if den <= cfg.min_denominator {
        return Err(Error::DegenerateScale(format!("denominator {den:e} too small")));
    }
    // equal counts, so the ratio of sums is the ratio of means
    let k = num / den;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::DegenerateScale(format!("non-finite scale {k}")));
    }
    Ok(ScaleFactor {
        k,
        valid_pair_count: count,
    })
}

/// Mean over pairs and axes of `|D_gt - D_pred|`.
pub fn translation_invariant_loss(pred: &XyzMap, gt: &XyzMap, pairs: &PairSet) -> Result<LossReport> {
    let (dg, dp) = differences(pred, gt, pairs)?;
    Ok(LossReport {
        value: mean_abs_residual(&dg, &dp, 1.0),
        k_used: None,
        control_term_active: false,
        pair_count: dg.len(),
    })
}

/// `K = mean|D_gt| / mean|D_pred|` over entries where both differences share a sign.
pub fn scale_factor(pred: &XyzMap, gt: &XyzMap, pairs: &PairSet) -> Result<ScaleFactor> {
    scale_factor_with(pred, gt, pairs, &ScaleConfig::default())
}

pub fn scale_factor_with(pred: &XyzMap, gt: &XyzMap, pairs: &PairSet, cfg: &ScaleConfig) -> Result<ScaleFactor> {
    let (dg, dp) = differences(pred, gt, pairs)?;
    scale_from_differences(&dg, &dp, cfg)
}

/// Mean of `|D_gt - K * D_pred|` over all pairs and axes, plus the scale-control term.
pub fn scale_invariant_loss(pred: &XyzMap, gt: &XyzMap, pairs: &PairSet) -> Result<LossReport> {
    scale_invariant_loss_with(pred, gt, pairs, &ScaleConfig::default())
}

pub fn scale_invariant_loss_with(
    pred: &XyzMap,
    gt: &XyzMap,
    pairs: &PairSet,
    cfg: &ScaleConfig,
) -> Result<LossReport> {
    let (dg, dp) = differences(pred, gt, pairs)?;
    let scale = scale_from_differences(&dg, &dp, cfg)?;
    let control = cfg.control_sign(scale.k);
    Ok(LossReport {
        value: mean_abs_residual(&dg, &dp, scale.k) + control * scale.k,
        k_used: Some(scale),
        control_term_active: control != 0.0,
        pair_count: dg.len(),
    })
}

/// Scale-invariant loss using a K estimated elsewhere (e.g. the vessel's K
/// applied to its content and opening). The control term belongs to the
/// loss that owns K and is not added here.
pub fn scale_invariant_loss_with_scale(
    pred: &XyzMap,
    gt: &XyzMap,
    pairs: &PairSet,
    scale: &ScaleFactor,
) -> Result<LossReport> {
    let (dg, dp) = differences(pred, gt, pairs)?;
    Ok(LossReport {
        value: mean_abs_residual(&dg, &dp, scale.k),
        k_used: Some(*scale),
        control_term_active: false,
        pair_count: dg.len(),
    })
}

/// Mean over overlap pixels and axes of the change in vessel-minus-content offset
/// between ground truth and prediction.
pub fn translation_consistency_loss(
    pred_vessel: &XyzMap,
    pred_content: &XyzMap,
    gt_vessel: &XyzMap,
    gt_content: &XyzMap,
    overlap: &SegMask,
) -> Result<LossReport> {
    for map in [pred_vessel, pred_content, gt_vessel, gt_content] {
        map.require_valid_on(overlap)?;
    }
    let n = overlap.count();
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    let coords = |m: &XyzMap, i: usize| m.raw_coords()[i];
    let mut sum = 0.0;
    for i in overlap.indices() {
        let (pv, pc, gv, gc) = (
            coords(pred_vessel, i),
            coords(pred_content, i),
            coords(gt_vessel, i),
            coords(gt_content, i),
        );
        for a in 0..3 {
            sum += ((gv[a] - gc[a]) - (pv[a] - pc[a])).abs();
        }
    }
    Ok(LossReport {
        value: sum / (3 * n) as f64,
        k_used: None,
        control_term_active: false,
        pair_count: n,
    })
}

/// Per-pixel gradient of a loss with respect to the predicted map.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGradient {
    width: usize,
    height: usize,
    values: Vec<Point>,
}

impl LossGradient {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn at(&self, index: usize) -> Point {
        self.values[index]
    }

    /// Sum of all pixel gradients, per axis.
    pub fn total(&self) -> Point {
        self.values.iter().fold([0.0; 3], |acc, g| [acc[0] + g[0], acc[1] + g[1], acc[2] + g[2]])
    }
}

/// Analytic (sub)gradient of the chosen loss; `sign(0) = 0` at kinks.
///
/// For the scale-invariant loss K is held constant in the main term and
/// differentiated only through the control term.
pub fn loss_gradient(kind: LossKind, pred: &XyzMap, gt: &XyzMap, pairs: &PairSet) -> Result<LossGradient> {
    let cfg = ScaleConfig::default();
    let (dg, dp) = differences(pred, gt, pairs)?;
    let (width, height) = pred.dims();
    let mut values = vec![[0.0; 3]; width * height];
    let n = dg.entry_count() as f64;

    let (k, control) = match kind {
        LossKind::TranslationInvariant => (1.0, 0.0),
        LossKind::ScaleInvariant => {
            let s = scale_from_differences(&dg, &dp, &cfg)?;
            (s.k, cfg.control_sign(s.k))
        }
    };

    for (&(a, b), (g, p)) in pairs.pairs().iter().zip(dg.as_slice().iter().zip(dp.as_slice())) {
        for axis in 0..3 {
            let w = -k * sign(g[axis] - k * p[axis]) / n;
            values[a][axis] += w;
            values[b][axis] -= w;
        }
    }

    if control != 0.0 {
        // dK/dD_pred = -K * sign(D_pred) / sum|D_pred| over the positive-ratio entries
        let den: f64 = dg
            .flattened()
            .zip(dp.flattened())
            .filter(|(g, p)| g * p > 0.0)
            .map(|(_, p)| p.abs())
            .sum();
        for (&(a, b), (g, p)) in pairs.pairs().iter().zip(dg.as_slice().iter().zip(dp.as_slice())) {
            for axis in 0..3 {
                if g[axis] * p[axis] > 0.0 {
                    let w = control * -k * sign(p[axis]) / den;
                    values[a][axis] += w;
                    values[b][axis] -= w;
                }
            }
        }
    }

    Ok(LossGradient {
        width,
        height,
        values,
    })
}
