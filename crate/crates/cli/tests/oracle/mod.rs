//! Naive reference implementations used as oracles by the acceptance suite.
//!
//! Everything here is written as the most direct double loop over pixels,
//! pairs or triangles. Sums run in the canonical order (pairs in enumeration
//! order, axes x, y, z; pixels row-major), so results can be compared with the
//! library bit for bit.

#![allow(dead_code)]

use xyzkit::{Point, SegMask, XyzMap};

pub const AXES: usize = 3;

/// Scale-estimation thresholds, restated independently of the library.
pub const MIN_POSITIVE_ENTRIES: usize = 8;
pub const MIN_DENOMINATOR: f64 = 1e-12;
pub const K_UPPER: f64 = 10.0;
pub const K_LOWER: f64 = 0.1;

/// In-mask `(p, p + d)` pairs: ascending dilation, horizontal before
/// vertical, anchors row-major.
pub fn pairs(mask: &SegMask, dilations: &[usize]) -> Vec<(usize, usize)> {
    let (w, h) = mask.dims();
    let mut out = Vec::new();
    for &d in dilations {
        for v in 0..h {
            for u in 0..w {
                if u + d < w && mask.get(u, v) && mask.get(u + d, v) {
                    out.push((v * w + u, v * w + u + d));
                }
            }
        }
        for v in 0..h {
            for u in 0..w {
                if v + d < h && mask.get(u, v) && mask.get(u, v + d) {
                    out.push((v * w + u, (v + d) * w + u));
                }
            }
        }
    }
    out
}

fn at(map: &XyzMap, i: usize) -> Point {
    map.at(i).expect("oracle reads valid pixels only")
}

fn diff(map: &XyzMap, a: usize, b: usize, axis: usize) -> f64 {
    at(map, a)[axis] - at(map, b)[axis]
}

/// Mean over pairs and axes of `|D_gt - k·D_pred|`.
pub fn residual_mean(pred: &XyzMap, gt: &XyzMap, pairs: &[(usize, usize)], k: f64) -> f64 {
    let mut sum = 0.0;
    for &(a, b) in pairs {
        for axis in 0..AXES {
            sum += (diff(gt, a, b, axis) - k * diff(pred, a, b, axis)).abs();
        }
    }
    sum / (AXES * pairs.len()) as f64
}

pub fn translation_loss(pred: &XyzMap, gt: &XyzMap, pairs: &[(usize, usize)]) -> f64 {
    residual_mean(pred, gt, pairs, 1.0)
}

/// `K = Σ|D_gt| / Σ|D_pred|` over entries with `D_gt·D_pred > 0`, with the
/// entry count; `None` when too few entries or a vanishing denominator.
pub fn scale_k(pred: &XyzMap, gt: &XyzMap, pairs: &[(usize, usize)]) -> Option<(f64, usize)> {
    let (mut num, mut den, mut count) = (0.0, 0.0, 0usize);
    for &(a, b) in pairs {
        for axis in 0..AXES {
            let g = diff(gt, a, b, axis);
            let p = diff(pred, a, b, axis);
            if g * p > 0.0 {
                num += g.abs();
                den += p.abs();
                count += 1;
            }
        }
    }
    if count < MIN_POSITIVE_ENTRIES || den <= MIN_DENOMINATOR {
        return None;
    }
    Some((num / den, count))
}

pub fn control_sign(k: f64) -> f64 {
    if k > K_UPPER {
        1.0
    } else if k < K_LOWER {
        -1.0
    } else {
        0.0
    }
}

pub fn scale_loss(pred: &XyzMap, gt: &XyzMap, pairs: &[(usize, usize)]) -> Option<f64> {
    let (k, _) = scale_k(pred, gt, pairs)?;
    Some(residual_mean(pred, gt, pairs, k) + control_sign(k) * k)
}

fn d2(a: Point, b: Point) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    x * x + y * y + z * z
}

pub fn masked(map: &XyzMap, mask: &SegMask) -> Vec<Point> {
    (0..mask.values().len())
        .filter(|&i| mask.is_set(i))
        .map(|i| at(map, i))
        .collect()
}

pub fn centroid(points: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for p in points {
        for a in 0..3 {
            c[a] += p[a];
        }
    }
    c.map(|s| s / points.len() as f64)
}

/// Point metrics in the library's report layout.
#[derive(Debug, PartialEq)]
pub struct Metrics {
    pub mae: f64,
    pub mad: f64,
    pub max_dst: f64,
    pub chamfer: f64,
    pub r_squared: f64,
}

/// `None` where the library must refuse: fewer than two points or a
/// degenerate ground truth.
pub fn metrics(pred: &XyzMap, gt: &XyzMap, mask: &SegMask) -> Option<Metrics> {
    let p = masked(pred, mask);
    let g = masked(gt, mask);
    let n = g.len();
    if n < 2 {
        return None;
    }
    let mut mae = 0.0;
    for i in 0..n {
        mae += d2(p[i], g[i]).sqrt();
    }
    mae /= n as f64;

    let c = centroid(&g);
    let mut mad = 0.0;
    for q in &g {
        mad += d2(*q, c).sqrt();
    }
    mad /= n as f64;

    let mut best = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max(d2(g[i], g[j]));
        }
    }
    let max_dst = best.sqrt();

    let chamfer = directed_nn(&g, &p) + directed_nn(&p, &g);

    let (mut rss, mut tss) = (0.0, 0.0);
    for i in 0..n {
        rss += d2(p[i], g[i]);
    }
    for q in &g {
        tss += d2(*q, c);
    }
    if tss <= 1e-12 {
        return None;
    }
    Some(Metrics {
        mae,
        mad,
        max_dst,
        chamfer,
        r_squared: 1.0 - rss / tss,
    })
}

/// Mean over `from` of the distance to the nearest point of `to`.
pub fn directed_nn(from: &[Point], to: &[Point]) -> f64 {
    let mut sum = 0.0;
    for q in from {
        let mut best = f64::INFINITY;
        for t in to {
            best = best.min(d2(*q, *t));
        }
        sum += best.sqrt();
    }
    sum / from.len() as f64
}

/// (iou, precision, recall) with the both-empty case scoring 1.
pub fn seg(pred: &SegMask, gt: &SegMask) -> (f64, f64, f64) {
    let (mut i, mut u, mut np, mut ng) = (0usize, 0usize, 0usize, 0usize);
    for k in 0..gt.values().len() {
        let (p, g) = (pred.is_set(k), gt.is_set(k));
        i += (p && g) as usize;
        u += (p || g) as usize;
        np += p as usize;
        ng += g as usize;
    }
    if u == 0 {
        return (1.0, 1.0, 1.0);
    }
    let r = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (r(i, u), r(i, np), r(i, ng))
}

/// Möller–Trumbore ray/triangle intersection: `(t, u, v)` with unclamped
/// barycentrics, or `None` for a parallel ray.
pub fn moller_trumbore(o: [f64; 3], d: [f64; 3], tri: [[f64; 3]; 3]) -> Option<(f64, f64, f64)> {
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let e1 = sub(tri[1], tri[0]);
    let e2 = sub(tri[2], tri[0]);
    let p = cross(d, e2);
    let det = dot(e1, p);
    if det == 0.0 {
        return None;
    }
    let s = sub(o, tri[0]);
    let u = dot(s, p) / det;
    let q = cross(s, e1);
    let v = dot(d, q) / det;
    let t = dot(e2, q) / det;
    Some((t, u, v))
}

/// Smallest positive `s` with `|s·d - c| = r`.
pub fn ray_sphere(d: [f64; 3], c: [f64; 3], r: f64) -> Option<f64> {
    let a = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let b = -2.0 * (d[0] * c[0] + d[1] * c[1] + d[2] * c[2]);
    let cc = c[0] * c[0] + c[1] * c[1] + c[2] * c[2] - r * r;
    let disc = b * b - 4.0 * a * cc;
    if disc < 0.0 {
        return None;
    }
    let s = (-b - disc.sqrt()) / (2.0 * a);
    (s > 0.0).then_some(s)
}

/// Nearest positive hit of `o + s·d` with the infinite cylinder `x² + z² = r²`.
pub fn ray_cylinder_y(o: [f64; 3], d: [f64; 3], r: f64) -> Option<f64> {
    let a = d[0] * d[0] + d[2] * d[2];
    let b = 2.0 * (o[0] * d[0] + o[2] * d[2]);
    let c = o[0] * o[0] + o[2] * o[2] - r * r;
    let disc = b * b - 4.0 * a * c;
    if a == 0.0 || disc < 0.0 {
        return None;
    }
    let s = (-b - disc.sqrt()) / (2.0 * a);
    (s > 0.0).then_some(s)
}

/// Mean of the chi distribution with three degrees of freedom and unit scale:
/// the expected length of a standard normal 3-vector, `2·√(2/π)`.
pub fn chi3_mean() -> f64 {
    2.0 * (2.0 / std::f64::consts::PI).sqrt()
}
