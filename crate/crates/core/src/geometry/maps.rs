use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 3D point or vector stored as `[x, y, z]` in meters.
pub type Point = [f64; 3];

/// Stored in every invalid slot. Nothing reads it; it only keeps the buffers dense.
pub(crate) const SENTINEL: f64 = f64::NAN;

fn check_len(width: usize, height: usize, found: usize) -> Result<()> {
    if width * height != found {
        return Err(Error::BufferLength {
            width,
            height,
            found,
        });
    }
    Ok(())
}

/// Boolean pixel mask (object region, validity, segmentation output).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegMask {
    width: usize,
    height: usize,
    values: Vec<bool>,
}

impl SegMask {
    pub fn new(width: usize, height: usize, values: Vec<bool>) -> Result<Self> {
        check_len(width, height, values.len())?;
        Ok(SegMask {
            width,
            height,
            values,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        SegMask {
            width,
            height,
            values: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        SegMask {
            width,
            height,
            values: vec![true; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                values.push(f(u, v));
            }
        }
        SegMask {
            width,
            height,
            values,
        }
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

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.values[v * self.width + u]
    }

    pub fn is_set(&self, index: usize) -> bool {
        self.values[index]
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.values.iter().any(|&b| b)
    }

    /// Row-major indices of set pixels.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn and(&self, other: &SegMask) -> Result<SegMask> {
        ensure_dims(self.dims(), other.dims())?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a && b)
            .collect();
        Ok(SegMask {
            width: self.width,
            height: self.height,
            values,
        })
    }

    pub fn transposed(&self) -> SegMask {
        SegMask::from_fn(self.height, self.width, |u, v| self.get(v, u))
    }

    /// True if every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &SegMask) -> bool {
        self.dims() == other.dims()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(&a, &b)| !a || b)
    }
}

pub(crate) fn ensure_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Per-pixel optical-axis depth in meters with a validity mask.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    /// Builds a map; values at invalid pixels are discarded.
    pub fn new(width: usize, height: usize, mut values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        check_len(width, height, values.len())?;
        check_len(width, height, valid.len())?;
        for (i, (val, &ok)) in values.iter_mut().zip(&valid).enumerate() {
            if !ok {
                *val = SENTINEL;
            } else if !val.is_finite() || *val <= 0.0 {
                return Err(Error::InvalidValue {
                    u: i % width,
                    v: i / width,
                    reason: "valid depth must be finite and positive",
                });
            }
        }
        Ok(DepthMap {
            width,
            height,
            values,
            valid,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Option<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        let mut valid = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                let d = f(u, v);
                valid.push(d.is_some());
                values.push(d.unwrap_or(SENTINEL));
            }
        }
        DepthMap::new(width, height, values, valid)
    }

    pub fn invalid(width: usize, height: usize) -> Self {
        DepthMap {
            width,
            height,
            values: vec![SENTINEL; width * height],
            valid: vec![false; width * height],
        }
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

    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        self.at(v * self.width + u)
    }

    pub fn at(&self, index: usize) -> Option<f64> {
        self.valid[index].then(|| self.values[index])
    }

    pub fn is_valid(&self, index: usize) -> bool {
        self.valid[index]
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    /// Raw buffer; invalid slots hold an unspecified sentinel.
    pub fn raw_values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid_mask(&self) -> SegMask {
        SegMask {
            width: self.width,
            height: self.height,
            values: self.valid.clone(),
        }
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&b| b).count()
    }

    /// Copy with every pixel outside `keep` invalidated.
    pub fn restricted_to(&self, keep: &SegMask) -> Result<DepthMap> {
        ensure_dims(self.dims(), keep.dims())?;
        let mut out = self.clone();
        for (i, &k) in keep.values().iter().enumerate() {
            if !k {
                out.valid[i] = false;
                out.values[i] = SENTINEL;
            }
        }
        Ok(out)
    }
}

impl PartialEq for DepthMap {
    /// Equality over dimensions, validity and valid values only.
    fn eq(&self, other: &Self) -> bool {
        self.dims() == other.dims()
            && self.valid == other.valid
            && (0..self.values.len()).all(|i| !self.valid[i] || self.values[i] == other.values[i])
    }
}

/// Per-pixel 3D coordinates in meters with a validity mask.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XyzMap {
    width: usize,
    height: usize,
    coords: Vec<Point>,
    valid: Vec<bool>,
}

impl XyzMap {
    pub fn new(width: usize, height: usize, mut coords: Vec<Point>, valid: Vec<bool>) -> Result<Self> {
        check_len(width, height, coords.len())?;
        check_len(width, height, valid.len())?;
        for (i, (p, &ok)) in coords.iter_mut().zip(&valid).enumerate() {
            if !ok {
                *p = [SENTINEL; 3];
            } else if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidValue {
                    u: i % width,
                    v: i / width,
                    reason: "valid coordinates must be finite",
                });
            }
        }
        Ok(XyzMap {
            width,
            height,
            coords,
            valid,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Option<Point>,
    ) -> Result<Self> {
        let mut coords = Vec::with_capacity(width * height);
        let mut valid = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                let p = f(u, v);
                valid.push(p.is_some());
                coords.push(p.unwrap_or([SENTINEL; 3]));
            }
        }
        XyzMap::new(width, height, coords, valid)
    }

    pub fn invalid(width: usize, height: usize) -> Self {
        XyzMap {
            width,
            height,
            coords: vec![[SENTINEL; 3]; width * height],
            valid: vec![false; width * height],
        }
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

    pub fn get(&self, u: usize, v: usize) -> Option<Point> {
        self.at(v * self.width + u)
    }

    pub fn at(&self, index: usize) -> Option<Point> {
        self.valid[index].then(|| self.coords[index])
    }

    pub fn is_valid(&self, index: usize) -> bool {
        self.valid[index]
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    /// Raw buffer; invalid slots hold an unspecified sentinel.
    pub fn raw_coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn valid_mask(&self) -> SegMask {
        SegMask {
            width: self.width,
            height: self.height,
            values: self.valid.clone(),
        }
    }

    /// Applies `f` to every valid point.
    pub fn map_points(&self, mut f: impl FnMut(Point) -> Point) -> Result<XyzMap> {
        let coords = self
            .coords
            .iter()
            .zip(&self.valid)
            .map(|(&p, &ok)| if ok { f(p) } else { p })
            .collect();
        XyzMap::new(self.width, self.height, coords, self.valid.clone())
    }

    pub fn translated(&self, t: Point) -> XyzMap {
        self.map_points(|p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]])
            .expect("translation of finite points by a finite vector")
    }

    pub fn scaled(&self, s: f64) -> XyzMap {
        self.map_points(|p| [p[0] * s, p[1] * s, p[2] * s])
            .expect("scaling of finite points by a finite factor")
    }

    /// Points at the set pixels of `mask`, in row-major order.
    pub fn points_in(&self, mask: &SegMask) -> Result<Vec<Point>> {
        ensure_dims(self.dims(), mask.dims())?;
        mask.indices()
            .map(|i| self.at(i).ok_or(Error::InvalidEndpoint { pixel: i }))
            .collect()
    }

    /// Copy with every pixel outside `keep` invalidated.
    pub fn restricted_to(&self, keep: &SegMask) -> Result<XyzMap> {
        ensure_dims(self.dims(), keep.dims())?;
        let mut out = self.clone();
        for (i, &k) in keep.values().iter().enumerate() {
            if !k {
                out.valid[i] = false;
                out.coords[i] = [SENTINEL; 3];
            }
        }
        Ok(out)
    }

    /// Fails unless every set pixel of `mask` is valid here.
    pub fn require_valid_on(&self, mask: &SegMask) -> Result<()> {
        ensure_dims(self.dims(), mask.dims())?;
        match mask.indices().find(|&i| !self.valid[i]) {
            Some(pixel) => Err(Error::InvalidEndpoint { pixel }),
            None => Ok(()),
        }
    }
}

impl PartialEq for XyzMap {
    fn eq(&self, other: &Self) -> bool {
        self.dims() == other.dims()
            && self.valid == other.valid
            && (0..self.coords.len()).all(|i| !self.valid[i] || self.coords[i] == other.coords[i])
    }
}
