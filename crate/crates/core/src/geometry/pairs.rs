//! Dilated pixel-pair enumeration and per-axis pair differences.
//!
//! Pairs are `(p, p + d)` steps along image rows (horizontal) or columns
//! (vertical) for each dilation `d`. A difference over one dilation and
//! direction is the output of a `[1, 0, .., 0, -1]` filter with dilation `d`,
//! so pair differences are computed as shifted-row passes rather than
//! per-pair lookups.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::maps::{ensure_dims, Point, SegMask, XyzMap};
use crate::error::{Error, Result};

/// Number of coordinate axes each pair contributes.
pub const AXIS_COUNT: usize = 3;

/// Dilations used when the caller does not choose: powers of two up to 64.
pub const DEFAULT_DILATIONS: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];

/// The default dilation set clipped to the image extent.
pub fn default_dilations(width: usize, height: usize) -> Vec<usize> {
    let extent = width.max(height);
    DEFAULT_DILATIONS
        .iter()
        .copied()
        .filter(|&d| d < extent)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Horizontal,
    Vertical,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Horizontal, Direction::Vertical];
}

/// The pairs produced by one (dilation, direction) pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSegment {
    pub dilation: usize,
    pub direction: Direction,
    /// Range into [`PairSet::pairs`].
    pub range: Range<usize>,
}

/// Enumerated in-mask pixel pairs.
///
/// Order: ascending dilation, horizontal before vertical, row-major anchor.
/// Pixel indices are row-major (`v * width + u`).
#[derive(Clone, Debug, PartialEq)]
pub struct PairSet {
    mask: SegMask,
    pairs: Vec<(usize, usize)>,
    dilations: Vec<usize>,
    segments: Vec<PairSegment>,
}

impl PairSet {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn dilations(&self) -> &[usize] {
        &self.dilations
    }

    pub fn segments(&self) -> &[PairSegment] {
        &self.segments
    }

    pub fn mask(&self) -> &SegMask {
        &self.mask
    }

    pub fn dims(&self) -> (usize, usize) {
        self.mask.dims()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn axis_count(&self) -> usize {
        AXIS_COUNT
    }
}

fn validate_dilations(dilations: &[usize]) -> Result<()> {
    if dilations.is_empty() {
        return Err(Error::InvalidDilations("no dilations given".into()));
    }
    if dilations[0] == 0 {
        return Err(Error::InvalidDilations("dilations must be positive".into()));
    }
    if dilations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidDilations(format!(
            "dilations must be strictly increasing: {dilations:?}"
        )));
    }
    Ok(())
}

/// Visits anchor pixels of one (dilation, direction) pass in row-major order.
fn for_each_anchor(
    width: usize,
    height: usize,
    dilation: usize,
    direction: Direction,
    mut f: impl FnMut(usize, usize),
) {
    match direction {
        Direction::Horizontal => {
            if dilation >= width {
                return;
            }
            for v in 0..height {
                let row = v * width;
                for u in 0..width - dilation {
                    f(row + u, row + u + dilation);
                }
            }
        }
        Direction::Vertical => {
            if dilation >= height {
                return;
            }
            let step = dilation * width;
            for a in 0..(height - dilation) * width {
                f(a, a + step);
            }
        }
    }
}

/// Enumerates every `(p, p + d)` pair along rows and columns with both ends in `mask`.
pub fn build_pair_set(mask: &SegMask, dilations: &[usize]) -> Result<PairSet> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    validate_dilations(dilations)?;
    let (width, height) = mask.dims();
    let set = mask.values();
    let mut pairs = Vec::new();
    let mut segments = Vec::with_capacity(dilations.len() * 2);
    for &dilation in dilations {
        for direction in Direction::BOTH {
            let start = pairs.len();
            for_each_anchor(width, height, dilation, direction, |a, b| {
                if set[a] && set[b] {
                    pairs.push((a, b));
                }
            });
            segments.push(PairSegment {
                dilation,
                direction,
                range: start..pairs.len(),
            });
        }
    }
    Ok(PairSet {
        mask: mask.clone(),
        pairs,
        dilations: dilations.to_vec(),
        segments,
    })
}

/// Signed per-axis differences `map(a) - map(b)` for each pair, in pair order.
#[derive(Clone, Debug, PartialEq)]
pub struct PairDifferences {
    diffs: Vec<Point>,
}

impl PairDifferences {
    pub fn as_slice(&self) -> &[Point] {
        &self.diffs
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    /// Number of scalar entries (`3 * pairs`).
    pub fn entry_count(&self) -> usize {
        self.diffs.len() * AXIS_COUNT
    }

    /// All `3 * n` differences flattened pair-major, axis-minor.
    pub fn flattened(&self) -> impl Iterator<Item = f64> + '_ {
        self.diffs.iter().flat_map(|d| d.iter().copied())
    }
}

#[inline]
fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Computes pair differences with one shifted pass per (dilation, direction).
pub fn pair_differences(map: &XyzMap, pairs: &PairSet) -> Result<PairDifferences> {
    ensure_dims(pairs.dims(), map.dims())?;
    let (width, height) = map.dims();
    let coords = map.raw_coords();
    let valid = map.valid();
    let set = pairs.mask.values();
    let mut diffs = Vec::with_capacity(pairs.len());
    let mut bad = None;
    for seg in &pairs.segments {
        for_each_anchor(width, height, seg.dilation, seg.direction, |a, b| {
            if set[a] && set[b] {
                if !valid[a] || !valid[b] {
                    bad.get_or_insert(if valid[a] { b } else { a });
                }
                diffs.push(sub(coords[a], coords[b]));
            }
        });
    }
    if let Some(pixel) = bad {
        return Err(Error::InvalidEndpoint { pixel });
    }
    debug_assert_eq!(diffs.len(), pairs.len());
    Ok(PairDifferences { diffs })
}
