use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::profile::VesselProfile;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Largest area treated as a degenerate triangle.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshLabel {
    Vessel,
    Content,
    Opening,
    Other,
}

impl MeshLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeshLabel::Vessel => "vessel",
            MeshLabel::Content => "content",
            MeshLabel::Opening => "opening",
            MeshLabel::Other => "other",
        }
    }
}

/// Indexed triangle mesh in world coordinates (meters, y up).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[u32; 3]>,
    pub label: MeshLabel,
}

#[inline]
fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl TriMesh {
    pub fn empty(label: MeshLabel) -> Self {
        TriMesh {
            vertices: Vec::new(),
            triangles: Vec::new(),
            label,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        let n = cross(sub(b, a), sub(c, a));
        0.5 * dot(n, n).sqrt()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Sum of signed tetrahedra against the origin; the enclosed volume for
    /// closed, outward-oriented meshes.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    /// Indices in range and no triangle below [`DEGENERATE_AREA`].
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::InvalidResolution(format!("triangle {t} has an out-of-range index")));
            }
            if self.triangle_area(t) <= DEGENERATE_AREA {
                return Err(Error::InvalidResolution(format!("triangle {t} is degenerate")));
            }
        }
        Ok(())
    }

    /// How many triangles use each undirected edge.
    pub fn edge_use_counts(&self) -> HashMap<(u32, u32), usize> {
        let mut counts = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn vertex_centroid(&self) -> Point {
        let n = self.vertices.len().max(1) as f64;
        let s = self.vertices.iter().fold([0.0; 3], |acc, v| [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]]);
        s.map(|x| x / n)
    }

    /// Appends a ring of `segments` vertices at height `y` and radius `r`.
    fn push_ring(&mut self, y: f64, r: f64, segments: usize) -> u32 {
        let start = self.vertices.len() as u32;
        for k in 0..segments {
            let theta = 2.0 * PI * k as f64 / segments as f64;
            self.vertices.push([r * theta.cos(), y, r * theta.sin()]);
        }
        start
    }

    /// Quads between two consecutive rings, normals pointing away from the axis.
    fn stitch_rings(&mut self, lower: u32, upper: u32, segments: usize) {
        let k_n = segments as u32;
        for k in 0..k_n {
            let k1 = (k + 1) % k_n;
            let (a, b, c, d) = (lower + k, lower + k1, upper + k, upper + k1);
            self.triangles.push([a, c, b]);
            self.triangles.push([b, c, d]);
        }
    }

    /// Fan over a ring without a centre vertex; `up` selects the +y facing side.
    fn cap_ring(&mut self, ring: u32, segments: usize, up: bool) {
        let s = segments as u32;
        for k in 1..s - 1 {
            if up {
                self.triangles.push([ring, ring + k + 1, ring + k]);
            } else {
                self.triangles.push([ring, ring + k, ring + k + 1]);
            }
        }
    }
}

fn check_resolution(angular: usize, vertical: usize) -> Result<()> {
    if angular < 3 {
        return Err(Error::InvalidResolution(format!("angular_segments must be >= 3, got {angular}")));
    }
    if vertical < 2 {
        return Err(Error::InvalidResolution(format!("vertical_segments must be >= 2, got {vertical}")));
    }
    Ok(())
}

/// Heights of the vessel's vertex rows; the last one is exactly the rim.
pub fn row_heights(profile: &VesselProfile, vertical_segments: usize) -> Vec<f64> {
    let h = profile.height();
    (0..=vertical_segments)
        .map(|j| {
            if j == vertical_segments {
                h
            } else {
                h * j as f64 / vertical_segments as f64
            }
        })
        .collect()
}

/// Surface of revolution about the y axis, closed at the bottom and open at the rim.
///
/// Every vertex lies on the profile (`x² + z² = r(y)²`); the bottom cap is a
/// fan anchored on the first ring vertex, so no centre vertex is needed.
pub fn profile_to_mesh(profile: &VesselProfile, angular_segments: usize, vertical_segments: usize) -> Result<TriMesh> {
    check_resolution(angular_segments, vertical_segments)?;
    let mut mesh = TriMesh::empty(MeshLabel::Vessel);
    let mut prev = None;
    for y in row_heights(profile, vertical_segments) {
        let ring = mesh.push_ring(y, profile.radius_at(y), angular_segments);
        match prev {
            None => mesh.cap_ring(ring, angular_segments, false),
            Some(lower) => mesh.stitch_rings(lower, ring, angular_segments),
        }
        prev = Some(ring);
    }
    Ok(mesh)
}

/// Largest amount by which the profile dips below the straight chord between
/// two rows; the faceted wall follows the chord, the analytic wall may not.
fn chord_sag(profile: &VesselProfile, y0: f64, y1: f64, r0: f64, r1: f64) -> f64 {
    let knots = profile.knots();
    let step = profile.height() / (knots.len() - 1) as f64;
    let first = (y0 / step).floor() as usize;
    let last = ((y1 / step).ceil() as usize).min(knots.len() - 1);
    (first..=last)
        .map(|k| (k as f64 * step, knots[k]))
        .filter(|&(y, _)| y > y0 && y < y1)
        .map(|(y, r)| r0 + (y - y0) / (y1 - y0) * (r1 - r0) - r)
        .fold(0.0, f64::max)
}

/// Static liquid filling the vessel up to `fill_fraction` of its height.
///
/// The solid is kept `clearance` meters off the wall, the bottom and the rim.
/// Ring radii follow the faceted wall (the chord between vessel rows) minus
/// the clearance and minus any sag of the profile below that chord, so the
/// liquid stays inside both the analytic profile and the vessel mesh while
/// cylinders and cones are filled exactly.
pub fn flat_liquid_fill(
    profile: &VesselProfile,
    fill_fraction: f64,
    angular_segments: usize,
    vertical_segments: usize,
    clearance: f64,
) -> Result<TriMesh> {
    check_resolution(angular_segments, vertical_segments)?;
    if !(0.0..=1.0).contains(&fill_fraction) {
        return Err(Error::InvalidConfig(format!("fill fraction {fill_fraction} outside [0, 1]")));
    }
    let h = profile.height();
    let bottom = clearance;
    let top = (fill_fraction * h).min(h - clearance);
    if fill_fraction == 0.0 || top <= bottom {
        return Ok(TriMesh::empty(MeshLabel::Content));
    }
    let rows = row_heights(profile, vertical_segments);
    let wall: Vec<f64> = rows.iter().map(|&y| profile.radius_at(y)).collect();
    let sag: Vec<f64> = (0..vertical_segments)
        .map(|j| chord_sag(profile, rows[j], rows[j + 1], wall[j], wall[j + 1]))
        .collect();
    let liquid_radius = |y: f64| -> f64 {
        // every row interval touching y constrains the ring
        (0..vertical_segments)
            .filter(|&j| rows[j] <= y && y <= rows[j + 1])
            .map(|j| {
                let chord = wall[j] + (y - rows[j]) / (rows[j + 1] - rows[j]) * (wall[j + 1] - wall[j]);
                chord - sag[j]
            })
            .fold(f64::INFINITY, f64::min)
            - clearance
    };

    let mut heights = vec![bottom];
    heights.extend(rows.iter().copied().filter(|&y| y > bottom && y < top));
    heights.push(top);

    let mut mesh = TriMesh::empty(MeshLabel::Content);
    let mut prev = None;
    for &y in &heights {
        let r = liquid_radius(y);
        if !(r > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "liquid radius collapses to {r} at height {y} (clearance {clearance})"
            )));
        }
        let ring = mesh.push_ring(y, r, angular_segments);
        match prev {
            None => mesh.cap_ring(ring, angular_segments, false),
            Some(lower) => mesh.stitch_rings(lower, ring, angular_segments),
        }
        prev = Some(ring);
    }
    mesh.cap_ring(prev.expect("at least two rings"), angular_segments, true);
    Ok(mesh)
}

/// Flat disk spanning the rim.
pub fn opening_plane(profile: &VesselProfile, angular_segments: usize) -> Result<TriMesh> {
    if angular_segments < 3 {
        return Err(Error::InvalidResolution(format!(
            "angular_segments must be >= 3, got {angular_segments}"
        )));
    }
    let h = profile.height();
    let mut mesh = TriMesh::empty(MeshLabel::Opening);
    mesh.vertices.push([0.0, h, 0.0]);
    let ring = mesh.push_ring(h, profile.rim_radius(), angular_segments);
    let s = angular_segments as u32;
    for k in 0..s {
        mesh.triangles.push([0, ring + (k + 1) % s, ring + k]);
    }
    Ok(mesh)
}

/// Geodesic sphere from a subdivided icosahedron, outward oriented.
pub fn icosphere(subdivisions: usize, center: Point, radius: f64) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point> = vec![
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ];
    let normalize = |p: Point| {
        let n = dot(p, p).sqrt();
        p.map(|x| x / n)
    };
    for v in verts.iter_mut() {
        *v = normalize(*v);
    }
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Point>| {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (verts[a as usize], verts[b as usize]);
                verts.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() as u32 - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh {
        vertices: verts
            .into_iter()
            .map(|p| [center[0] + radius * p[0], center[1] + radius * p[1], center[2] + radius * p[2]])
            .collect(),
        triangles: faces,
        label: MeshLabel::Other,
    }
}
