//! Bounding-volume hierarchy over a triangle mesh.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::procgen::TriMesh;

pub const MAX_LEAF_SIZE: usize = 8;

type V3 = Vector3<f64>;

#[derive(Clone, Copy, Debug)]
pub struct Ray {
    origin: V3,
    dir: V3,
    inv_dir: V3,
}

impl Ray {
    /// Normalises `dir`; a zero or non-finite direction is rejected.
    pub fn new(origin: V3, dir: V3) -> Result<Ray> {
        let n = dir.norm();
        if !(n > 0.0 && n.is_finite()) || !origin.iter().all(|x| x.is_finite()) {
            return Err(Error::DegenerateRay);
        }
        let dir = dir / n;
        Ok(Ray {
            origin,
            dir,
            inv_dir: dir.map(|d| 1.0 / d),
        })
    }

    pub fn origin(&self) -> &V3 {
        &self.origin
    }

    pub fn dir(&self) -> &V3 {
        &self.dir
    }

    pub fn at(&self, t: f64) -> V3 {
        self.origin + self.dir * t
    }
}

/// Nearest intersection along a ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub triangle: usize,
    /// Barycentric weights of the second and third corner.
    pub u: f64,
    pub v: f64,
}

impl Hit {
    /// Nearer hit wins; equal distances go to the lower triangle index.
    #[inline]
    pub fn beats(&self, other: &Option<Hit>) -> bool {
        match other {
            None => true,
            Some(o) => self.t < o.t || (self.t == o.t && self.triangle < o.triangle),
        }
    }
}

/// Watertight ray/triangle test (shear-and-scale to ray space, signed edge
/// functions). Hits on a shared edge are reported by both neighbours, so no
/// ray slips through a seam. Both faces count; only `t > 0` is accepted.
pub fn intersect_triangle(ray: &Ray, tri: &[V3; 3]) -> Option<(f64, f64, f64)> {
    let d = ray.dir;
    let kz = d.iamax();
    let mut kx = (kz + 1) % 3;
    let mut ky = (kx + 1) % 3;
    if d[kz] < 0.0 {
        std::mem::swap(&mut kx, &mut ky);
    }
    let sx = d[kx] / d[kz];
    let sy = d[ky] / d[kz];
    let sz = 1.0 / d[kz];

    let a = tri[0] - ray.origin;
    let b = tri[1] - ray.origin;
    let c = tri[2] - ray.origin;
    let ax = a[kx] - sx * a[kz];
    let ay = a[ky] - sy * a[kz];
    let bx = b[kx] - sx * b[kz];
    let by = b[ky] - sy * b[kz];
    let cx = c[kx] - sx * c[kz];
    let cy = c[ky] - sy * c[kz];

    let e0 = cx * by - cy * bx;
    let e1 = ax * cy - ay * cx;
    let e2 = bx * ay - by * ax;
    if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) && (e0 > 0.0 || e1 > 0.0 || e2 > 0.0) {
        return None;
    }
    let det = e0 + e1 + e2;
    if det == 0.0 {
        return None;
    }
    let az = sz * a[kz];
    let bz = sz * b[kz];
    let cz = sz * c[kz];
    let t = (e0 * az + e1 * bz + e2 * cz) / det;
    if !(t > 0.0) || !t.is_finite() {
        return None;
    }
    Some((t, e1 / det, e2 / det))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: V3,
    pub max: V3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: V3::repeat(f64::INFINITY),
            max: V3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &V3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&mut self, o: &Aabb) {
        self.min = self.min.inf(&o.min);
        self.max = self.max.sup(&o.max);
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= o.min[k] && self.max[k] >= o.max[k])
    }

    /// Entry distance if the ray meets the box before `t_max`.
    #[inline]
    fn hit(&self, ray: &Ray, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            let inv = ray.inv_dir[k];
            let mut near = (self.min[k] - ray.origin[k]) * inv;
            let mut far = (self.max[k] - ray.origin[k]) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // NaN (0 * inf) leaves the interval untouched
            t0 = if near > t0 { near } else { t0 };
            t1 = if far < t1 { far } else { t1 };
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Clone, Debug)]
enum NodeKind {
    Leaf { start: usize, count: usize },
    Inner { left: usize, right: usize },
}

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

#[derive(Clone, Debug)]
pub struct Bvh {
    triangles: Vec<[V3; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

fn tri_bounds(tri: &[V3; 3]) -> Aabb {
    let mut b = Aabb::empty();
    for p in tri {
        b.grow(p);
    }
    // pad so rounding in the slab test never culls a touching ray
    let pad = ((b.max - b.min).amax() + b.min.amax().max(b.max.amax())) * 1e-9 + 1e-12;
    b.min -= V3::repeat(pad);
    b.max += V3::repeat(pad);
    b
}

/// Builds a median-split BVH with at most [`MAX_LEAF_SIZE`] triangles per leaf.
pub fn bvh_build(mesh: &TriMesh) -> Result<Bvh> {
    if mesh.is_empty() {
        return Err(Error::EmptyScene);
    }
    let triangles: Vec<[V3; 3]> = (0..mesh.triangles.len())
        .map(|t| mesh.corners(t).map(V3::from))
        .collect();
    Ok(Bvh::from_triangles(triangles))
}

impl Bvh {
    pub fn from_triangles(triangles: Vec<[V3; 3]>) -> Bvh {
        let bounds: Vec<Aabb> = triangles.iter().map(tri_bounds).collect();
        let centroids: Vec<V3> = triangles.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut bvh = Bvh {
            order: (0..triangles.len()).collect(),
            triangles,
            nodes: Vec::new(),
        };
        if !bvh.triangles.is_empty() {
            bvh.build_node(0, bvh.order.len(), &bounds, &centroids);
        }
        bvh
    }

    fn build_node(&mut self, start: usize, end: usize, bounds: &[Aabb], centroids: &[V3]) -> usize {
        let mut b = Aabb::empty();
        let mut cb = Aabb::empty();
        for &i in &self.order[start..end] {
            b.merge(&bounds[i]);
            cb.grow(&centroids[i]);
        }
        let id = self.nodes.len();
        let count = end - start;
        let extent = cb.max - cb.min;
        if count <= MAX_LEAF_SIZE {
            self.nodes.push(Node {
                bounds: b,
                kind: NodeKind::Leaf { start, count },
            });
            return id;
        }
        let axis = extent.iamax();
        let mid = start + count / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
            centroids[i][axis].total_cmp(&centroids[j][axis]).then(i.cmp(&j))
        });
        self.nodes.push(Node {
            bounds: b,
            kind: NodeKind::Leaf { start: 0, count: 0 },
        });
        let left = self.build_node(start, mid, bounds, centroids);
        let right = self.build_node(mid, end, bounds, centroids);
        self.nodes[id].kind = NodeKind::Inner { left, right };
        id
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> &[V3; 3] {
        &self.triangles[i]
    }

    /// Nearest hit, identical to testing every triangle in turn.
    pub fn intersect(&self, ray: &Ray) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<Hit> = None;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let t_max = best.map_or(f64::INFINITY, |h| h.t);
            if node.bounds.hit(ray, t_max).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &i in &self.order[start..start + count] {
                        if let Some((t, u, v)) = intersect_triangle(ray, &self.triangles[i]) {
                            let hit = Hit { t, triangle: i, u, v };
                            if hit.beats(&best) {
                                best = Some(hit);
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let tl = self.nodes[left].bounds.hit(ray, t_max);
                    let tr = self.nodes[right].bounds.hit(ray, t_max);
                    match (tl, tr) {
                        (Some(a), Some(b)) => {
                            // visit the nearer child first
                            if a <= b {
                                stack.push(right);
                                stack.push(left);
                            } else {
                                stack.push(left);
                                stack.push(right);
                            }
                        }
                        (Some(_), None) => stack.push(left),
                        (None, Some(_)) => stack.push(right),
                        (None, None) => {}
                    }
                }
            }
        }
        best
    }

    /// Every triangle in exactly one leaf, leaves within the size limit and
    /// children inside their parent's box.
    pub fn check_structure(&self) -> std::result::Result<(), String> {
        let mut seen = vec![0usize; self.triangles.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    if count > MAX_LEAF_SIZE {
                        return Err(format!("leaf {id} holds {count} triangles"));
                    }
                    for &i in &self.order[start..start + count] {
                        seen[i] += 1;
                        if !node.bounds.contains(&tri_bounds(&self.triangles[i])) {
                            return Err(format!("leaf {id} does not bound triangle {i}"));
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    for c in [left, right] {
                        if !node.bounds.contains(&self.nodes[c].bounds) {
                            return Err(format!("node {id} does not contain child {c}"));
                        }
                    }
                }
            }
        }
        match seen.iter().position(|&n| n != 1) {
            Some(i) => Err(format!("triangle {i} referenced {} times", seen[i])),
            None => Ok(()),
        }
    }
}
