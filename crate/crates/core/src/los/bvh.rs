//! Bounding volume hierarchy over mesh triangles.
//!
//! Traversal returns exactly the hit an exhaustive scan returns: the same
//! per-triangle kernel is used, node boxes are padded so floating-point slab
//! tests never reject a box that contains a hit, nodes are only pruned when
//! their entry distance is strictly beyond the current best, and equal
//! distances resolve to the lower triangle index.

use crate::geom::{Aabb, Point, Vector};
use crate::terrain::TriangleMesh;

use super::intersect::ray_triangle_intersect;
use super::tracer::TerrainHit;
use super::Ray;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: offset into `order`. Inner: index of the left child; the right
    /// child follows the whole left subtree at `right`.
    first: u32,
    count: u32,
    right: u32,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

/// Builds the spatial index for `mesh`.
pub fn build_accelerator(mesh: &TriangleMesh) -> Bvh {
    Bvh::build(mesh)
}

struct Prim {
    index: u32,
    bounds: Aabb,
    centroid: Point,
}

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Self {
        let mut prims: Vec<Prim> = (0..mesh.triangle_count())
            .map(|i| {
                let mut bounds = Aabb::empty();
                for p in mesh.triangle(i) {
                    bounds.grow(&p);
                }
                Prim {
                    index: i as u32,
                    bounds,
                    centroid: bounds.centroid(),
                }
            })
            .collect();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * prims.len() / LEAF_SIZE + 1),
            order: Vec::with_capacity(prims.len()),
        };
        if !prims.is_empty() {
            bvh.build_node(&mut prims);
        }
        bvh
    }

    fn build_node(&mut self, prims: &mut [Prim]) -> u32 {
        let mut bounds = Aabb::empty();
        let mut centroids = Aabb::empty();
        for p in prims.iter() {
            bounds = bounds.join(&p.bounds);
            centroids.grow(&p.centroid);
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            bounds: pad(bounds),
            first: 0,
            count: 0,
            right: 0,
        });

        let extent = centroids.extent();
        if prims.len() <= LEAF_SIZE || extent.max() <= 0.0 {
            let node = &mut self.nodes[id as usize];
            node.first = self.order.len() as u32;
            node.count = prims.len() as u32;
            self.order.extend(prims.iter().map(|p| p.index));
            return id;
        }

        let axis = extent.imax();
        let mid = prims.len() / 2;
        prims.select_nth_unstable_by(mid, |a, b| {
            a.centroid[axis]
                .total_cmp(&b.centroid[axis])
                .then(a.index.cmp(&b.index))
        });
        let (left, right) = prims.split_at_mut(mid);
        let left_id = self.build_node(left);
        let right_id = self.build_node(right);
        let node = &mut self.nodes[id as usize];
        node.first = left_id;
        node.right = right_id;
        id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nearest front-facing terrain hit, or `None`.
    pub fn nearest_hit(&self, mesh: &TriangleMesh, ray: &Ray) -> Option<TerrainHit> {
        self.traverse(mesh, ray, &mut |_| {})
    }

    /// Triangle indices whose intersection test ran for this ray, in visit
    /// order. Diagnostic only.
    pub fn visited_triangles(&self, mesh: &TriangleMesh, ray: &Ray) -> Vec<u32> {
        let mut seen = Vec::new();
        self.traverse(mesh, ray, &mut |i| seen.push(i));
        seen
    }

    fn traverse(
        &self,
        mesh: &TriangleMesh,
        ray: &Ray,
        visit: &mut dyn FnMut(u32),
    ) -> Option<TerrainHit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = ray.direction.map(|d| 1.0 / d);
        let mut best: Option<TerrainHit> = None;
        let best_t = |b: &Option<TerrainHit>| b.map_or(f64::INFINITY, |h| h.distance);

        let mut stack: Vec<(u32, f64)> = Vec::with_capacity(64);
        if let Some(t) = slab_entry(&self.nodes[0].bounds, ray, &inv) {
            stack.push((0, t));
        }
        while let Some((id, entry)) = stack.pop() {
            if entry > best_t(&best) {
                continue;
            }
            let node = &self.nodes[id as usize];
            if node.count > 0 {
                let start = node.first as usize;
                for &tri in &self.order[start..start + node.count as usize] {
                    visit(tri);
                    if let Some(t) = ray_triangle_intersect(ray, &mesh.triangle(tri as usize)) {
                        let better = match best {
                            None => true,
                            Some(b) => t < b.distance || (t == b.distance && tri < b.triangle),
                        };
                        if better {
                            best = Some(TerrainHit {
                                distance: t,
                                triangle: tri,
                            });
                        }
                    }
                }
                continue;
            }
            let l = slab_entry(&self.nodes[node.first as usize].bounds, ray, &inv);
            let r = slab_entry(&self.nodes[node.right as usize].bounds, ray, &inv);
            match (l, r) {
                (Some(tl), Some(tr)) => {
                    // pop the nearer child first
                    if tl <= tr {
                        stack.push((node.right, tr));
                        stack.push((node.first, tl));
                    } else {
                        stack.push((node.first, tl));
                        stack.push((node.right, tr));
                    }
                }
                (Some(tl), None) => stack.push((node.first, tl)),
                (None, Some(tr)) => stack.push((node.right, tr)),
                (None, None) => {}
            }
        }
        best
    }
}

/// Grows a box by a small absolute and relative amount so that rounding in
/// the slab test and in the triangle kernel cannot place a hit outside it.
fn pad(b: Aabb) -> Aabb {
    let scale = b.min.coords.amax().max(b.max.coords.amax());
    let eps = 1e-7 * (1.0 + scale);
    let e = Vector::new(eps, eps, eps);
    Aabb {
        min: b.min - e,
        max: b.max + e,
    }
}

/// Entry distance (clamped to 0) of the ray into the box, if it hits.
#[inline]
fn slab_entry(b: &Aabb, ray: &Ray, inv: &Vector) -> Option<f64> {
    let mut t_min = 0.0f64;
    let mut t_max = f64::INFINITY;
    for axis in 0..3 {
        let o = ray.origin[axis];
        if ray.direction[axis] == 0.0 {
            if o < b.min[axis] || o > b.max[axis] {
                return None;
            }
            continue;
        }
        let mut t0 = (b.min[axis] - o) * inv[axis];
        let mut t1 = (b.max[axis] - o) * inv[axis];
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_min = t_min.max(t0);
        t_max = t_max.min(t1);
    }
    // conservative far bound against rounding in the products above
    (t_min <= t_max * (1.0 + 4.0 * f64::EPSILON)).then_some(t_min)
}
