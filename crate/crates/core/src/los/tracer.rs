use crate::error::Result;
use crate::geom::{Point, Vector};
use crate::terrain::{BoundingBox, TriangleMesh};

use super::intersect::{ray_box_intersect, ray_triangle_intersect};
use super::{Bvh, HitKind, Ray, RayHit};

/// Nearest terrain intersection: distance along the ray and triangle index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerrainHit {
    pub distance: f64,
    pub triangle: u32,
}

/// Scans every triangle; the reference the accelerator must reproduce.
pub fn exhaustive_nearest_hit(mesh: &TriangleMesh, ray: &Ray) -> Option<TerrainHit> {
    let mut best: Option<TerrainHit> = None;
    for i in 0..mesh.triangle_count() {
        if let Some(t) = ray_triangle_intersect(ray, &mesh.triangle(i)) {
            if best.is_none_or(|b| t < b.distance) {
                best = Some(TerrainHit {
                    distance: t,
                    triangle: i as u32,
                });
            }
        }
    }
    best
}

fn nearest(mesh: &TriangleMesh, index: Option<&Bvh>, ray: &Ray) -> Option<TerrainHit> {
    match index {
        Some(bvh) => bvh.nearest_hit(mesh, ray),
        None => exhaustive_nearest_hit(mesh, ray),
    }
}

/// Nearest terrain hit if any, otherwise the bounding box exit. `index`
/// `None` falls back to the exhaustive scan.
pub fn trace_ray(
    mesh: &TriangleMesh,
    index: Option<&Bvh>,
    bbox: &BoundingBox,
    ray: &Ray,
) -> Result<RayHit> {
    let (box_kind, box_t) = ray_box_intersect(ray, bbox)?;
    let (kind, length) = match nearest(mesh, index, ray) {
        Some(hit) => (HitKind::Terrain, hit.distance),
        None => (box_kind, box_t),
    };
    Ok(RayHit {
        kind,
        length,
        point: ray.at(length),
    })
}

/// Elevation of the topmost surface under `(x, y)`, found with a vertical
/// ray cast down from above the ceiling. `None` over holes and outside the
/// walls.
pub fn ground_elevation(
    mesh: &TriangleMesh,
    index: Option<&Bvh>,
    bbox: &BoundingBox,
    x: f64,
    y: f64,
) -> Option<f64> {
    if !bbox.walls().contains(x, y) {
        return None;
    }
    let top = bbox.ceiling_z + 1.0;
    let ray = Ray {
        origin: Point::new(x, y, top),
        direction: -Vector::z(),
    };
    nearest(mesh, index, &ray).map(|h| top - h.distance)
}

/// A mesh with its accelerator and bounding box, ready for tracing.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub mesh: &'a TriangleMesh,
    pub index: Option<&'a Bvh>,
    pub bbox: BoundingBox,
}

impl Scene<'_> {
    pub fn trace(&self, ray: &Ray) -> Result<RayHit> {
        trace_ray(self.mesh, self.index, &self.bbox, ray)
    }

    pub fn ground_elevation(&self, x: f64, y: f64) -> Option<f64> {
        ground_elevation(self.mesh, self.index, &self.bbox, x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::direction_vector;
    use crate::terrain::{compute_bounding_box, Heightfield};
    use approx::assert_abs_diff_eq;

    fn plane(z: f64) -> TriangleMesh {
        Heightfield::from_fn(11, 11, 10.0, (0.0, 0.0), |_, _| z)
            .unwrap()
            .triangulate("plane")
            .unwrap()
    }

    #[test]
    fn straight_down_up_and_slanted() {
        let mesh = plane(0.0);
        let bvh = Bvh::build(&mesh);
        let bbox = compute_bounding_box(&mesh, 60.0, 10.0).unwrap();
        assert_eq!(bbox.ceiling_z, 70.0);
        let eye = Point::new(50.0, 50.0, 2.0);

        let down = trace_ray(&mesh, Some(&bvh), &bbox, &Ray::new(eye, -Vector::z()).unwrap()).unwrap();
        assert_eq!((down.kind, down.length), (HitKind::Terrain, 2.0));

        let up = trace_ray(&mesh, Some(&bvh), &bbox, &Ray::new(eye, Vector::z()).unwrap()).unwrap();
        assert_eq!((up.kind, up.length), (HitKind::Ceiling, 68.0));

        let ray = Ray::new(eye, direction_vector(30.0, -45.0)).unwrap();
        let slant = trace_ray(&mesh, Some(&bvh), &bbox, &ray).unwrap();
        assert_eq!(slant.kind, HitKind::Terrain);
        assert_abs_diff_eq!(slant.length, 2.0 * 2f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(slant.point.z, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn horizontal_ray_reaches_the_wall() {
        let mesh = plane(0.0);
        let bbox = compute_bounding_box(&mesh, 2.0, 1.0).unwrap();
        let ray = Ray::new(Point::new(30.0, 50.0, 2.0), direction_vector(90.0, 0.0)).unwrap();
        let hit = trace_ray(&mesh, None, &bbox, &ray).unwrap();
        assert_eq!(hit.kind, HitKind::Wall);
        assert_abs_diff_eq!(hit.length, 70.0, epsilon = 1e-9);
    }

    #[test]
    fn ground_on_flat_plane_and_over_holes() {
        let mesh = plane(5.0);
        let bbox = compute_bounding_box(&mesh, 5.0, 1.0).unwrap();
        assert_eq!(ground_elevation(&mesh, None, &bbox, 33.3, 71.2), Some(5.0));

        let mut hf = Heightfield::from_fn(5, 5, 1.0, (0.0, 0.0), |_, _| 0.0).unwrap();
        hf.set_hole(2, 2);
        let holed = hf.triangulate("h").unwrap();
        let bbox = compute_bounding_box(&holed, 0.0, 1.0).unwrap();
        assert_eq!(ground_elevation(&holed, None, &bbox, 2.0, 2.0), None);
        assert_eq!(ground_elevation(&holed, None, &bbox, 0.5, 0.5), Some(0.0));
        assert_eq!(ground_elevation(&holed, None, &bbox, 7.0, 0.5), None);
    }

    #[test]
    fn stacked_surfaces_return_the_upper_one() {
        let v = vec![
            Point::new(0.0, 0.0, 5.0),
            Point::new(10.0, 0.0, 5.0),
            Point::new(0.0, 10.0, 5.0),
            Point::new(0.0, 0.0, 9.0),
            Point::new(10.0, 0.0, 9.0),
            Point::new(0.0, 10.0, 9.0),
        ];
        let mesh = TriangleMesh::new("stack", v, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        let bbox = compute_bounding_box(&mesh, 9.0, 1.0).unwrap();
        // oracle: both distances from the probe origin, keep the smaller
        let top = bbox.ceiling_z + 1.0;
        let expected = top - (top - 5.0f64).min(top - 9.0);
        assert_eq!(ground_elevation(&mesh, None, &bbox, 2.0, 3.0), Some(expected));
        let bvh = Bvh::build(&mesh);
        assert_eq!(ground_elevation(&mesh, Some(&bvh), &bbox, 2.0, 3.0), Some(9.0));
    }
}
