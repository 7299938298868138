use crate::error::{Error, Result};
use crate::geom::Point;
use crate::terrain::BoundingBox;

use super::{HitKind, Ray};

/// Hits closer than this (m) are ignored so an eyepoint resting on the
/// surface does not intersect the triangle it sits on.
pub const MIN_HIT_DISTANCE: f64 = 1e-6;

/// Distance along `ray` to its intersection with triangle `tri`, using the
/// Möller–Trumbore formulation.
///
/// Only front faces count: the triangle is skipped when the ray travels
/// along or against its winding normal (`direction · normal ≥ 0`). Hits on
/// edges and vertices are accepted.
#[inline]
pub fn ray_triangle_intersect(ray: &Ray, tri: &[Point; 3]) -> Option<f64> {
    let [a, b, c] = tri;
    let e1 = b - a;
    let e2 = c - a;
    let p = ray.direction.cross(&e2);
    // det = e1 · (d × e2) = -d · (e1 × e2): positive exactly for front faces
    let det = e1.dot(&p);
    if det <= 0.0 {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - a;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = ray.direction.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > MIN_HIT_DISTANCE).then_some(t)
}

/// Exit face and distance of a ray leaving the box from inside.
///
/// Ties between faces resolve in the order x-wall, y-wall, ceiling/floor.
pub fn ray_box_intersect(ray: &Ray, bbox: &BoundingBox) -> Result<(HitKind, f64)> {
    let o = ray.origin;
    if !bbox.contains_strictly(&o) {
        return Err(Error::OriginOutsideBox {
            x: o.x,
            y: o.y,
            z: o.z,
        });
    }
    let d = ray.direction;
    let exit = |lo: f64, hi: f64, o: f64, d: f64| -> f64 {
        if d > 0.0 {
            (hi - o) / d
        } else if d < 0.0 {
            (lo - o) / d
        } else {
            f64::INFINITY
        }
    };
    let tx = exit(bbox.x_min, bbox.x_max, o.x, d.x);
    let ty = exit(bbox.y_min, bbox.y_max, o.y, d.y);
    let tz = exit(bbox.floor_z, bbox.ceiling_z, o.z, d.z);
    let z_kind = if d.z > 0.0 {
        HitKind::Ceiling
    } else {
        HitKind::Floor
    };
    let mut best = (HitKind::Wall, tx);
    if ty < best.1 {
        best = (HitKind::Wall, ty);
    }
    if tz < best.1 {
        best = (z_kind, tz);
    }
    Ok(best)
}
