use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Rect};

use super::TriangleMesh;

/// Default vertical clearance (m) between the terrain/eyepoints and the
/// ceiling and floor of the bounding box.
pub const DEFAULT_BOX_MARGIN: f64 = 1.0;

/// Enclosing volume whose invisible walls, ceiling and floor terminate any
/// ray that misses the terrain, so every ray has a finite length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub floor_z: f64,
    pub ceiling_z: f64,
}

impl BoundingBox {
    pub fn walls(&self) -> Rect {
        Rect::new(self.x_min, self.x_max, self.y_min, self.y_max)
    }

    pub fn contains_strictly(&self, p: &Point) -> bool {
        p.x > self.x_min
            && p.x < self.x_max
            && p.y > self.y_min
            && p.y < self.y_max
            && p.z > self.floor_z
            && p.z < self.ceiling_z
    }
}

/// Walls at the mesh's horizontal extent, ceiling `margin` above the higher
/// of the terrain and the highest eyepoint, floor `margin` below the terrain.
pub fn compute_bounding_box(
    mesh: &TriangleMesh,
    max_eyepoint_z: f64,
    margin: f64,
) -> Result<BoundingBox> {
    if mesh.is_empty() {
        return Err(Error::NoTriangles {
            name: mesh.name().to_string(),
        });
    }
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::invalid("margin", "must be positive"));
    }
    let b = mesh.bounds();
    let top = if max_eyepoint_z.is_finite() {
        b.max.z.max(max_eyepoint_z)
    } else {
        b.max.z
    };
    Ok(BoundingBox {
        x_min: b.min.x,
        x_max: b.max.x,
        y_min: b.min.y,
        y_max: b.max.y,
        floor_z: b.min.z - margin,
        ceiling_z: top + margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab() -> TriangleMesh {
        TriangleMesh::new(
            "m",
            vec![
                Point::new(0.0, 0.0, 0.0),
                Point::new(100.0, 0.0, 50.0),
                Point::new(100.0, 80.0, 0.0),
                Point::new(0.0, 80.0, 20.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn ceiling_and_floor_follow_the_rule() {
        let b = compute_bounding_box(&slab(), 60.0, 10.0).unwrap();
        assert_eq!(b.ceiling_z, 70.0);
        assert_eq!(b.floor_z, -10.0);
        assert_eq!((b.x_min, b.x_max), (0.0, 100.0));
        assert_eq!((b.y_min, b.y_max), (0.0, 80.0));
    }

    #[test]
    fn terrain_above_eyepoints_sets_the_ceiling() {
        let b = compute_bounding_box(&slab(), 5.0, 1.0).unwrap();
        assert_eq!(b.ceiling_z, 51.0);
    }

    #[test]
    fn margin_must_be_positive() {
        assert!(compute_bounding_box(&slab(), 5.0, 0.0).is_err());
    }

    #[test]
    fn empty_mesh_is_rejected() {
        let empty = TriangleMesh::new("e", vec![], vec![]).unwrap();
        assert!(compute_bounding_box(&empty, 1.0, 1.0).is_err());
    }
}
