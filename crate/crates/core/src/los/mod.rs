//! Line-of-sight ray tracing against terrain triangles and the enclosing
//! bounding box, and the paired test that compares corresponding rays in two
//! terrain databases.

mod bvh;
mod intersect;
mod run;
mod tracer;

pub use bvh::{build_accelerator, Bvh};
pub use intersect::{ray_box_intersect, ray_triangle_intersect, MIN_HIT_DISTANCE};
pub use run::{
    run_los, run_los_test, BlockLosStats, LosResultSet, LosTestConfig, RayPairResult,
    RunOptions,
};
pub use tracer::{exhaustive_nearest_hit, ground_elevation, trace_ray, Scene, TerrainHit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Vector};

/// A LOS ray: eyepoint and unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point,
    pub direction: Vector,
}

impl Ray {
    /// Fails unless `direction` is unit length within 1e-12.
    pub fn new(origin: Point, direction: Vector) -> Result<Self> {
        let norm = direction.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "direction",
                format!("must be unit length, |d| = {norm}"),
            ));
        }
        Ok(Self { origin, direction })
    }

    /// Ray towards `direction`, normalized.
    pub fn towards(origin: Point, direction: Vector) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Point {
        self.origin + self.direction * t
    }
}

/// What terminated a ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HitKind {
    Terrain,
    Wall,
    Ceiling,
    Floor,
}

impl HitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HitKind::Terrain => "TERRAIN",
            HitKind::Wall => "WALL",
            HitKind::Ceiling => "CEILING",
            HitKind::Floor => "FLOOR",
        }
    }

    pub fn is_box(&self) -> bool {
        !matches!(self, HitKind::Terrain)
    }
}

impl std::fmt::Display for HitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for HitKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "TERRAIN" => Ok(HitKind::Terrain),
            "WALL" => Ok(HitKind::Wall),
            "CEILING" => Ok(HitKind::Ceiling),
            "FLOOR" => Ok(HitKind::Floor),
            other => Err(format!("unknown hit kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub kind: HitKind,
    pub length: f64,
    pub point: Point,
}
