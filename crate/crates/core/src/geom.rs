//! Shared geometric primitives. All coordinates are local Cartesian meters
//! with x east, y north and z up.

use serde::{Deserialize, Serialize};

pub type Point = nalgebra::Point3<f64>;
pub type Vector = nalgebra::Vector3<f64>;

/// Axis-aligned horizontal rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    /// Closed containment test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Overlap of two rectangles, `None` unless it has positive area.
    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let r = Rect::new(
            self.x_min.max(other.x_min),
            self.x_max.min(other.x_max),
            self.y_min.max(other.y_min),
            self.y_max.min(other.y_max),
        );
        (r.width() > 0.0 && r.height() > 0.0).then_some(r)
    }
}

/// Axis-aligned 3D box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Point::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn grow(&mut self, p: &Point) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn join(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }

    pub fn extent(&self) -> Vector {
        self.max - self.min
    }

    pub fn centroid(&self) -> Point {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn xy_rect(&self) -> Rect {
        Rect::new(self.min.x, self.max.x, self.min.y, self.max.y)
    }
}

/// Twice the area of a triangle, via the cross product of two edges.
pub fn triangle_cross(a: &Point, b: &Point, c: &Point) -> Vector {
    (b - a).cross(&(c - a))
}
