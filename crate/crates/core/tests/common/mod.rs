#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tdbcorr_core::geom::{Point, Vector};
use tdbcorr_core::los::LosTestConfig;
use tdbcorr_core::sampling::{DirectionSpec, EyepointSpec};
use tdbcorr_core::terrain::{Heightfield, TriangleMesh};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut ChaCha8Rng) -> Vector {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    Vector::new(r * phi.cos(), r * phi.sin(), z)
}

/// Unstructured triangles scattered over a 100 m square.
pub fn triangle_soup(rng: &mut ChaCha8Rng, triangles: usize) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(triangles * 3);
    let mut tris = Vec::with_capacity(triangles);
    for t in 0..triangles {
        let c = Point::new(
            rng.gen_range(0.0..100.0),
            rng.gen_range(0.0..100.0),
            rng.gen_range(0.0..20.0),
        );
        for _ in 0..3 {
            let d = Vector::new(
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-2.0..2.0),
            );
            vertices.push(c + d);
        }
        let i = 3 * t as u32;
        tris.push([i, i + 1, i + 2]);
    }
    TriangleMesh::new("soup", vertices, tris).unwrap()
}

/// Heightfield with uniform noise of the given amplitude on every post.
pub fn noisy_terrain(rng: &mut ChaCha8Rng, posts: usize, cell: f64, amplitude: f64) -> TriangleMesh {
    let values: Vec<f64> = (0..posts * posts)
        .map(|_| rng.gen_range(0.0..amplitude))
        .collect();
    Heightfield::new(posts, posts, cell, (0.0, 0.0), values, None)
        .unwrap()
        .triangulate("noisy")
        .unwrap()
}

/// Ridge scenario: 101 × 101 posts at 1 m over [0, 100]², the ridge raising
/// the posts of column x = 50 to 10 m.
pub const RIDGE_HEIGHT: f64 = 10.0;
pub const RIDGE_X: f64 = 50.0;
pub const BOX_MARGIN: f64 = 1.0;

pub fn ridge_config(pitches: (f64, f64, usize)) -> LosTestConfig {
    LosTestConfig {
        rows: 5,
        cols: 5,
        locations_per_block: 4,
        eyepoints: EyepointSpec {
            count: 1,
            agl0: 2.0,
            dz: 5.0,
        },
        directions: DirectionSpec {
            az_start: 0.0,
            az_step: 15.0,
            az_count: 24,
            pitch_start: pitches.0,
            pitch_step: pitches.1,
            pitch_count: pitches.2,
        },
        box_margin: BOX_MARGIN,
    }
}

/// Verdict of the 2D crossing oracle for a horizontal ray at height `eye_h`
/// over flat ground from (x, y) with azimuth `az` (degrees clockwise from
/// north). The ridge is a tent of half-width 1 m, so at height h it occupies
/// |x − 50| < 1 − h/10. The ray is stopped iff its segment from the eye to
/// the box wall (the mesh's horizontal extent) reaches that strip while still over the ridge's y span
/// [0, 100]. Returns (blocked, distance to the nearest decision boundary).
pub fn ridge_oracle(x: f64, y: f64, az: f64, eye_h: f64) -> (bool, f64) {
    let half = 1.0 - eye_h / RIDGE_HEIGHT;
    let (dx, dy) = (az.to_radians().sin(), az.to_radians().cos());
    let (lo, hi) = (0.0, 100.0);
    let exit = |p: f64, d: f64| {
        if d > 1e-12 {
            (hi - p) / d
        } else if d < -1e-12 {
            (lo - p) / d
        } else {
            f64::INFINITY
        }
    };
    let t_wall = exit(x, dx).min(exit(y, dy));
    let flank = if x < RIDGE_X { RIDGE_X - half } else { RIDGE_X + half };
    if dx.abs() < 1e-12 || (flank - x) / dx < 0.0 {
        return (false, f64::INFINITY);
    }
    let t = (flank - x) / dx;
    let yc = y + t * dy;
    let blocked = t < t_wall && (0.0..=100.0).contains(&yc);
    let margin = (t_wall - t).abs().min(yc.abs()).min((yc - 100.0).abs());
    (blocked, margin)
}
