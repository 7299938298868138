//! Analytic terrains for demonstrations and tests.

use crate::terrain::{Heightfield, TriangleMesh};

/// Flat square of `size` meters at elevation `z`, one post per `cell` meters.
pub fn flat_plane(name: &str, size: f64, cell: f64, z: f64) -> TriangleMesh {
    let posts = (size / cell).round() as usize + 1;
    Heightfield::from_fn(posts, posts, cell, (0.0, 0.0), |_, _| z)
        .expect("valid grid")
        .triangulate(name)
        .expect("non-empty grid")
}

/// Flat square with a north-south ridge of `height` along `x = size / 2`,
/// one post wide: the ridge surface is `height·(1 − |x − size/2| / cell)`.
pub fn ridge(name: &str, size: f64, cell: f64, height: f64) -> TriangleMesh {
    let posts = (size / cell).round() as usize + 1;
    let mid = size / 2.0;
    Heightfield::from_fn(posts, posts, cell, (0.0, 0.0), |x, _| {
        if (x - mid).abs() < 0.5 * cell {
            height
        } else {
            0.0
        }
    })
    .expect("valid grid")
    .triangulate(name)
    .expect("non-empty grid")
}

/// Smooth sinusoidal hills: `amplitude·sin(2πx/wavelength)·cos(2πy/wavelength)`.
pub fn rolling_hills(name: &str, size: f64, cell: f64, amplitude: f64, wavelength: f64) -> TriangleMesh {
    let posts = (size / cell).round() as usize + 1;
    let k = std::f64::consts::TAU / wavelength;
    Heightfield::from_fn(posts, posts, cell, (0.0, 0.0), |x, y| {
        amplitude * (k * x).sin() * (k * y).cos()
    })
    .expect("valid grid")
    .triangulate(name)
    .expect("non-empty grid")
}
