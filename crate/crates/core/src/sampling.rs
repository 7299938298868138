//! Block subdivision of the common area of interest, evenly spaced test
//! locations, eyepoint stacks and LOS direction vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::geom::{Point, Rect, Vector};

/// Block coordinates: row 0 is the southernmost row, column 0 the western.
pub type BlockId = (usize, usize);

/// `rows × cols` uniform split of the area of interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockGrid {
    rows: usize,
    cols: usize,
    aoi: Rect,
}

impl BlockGrid {
    pub fn new(aoi: Rect, rows: usize, cols: usize) -> Result<Self> {
        let mut errors = Vec::new();
        if rows == 0 {
            errors.push(FieldError::new("rows", "must be at least 1"));
        }
        if cols == 0 {
            errors.push(FieldError::new("cols", "must be at least 1"));
        }
        if !errors.is_empty() {
            return Err(Error::InvalidConfig(errors));
        }
        if !(aoi.width() > 0.0 && aoi.height() > 0.0) {
            return Err(Error::DisjointExtents);
        }
        Ok(Self { rows, cols, aoi })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn aoi(&self) -> Rect {
        self.aoi
    }

    pub fn block_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Row-major flat index of a block.
    pub fn flat_index(&self, (r, c): BlockId) -> usize {
        r * self.cols + c
    }

    pub fn blocks(&self) -> impl Iterator<Item = BlockId> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| (r, c)))
    }

    fn x_edge(&self, c: usize) -> f64 {
        if c == self.cols {
            self.aoi.x_max
        } else {
            self.aoi.x_min + self.aoi.width() * c as f64 / self.cols as f64
        }
    }

    fn y_edge(&self, r: usize) -> f64 {
        if r == self.rows {
            self.aoi.y_max
        } else {
            self.aoi.y_min + self.aoi.height() * r as f64 / self.rows as f64
        }
    }

    pub fn block(&self, (r, c): BlockId) -> Rect {
        Rect::new(self.x_edge(c), self.x_edge(c + 1), self.y_edge(r), self.y_edge(r + 1))
    }

    /// Block containing `(x, y)`; points on a shared edge go to the lower
    /// (south/west) block. `None` outside the AOI.
    pub fn locate(&self, x: f64, y: f64) -> Option<BlockId> {
        if !self.aoi.contains(x, y) {
            return None;
        }
        let c = (0..self.cols).find(|&c| x <= self.x_edge(c + 1))?;
        let r = (0..self.rows).find(|&r| y <= self.y_edge(r + 1))?;
        Some((r, c))
    }
}

/// Intersects the two horizontal extents and splits the overlap uniformly.
pub fn build_block_grid(
    extents_a: &Rect,
    extents_b: &Rect,
    rows: usize,
    cols: usize,
) -> Result<BlockGrid> {
    let aoi = extents_a
        .intersection(extents_b)
        .ok_or(Error::DisjointExtents)?;
    BlockGrid::new(aoi, rows, cols)
}

/// A horizontal sampling position. Ground elevations are filled in per
/// database; `None` means the location lies over a hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestLocation {
    pub block: BlockId,
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub ground_z_a: Option<f64>,
    pub ground_z_b: Option<f64>,
}

/// Evenly distributed locations: within each block, the first `per_block`
/// cell centers (row-major, south row first) of an `r × c` sub-grid with
/// `r = ⌊√n⌋` and `c = ⌈n / r⌉`.
pub fn generate_test_locations(grid: &BlockGrid, per_block: usize) -> Vec<TestLocation> {
    if per_block == 0 {
        return Vec::new();
    }
    let mut sub_rows = 1;
    while (sub_rows + 1) * (sub_rows + 1) <= per_block {
        sub_rows += 1;
    }
    let sub_cols = per_block.div_ceil(sub_rows);

    let mut out = Vec::with_capacity(grid.block_count() * per_block);
    for id in grid.blocks() {
        let rect = grid.block(id);
        let dx = rect.width() / sub_cols as f64;
        let dy = rect.height() / sub_rows as f64;
        for index in 0..per_block {
            let (i, j) = (index / sub_cols, index % sub_cols);
            out.push(TestLocation {
                block: id,
                index,
                x: rect.x_min + (j as f64 + 0.5) * dx,
                y: rect.y_min + (i as f64 + 0.5) * dy,
                ground_z_a: None,
                ground_z_b: None,
            });
        }
    }
    out
}

/// Eyepoint stack placed above each test location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyepointSpec {
    /// Eyepoints per location.
    pub count: usize,
    /// Height above ground of the lowest eyepoint (m).
    pub agl0: f64,
    /// Vertical spacing between eyepoints (m).
    pub dz: f64,
}

impl Default for EyepointSpec {
    fn default() -> Self {
        Self {
            count: 3,
            agl0: 2.0,
            dz: 5.0,
        }
    }
}

impl EyepointSpec {
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        if self.count == 0 {
            errors.push(FieldError::new("eyepoints.count", "must be at least 1"));
        }
        if !(self.agl0 > 0.0 && self.agl0.is_finite()) {
            errors.push(FieldError::new("eyepoints.agl0", "must be positive"));
        }
        if self.count > 1 && !(self.dz > 0.0 && self.dz.is_finite()) {
            errors.push(FieldError::new(
                "eyepoints.dz",
                "must be positive when more than one eyepoint is used",
            ));
        }
        errors
    }

    /// Height above ground of eyepoint `i`.
    pub fn agl(&self, i: usize) -> f64 {
        self.agl0 + i as f64 * self.dz
    }
}

pub fn build_eyepoints(x: f64, y: f64, ground_z: f64, spec: &EyepointSpec) -> Vec<Point> {
    (0..spec.count)
        .map(|i| Point::new(x, y, ground_z + spec.agl(i)))
        .collect()
}

/// Azimuth and pitch sweeps, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionSpec {
    pub az_start: f64,
    pub az_step: f64,
    pub az_count: usize,
    pub pitch_start: f64,
    pub pitch_step: f64,
    pub pitch_count: usize,
}

impl Default for DirectionSpec {
    /// Eight compass azimuths at pitches −10°, 0°, +10°.
    fn default() -> Self {
        Self {
            az_start: 0.0,
            az_step: 45.0,
            az_count: 8,
            pitch_start: -10.0,
            pitch_step: 10.0,
            pitch_count: 3,
        }
    }
}

impl DirectionSpec {
    pub fn azimuths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.az_count).map(move |i| self.az_start + i as f64 * self.az_step)
    }

    pub fn pitches(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.pitch_count).map(move |i| self.pitch_start + i as f64 * self.pitch_step)
    }

    pub fn direction_count(&self) -> usize {
        self.az_count * self.pitch_count
    }

    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        if self.az_count == 0 {
            errors.push(FieldError::new("directions.az_count", "must be at least 1"));
        }
        if self.pitch_count == 0 {
            errors.push(FieldError::new("directions.pitch_count", "must be at least 1"));
        }
        for (name, v) in [
            ("directions.az_start", self.az_start),
            ("directions.az_step", self.az_step),
            ("directions.pitch_start", self.pitch_start),
            ("directions.pitch_step", self.pitch_step),
        ] {
            if !v.is_finite() {
                errors.push(FieldError::new(name, "must be finite"));
            }
        }
        if let Some(bad) = self.pitches().find(|p| !(*p > -90.0 && *p < 90.0)) {
            errors.push(FieldError::new(
                "directions.pitch",
                format!("pitch {bad}° outside the valid range (-90°, 90°) exclusive"),
            ));
        }
        errors
    }
}

/// A LOS direction with the angles it was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth: f64,
    pub pitch: f64,
    pub vector: Vector,
}

/// Unit vector for an azimuth measured clockwise from north (+y) and a pitch
/// measured up from the horizontal, both in degrees.
pub fn direction_vector(azimuth: f64, pitch: f64) -> Vector {
    let (sin_az, cos_az) = azimuth.to_radians().sin_cos();
    let (sin_p, cos_p) = pitch.to_radians().sin_cos();
    Vector::new(sin_az * cos_p, cos_az * cos_p, sin_p)
}

/// All directions, azimuth-major.
pub fn generate_directions(spec: &DirectionSpec) -> Vec<Direction> {
    let pitches: Vec<f64> = spec.pitches().collect();
    spec.azimuths()
        .flat_map(|az| {
            pitches.iter().map(move |&p| Direction {
                azimuth: az,
                pitch: p,
                vector: direction_vector(az, p),
            })
        })
        .collect()
}
