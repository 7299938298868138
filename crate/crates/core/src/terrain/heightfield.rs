use crate::error::{Error, Result};
use crate::geom::Point;

use super::TriangleMesh;

/// Regular grid of elevation posts.
///
/// `elevations` is row-major with the northernmost row first, matching the
/// ASCII grid file layout. Posts equal to `nodata` (or NaN) are holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Heightfield {
    ncols: usize,
    nrows: usize,
    cell_size: f64,
    origin: (f64, f64),
    elevations: Vec<f64>,
    nodata: Option<f64>,
}

impl Heightfield {
    pub fn new(
        ncols: usize,
        nrows: usize,
        cell_size: f64,
        origin: (f64, f64),
        elevations: Vec<f64>,
        nodata: Option<f64>,
    ) -> Result<Self> {
        if ncols < 2 {
            return Err(Error::invalid("ncols", "must be at least 2"));
        }
        if nrows < 2 {
            return Err(Error::invalid("nrows", "must be at least 2"));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::invalid("cellsize", "must be positive"));
        }
        if elevations.len() != ncols * nrows {
            return Err(Error::invalid(
                "elevations",
                format!(
                    "expected {} values, found {}",
                    ncols * nrows,
                    elevations.len()
                ),
            ));
        }
        Ok(Self {
            ncols,
            nrows,
            cell_size,
            origin,
            elevations,
            nodata,
        })
    }

    /// Samples `f(x, y)` at every post. `origin` is the southwest post.
    pub fn from_fn(
        ncols: usize,
        nrows: usize,
        cell_size: f64,
        origin: (f64, f64),
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut elevations = Vec::with_capacity(ncols * nrows);
        for file_row in 0..nrows {
            let south_row = nrows - 1 - file_row;
            for col in 0..ncols {
                let x = origin.0 + col as f64 * cell_size;
                let y = origin.1 + south_row as f64 * cell_size;
                elevations.push(f(x, y));
            }
        }
        Self::new(ncols, nrows, cell_size, origin, elevations, None)
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn nodata(&self) -> Option<f64> {
        self.nodata
    }

    /// Raw values in file order (north row first).
    pub fn elevations(&self) -> &[f64] {
        &self.elevations
    }

    /// Elevation at column `col`, row `row` counted from the south edge.
    pub fn post(&self, col: usize, row: usize) -> Option<f64> {
        let file_row = self.nrows - 1 - row;
        let z = self.elevations[file_row * self.ncols + col];
        let is_hole = z.is_nan() || self.nodata.is_some_and(|nd| z == nd);
        (!is_hole).then_some(z)
    }

    /// Marks a post as a hole; used to punch nodata into synthetic grids.
    pub fn set_hole(&mut self, col: usize, row: usize) {
        let file_row = self.nrows - 1 - row;
        self.elevations[file_row * self.ncols + col] = f64::NAN;
    }

    /// Two triangles per cell whose four corner posts are all valid, split
    /// along the SW–NE diagonal and wound counter-clockwise seen from above.
    /// Cells touching a hole produce no triangles.
    pub fn triangulate(&self, name: impl Into<String>) -> Result<TriangleMesh> {
        let mut index = vec![u32::MAX; self.ncols * self.nrows];
        let mut vertices = Vec::new();
        for row in 0..self.nrows {
            for col in 0..self.ncols {
                if let Some(z) = self.post(col, row) {
                    index[row * self.ncols + col] = vertices.len() as u32;
                    vertices.push(Point::new(
                        self.origin.0 + col as f64 * self.cell_size,
                        self.origin.1 + row as f64 * self.cell_size,
                        z,
                    ));
                }
            }
        }
        if vertices.is_empty() {
            return Err(Error::AllNoData);
        }
        let at = |col: usize, row: usize| index[row * self.ncols + col];
        let mut triangles = Vec::with_capacity(2 * (self.ncols - 1) * (self.nrows - 1));
        for row in 0..self.nrows - 1 {
            for col in 0..self.ncols - 1 {
                let sw = at(col, row);
                let se = at(col + 1, row);
                let ne = at(col + 1, row + 1);
                let nw = at(col, row + 1);
                if [sw, se, ne, nw].contains(&u32::MAX) {
                    continue;
                }
                triangles.push([sw, se, ne]);
                triangles.push([sw, ne, nw]);
            }
        }
        TriangleMesh::new(name, vertices, triangles)
    }

    /// ASCII grid text for this heightfield.
    pub fn to_asc_string(&self) -> String {
        let nodata = self.nodata.unwrap_or(-9999.0);
        let mut s = format!(
            "ncols {}\nnrows {}\nxllcorner {}\nyllcorner {}\ncellsize {}\nnodata_value {}\n",
            self.ncols, self.nrows, self.origin.0, self.origin.1, self.cell_size, nodata
        );
        for row in self.elevations.chunks(self.ncols) {
            let line: Vec<String> = row
                .iter()
                .map(|&z| if z.is_nan() { nodata } else { z })
                .map(|z| z.to_string())
                .collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}
