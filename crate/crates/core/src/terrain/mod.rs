//! Triangulated terrain databases: mesh storage, LOD selection, extents,
//! coordinate conversion and the enclosing bounding box.

mod bbox;
mod geodetic;
mod heightfield;
mod io;

pub use bbox::{compute_bounding_box, BoundingBox, DEFAULT_BOX_MARGIN};
pub use geodetic::{LocalFrame, EARTH_RADIUS};
pub use heightfield::Heightfield;
pub use io::{
    load_tdb, parse_heightfield, parse_mesh_groups, sidecar_path, write_mesh_file, TdbFormat,
    TdbMetadata,
};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{triangle_cross, Aabb, Point, Rect};

/// Triangles whose area falls below this (m²) are dropped as degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// An indexed triangle mesh. Triangles are wound counter-clockwise when seen
/// from the side their normal points to.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    name: String,
    vertices: Vec<Point>,
    triangles: Vec<[u32; 3]>,
    degenerates_dropped: usize,
}

impl TriangleMesh {
    /// Builds a mesh, rejecting out-of-range indices and dropping triangles
    /// with area below [`MIN_TRIANGLE_AREA`].
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Point>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self> {
        let name = name.into();
        let count = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i as usize >= count) {
                return Err(Error::InvalidConfig(vec![crate::error::FieldError::new(
                    format!("triangles[{t}]"),
                    format!("index {bad} out of range for {count} vertices"),
                )]));
            }
        }
        let before = triangles.len();
        let triangles: Vec<[u32; 3]> = triangles
            .into_iter()
            .filter(|t| {
                let [a, b, c] = t.map(|i| vertices[i as usize]);
                0.5 * triangle_cross(&a, &b, &c).norm() >= MIN_TRIANGLE_AREA
            })
            .collect();
        let degenerates_dropped = before - triangles.len();
        Ok(Self {
            name,
            vertices,
            triangles,
            degenerates_dropped,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn degenerates_dropped(&self) -> usize {
        self.degenerates_dropped
    }

    /// Corner positions of triangle `index`.
    #[inline]
    pub fn triangle(&self, index: usize) -> [Point; 3] {
        self.triangles[index].map(|i| self.vertices[i as usize])
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::empty();
        for v in &self.vertices {
            b.grow(v);
        }
        b
    }

    /// Horizontal extent of the vertices.
    pub fn xy_extent(&self) -> Rect {
        self.bounds().xy_rect()
    }

    /// Applies `f` to every vertex, keeping the topology.
    pub fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> TriangleMesh {
        TriangleMesh {
            name: self.name.clone(),
            vertices: self.vertices.iter().map(f).collect(),
            triangles: self.triangles.clone(),
            degenerates_dropped: self.degenerates_dropped,
        }
    }

    /// Same mesh with every triangle's winding reversed.
    pub fn flipped(&self) -> TriangleMesh {
        TriangleMesh {
            name: self.name.clone(),
            vertices: self.vertices.clone(),
            triangles: self.triangles.iter().map(|&[a, b, c]| [a, c, b]).collect(),
            degenerates_dropped: self.degenerates_dropped,
        }
    }
}

/// Horizontal extents of a database: geodetic when a sidecar supplied them,
/// otherwise the local-coordinate bounds of the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HorizontalExtents {
    Geodetic {
        lat_min: f64,
        lat_max: f64,
        lon_min: f64,
        lon_max: f64,
    },
    Local {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
}

impl HorizontalExtents {
    pub fn is_geodetic(&self) -> bool {
        matches!(self, HorizontalExtents::Geodetic { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extents {
    pub horizontal: HorizontalExtents,
    pub elev_min: f64,
    pub elev_max: f64,
}

/// A terrain database: one mesh per level of detail, most detailed first.
#[derive(Debug, Clone)]
pub struct TerrainDatabase {
    lods: Vec<TriangleMesh>,
    extents: Extents,
    frame: Option<LocalFrame>,
    source_path: PathBuf,
    load_log: Vec<String>,
}

impl TerrainDatabase {
    /// Assembles a database from already-built LOD meshes. When `geodetic`
    /// is `None`, extents fall back to the local bounds of all LODs.
    pub fn new(
        lods: Vec<TriangleMesh>,
        geodetic: Option<TdbMetadata>,
        source_path: impl Into<PathBuf>,
    ) -> Result<Self> {
        if lods.is_empty() {
            return Err(Error::NoTriangles {
                name: "<no LODs>".into(),
            });
        }
        let mut load_log = Vec::new();
        let mut bounds = Aabb::empty();
        for mesh in &lods {
            if mesh.is_empty() {
                return Err(Error::NoTriangles {
                    name: mesh.name().to_string(),
                });
            }
            if mesh.degenerates_dropped() > 0 {
                load_log.push(format!(
                    "{}: dropped {} degenerate triangle(s)",
                    mesh.name(),
                    mesh.degenerates_dropped()
                ));
            }
            bounds = bounds.join(&mesh.bounds());
        }
        let (horizontal, frame) = match geodetic {
            Some(meta) => {
                meta.validate()?;
                (
                    HorizontalExtents::Geodetic {
                        lat_min: meta.lat_min,
                        lat_max: meta.lat_max,
                        lon_min: meta.lon_min,
                        lon_max: meta.lon_max,
                    },
                    Some(LocalFrame::new(meta.ref_lat, meta.ref_lon)),
                )
            }
            None => {
                load_log.push("no sidecar metadata; extents are local coordinates".to_string());
                (
                    HorizontalExtents::Local {
                        x_min: bounds.min.x,
                        x_max: bounds.max.x,
                        y_min: bounds.min.y,
                        y_max: bounds.max.y,
                    },
                    None,
                )
            }
        };
        for line in &load_log {
            log::info!("{line}");
        }
        Ok(Self {
            lods,
            extents: Extents {
                horizontal,
                elev_min: bounds.min.z,
                elev_max: bounds.max.z,
            },
            frame,
            source_path: source_path.into(),
            load_log,
        })
    }

    /// Single-LOD database with local extents; convenient for synthetic meshes.
    pub fn from_mesh(mesh: TriangleMesh) -> Result<Self> {
        let path = PathBuf::from(format!("<memory:{}>", mesh.name()));
        Self::new(vec![mesh], None, path)
    }

    pub fn lods(&self) -> &[TriangleMesh] {
        &self.lods
    }

    pub fn lod_count(&self) -> usize {
        self.lods.len()
    }

    pub fn extents(&self) -> &Extents {
        &self.extents
    }

    pub fn frame(&self) -> Option<&LocalFrame> {
        self.frame.as_ref()
    }

    pub fn source_path(&self) -> &std::path::Path {
        &self.source_path
    }

    pub fn load_log(&self) -> &[String] {
        &self.load_log
    }

    pub fn select_lod(&self, lod_index: usize) -> Result<&TriangleMesh> {
        self.lods.get(lod_index).ok_or(Error::LodOutOfRange {
            index: lod_index,
            count: self.lods.len(),
        })
    }

    pub fn summary(&self) -> TdbSummary {
        TdbSummary {
            vertex_count: self.lods.iter().map(|m| m.vertices().len()).sum(),
            triangle_count: self.lods.iter().map(TriangleMesh::triangle_count).sum(),
            lod_count: self.lods.len(),
            extents: self.extents,
            degenerates_dropped: self.lods.iter().map(|m| m.degenerates_dropped()).sum(),
        }
    }

    /// Local (x, y) meters of a geodetic position in this database's frame.
    pub fn geodetic_to_local(&self, lat: f64, lon: f64) -> Result<(f64, f64)> {
        self.frame
            .map(|f| f.to_local(lat, lon))
            .ok_or(Error::NoReferenceOrigin)
    }

    pub fn local_to_geodetic(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        self.frame
            .map(|f| f.to_geodetic(x, y))
            .ok_or(Error::NoReferenceOrigin)
    }
}

/// Textual description of a loaded database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdbSummary {
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub lod_count: usize,
    pub extents: Extents,
    pub degenerates_dropped: usize,
}

impl std::fmt::Display for TdbSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "vertices:  {}", self.vertex_count)?;
        writeln!(f, "polygons:  {}", self.triangle_count)?;
        writeln!(f, "LODs:      {}", self.lod_count)?;
        match self.extents.horizontal {
            HorizontalExtents::Geodetic {
                lat_min,
                lat_max,
                lon_min,
                lon_max,
            } => {
                writeln!(f, "latitude:  [{lat_min:.6}, {lat_max:.6}] deg")?;
                writeln!(f, "longitude: [{lon_min:.6}, {lon_max:.6}] deg")?;
            }
            HorizontalExtents::Local {
                x_min,
                x_max,
                y_min,
                y_max,
            } => {
                writeln!(f, "x (local): [{x_min:.6}, {x_max:.6}] m (not georeferenced)")?;
                writeln!(f, "y (local): [{y_min:.6}, {y_max:.6}] m (not georeferenced)")?;
            }
        }
        writeln!(
            f,
            "elevation: [{:.6}, {:.6}] m",
            self.extents.elev_min, self.extents.elev_max
        )?;
        if self.degenerates_dropped > 0 {
            writeln!(f, "dropped degenerate triangles: {}", self.degenerates_dropped)?;
        }
        Ok(())
    }
}
