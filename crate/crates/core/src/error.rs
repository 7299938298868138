use std::path::PathBuf;

use serde::Serialize;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A configuration problem tied to the name of the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: invalid metadata: {message}")]
    Metadata { path: PathBuf, message: String },

    #[error("mesh '{name}' has no triangles after cleanup")]
    NoTriangles { name: String },

    #[error("heightfield has no valid elevation posts")]
    AllNoData,

    #[error("LOD index {index} out of range (database has {count} LODs)")]
    LodOutOfRange { index: usize, count: usize },

    #[error("terrain database has no geodetic reference origin")]
    NoReferenceOrigin,

    #[error("terrain extents do not overlap")]
    DisjointExtents,

    #[error("ray origin ({x}, {y}, {z}) is not strictly inside the bounding box")]
    OriginOutsideBox { x: f64, y: f64, z: f64 },

    #[error("degenerate triangle has no normal")]
    DegenerateTriangle,

    #[error("normal set is empty")]
    EmptyNormalSet,

    #[error("normal {index} is not unit length (|n| = {norm})")]
    NotUnitNormal { index: usize, norm: f64 },

    #[error("summary statistics need at least one value")]
    EmptyInput,

    #[error("no usable test locations (all {skipped} locations fall over holes)")]
    NoUsableLocations { skipped: usize },

    #[error("block grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {}", join_field_errors(.0))]
    InvalidConfig(Vec<FieldError>),
}

fn join_field_errors(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidConfig(vec![FieldError::new(field, message)])
    }
}
