//! Correlation analysis of two terrain databases covering the same area.
//!
//! Two independent measures are compared block by block over a regular grid:
//!
//! * paired line-of-sight tests: identical rays cast in both databases from
//!   eyepoints at the same height above each database's ground, recording
//!   what stopped each ray and how far it travelled;
//! * terrain roughness: the dispersion of the unit triangle normals in a
//!   block (0 for any plane, approaching 1 for chaotic surfaces).
//!
//! Blocks where the databases disagree are flagged against configurable
//! thresholds and written out as tab-separated files and a grid report.
//!
//! ```
//! use tdbcorr_core::{synthetic, pipeline::{analyze_meshes, AnalysisConfig}, los::RunOptions};
//!
//! let a = synthetic::flat_plane("a", 100.0, 5.0, 0.0);
//! let b = synthetic::ridge("b", 100.0, 5.0, 10.0);
//! let mut cfg = AnalysisConfig::default();
//! cfg.los.rows = 2;
//! cfg.los.cols = 2;
//! let out = analyze_meshes(&a, &b, &cfg, RunOptions::default()).unwrap();
//! assert!(out.los.mismatch_count() > 0);
//! ```

pub mod error;
pub mod geom;
pub mod los;
pub mod pipeline;
pub mod report;
pub mod roughness;
pub mod sampling;
pub mod synthetic;
pub mod terrain;

pub use error::{Error, FieldError, Result};
pub use los::{run_los, HitKind, LosResultSet, LosTestConfig, RayPairResult, RunOptions};
pub use pipeline::{run_analysis, AnalysisConfig, AnalysisOutput};
pub use report::{BlockClass, BlockFlag, ThresholdConfig};
pub use terrain::{load_tdb, TdbFormat, TerrainDatabase, TriangleMesh};
