//! End-to-end comparison of two databases: LOS test, block roughness, flags
//! and the output files. The command line and the HTTP service both go
//! through [`run_analysis`] and [`AnalysisOutput::write_outputs`].

use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::los::{run_los, LosResultSet, LosTestConfig, RunOptions};
use crate::report::{
    flag_blocks, flag_roughness_only, render_grid_report, write_results_tsv, write_roughness_tsv,
    BlockFlag, RoughnessPairs, ThresholdConfig,
};
use crate::roughness::{block_roughness, RoughnessResult};
use crate::sampling::{build_block_grid, BlockGrid};
use crate::terrain::{TerrainDatabase, TriangleMesh};

pub const RESULTS_FILE: &str = "los_results.tsv";
pub const ROUGHNESS_FILE: &str = "roughness.tsv";

/// Everything needed to compare two loaded databases.
#[derive(Debug, Default, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub lod_a: usize,
    pub lod_b: usize,
    #[serde(flatten)]
    pub los: LosTestConfig,
    pub thresholds: ThresholdConfig,
}

impl AnalysisConfig {
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = self.los.validate();
        errors.extend(self.thresholds.validate().into_iter().map(|e| FieldError {
            field: format!("thresholds.{}", e.field),
            message: e.message,
        }));
        errors
    }

    /// Field checks plus LOD indices against the databases.
    pub fn validate_for(&self, a: &TerrainDatabase, b: &TerrainDatabase) -> Vec<FieldError> {
        let mut errors = self.validate();
        if self.lod_a >= a.lod_count() {
            errors.push(FieldError::new(
                "lod_a",
                format!("LOD {} out of range (database has {})", self.lod_a, a.lod_count()),
            ));
        }
        if self.lod_b >= b.lod_count() {
            errors.push(FieldError::new(
                "lod_b",
                format!("LOD {} out of range (database has {})", self.lod_b, b.lod_count()),
            ));
        }
        errors
    }
}

/// Mesh of `b` at `lod`, re-expressed in `a`'s local frame when both carry
/// geodetic origins that differ.
pub fn aligned_mesh<'b>(
    a: &TerrainDatabase,
    b: &'b TerrainDatabase,
    lod: usize,
) -> Result<Cow<'b, TriangleMesh>> {
    let mesh = b.select_lod(lod)?;
    match (a.frame(), b.frame()) {
        (Some(fa), Some(fb)) if fa != fb => {
            log::info!(
                "re-expressing {} in the frame of {}",
                b.source_path().display(),
                a.source_path().display()
            );
            Ok(Cow::Owned(mesh.map_vertices(|p| {
                let (x, y) = fa.from_frame(fb, p.x, p.y);
                crate::geom::Point::new(x, y, p.z)
            })))
        }
        (Some(_), None) | (None, Some(_)) => {
            log::warn!("only one database has a geodetic origin; comparing local coordinates as-is");
            Ok(Cow::Borrowed(mesh))
        }
        _ => Ok(Cow::Borrowed(mesh)),
    }
}

/// Block roughness of both meshes over the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughnessComparison {
    pub grid: BlockGrid,
    pub a: Vec<Option<RoughnessResult>>,
    pub b: Vec<Option<RoughnessResult>>,
    pub pairs: RoughnessPairs,
}

impl RoughnessComparison {
    pub fn over(mesh_a: &TriangleMesh, mesh_b: &TriangleMesh, grid: BlockGrid) -> Result<Self> {
        let a = block_roughness(mesh_a, &grid)?;
        let b = block_roughness(mesh_b, &grid)?;
        let value = |v: &Vec<Option<RoughnessResult>>| v.iter().map(|r| r.map(|r| r.roughness)).collect();
        let pairs = RoughnessPairs::new(&grid, value(&a), value(&b))?;
        Ok(Self { grid, a, b, pairs })
    }

    /// Grid of `rows × cols` over the common horizontal extent.
    pub fn compute(mesh_a: &TriangleMesh, mesh_b: &TriangleMesh, rows: usize, cols: usize) -> Result<Self> {
        let grid = build_block_grid(&mesh_a.xy_extent(), &mesh_b.xy_extent(), rows, cols)?;
        Self::over(mesh_a, mesh_b, grid)
    }

    pub fn flags(&self, t: &ThresholdConfig) -> Result<Vec<BlockFlag>> {
        flag_roughness_only(&self.pairs, t)
    }

    /// Writes `roughness.tsv`, plus the grid report when `thresholds` is given.
    pub fn write_outputs(&self, dir: &Path, thresholds: Option<&ThresholdConfig>) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(ROUGHNESS_FILE);
        write_roughness_tsv(&self.pairs, &path)?;
        let mut written = vec![path];
        if let Some(t) = thresholds {
            render_grid_report(&self.flags(t)?, t, dir)?;
            written.push(dir.join("report.csv"));
            written.push(dir.join("report.html"));
        }
        Ok(written)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOutput {
    pub config: AnalysisConfig,
    pub los: LosResultSet,
    pub roughness: RoughnessComparison,
}

impl AnalysisOutput {
    pub fn flags(&self, t: &ThresholdConfig) -> Result<Vec<BlockFlag>> {
        flag_blocks(&self.los, &self.roughness.pairs, t)
    }

    /// Writes `los_results.tsv`, `roughness.tsv`, `report.csv` and
    /// `report.html` into `dir`, creating it if needed.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let results = dir.join(RESULTS_FILE);
        write_results_tsv(&self.los, &results)?;
        let roughness = dir.join(ROUGHNESS_FILE);
        write_roughness_tsv(&self.roughness.pairs, &roughness)?;
        render_grid_report(&self.flags(&self.config.thresholds)?, &self.config.thresholds, dir)?;
        Ok(vec![results, roughness, dir.join("report.csv"), dir.join("report.html")])
    }
}

/// Runs the LOS test and block roughness on two meshes already in a common
/// frame.
pub fn analyze_meshes(
    mesh_a: &TriangleMesh,
    mesh_b: &TriangleMesh,
    config: &AnalysisConfig,
    options: RunOptions<'_>,
) -> Result<AnalysisOutput> {
    let errors = config.validate();
    if !errors.is_empty() {
        return Err(Error::InvalidConfig(errors));
    }
    let los = run_los(mesh_a, mesh_b, &config.los, options)?;
    let roughness = RoughnessComparison::over(mesh_a, mesh_b, los.grid)?;
    Ok(AnalysisOutput {
        config: *config,
        los,
        roughness,
    })
}

pub fn run_analysis(
    a: &TerrainDatabase,
    b: &TerrainDatabase,
    config: &AnalysisConfig,
    options: RunOptions<'_>,
) -> Result<AnalysisOutput> {
    let errors = config.validate_for(a, b);
    if !errors.is_empty() {
        return Err(Error::InvalidConfig(errors));
    }
    let mesh_a = a.select_lod(config.lod_a)?;
    let mesh_b = aligned_mesh(a, b, config.lod_b)?;
    analyze_meshes(mesh_a, &mesh_b, config, options)
}
