//! Analyst-facing output: tab-separated result files, descriptive
//! statistics, threshold classification of blocks and the grid report.

mod grid;
mod stats;
mod tsv;

pub use grid::{render_grid_csv, render_grid_html, render_grid_report};
pub use stats::{summarize, SummaryStats};
pub use tsv::{
    fmt_real, parse_results_tsv, parse_roughness_tsv, read_results_tsv, read_roughness_tsv,
    results_tsv_string, roughness_tsv_string, write_results_tsv, write_roughness_tsv, RoughnessRow,
    TsvRayRecord, NA, RESULTS_COLUMNS, ROUGHNESS_COLUMNS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::los::{BlockLosStats, LosResultSet};
use crate::sampling::{BlockGrid, BlockId};

/// Classification thresholds. The defaults are illustrative: a suitable
/// cut-off depends on the intended use of the databases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    pub rough_low: f64,
    pub rough_high: f64,
    /// Mean |Δlength| (m) above which a block is SUSPECT.
    pub delta_len_threshold: f64,
    /// Fraction of blocked/unblocked mismatches above which a block is FLAGGED.
    pub mismatch_ratio_threshold: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            rough_low: 0.25,
            rough_high: 0.50,
            delta_len_threshold: 10.0,
            mismatch_ratio_threshold: 0.02,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(self.rough_low) {
            errors.push(FieldError::new("rough_low", "must be in [0, 1]"));
        }
        if !in_unit(self.rough_high) {
            errors.push(FieldError::new("rough_high", "must be in [0, 1]"));
        }
        if self.rough_low > self.rough_high {
            errors.push(FieldError::new("rough_low", "must not exceed rough_high"));
        }
        if !(self.delta_len_threshold >= 0.0 && self.delta_len_threshold.is_finite()) {
            errors.push(FieldError::new("delta_len_threshold", "must be non-negative"));
        }
        if !in_unit(self.mismatch_ratio_threshold) {
            errors.push(FieldError::new("mismatch_ratio_threshold", "must be in [0, 1]"));
        }
        errors
    }

    pub fn check(&self) -> Result<()> {
        let errors = self.validate();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errors))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RoughnessClass {
    Green,
    Neutral,
    Red,
}

impl RoughnessClass {
    /// CSS class used by the HTML report.
    pub fn css(&self) -> &'static str {
        match self {
            RoughnessClass::Green => "green",
            RoughnessClass::Neutral => "none",
            RoughnessClass::Red => "red",
        }
    }
}

/// GREEN below `rough_low`, RED above `rough_high`, NEUTRAL otherwise.
pub fn classify_roughness(value: f64, t: &ThresholdConfig) -> RoughnessClass {
    if value < t.rough_low {
        RoughnessClass::Green
    } else if value > t.rough_high {
        RoughnessClass::Red
    } else {
        RoughnessClass::Neutral
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BlockClass {
    Ok,
    Suspect,
    Flagged,
}

impl BlockClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlockClass::Ok => "OK",
            BlockClass::Suspect => "SUSPECT",
            BlockClass::Flagged => "FLAGGED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockFlag {
    pub block: BlockId,
    pub ray_count: usize,
    pub mismatch_count: usize,
    pub mismatch_ratio: f64,
    pub mean_abs_delta: f64,
    pub max_abs_delta: f64,
    pub rough_a: Option<f64>,
    pub rough_b: Option<f64>,
    pub class_a: Option<RoughnessClass>,
    pub class_b: Option<RoughnessClass>,
    pub classification: BlockClass,
}

/// Block roughness of both databases, row-major over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughnessPairs {
    pub rows: usize,
    pub cols: usize,
    pub rough_a: Vec<Option<f64>>,
    pub rough_b: Vec<Option<f64>>,
}

impl RoughnessPairs {
    pub fn new(grid: &BlockGrid, rough_a: Vec<Option<f64>>, rough_b: Vec<Option<f64>>) -> Result<Self> {
        let n = grid.block_count();
        if rough_a.len() != n || rough_b.len() != n {
            return Err(Error::GridMismatch(format!(
                "expected {n} blocks, got {} and {}",
                rough_a.len(),
                rough_b.len()
            )));
        }
        Ok(Self {
            rows: grid.rows(),
            cols: grid.cols(),
            rough_a,
            rough_b,
        })
    }

    pub fn swapped(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            rough_a: self.rough_b.clone(),
            rough_b: self.rough_a.clone(),
        }
    }

    pub fn get(&self, (r, c): BlockId) -> (Option<f64>, Option<f64>) {
        let i = r * self.cols + c;
        (self.rough_a[i], self.rough_b[i])
    }
}

/// Classifies every block.
///
/// FLAGGED when the blocked/unblocked mismatch ratio exceeds its threshold or
/// one database's roughness is GREEN while the other's is RED; otherwise
/// SUSPECT when the mean |Δlength| exceeds its threshold; otherwise OK.
pub fn flag_blocks(
    results: &LosResultSet,
    roughness: &RoughnessPairs,
    t: &ThresholdConfig,
) -> Result<Vec<BlockFlag>> {
    if results.grid.rows() != roughness.rows || results.grid.cols() != roughness.cols {
        return Err(Error::GridMismatch(format!(
            "LOS results are {}x{}, roughness is {}x{}",
            results.grid.rows(),
            results.grid.cols(),
            roughness.rows,
            roughness.cols
        )));
    }
    flag_from_stats(&results.block_stats, roughness, t)
}

/// Roughness-only classification, for runs without LOS results.
pub fn flag_roughness_only(roughness: &RoughnessPairs, t: &ThresholdConfig) -> Result<Vec<BlockFlag>> {
    let stats: Vec<BlockLosStats> = (0..roughness.rows)
        .flat_map(|r| (0..roughness.cols).map(move |c| (r, c)))
        .map(|block| BlockLosStats {
            block,
            ray_count: 0,
            mismatch_count: 0,
            mean_abs_delta: 0.0,
            max_abs_delta: 0.0,
            skipped_locations: 0,
        })
        .collect();
    flag_from_stats(&stats, roughness, t)
}

fn flag_from_stats(
    stats: &[BlockLosStats],
    roughness: &RoughnessPairs,
    t: &ThresholdConfig,
) -> Result<Vec<BlockFlag>> {
    t.check()?;
    if stats.len() != roughness.rows * roughness.cols {
        return Err(Error::GridMismatch(format!(
            "{} block aggregates for a {}x{} grid",
            stats.len(),
            roughness.rows,
            roughness.cols
        )));
    }
    let flags = stats
        .iter()
        .map(|s| {
            let (rough_a, rough_b) = roughness.get(s.block);
            let class_a = rough_a.map(|v| classify_roughness(v, t));
            let class_b = rough_b.map(|v| classify_roughness(v, t));
            let mismatch_ratio = if s.ray_count == 0 {
                0.0
            } else {
                s.mismatch_count as f64 / s.ray_count as f64
            };
            let diverging = matches!(
                (class_a, class_b),
                (Some(RoughnessClass::Green), Some(RoughnessClass::Red))
                    | (Some(RoughnessClass::Red), Some(RoughnessClass::Green))
            );
            let classification = if mismatch_ratio > t.mismatch_ratio_threshold || diverging {
                BlockClass::Flagged
            } else if s.mean_abs_delta > t.delta_len_threshold {
                BlockClass::Suspect
            } else {
                BlockClass::Ok
            };
            BlockFlag {
                block: s.block,
                ray_count: s.ray_count,
                mismatch_count: s.mismatch_count,
                mismatch_ratio,
                mean_abs_delta: s.mean_abs_delta,
                max_abs_delta: s.max_abs_delta,
                rough_a,
                rough_b,
                class_a,
                class_b,
                classification,
            }
        })
        .collect();
    Ok(flags)
}
