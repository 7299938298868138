//! Full analysis of the two fixture databases, writing the results table,
//! roughness table and the grid report (CSV and HTML) to a directory.
//!
//! cargo run -p tdbcorr-core --example grid_report -- [out_dir]

use std::path::PathBuf;

use tdbcorr_core::terrain::{load_tdb, TdbFormat};
use tdbcorr_core::{run_analysis, AnalysisConfig, BlockClass, RunOptions};

fn main() -> tdbcorr_core::Result<()> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("tdbcorr-grid-report"));
    let a = load_tdb(data.join("hills_a.mesh"), TdbFormat::TrimeshObj)?;
    let b = load_tdb(data.join("hills_b.asc"), TdbFormat::HeightfieldAsc)?;

    let config = AnalysisConfig::default();
    let out = run_analysis(&a, &b, &config, RunOptions::default())?;
    for path in out.write_outputs(&out_dir)? {
        println!("wrote {}", path.display());
    }
    let flags = out.flags(&config.thresholds)?;
    for class in [BlockClass::Flagged, BlockClass::Suspect, BlockClass::Ok] {
        let blocks: Vec<String> = flags
            .iter()
            .filter(|f| f.classification == class)
            .map(|f| format!("{}_{}", f.block.0, f.block.1))
            .collect();
        println!("{:8} {}", class.as_str(), blocks.join(" "));
    }
    Ok(())
}
