//! Loads a terrain database and prints its summary and whole-mesh roughness
//! per level of detail.
//!
//! cargo run -p tdbcorr-core --example summarize_tdb -- [path]

use std::path::PathBuf;

use tdbcorr_core::roughness::mesh_roughness;
use tdbcorr_core::terrain::{load_tdb, TdbFormat};

fn main() -> tdbcorr_core::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/hills_a.mesh"));
    let db = load_tdb(&path, TdbFormat::from_path(&path))?;
    println!("{}", path.display());
    print!("{}", db.summary());
    for (i, lod) in db.lods().iter().enumerate() {
        let r = mesh_roughness(lod)?;
        println!(
            "lod {i}: {} triangles, roughness {:.6}, mean normal ({:.4}, {:.4}, {:.4})",
            r.count, r.roughness, r.mean_normal.x, r.mean_normal.y, r.mean_normal.z
        );
    }
    for line in db.load_log() {
        println!("note: {line}");
    }
    Ok(())
}
