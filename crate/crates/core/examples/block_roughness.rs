//! Per-block roughness of the two fixture databases on a 5 × 5 grid, printed
//! as a table with the difference.

use std::path::PathBuf;

use tdbcorr_core::pipeline::{aligned_mesh, RoughnessComparison};
use tdbcorr_core::report::{fmt_real, RoughnessRow, NA};
use tdbcorr_core::terrain::{load_tdb, TdbFormat};

fn main() -> tdbcorr_core::Result<()> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let a = load_tdb(data.join("hills_a.mesh"), TdbFormat::TrimeshObj)?;
    let b = load_tdb(data.join("hills_b.asc"), TdbFormat::HeightfieldAsc)?;
    let mesh_b = aligned_mesh(&a, &b, 0)?;
    let cmp = RoughnessComparison::compute(a.select_lod(0)?, &mesh_b, 5, 5)?;

    let show = |v: Option<f64>| v.map_or(NA.to_string(), fmt_real);
    println!("block\trough_a\trough_b\tdelta");
    for row in RoughnessRow::rows(&cmp.pairs) {
        let (r, c) = row.block;
        println!("{r}_{c}\t{}\t{}\t{}", show(row.rough_a), show(row.rough_b), show(row.delta));
    }
    Ok(())
}
