//! Serves the viewer API over the fixture databases and two synthetic ones,
//! with a ridge comparison job already queued.
//!
//! cargo run -p tdbcorr --example serve_viewer -- [port]
//!
//! Then try /api/tdbs, /api/jobs/job-1, /api/jobs/job-1/blocks and
//! /api/jobs/job-1/rays?block=2,2.

use std::path::PathBuf;

use tdbcorr::service::{router, AppState, JobRequest, TdbEntry};
use tdbcorr_core::terrain::{load_tdb, TdbFormat};
use tdbcorr_core::{synthetic, AnalysisConfig, TerrainDatabase};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let port: u16 = std::env::args().nth(1).map(|p| p.parse()).transpose()?.unwrap_or(8080);
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data");
    let tdbs = vec![
        TdbEntry {
            id: "hills_a".into(),
            db: load_tdb(data.join("hills_a.mesh"), TdbFormat::TrimeshObj)?,
        },
        TdbEntry {
            id: "hills_b".into(),
            db: load_tdb(data.join("hills_b.asc"), TdbFormat::HeightfieldAsc)?,
        },
        TdbEntry {
            id: "flat".into(),
            db: TerrainDatabase::from_mesh(synthetic::flat_plane("flat", 100.0, 1.0, 0.0))?,
        },
        TdbEntry {
            id: "ridge".into(),
            db: TerrainDatabase::from_mesh(synthetic::ridge("ridge", 100.0, 1.0, 10.0))?,
        },
    ];

    let state = AppState::new(tdbs, 0);
    let job = state
        .submit(JobRequest {
            tdb_a: "flat".into(),
            tdb_b: "ridge".into(),
            config: AnalysisConfig::default(),
        })
        .map_err(|errs| format!("{errs:?}"))?;
    state.spawn_worker();

    tokio::runtime::Runtime::new()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        let addr = listener.local_addr()?;
        println!("listening on http://{addr}");
        println!("queued {job}: http://{addr}/api/jobs/{job}");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
