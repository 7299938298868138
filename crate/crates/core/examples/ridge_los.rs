//! Line-of-sight comparison of a flat plane against the same plane with a
//! 10 m ridge, printing the blocked-mismatch count per block and a few of the
//! rays the ridge stops.

use tdbcorr_core::los::{run_los, LosTestConfig, RunOptions};
use tdbcorr_core::sampling::{DirectionSpec, EyepointSpec};
use tdbcorr_core::synthetic;

fn main() -> tdbcorr_core::Result<()> {
    let flat = synthetic::flat_plane("flat", 100.0, 1.0, 0.0);
    let ridge = synthetic::ridge("ridge", 100.0, 1.0, 10.0);
    let config = LosTestConfig {
        rows: 5,
        cols: 5,
        locations_per_block: 4,
        eyepoints: EyepointSpec { count: 1, agl0: 2.0, dz: 5.0 },
        directions: DirectionSpec {
            az_start: 0.0,
            az_step: 15.0,
            az_count: 24,
            pitch_start: 0.0,
            pitch_step: 10.0,
            pitch_count: 1,
        },
        ..LosTestConfig::default()
    };
    let results = run_los(&flat, &ridge, &config, RunOptions::default())?;
    println!("{} ray pairs, {} blocked mismatches", results.records.len(), results.mismatch_count());
    for r in 0..config.rows {
        let row: Vec<String> = (0..config.cols)
            .map(|c| format!("{:3}", results.block_stats((r, c)).unwrap().mismatch_count))
            .collect();
        println!("{}", row.join(" "));
    }
    for rec in results.records.iter().filter(|r| r.blocked_mismatch).take(5) {
        println!(
            "from ({:.1}, {:.1}) az {:5.1}: A {} at {:.2} m, B {} at {:.2} m",
            rec.eye_x,
            rec.eye_y,
            rec.azimuth,
            rec.hit_a.as_str(),
            rec.len_a,
            rec.hit_b.as_str(),
            rec.len_b
        );
    }
    Ok(())
}
