//! Builds the ray accelerator for a rolling-hills mesh and compares it
//! against an exhaustive scan over random rays, reporting agreement and the
//! speedup. The scan is slow, so it covers a subset of the rays.
//!
//! cargo run --release -p tdbcorr-core --example accelerator_check

use std::time::Instant;

use tdbcorr_core::geom::{Point, Vector};
use tdbcorr_core::los::{build_accelerator, exhaustive_nearest_hit, Ray};
use tdbcorr_core::synthetic;

const SCANNED: usize = 200;

fn main() -> tdbcorr_core::Result<()> {
    let mesh = synthetic::rolling_hills("hills", 200.0, 2.0, 15.0, 60.0);
    let t0 = Instant::now();
    let bvh = build_accelerator(&mesh);
    println!("{} triangles, {} nodes, built in {:.1?}", mesh.triangle_count(), bvh.node_count(), t0.elapsed());

    // fixed-seed LCG keeps the example dependency-free
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let rays: Vec<Ray> = (0..2000)
        .map(|_| {
            let o = Point::new(200.0 * next(), 200.0 * next(), 20.0 + 10.0 * next());
            let az = std::f64::consts::TAU * next();
            let d = Vector::new(az.sin(), az.cos(), -0.6 * next());
            Ray::towards(o, d)
        })
        .collect();

    let t0 = Instant::now();
    let fast: Vec<_> = rays.iter().map(|r| bvh.nearest_hit(&mesh, r)).collect();
    let t_fast = t0.elapsed();
    let t0 = Instant::now();
    let slow: Vec<_> = rays[..SCANNED].iter().map(|r| exhaustive_nearest_hit(&mesh, r)).collect();
    let t_slow = t0.elapsed();

    let agree = fast.iter().zip(&slow).filter(|(a, b)| a == b).count();
    let hits = slow.iter().filter(|h| h.is_some()).count();
    println!("{agree}/{SCANNED} rays agree ({hits} terrain hits)");
    let per_ray = |t: std::time::Duration, n: usize| t.as_secs_f64() * 1e6 / n as f64;
    println!(
        "accelerated {:.2} us/ray, exhaustive {:.2} us/ray",
        per_ray(t_fast, rays.len()),
        per_ray(t_slow, SCANNED)
    );
    assert_eq!(agree, SCANNED);
    Ok(())
}
