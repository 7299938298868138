use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::geom::{Point, Vector};
use crate::sampling::{
    build_block_grid, generate_directions, generate_test_locations, BlockGrid, BlockId,
    Direction, DirectionSpec, EyepointSpec, TestLocation,
};
use crate::terrain::{compute_bounding_box, TriangleMesh, DEFAULT_BOX_MARGIN};

use super::tracer::{ground_elevation, Scene};
use super::{Bvh, HitKind, Ray};

/// Parameters of a paired LOS test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LosTestConfig {
    pub rows: usize,
    pub cols: usize,
    pub locations_per_block: usize,
    pub eyepoints: EyepointSpec,
    pub directions: DirectionSpec,
    pub box_margin: f64,
}

impl Default for LosTestConfig {
    fn default() -> Self {
        Self {
            rows: 5,
            cols: 5,
            locations_per_block: 4,
            eyepoints: EyepointSpec::default(),
            directions: DirectionSpec::default(),
            box_margin: DEFAULT_BOX_MARGIN,
        }
    }
}

impl LosTestConfig {
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        if self.rows == 0 {
            errors.push(FieldError::new("rows", "must be at least 1"));
        }
        if self.cols == 0 {
            errors.push(FieldError::new("cols", "must be at least 1"));
        }
        if self.locations_per_block == 0 {
            errors.push(FieldError::new("locations_per_block", "must be at least 1"));
        }
        errors.extend(self.eyepoints.validate());
        errors.extend(self.directions.validate());
        if !(self.box_margin > 0.0 && self.box_margin.is_finite()) {
            errors.push(FieldError::new("box_margin", "must be positive"));
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

/// Outcome of one pair of corresponding rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayPairResult {
    pub block: BlockId,
    pub location: usize,
    pub eyepoint: usize,
    pub direction: usize,
    pub azimuth: f64,
    pub pitch: f64,
    pub eye_x: f64,
    pub eye_y: f64,
    pub eye_z_a: f64,
    pub eye_z_b: f64,
    pub hit_a: HitKind,
    pub len_a: f64,
    pub hit_b: HitKind,
    pub len_b: f64,
    /// `len_a - len_b`.
    pub delta: f64,
    /// Exactly one of the two rays was stopped by terrain.
    pub blocked_mismatch: bool,
}

impl RayPairResult {
    pub fn eye_a(&self) -> Point {
        Point::new(self.eye_x, self.eye_y, self.eye_z_a)
    }

    pub fn eye_b(&self) -> Point {
        Point::new(self.eye_x, self.eye_y, self.eye_z_b)
    }

    pub fn end_a(&self, direction: &Vector) -> Point {
        self.eye_a() + direction * self.len_a
    }

    pub fn end_b(&self, direction: &Vector) -> Point {
        self.eye_b() + direction * self.len_b
    }
}

/// Per-block aggregates over the ray pairs of one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockLosStats {
    pub block: BlockId,
    pub ray_count: usize,
    pub mismatch_count: usize,
    pub mean_abs_delta: f64,
    pub max_abs_delta: f64,
    pub skipped_locations: usize,
}

impl BlockLosStats {
    fn empty(block: BlockId) -> Self {
        Self {
            block,
            ray_count: 0,
            mismatch_count: 0,
            mean_abs_delta: 0.0,
            max_abs_delta: 0.0,
            skipped_locations: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosResultSet {
    pub config: LosTestConfig,
    pub grid: BlockGrid,
    pub directions: Vec<Direction>,
    pub records: Vec<RayPairResult>,
    /// Locations over a hole in either database, skipped in both.
    pub skipped: Vec<TestLocation>,
    pub usable_locations: usize,
    /// One entry per block, row-major.
    pub block_stats: Vec<BlockLosStats>,
}

impl LosResultSet {
    pub fn block_stats(&self, block: BlockId) -> Option<&BlockLosStats> {
        (block.0 < self.grid.rows() && block.1 < self.grid.cols())
            .then(|| &self.block_stats[self.grid.flat_index(block)])
    }

    pub fn records_in_block(&self, block: BlockId) -> impl Iterator<Item = &RayPairResult> {
        self.records.iter().filter(move |r| r.block == block)
    }

    pub fn mismatch_count(&self) -> usize {
        self.records.iter().filter(|r| r.blocked_mismatch).count()
    }

    /// Aggregates recomputed from the record list.
    pub fn recompute_block_stats(&self) -> Vec<BlockLosStats> {
        aggregate(&self.grid, &self.records, &self.skipped)
    }
}

fn aggregate(
    grid: &BlockGrid,
    records: &[RayPairResult],
    skipped: &[TestLocation],
) -> Vec<BlockLosStats> {
    let mut stats: Vec<BlockLosStats> = grid.blocks().map(BlockLosStats::empty).collect();
    let mut sums = vec![0.0f64; stats.len()];
    for r in records {
        let i = grid.flat_index(r.block);
        let s = &mut stats[i];
        s.ray_count += 1;
        s.mismatch_count += usize::from(r.blocked_mismatch);
        let d = r.delta.abs();
        sums[i] += d;
        s.max_abs_delta = s.max_abs_delta.max(d);
    }
    for (s, sum) in stats.iter_mut().zip(sums) {
        if s.ray_count > 0 {
            s.mean_abs_delta = sum / s.ray_count as f64;
        }
    }
    for loc in skipped {
        stats[grid.flat_index(loc.block)].skipped_locations += 1;
    }
    stats
}

/// Execution options; results do not depend on them.
#[derive(Debug, Default, Clone, Copy)]
pub struct RunOptions<'a> {
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    /// Incremented once per traced ray pair.
    pub progress: Option<&'a AtomicUsize>,
}

/// Builds the block grid over the common extent and runs the test.
pub fn run_los(
    mesh_a: &TriangleMesh,
    mesh_b: &TriangleMesh,
    config: &LosTestConfig,
    options: RunOptions<'_>,
) -> Result<LosResultSet> {
    config.check()?;
    let grid = build_block_grid(&mesh_a.xy_extent(), &mesh_b.xy_extent(), config.rows, config.cols)?;
    let locations = generate_test_locations(&grid, config.locations_per_block);
    run_los_test(mesh_a, mesh_b, &grid, &locations, config, options)
}

/// Traces every (location, eyepoint, direction) ray in both meshes.
///
/// Eyepoints sit at the configured height above each database's own ground,
/// so the two rays of a pair share horizontal position and direction but not
/// necessarily altitude. Records are ordered by block (row-major), location,
/// eyepoint and direction regardless of the worker count.
pub fn run_los_test(
    mesh_a: &TriangleMesh,
    mesh_b: &TriangleMesh,
    grid: &BlockGrid,
    locations: &[TestLocation],
    config: &LosTestConfig,
    options: RunOptions<'_>,
) -> Result<LosResultSet> {
    config.check()?;
    let directions = generate_directions(&config.directions);
    let eyes = config.eyepoints;

    let bvh_a = Bvh::build(mesh_a);
    let bvh_b = Bvh::build(mesh_b);
    let probe_a = compute_bounding_box(mesh_a, f64::NEG_INFINITY, config.box_margin)?;
    let probe_b = compute_bounding_box(mesh_b, f64::NEG_INFINITY, config.box_margin)?;

    let mut usable = Vec::with_capacity(locations.len());
    let mut skipped = Vec::new();
    for loc in locations {
        let mut loc = *loc;
        loc.ground_z_a = ground_elevation(mesh_a, Some(&bvh_a), &probe_a, loc.x, loc.y);
        loc.ground_z_b = ground_elevation(mesh_b, Some(&bvh_b), &probe_b, loc.x, loc.y);
        if loc.ground_z_a.is_some() && loc.ground_z_b.is_some() {
            usable.push(loc);
        } else {
            skipped.push(loc);
        }
    }
    if usable.is_empty() {
        return Err(Error::NoUsableLocations {
            skipped: skipped.len(),
        });
    }
    if !skipped.is_empty() {
        log::info!("{} test location(s) over holes skipped", skipped.len());
    }

    let top_agl = eyes.agl(eyes.count - 1);
    let max_eye = |ground: fn(&TestLocation) -> Option<f64>| {
        usable
            .iter()
            .filter_map(ground)
            .fold(f64::NEG_INFINITY, f64::max)
            + top_agl
    };
    let scene_a = Scene {
        mesh: mesh_a,
        index: Some(&bvh_a),
        bbox: compute_bounding_box(mesh_a, max_eye(|l| l.ground_z_a), config.box_margin)?,
    };
    let scene_b = Scene {
        mesh: mesh_b,
        index: Some(&bvh_b),
        bbox: compute_bounding_box(mesh_b, max_eye(|l| l.ground_z_b), config.box_margin)?,
    };

    let per_location = eyes.count * directions.len();
    let total = usable.len() * per_location;
    let trace_one = |slot: usize| -> Result<RayPairResult> {
        let loc = &usable[slot / per_location];
        let eyepoint = (slot % per_location) / directions.len();
        let direction = slot % directions.len();
        let dir = &directions[direction];
        let agl = eyes.agl(eyepoint);
        let eye_z_a = loc.ground_z_a.unwrap_or_default() + agl;
        let eye_z_b = loc.ground_z_b.unwrap_or_default() + agl;
        let ray_a = Ray {
            origin: Point::new(loc.x, loc.y, eye_z_a),
            direction: dir.vector,
        };
        let ray_b = Ray {
            origin: Point::new(loc.x, loc.y, eye_z_b),
            direction: dir.vector,
        };
        let hit_a = scene_a.trace(&ray_a)?;
        let hit_b = scene_b.trace(&ray_b)?;
        if let Some(p) = options.progress {
            p.fetch_add(1, Ordering::Relaxed);
        }
        Ok(RayPairResult {
            block: loc.block,
            location: loc.index,
            eyepoint,
            direction,
            azimuth: dir.azimuth,
            pitch: dir.pitch,
            eye_x: loc.x,
            eye_y: loc.y,
            eye_z_a,
            eye_z_b,
            hit_a: hit_a.kind,
            len_a: hit_a.length,
            hit_b: hit_b.kind,
            len_b: hit_b.length,
            delta: hit_a.length - hit_b.length,
            blocked_mismatch: (hit_a.kind == HitKind::Terrain) != (hit_b.kind == HitKind::Terrain),
        })
    };

    let records: Result<Vec<RayPairResult>> = if options.workers == 0 {
        (0..total).into_par_iter().map(trace_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?;
        pool.install(|| (0..total).into_par_iter().map(trace_one).collect())
    };
    let records = records?;

    let block_stats = aggregate(grid, &records, &skipped);
    Ok(LosResultSet {
        config: *config,
        grid: *grid,
        directions,
        records,
        skipped,
        usable_locations: usable.len(),
        block_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::Heightfield;

    fn plane() -> TriangleMesh {
        Heightfield::from_fn(21, 21, 5.0, (0.0, 0.0), |_, _| 0.0)
            .unwrap()
            .triangulate("flat")
            .unwrap()
    }

    fn small_config() -> LosTestConfig {
        LosTestConfig {
            rows: 2,
            cols: 2,
            locations_per_block: 1,
            ..LosTestConfig::default()
        }
    }

    #[test]
    fn record_count_and_order() {
        let mesh = plane();
        let res = run_los(&mesh, &mesh, &small_config(), RunOptions::default()).unwrap();
        assert_eq!(res.records.len(), 4 * 3 * 24);
        let keys: Vec<_> = res
            .records
            .iter()
            .map(|r| (r.block, r.location, r.eyepoint, r.direction))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(res.block_stats, res.recompute_block_stats());
    }

    #[test]
    fn identical_meshes_agree_everywhere() {
        let mesh = plane();
        let res = run_los(&mesh, &mesh, &small_config(), RunOptions::default()).unwrap();
        assert!(res.records.iter().all(|r| r.delta == 0.0 && !r.blocked_mismatch));
    }

    #[test]
    fn progress_counts_every_pair() {
        let mesh = plane();
        let counter = AtomicUsize::new(0);
        let res = run_los(
            &mesh,
            &mesh,
            &small_config(),
            RunOptions {
                workers: 2,
                progress: Some(&counter),
            },
        )
        .unwrap();
        assert_eq!(counter.load(Ordering::Relaxed), res.records.len());
    }

    #[test]
    fn holes_are_skipped_in_both() {
        let mut hf = Heightfield::from_fn(21, 21, 5.0, (0.0, 0.0), |_, _| 0.0).unwrap();
        // punch out the cells around the south-west block center (25, 25)
        hf.set_hole(5, 5);
        let holed = hf.triangulate("holed").unwrap();
        let flat = plane();
        let res = run_los(&flat, &holed, &small_config(), RunOptions::default()).unwrap();
        assert_eq!(res.skipped.len(), 1);
        assert_eq!(res.skipped[0].block, (0, 0));
        assert_eq!(res.usable_locations, 3);
        assert_eq!(res.records.len(), 3 * 72);
        assert_eq!(res.block_stats((0, 0)).unwrap().ray_count, 0);
        assert_eq!(res.block_stats((0, 0)).unwrap().skipped_locations, 1);
    }

    #[test]
    fn all_locations_over_holes_is_an_error() {
        let mut hf = Heightfield::from_fn(5, 5, 25.0, (0.0, 0.0), |_, _| 0.0).unwrap();
        hf.set_hole(2, 2);
        let mesh = hf.triangulate("sparse").unwrap();
        let cfg = LosTestConfig {
            rows: 1,
            cols: 1,
            locations_per_block: 1,
            ..LosTestConfig::default()
        };
        // the only location (50, 50) is the holed center post
        assert!(matches!(
            run_los(&mesh, &plane(), &cfg, RunOptions::default()),
            Err(Error::NoUsableLocations { skipped: 1 })
        ));
    }

    #[test]
    fn invalid_config_is_rejected_with_fields() {
        let cfg = LosTestConfig {
            rows: 0,
            ..LosTestConfig::default()
        };
        match run_los(&plane(), &plane(), &cfg, RunOptions::default()) {
            Err(Error::InvalidConfig(e)) => assert_eq!(e[0].field, "rows"),
            other => panic!("{other:?}"),
        }
    }
}
