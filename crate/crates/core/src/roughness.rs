//! Terrain roughness as the dispersion of unit triangle normals.
//!
//! For N unit normals `n_i = (x_i, y_i, z_i)`:
//!
//! * the mean normal is the component-wise arithmetic mean, `Σ n_i / N`;
//! * the dispersion is the component-wise population standard deviation,
//!   `σ_k = sqrt(Σ (k_i − k̄)² / N)` for `k ∈ {x, y, z}`;
//! * the roughness is the Euclidean length of the dispersion vector.
//!
//! Because every normal has unit length, `|σ|² = 1 − |mean|²`, which keeps
//! the roughness in `[0, 1]`: 0 for any planar surface whatever its tilt,
//! approaching 1 as the normals spread evenly over all directions. Normals
//! are not area-weighted, so meshes dominated by slivers weigh those slivers
//! as heavily as large facets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{triangle_cross, Point, Vector};
use crate::sampling::BlockGrid;
use crate::terrain::{TriangleMesh, MIN_TRIANGLE_AREA};

/// Right-hand-rule unit normal of a triangle.
pub fn triangle_normal(tri: &[Point; 3]) -> Result<Vector> {
    let cross = triangle_cross(&tri[0], &tri[1], &tri[2]);
    let norm = cross.norm();
    if 0.5 * norm < MIN_TRIANGLE_AREA || !norm.is_finite() {
        return Err(Error::DegenerateTriangle);
    }
    Ok(cross / norm)
}

/// Non-empty set of unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSet {
    normals: Vec<Vector>,
}

impl NormalSet {
    /// Fails on an empty list or on any vector whose length is not 1 within
    /// 1e-9.
    pub fn new(normals: Vec<Vector>) -> Result<Self> {
        if normals.is_empty() {
            return Err(Error::EmptyNormalSet);
        }
        if let Some((index, n)) = normals
            .iter()
            .enumerate()
            .find(|(_, n)| (n.norm() - 1.0).abs() > 1e-9)
        {
            return Err(Error::NotUnitNormal {
                index,
                norm: n.norm(),
            });
        }
        Ok(Self { normals })
    }

    /// Normals of every triangle of `mesh`, in triangle order.
    pub fn from_mesh(mesh: &TriangleMesh) -> Result<Self> {
        Self::from_triangles(mesh, 0..mesh.triangle_count())
    }

    /// Normals of the listed triangles of `mesh`.
    pub fn from_triangles(
        mesh: &TriangleMesh,
        triangles: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let normals = triangles
            .into_iter()
            .map(|i| triangle_normal(&mesh.triangle(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(normals)
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }
}

pub fn mean_normal(set: &NormalSet) -> Vector {
    let n = set.len() as f64;
    let sum = set.normals.iter().fold(Vector::zeros(), |acc, v| acc + v);
    sum / n
}

pub fn normal_dispersion(set: &NormalSet) -> Vector {
    let mean = mean_normal(set);
    let n = set.len() as f64;
    let sq = set
        .normals
        .iter()
        .fold(Vector::zeros(), |acc, v| acc + (v - mean).component_mul(&(v - mean)));
    (sq / n).map(f64::sqrt)
}

pub fn roughness(set: &NormalSet) -> f64 {
    normal_dispersion(set).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughnessResult {
    pub mean_normal: Vector,
    pub dispersion: Vector,
    pub roughness: f64,
    pub count: usize,
}

impl RoughnessResult {
    pub fn of(set: &NormalSet) -> Self {
        let mean_normal = mean_normal(set);
        let dispersion = normal_dispersion(set);
        Self {
            mean_normal,
            dispersion,
            roughness: dispersion.norm(),
            count: set.len(),
        }
    }
}

/// Whole-mesh roughness.
pub fn mesh_roughness(mesh: &TriangleMesh) -> Result<RoughnessResult> {
    Ok(RoughnessResult::of(&NormalSet::from_mesh(mesh)?))
}

/// Triangle indices per block (row-major), assigned by centroid. Centroids
/// outside the grid's area are left out.
pub fn assign_triangles(mesh: &TriangleMesh, grid: &BlockGrid) -> Vec<Vec<usize>> {
    let mut blocks = vec![Vec::new(); grid.block_count()];
    for i in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(i);
        let cx = (a.x + b.x + c.x) / 3.0;
        let cy = (a.y + b.y + c.y) / 3.0;
        if let Some(id) = grid.locate(cx, cy) {
            blocks[grid.flat_index(id)].push(i);
        }
    }
    blocks
}

/// One entry per block (row-major); `None` for blocks with no triangles.
pub fn block_roughness(mesh: &TriangleMesh, grid: &BlockGrid) -> Result<Vec<Option<RoughnessResult>>> {
    assign_triangles(mesh, grid)
        .into_iter()
        .map(|tris| {
            if tris.is_empty() {
                Ok(None)
            } else {
                NormalSet::from_triangles(mesh, tris).map(|s| Some(RoughnessResult::of(&s)))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::terrain::Heightfield;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normals_follow_winding() {
        let a = Point::new(0.0, 0.0, 0.0);
        let b = Point::new(1.0, 0.0, 0.0);
        let c = Point::new(0.0, 1.0, 0.0);
        assert_eq!(triangle_normal(&[a, b, c]).unwrap(), Vector::z());
        assert_eq!(triangle_normal(&[a, c, b]).unwrap(), -Vector::z());
        // (1,0,1)x(0,1,0) = (-1, 0, 1), normalized
        let n = triangle_normal(&[a, Point::new(1.0, 0.0, 1.0), c]).unwrap();
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(n, Vector::new(-h, 0.0, h), epsilon = 1e-15);
        assert!(matches!(triangle_normal(&[a, b, b]), Err(Error::DegenerateTriangle)));
    }

    #[test]
    fn empty_and_non_unit_sets_are_rejected() {
        assert!(matches!(NormalSet::new(vec![]), Err(Error::EmptyNormalSet)));
        assert!(matches!(
            NormalSet::new(vec![Vector::z(), Vector::new(0.0, 0.0, 2.0)]),
            Err(Error::NotUnitNormal { index: 1, .. })
        ));
    }

    #[test]
    fn worked_pair() {
        // mean = ((0+1)/2, 0, (1+0)/2); each deviation is ±0.5 => σ = (0.5, 0, 0.5)
        let set = NormalSet::new(vec![Vector::z(), Vector::x()]).unwrap();
        assert_eq!(mean_normal(&set), Vector::new(0.5, 0.0, 0.5));
        assert_eq!(normal_dispersion(&set), Vector::new(0.5, 0.0, 0.5));
        assert_abs_diff_eq!(roughness(&set), 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn single_and_identical_normals() {
        let one = NormalSet::new(vec![Vector::z()]).unwrap();
        assert_eq!(mean_normal(&one), Vector::z());
        assert_eq!(normal_dispersion(&one), Vector::zeros());
        let three = NormalSet::new(vec![Vector::z(); 3]).unwrap();
        assert_eq!(mean_normal(&three), Vector::z());
        assert_eq!(roughness(&three), 0.0);
    }

    fn half_corrugated() -> TriangleMesh {
        // west half flat, east half a 45° sawtooth along x with period 2 m
        Heightfield::from_fn(41, 21, 1.0, (0.0, 0.0), |x, _| {
            if x <= 20.0 {
                0.0
            } else {
                ((x - 20.0) as i64 % 2) as f64
            }
        })
        .unwrap()
        .triangulate("half")
        .unwrap()
    }

    #[test]
    fn half_flat_half_corrugated() {
        let mesh = half_corrugated();
        let grid = BlockGrid::new(Rect::new(0.0, 40.0, 0.0, 20.0), 1, 2).unwrap();
        let blocks = block_roughness(&mesh, &grid).unwrap();
        let flat = blocks[0].unwrap();
        let rough = blocks[1].unwrap();
        assert_eq!(flat.roughness, 0.0);
        // corrugated block: half the facets face (-1,0,1)/√2, half (1,0,1)/√2
        // => mean (0,0,1/√2), σ = (1/√2, 0, 0), roughness √(1 − z̄²) = 1/√2
        let zbar = rough.mean_normal.z;
        assert_abs_diff_eq!(zbar, 0.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(rough.roughness, (1.0 - zbar * zbar).sqrt(), epsilon = 1e-12);
        assert_eq!(flat.count + rough.count, mesh.triangle_count());
    }

    #[test]
    fn single_block_equals_whole_mesh() {
        let mesh = half_corrugated();
        let grid = BlockGrid::new(mesh.xy_extent(), 1, 1).unwrap();
        let blocks = block_roughness(&mesh, &grid).unwrap();
        assert_eq!(blocks[0].unwrap(), mesh_roughness(&mesh).unwrap());
    }

    #[test]
    fn empty_blocks_are_absent() {
        let mesh = Heightfield::from_fn(3, 3, 1.0, (0.0, 0.0), |_, _| 0.0)
            .unwrap()
            .triangulate("small")
            .unwrap();
        let grid = BlockGrid::new(Rect::new(0.0, 10.0, 0.0, 10.0), 2, 2).unwrap();
        let blocks = block_roughness(&mesh, &grid).unwrap();
        assert_eq!(blocks[0].unwrap().roughness, 0.0);
        assert!(blocks[1..].iter().all(Option::is_none));
    }

    fn unit_vec() -> impl Strategy<Value = Vector> {
        (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
            let r = (1.0 - z * z).sqrt();
            Vector::new(r * phi.cos(), r * phi.sin(), z)
        })
    }

    proptest! {
        #[test]
        fn identity_and_range(normals in prop::collection::vec(unit_vec(), 1..200)) {
            let set = NormalSet::new(normals).unwrap();
            let r = RoughnessResult::of(&set);
            prop_assert!((r.roughness.powi(2) + r.mean_normal.norm_squared() - 1.0).abs() <= 1e-9);
            prop_assert!((0.0..=1.0).contains(&r.roughness));
            prop_assert!((r.roughness - r.dispersion.norm()).abs() <= 1e-12);
        }

        #[test]
        fn permutation_and_duplication(normals in prop::collection::vec(unit_vec(), 1..60), k in 2usize..5) {
            let base = RoughnessResult::of(&NormalSet::new(normals.clone()).unwrap());
            let mut reversed = normals.clone();
            reversed.reverse();
            let rev = RoughnessResult::of(&NormalSet::new(reversed).unwrap());
            prop_assert!((base.roughness - rev.roughness).abs() <= 1e-12);
            prop_assert!((base.mean_normal - rev.mean_normal).norm() <= 1e-12);

            let repeated: Vec<Vector> = normals.iter().flat_map(|n| std::iter::repeat_n(*n, k)).collect();
            let dup = RoughnessResult::of(&NormalSet::new(repeated).unwrap());
            prop_assert!((base.roughness - dup.roughness).abs() <= 1e-12);
            prop_assert!((base.mean_normal - dup.mean_normal).norm() <= 1e-12);
            prop_assert!((base.dispersion - dup.dispersion).norm() <= 1e-9);
        }
    }
}
