//! Readers and writers for the two on-disk terrain formats.
//!
//! Triangle mesh text (`.mesh`):
//!
//! ```text
//! # comment
//! v 0 0 0
//! v 10 0 1
//! v 0 10 2
//! g lod0
//! f 1 2 3
//! ```
//!
//! Vertex indices are 1-based and global to the file. `g lodN` starts LOD
//! group N; faces before the first group belong to `lod0`. Each LOD keeps
//! only the vertices its faces reference.
//!
//! Heightfield (`.asc`) is the ESRI ASCII grid layout: `ncols`, `nrows`,
//! `xllcorner`, `yllcorner`, `cellsize`, optional `nodata_value`, then the
//! elevations with the northernmost row first. `xllcorner`/`yllcorner` give
//! the position of the southwest post.
//!
//! Either format may carry a `<stem>.meta.json` sidecar with the geodetic
//! extents and the reference origin of the local frame.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

use super::{Heightfield, TerrainDatabase, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TdbFormat {
    TrimeshObj,
    HeightfieldAsc,
}

impl TdbFormat {
    /// `.asc` files are heightfields, everything else is mesh text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("asc") => TdbFormat::HeightfieldAsc,
            _ => TdbFormat::TrimeshObj,
        }
    }
}

impl FromStr for TdbFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "trimesh-obj" => Ok(TdbFormat::TrimeshObj),
            "heightfield-asc" => Ok(TdbFormat::HeightfieldAsc),
            other => Err(format!(
                "unknown format '{other}' (expected trimesh-obj or heightfield-asc)"
            )),
        }
    }
}

impl std::fmt::Display for TdbFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TdbFormat::TrimeshObj => "trimesh-obj",
            TdbFormat::HeightfieldAsc => "heightfield-asc",
        })
    }
}

/// Contents of the `.meta.json` sidecar. Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdbMetadata {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub ref_lat: f64,
    pub ref_lon: f64,
}

impl TdbMetadata {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| {
            Err(Error::Metadata {
                path: PathBuf::new(),
                message: m.to_string(),
            })
        };
        let all = [
            self.lat_min,
            self.lat_max,
            self.lon_min,
            self.lon_max,
            self.ref_lat,
            self.ref_lon,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("non-finite value");
        }
        if self.lat_min > self.lat_max || self.lon_min > self.lon_max {
            return bad("min must not exceed max");
        }
        if self.lat_min < -90.0 || self.lat_max > 90.0 || self.ref_lat.abs() >= 90.0 {
            return bad("latitude out of range");
        }
        Ok(())
    }
}

/// `dir/stem.meta.json` for `dir/stem.ext`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

fn read_sidecar(path: &Path) -> Result<Option<TdbMetadata>> {
    let meta_path = sidecar_path(path);
    if !meta_path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: TdbMetadata = serde_json::from_str(&text).map_err(|e| Error::Metadata {
        path: meta_path.clone(),
        message: e.to_string(),
    })?;
    meta.validate().map_err(|e| match e {
        Error::Metadata { message, .. } => Error::Metadata {
            path: meta_path.clone(),
            message,
        },
        other => other,
    })?;
    Ok(Some(meta))
}

/// Loads a terrain database and its optional sidecar.
pub fn load_tdb(path: impl AsRef<Path>, format: TdbFormat) -> Result<TerrainDatabase> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lods = match format {
        TdbFormat::TrimeshObj => parse_mesh_groups(&text, path)?,
        TdbFormat::HeightfieldAsc => {
            vec![parse_heightfield(&text, path)?.triangulate("lod0")?]
        }
    };
    let meta = read_sidecar(path)?;
    TerrainDatabase::new(lods, meta, path)
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: &str, path: &Path, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(path, line, format!("invalid number '{tok}'")))
}

/// Parses mesh text into LOD meshes ordered by LOD number.
pub fn parse_mesh_groups(text: &str, path: &Path) -> Result<Vec<TriangleMesh>> {
    let mut vertices: Vec<Point> = Vec::new();
    // lod number -> faces (1-based indices with their line numbers)
    let mut groups: BTreeMap<u32, Vec<([usize; 3], usize)>> = BTreeMap::new();
    let mut current = 0u32;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let keyword = toks.next().unwrap_or_default();
        let args: Vec<&str> = toks.collect();
        match keyword {
            "v" => {
                if args.len() != 3 {
                    return Err(parse_err(path, line_no, "vertex needs exactly x y z"));
                }
                let x = parse_f64(args[0], path, line_no)?;
                let y = parse_f64(args[1], path, line_no)?;
                let z = parse_f64(args[2], path, line_no)?;
                vertices.push(Point::new(x, y, z));
            }
            "g" => {
                let name = args.first().copied().unwrap_or_default();
                current = name
                    .strip_prefix("lod")
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(|| {
                        parse_err(path, line_no, format!("group '{name}' is not of the form lodN"))
                    })?;
            }
            "f" => {
                if args.len() != 3 {
                    return Err(parse_err(
                        path,
                        line_no,
                        format!("face has {} vertices; only triangles are supported", args.len()),
                    ));
                }
                let mut idx = [0usize; 3];
                for (slot, tok) in idx.iter_mut().zip(&args) {
                    let head = tok.split('/').next().unwrap_or_default();
                    *slot = head
                        .parse::<usize>()
                        .ok()
                        .filter(|&v| v >= 1)
                        .ok_or_else(|| {
                            parse_err(path, line_no, format!("invalid vertex index '{tok}'"))
                        })?;
                }
                groups.entry(current).or_default().push((idx, line_no));
            }
            // tolerated OBJ statements that carry nothing we use
            "vn" | "vt" | "o" | "s" | "usemtl" | "mtllib" => {}
            other => {
                return Err(parse_err(path, line_no, format!("unknown record '{other}'")));
            }
        }
    }

    if groups.is_empty() {
        return Err(Error::NoTriangles {
            name: path.display().to_string(),
        });
    }

    let mut lods = Vec::with_capacity(groups.len());
    for (lod, faces) in groups {
        // compact to the vertices this LOD references, keeping file order
        let mut remap: BTreeMap<usize, u32> = BTreeMap::new();
        for (face, line_no) in &faces {
            for &i in face {
                if i > vertices.len() {
                    return Err(parse_err(
                        path,
                        *line_no,
                        format!("index out of range (vertex {i} of {})", vertices.len()),
                    ));
                }
                remap.insert(i - 1, 0);
            }
        }
        let mut local_vertices = Vec::with_capacity(remap.len());
        for (k, (global, slot)) in remap.iter_mut().enumerate() {
            *slot = k as u32;
            local_vertices.push(vertices[*global]);
        }
        let triangles = faces
            .iter()
            .map(|(f, _)| f.map(|i| remap[&(i - 1)]))
            .collect();
        lods.push(TriangleMesh::new(format!("lod{lod}"), local_vertices, triangles)?);
    }
    Ok(lods)
}

/// Parses an ASCII heightfield grid.
pub fn parse_heightfield(text: &str, path: &Path) -> Result<Heightfield> {
    let mut header: BTreeMap<String, f64> = BTreeMap::new();
    let mut values = Vec::new();
    let mut in_body = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let first = line.split_whitespace().next().unwrap_or_default();
        if !in_body && first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap_or_default().to_ascii_lowercase();
            let val = toks
                .next()
                .ok_or_else(|| parse_err(path, line_no, format!("header '{key}' has no value")))?;
            let val = parse_f64(val, path, line_no)?;
            header.insert(key, val);
            continue;
        }
        in_body = true;
        for tok in line.split_whitespace() {
            values.push(parse_f64(tok, path, line_no)?);
        }
    }

    let get = |key: &str| -> Result<f64> {
        header
            .get(key)
            .copied()
            .ok_or_else(|| parse_err(path, 1, format!("missing header '{key}'")))
    };
    let as_count = |key: &str| -> Result<usize> {
        let v = get(key)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(parse_err(path, 1, format!("header '{key}' must be a whole number")));
        }
        Ok(v as usize)
    };
    let ncols = as_count("ncols")?;
    let nrows = as_count("nrows")?;
    let cellsize = get("cellsize")?;
    let x0 = get("xllcenter").or_else(|_| get("xllcorner"))?;
    let y0 = get("yllcenter").or_else(|_| get("yllcorner"))?;
    let nodata = header.get("nodata_value").copied();
    let expected = ncols * nrows;
    if values.len() != expected {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!("expected {expected} elevations, found {}", values.len()),
        ));
    }
    Heightfield::new(ncols, nrows, cellsize, (x0, y0), values, nodata)
}

/// Writes LOD meshes in the mesh text format (one `g lodN` group per mesh,
/// in the order given).
pub fn write_mesh_file(path: impl AsRef<Path>, lods: &[TriangleMesh]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let mut offset = 0usize;
    for (n, mesh) in lods.iter().enumerate() {
        for v in mesh.vertices() {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        let _ = writeln!(out, "g lod{n}");
        for t in mesh.triangles() {
            let [a, b, c] = t.map(|i| i as usize + offset + 1);
            let _ = writeln!(out, "f {a} {b} {c}");
        }
        offset += mesh.vertices().len();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_TRIANGLES: &str = "\
# unit square
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
g lod0
f 1 2 3
f 1 3 4
";

    #[test]
    fn minimal_mesh() {
        let lods = parse_mesh_groups(TWO_TRIANGLES, Path::new("sq.mesh")).unwrap();
        assert_eq!(lods.len(), 1);
        assert_eq!(lods[0].triangle_count(), 2);
        assert_eq!(lods[0].vertices().len(), 4);
    }

    #[test]
    fn out_of_range_index_reports_line() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 99\n";
        let err = parse_mesh_groups(text, Path::new("bad.mesh")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("index out of range"), "{msg}");
        assert!(matches!(err, Error::Parse { line: 5, .. }));
    }

    #[test]
    fn groups_become_ordered_lods() {
        let text = "\
v 0 0 0
v 2 0 0
v 2 2 0
v 0 2 0
v 1 1 1
g lod1
f 1 2 4
f 2 3 4
g lod0
f 1 2 5
f 2 3 5
f 3 4 5
f 4 1 5
";
        let lods = parse_mesh_groups(text, Path::new("m.mesh")).unwrap();
        assert_eq!(lods.len(), 2);
        assert_eq!(lods[0].name(), "lod0");
        assert_eq!(lods[0].triangle_count(), 4);
        assert_eq!(lods[0].vertices().len(), 5);
        assert_eq!(lods[1].triangle_count(), 2);
        assert_eq!(lods[1].vertices().len(), 4);
    }

    #[test]
    fn malformed_records() {
        for (text, line) in [
            ("v 0 0\n", 1),
            ("v 0 0 0\nv 1 0 x\n", 2),
            ("v 0 0 0\nf 1 1\n", 2),
            ("g terrain\n", 1),
            ("v 0 0 0\nf 0 1 1\n", 2),
            ("w 1\n", 1),
        ] {
            match parse_mesh_groups(text, Path::new("x")) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn heightfield_layout_north_row_first() {
        let text = "\
ncols 3
nrows 2
xllcorner 100
yllcorner 200
cellsize 5
NODATA_value -9999
1 2 3
4 5 -9999
";
        let hf = parse_heightfield(text, Path::new("g.asc")).unwrap();
        assert_eq!(hf.post(0, 1), Some(1.0));
        assert_eq!(hf.post(0, 0), Some(4.0));
        assert_eq!(hf.post(2, 0), None);
        assert_eq!(hf.origin(), (100.0, 200.0));
        let mesh = hf.triangulate("lod0").unwrap();
        // only the western cell has four valid posts
        assert_eq!(mesh.triangle_count(), 2);
    }

    #[test]
    fn heightfield_value_count_mismatch() {
        let text = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n";
        assert!(parse_heightfield(text, Path::new("g.asc")).is_err());
    }

    #[test]
    fn heightfield_missing_header() {
        let text = "ncols 2\nnrows 2\nxllcorner 0\ncellsize 1\n1 2\n3 4\n";
        let err = parse_heightfield(text, Path::new("g.asc")).unwrap_err();
        assert!(err.to_string().contains("yllcorner"));
    }

    #[test]
    fn load_with_and_without_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mesh_path = dir.path().join("a.mesh");
        fs::write(&mesh_path, TWO_TRIANGLES).unwrap();
        let tdb = load_tdb(&mesh_path, TdbFormat::TrimeshObj).unwrap();
        assert!(!tdb.extents().horizontal.is_geodetic());
        assert_eq!(tdb.load_log().len(), 1);

        fs::write(
            dir.path().join("a.meta.json"),
            r#"{"lat_min":34.0,"lat_max":34.1,"lon_min":-117.1,"lon_max":-117.0,"ref_lat":34.0,"ref_lon":-117.1}"#,
        )
        .unwrap();
        let tdb = load_tdb(&mesh_path, TdbFormat::TrimeshObj).unwrap();
        assert!(tdb.extents().horizontal.is_geodetic());
        assert_eq!(tdb.geodetic_to_local(34.0, -117.1).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn bad_sidecar_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let mesh_path = dir.path().join("a.mesh");
        fs::write(&mesh_path, TWO_TRIANGLES).unwrap();
        fs::write(
            dir.path().join("a.meta.json"),
            r#"{"lat_min":35.0,"lat_max":34.1,"lon_min":0,"lon_max":1,"ref_lat":34.0,"ref_lon":0}"#,
        )
        .unwrap();
        assert!(matches!(
            load_tdb(&mesh_path, TdbFormat::TrimeshObj),
            Err(Error::Metadata { .. })
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_tdb("/nonexistent/x.mesh", TdbFormat::TrimeshObj),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn heightfield_with_only_holes_fails_to_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.asc");
        fs::write(
            &p,
            "ncols 3\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 1\nnodata_value -1\n0 0 0\n0 -1 0\n0 0 0\n",
        )
        .unwrap();
        assert!(matches!(
            load_tdb(&p, TdbFormat::HeightfieldAsc),
            Err(Error::NoTriangles { .. })
        ));
    }

    #[test]
    fn mesh_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rt.mesh");
        let lods = parse_mesh_groups(TWO_TRIANGLES, Path::new("sq.mesh")).unwrap();
        write_mesh_file(&p, &lods).unwrap();
        let back = load_tdb(&p, TdbFormat::TrimeshObj).unwrap();
        assert_eq!(back.lods(), &lods[..]);
    }
}
