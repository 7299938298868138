use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::los::{HitKind, LosResultSet, RayPairResult};
use crate::sampling::BlockId;

use super::RoughnessPairs;

pub const RESULTS_COLUMNS: [&str; 17] = [
    "block_row",
    "block_col",
    "loc_idx",
    "eye_idx",
    "dir_idx",
    "azimuth_deg",
    "pitch_deg",
    "eye_x",
    "eye_y",
    "eye_z_a",
    "eye_z_b",
    "hit_a",
    "len_a",
    "hit_b",
    "len_b",
    "delta_len",
    "blocked_mismatch",
];

pub const ROUGHNESS_COLUMNS: [&str; 5] = ["block_row", "block_col", "rough_a", "rough_b", "delta_rough"];

/// Missing value marker in the roughness file (block without triangles).
pub const NA: &str = "NA";

/// Six fractional digits; negative zero prints as "0.000000".
pub fn fmt_real(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), fmt_real)
}

pub type TsvRayRecord = RayPairResult;

/// Text of the results file.
pub fn results_tsv_string(records: &[RayPairResult]) -> String {
    let mut out = RESULTS_COLUMNS.join("\t");
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.block.0,
            r.block.1,
            r.location,
            r.eyepoint,
            r.direction,
            fmt_real(r.azimuth),
            fmt_real(r.pitch),
            fmt_real(r.eye_x),
            fmt_real(r.eye_y),
            fmt_real(r.eye_z_a),
            fmt_real(r.eye_z_b),
            r.hit_a,
            fmt_real(r.len_a),
            r.hit_b,
            fmt_real(r.len_b),
            fmt_real(r.delta),
            u8::from(r.blocked_mismatch),
        );
    }
    out
}

pub fn write_results_tsv(results: &LosResultSet, path: &Path) -> Result<()> {
    fs::write(path, results_tsv_string(&results.records)).map_err(|e| Error::io(path, e))
}

/// Per-block roughness of both databases. `delta` is `rough_a - rough_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughnessRow {
    pub block: BlockId,
    pub rough_a: Option<f64>,
    pub rough_b: Option<f64>,
    pub delta: Option<f64>,
}

impl RoughnessRow {
    pub fn rows(pairs: &RoughnessPairs) -> Vec<RoughnessRow> {
        (0..pairs.rows)
            .flat_map(|r| (0..pairs.cols).map(move |c| (r, c)))
            .map(|block| {
                let (a, b) = pairs.get(block);
                RoughnessRow {
                    block,
                    rough_a: a,
                    rough_b: b,
                    delta: a.zip(b).map(|(a, b)| a - b),
                }
            })
            .collect()
    }
}

pub fn roughness_tsv_string(pairs: &RoughnessPairs) -> String {
    let mut out = ROUGHNESS_COLUMNS.join("\t");
    out.push('\n');
    for row in RoughnessRow::rows(pairs) {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            row.block.0,
            row.block.1,
            fmt_opt(row.rough_a),
            fmt_opt(row.rough_b),
            fmt_opt(row.delta)
        );
    }
    out
}

pub fn write_roughness_tsv(pairs: &RoughnessPairs, path: &Path) -> Result<()> {
    fs::write(path, roughness_tsv_string(pairs)).map_err(|e| Error::io(path, e))
}

struct Fields<'a> {
    path: &'a Path,
    line: usize,
    cols: &'static [&'static str],
    values: Vec<&'a str>,
}

impl<'a> Fields<'a> {
    fn err(&self, message: String) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message,
        }
    }

    fn parse<T: std::str::FromStr>(&self, i: usize) -> Result<T> {
        self.values[i]
            .parse()
            .map_err(|_| self.err(format!("bad {} value {:?}", self.cols[i], self.values[i])))
    }

    fn opt_real(&self, i: usize) -> Result<Option<f64>> {
        if self.values[i] == NA {
            Ok(None)
        } else {
            self.parse(i).map(Some)
        }
    }

    fn flag(&self, i: usize) -> Result<bool> {
        match self.values[i] {
            "0" => Ok(false),
            "1" => Ok(true),
            v => Err(self.err(format!("bad {} value {v:?}", self.cols[i]))),
        }
    }
}

fn parse_table<'a, T>(
    text: &'a str,
    path: &'a Path,
    cols: &'static [&'static str],
    mut row: impl FnMut(&Fields<'a>) -> Result<T>,
) -> Result<Vec<T>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.split('\t').ne(cols.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header {:?}", cols.join("\t")),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields = Fields {
            path,
            line: i + 2,
            cols,
            values: line.split('\t').collect(),
        };
        if fields.values.len() != cols.len() {
            return Err(fields.err(format!(
                "expected {} fields, found {}",
                cols.len(),
                fields.values.len()
            )));
        }
        out.push(row(&fields)?);
    }
    Ok(out)
}

/// Parses results text; `path` is used in error messages only.
pub fn parse_results_tsv(text: &str, path: &Path) -> Result<Vec<TsvRayRecord>> {
    parse_table(text, path, &RESULTS_COLUMNS, |f| {
        let hit = |i: usize| -> Result<HitKind> { f.parse(i) };
        Ok(RayPairResult {
            block: (f.parse(0)?, f.parse(1)?),
            location: f.parse(2)?,
            eyepoint: f.parse(3)?,
            direction: f.parse(4)?,
            azimuth: f.parse(5)?,
            pitch: f.parse(6)?,
            eye_x: f.parse(7)?,
            eye_y: f.parse(8)?,
            eye_z_a: f.parse(9)?,
            eye_z_b: f.parse(10)?,
            hit_a: hit(11)?,
            len_a: f.parse(12)?,
            hit_b: hit(13)?,
            len_b: f.parse(14)?,
            delta: f.parse(15)?,
            blocked_mismatch: f.flag(16)?,
        })
    })
}

pub fn read_results_tsv(path: &Path) -> Result<Vec<TsvRayRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_results_tsv(&text, path)
}

pub fn parse_roughness_tsv(text: &str, path: &Path) -> Result<Vec<RoughnessRow>> {
    parse_table(text, path, &ROUGHNESS_COLUMNS, |f| {
        Ok(RoughnessRow {
            block: (f.parse(0)?, f.parse(1)?),
            rough_a: f.opt_real(2)?,
            rough_b: f.opt_real(3)?,
            delta: f.opt_real(4)?,
        })
    })
}

pub fn read_roughness_tsv(path: &Path) -> Result<Vec<RoughnessRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_roughness_tsv(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::sampling::BlockGrid;
    use proptest::prelude::*;

    #[test]
    fn six_decimals() {
        assert_eq!(fmt_real(0.0), "0.000000");
        assert_eq!(fmt_real(-0.0), "0.000000");
        assert_eq!(fmt_real(-1e-9), "0.000000");
        assert_eq!(fmt_real(0.5268414), "0.526841");
        assert_eq!(fmt_real(-12.25), "-12.250000");
        assert_eq!(fmt_real(1e7), "10000000.000000");
    }

    fn record() -> RayPairResult {
        RayPairResult {
            block: (4, 0),
            location: 3,
            eyepoint: 2,
            direction: 17,
            azimuth: 45.0,
            pitch: -10.0,
            eye_x: 1234.5678912,
            eye_y: -0.25,
            eye_z_a: 12.0,
            eye_z_b: 12.5,
            hit_a: HitKind::Terrain,
            len_a: 57.123456789,
            hit_b: HitKind::Wall,
            len_b: 930.0,
            delta: 57.123456789 - 930.0,
            blocked_mismatch: true,
        }
    }

    #[test]
    fn results_layout() {
        let text = results_tsv_string(&[record(), record()]);
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
        assert_eq!(lines[0], RESULTS_COLUMNS.join("\t"));
        assert_eq!(
            lines[1],
            "4\t0\t3\t2\t17\t45.000000\t-10.000000\t1234.567891\t-0.250000\t12.000000\t12.500000\tTERRAIN\t57.123457\tWALL\t930.000000\t-872.876543\t1"
        );
        assert!(!text.contains('\r'));
    }

    #[test]
    fn results_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("los_results.tsv");
        let set = [record()];
        fs::write(&path, results_tsv_string(&set)).unwrap();
        let back = read_results_tsv(&path).unwrap();
        assert_eq!(back.len(), 1);
        let b = back[0];
        assert_eq!((b.block, b.hit_a, b.hit_b, b.blocked_mismatch), ((4, 0), HitKind::Terrain, HitKind::Wall, true));
        assert_eq!(b.eye_x, 1234.567891);
        assert_eq!(b.len_a, 57.123457);
        assert_eq!(results_tsv_string(&back), results_tsv_string(&set));
    }

    #[test]
    fn bad_rows_are_reported_with_line_numbers() {
        let good = results_tsv_string(&[record()]);
        let bad = good.replace("TERRAIN", "ROCK");
        let err = parse_results_tsv(&bad, Path::new("x.tsv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let short = format!("{}1\t2\n", RESULTS_COLUMNS.join("\t") + "\n");
        assert!(matches!(parse_results_tsv(&short, Path::new("x")), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_results_tsv("a\tb\n", Path::new("x")), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn roughness_file() {
        let grid = BlockGrid::new(Rect::new(0.0, 2.0, 0.0, 1.0), 1, 2).unwrap();
        let pairs = RoughnessPairs::new(&grid, vec![Some(0.526841), None], vec![Some(0.537245), Some(0.1)]).unwrap();
        let text = roughness_tsv_string(&pairs);
        assert_eq!(
            text,
            "block_row\tblock_col\trough_a\trough_b\tdelta_rough\n\
             0\t0\t0.526841\t0.537245\t-0.010404\n\
             0\t1\tNA\t0.100000\tNA\n"
        );
        let rows = parse_roughness_tsv(&text, Path::new("r.tsv")).unwrap();
        assert_eq!(rows, RoughnessRow::rows(&pairs).into_iter().map(|mut r| {
            r.delta = r.delta.map(|d| fmt_real(d).parse().unwrap());
            r
        }).collect::<Vec<_>>());
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let grid = BlockGrid::new(Rect::new(0.0, 1.0, 0.0, 1.0), 1, 1).unwrap();
        let pairs = RoughnessPairs::new(&grid, vec![None], vec![None]).unwrap();
        let path = dir.path().join("missing").join("r.tsv");
        assert!(matches!(write_roughness_tsv(&pairs, &path), Err(Error::Io { .. })));
    }

    proptest! {
        #[test]
        fn reals_survive_printing(v in -1e6f64..1e6) {
            let s = fmt_real(v);
            let back: f64 = s.parse().unwrap();
            prop_assert!((back - v).abs() <= 5e-7 + 1e-12 * v.abs());
            prop_assert_eq!(fmt_real(back), s);
        }
    }
}
