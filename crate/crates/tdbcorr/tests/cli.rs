use std::path::{Path, PathBuf};
use std::process::Command;

use tdbcorr::cli::{execute_with, tdb_ids, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tdbcorr").chain(args.iter().copied());
    let code = execute_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn info_prints_counts_and_extents() {
    let (code, out, _) = run(&["info", "--tdb", &data("hills_a.mesh")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("vertices:  2122"), "{out}");
    assert!(out.contains("polygons:  4000"));
    assert!(out.contains("LODs:      2"));
    assert!(out.contains("latitude:  [34.000000, 34.001797] deg"));

    let (code, out, _) = run(&["info", "--tdb", &data("hills_b.asc")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("polygons:  1250"));
}

#[test]
fn los_writes_all_outputs_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "los".to_string(),
            "--tdb-a".into(),
            data("hills_a.mesh"),
            "--tdb-b".into(),
            data("hills_b.asc"),
            "--rows".into(),
            "3".into(),
            "--cols".into(),
            "2".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let first = dir.path().join("one");
    let second = dir.path().join("two");
    let a1 = args(&first);
    let (code, out, err) = run(&a1.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("1728 ray pairs"), "{out}");
    let a2 = args(&second);
    assert_eq!(run(&a2.iter().map(String::as_str).collect::<Vec<_>>()).0, EXIT_OK);
    for name in ["los_results.tsv", "roughness.tsv", "report.csv", "report.html"] {
        let x = std::fs::read(first.join(name)).unwrap();
        let y = std::fs::read(second.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let rough = std::fs::read_to_string(first.join("roughness.tsv")).unwrap();
    assert_eq!(rough.lines().count(), 7);
}

#[test]
fn single_block_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let (code, text, err) = run(&[
        "los", "--tdb-a", &data("hills_a.mesh"), "--tdb-b", &data("hills_a.mesh"), "--lod-b", "1",
        "--rows", "1", "--cols", "1", "--out", &out,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(text.contains("288 ray pairs"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.contains("Block 0_0"));
}

#[test]
fn invalid_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let (code, _, err) = run(&[
        "los", "--tdb-a", &data("hills_a.mesh"), "--tdb-b", &data("hills_b.asc"),
        "--pitch-start", "95", "--pitch-count", "1", "--out", &out,
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("(-90°, 90°)"), "{err}");

    let (code, _, err) = run(&["los", "--tdb-a", &data("hills_a.mesh"), "--tdb-b", &data("hills_b.asc"), "--rows", "0"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("rows"), "{err}");

    let (code, _, err) = run(&["los", "--tdb-a", &data("hills_a.mesh"), "--tdb-b", &data("hills_b.asc"), "--lod-b", "4"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("lod_b"), "{err}");

    assert_eq!(run(&["los", "--frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["info"]).0, EXIT_USAGE);
    assert_eq!(run(&["info", "--tdb", "x.mesh", "--format", "shapefile"]).0, EXIT_USAGE);
}

#[test]
fn runtime_failures_exit_1() {
    let (code, _, err) = run(&["info", "--tdb", "/nonexistent/terrain.mesh"]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("loading database"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mesh");
    std::fs::write(&bad, "v 0 0 0\nv 1 0 0\nv 0 1 0\ng lod0\nf 1 2 9\n").unwrap();
    let (code, _, err) = run(&["info", "--tdb", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn roughness_with_and_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain");
    let (code, _, err) = run(&[
        "roughness", "--tdb-a", &data("hills_a.mesh"), "--tdb-b", &data("hills_b.asc"), "--out", plain.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(plain.join("roughness.tsv").is_file());
    assert!(!plain.join("report.html").exists());

    let reported = dir.path().join("reported");
    let (code, _, _) = run(&[
        "roughness", "--tdb-a", &data("hills_a.mesh"), "--tdb-b", &data("hills_b.asc"),
        "--rough-low", "0.15", "--rough-high", "0.2", "--out", reported.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let html = std::fs::read_to_string(reported.join("report.html")).unwrap();
    assert!(html.contains("class=\"green\"") || html.contains("class=\"red\""));
}

#[test]
fn help_lists_every_flag() {
    let (code, out, _) = run(&["los", "--help"]);
    assert_eq!(code, EXIT_OK);
    for flag in [
        "--tdb-a", "--tdb-b", "--format-a", "--format-b", "--lod-a", "--lod-b", "--rows", "--cols", "--out",
        "--locations", "--eyepoints", "--agl0", "--dz", "--az-start", "--az-step", "--az-count",
        "--pitch-start", "--pitch-step", "--pitch-count", "--box-margin", "--rough-low", "--rough-high",
        "--delta-len-threshold", "--mismatch-ratio-threshold", "--workers",
    ] {
        assert!(out.contains(flag), "missing {flag}");
    }
    let (_, out, _) = run(&["serve", "--help"]);
    for flag in ["--tdb", "--host", "--port", "--static-dir"] {
        assert!(out.contains(flag), "missing {flag}");
    }
}

#[test]
fn served_ids_are_unique_stems() {
    let paths: Vec<PathBuf> = ["a/hills.mesh", "b/hills.asc", "c/ridge.mesh"].iter().map(PathBuf::from).collect();
    assert_eq!(tdb_ids(&paths), ["hills", "hills-2", "ridge"]);
}

#[test]
fn binary_exit_codes_and_worker_env() {
    let bin = env!("CARGO_BIN_EXE_tdbcorr");
    let status = Command::new(bin).args(["info"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));

    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(bin)
        .env("TDBCORR_WORKERS", "3")
        .args(["los", "--tdb-a", &data("hills_a.mesh"), "--tdb-b", &data("hills_b.asc"), "--rows", "1", "--cols", "1"])
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&output.stderr));

    let output = Command::new(bin)
        .env("TDBCORR_WORKERS", "many")
        .args(["info", "--tdb", &data("hills_b.asc")])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_USAGE));
}
