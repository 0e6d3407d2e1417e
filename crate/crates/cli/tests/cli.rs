use std::path::Path;
use std::process::{Command, Output};

fn lls(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lls")).args(args).current_dir(dir).output().expect("spawn lls")
}

fn write_pgm(path: &Path, w: usize, h: usize, f: impl Fn(usize, usize) -> u8) {
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    for y in 0..h {
        for x in 0..w {
            bytes.push(f(x, y));
        }
    }
    std::fs::write(path, bytes).unwrap();
}

#[test]
fn bad_magic_exits_with_format_code() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.pgm"), b"P7\n2 2\n255\n").unwrap();
    let out = lls(&["run", "bad.pgm", "-t", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("byte 1"), "{msg}");
}

#[test]
fn unpadded_edge_line_exits_with_geometry_code() {
    let dir = tempfile::tempdir().unwrap();
    write_pgm(&dir.path().join("ramp.pgm"), 8, 8, |x, _| (x * 10) as u8);
    let out = lls(&["run", "ramp.pgm", "-t", "1", "--no-pad"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn zero_time_round_trip_and_report() {
    let dir = tempfile::tempdir().unwrap();
    write_pgm(&dir.path().join("in.pgm"), 12, 12, |x, y| if (3..9).contains(&x) && (4..8).contains(&y) { 30 } else { 10 });
    let out = lls(
        &["run", "in.pgm", "-t", "0", "-o", "out.pgm", "--report", "r.json", "--svg-before", "b.svg", "--tree-json", "t.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(dir.path().join("in.pgm")).unwrap(), std::fs::read(dir.path().join("out.pgm")).unwrap());

    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["t"], 0.0);
    assert_eq!(report["stages"][0]["width"], 12);
    let tree: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(tree["evolved"]["nodes"].as_array().unwrap().len(), 30);
    let svg = std::fs::read_to_string(dir.path().join("b.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn demo_then_short_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = lls(&["demo", "cartoon", "--size", "24", "-o", "cartoon.png"], dir.path());
    assert!(out.status.success());
    let out = lls(
        &["run", "cartoon.png", "-t", "0.5", "--quant", "5", "--precision", "0.5", "-o", "out.png", "--trajectory", "tr.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out.png").exists());
    let csv = std::fs::read_to_string(dir.path().join("tr.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn contrast_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    write_pgm(&dir.path().join("in.pgm"), 10, 10, |x, y| if x > 3 && y > 3 { 20 } else { 5 });
    let out = lls(&["contrast", "in.pgm", "-t", "0.5", "--lut", "affine:2,17"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["increasing"], true);
}

#[test]
fn bad_lut_is_a_parameter_error() {
    let dir = tempfile::tempdir().unwrap();
    write_pgm(&dir.path().join("in.pgm"), 4, 4, |_, _| 0);
    let out = lls(&["contrast", "in.pgm", "-t", "1", "--lut", "cubic:1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
