//! End-to-end behavior of the `foliage` binary: exit codes, config layering
//! and output artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn foliage(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foliage")).args(args).arg("--out").arg(out).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let o = Command::new(env!("CARGO_BIN_EXE_foliage")).arg(flag).output().unwrap();
        assert_eq!(code(&o), 0, "{flag}");
    }
}

#[test]
fn invalid_input_exits_three() {
    let dir = scratch("invalid");
    let cases: &[&[&str]] = &[
        &["bogus"],
        &["spectrum", "--grid", "10"],
        &["rotation", "--window", "0", "1"],
        &["floquet", "--tol.nonexistent", "1e-3"],
        &["floquet", "--tol.floquet=-1"],
        &["rotation", "--fixture", "mathieu-q1"],
        &["spectrum", "--window", "3", "1"],
        &["rotation", "--jobs", "0"],
    ];
    for args in cases {
        assert_eq!(code(&foliage(args, &dir)), 3, "{args:?}");
    }
}

#[test]
fn unknown_config_key_exits_three() {
    let dir = scratch("bad-config");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "gird = 256\n").unwrap();
    let o = foliage(&["floquet", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(code(&o), 3);
}

#[test]
fn turning_transversal_sequence_is_a_violation() {
    let dir = scratch("turn");
    let o = foliage(&["sequence", "--fixture", "seifert", "--iterations", "3"], &dir);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_sits_under_flags() {
    let dir = scratch("layering");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "grid = 300\nformat = [\"json\"]\n[tol]\nfloquet = 1e-9\nrotation = 1e-7\n").unwrap();
    let out = dir.join("out");
    let o = foliage(&["floquet", "--config", cfg.to_str().unwrap(), "--grid", "128", "--tol.floquet", "1e-8"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(out.join("manifest.json"));
    assert_eq!(m["config"]["grid"], 128);
    assert_eq!(m["tolerances"]["floquet"], 1e-8);
    assert_eq!(m["tolerances"]["rotation"], 1e-7);
    assert!(out.join("floquet.json").exists());
    assert!(!out.join("floquet.csv").exists());
}

#[test]
fn manifest_echoes_every_tolerance() {
    let dir = scratch("manifest");
    let o = foliage(&["floquet"], &dir);
    assert_eq!(code(&o), 0);
    let m = json(dir.join("manifest.json"));
    let tols = m["tolerances"].as_object().unwrap();
    for name in ["rotation", "invariance", "sequence_sup", "floquet", "band_edge", "ode"] {
        assert!(tols.contains_key(name), "{name} missing");
    }
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&"floquet.csv") && outputs.contains(&"summary.json"));
    let s = json(dir.join("summary.json"));
    assert_eq!(s["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn json_tables_mirror_csv() {
    let dir = scratch("formats");
    let o = foliage(&["floquet", "--truncation", "3", "--format", "csv,json"], &dir);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.join("roundtrip.csv")).unwrap();
    let j = json(dir.join("roundtrip.json"));
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let cols: Vec<&str> = j["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(header, cols);
    let rows = j["rows"].as_array().unwrap();
    assert_eq!(rows.len(), lines.count());
    assert_eq!(rows.len(), 7);
}

#[test]
fn spectrum_writes_bands_and_discriminant() {
    let dir = scratch("spectrum");
    let o = foliage(&["spectrum", "--fixture", "mathieu-q1", "--window", "-1", "5", "--grid", "256"], &dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let bands = std::fs::read_to_string(dir.join("bands.csv")).unwrap();
    assert!(bands.lines().count() >= 4);
    let disc = std::fs::read_to_string(dir.join("discriminant.csv")).unwrap();
    assert_eq!(disc.lines().count(), 257);
}
