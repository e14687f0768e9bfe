//! Runs every acceptance criterion at its stated tolerance and prints one
//! line per criterion. Only documented unattainable criteria may fail.

use std::path::{Path, PathBuf};
use std::process::Command;

use foliage::Tolerances;
use foliage_cli::criteria::{self, COUNT, KNOWN_UNATTAINED};

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("output directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

/// The installed binary writes identical CSV bytes for one and eight workers.
fn binary_determinism(scratch: &Path) -> Result<(), String> {
    let mut outputs = Vec::new();
    for jobs in ["1", "8"] {
        let dir = scratch.join(format!("bin-jobs-{jobs}"));
        let status = Command::new(env!("CARGO_BIN_EXE_foliage"))
            .args(["spectrum", "--grid", "256", "--jobs", jobs, "--out"])
            .arg(&dir)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("spectrum with {jobs} jobs exited {status}"));
        }
        outputs.push(csv_files(&dir));
    }
    if outputs[0].is_empty() || outputs[0] != outputs[1] {
        return Err("CSV output differs between --jobs 1 and --jobs 8".into());
    }
    Ok(())
}

fn main() {
    let scratch = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let _ = std::fs::remove_dir_all(&scratch);
    std::fs::create_dir_all(&scratch).expect("scratch directory");
    let tol = Tolerances::default();

    let mut unexpected = Vec::new();
    let mut passed = 0;
    for id in 1..=COUNT {
        let o = criteria::run(id, &tol, &scratch.join(format!("c{id}")));
        println!("{}", o.line());
        if o.passed {
            passed += 1;
        } else if o.known_unattained() {
            let why = KNOWN_UNATTAINED.iter().find(|(k, _)| *k == id).map(|(_, w)| *w).unwrap_or("");
            println!("             known unattained: {why}");
        } else {
            unexpected.push(id);
        }
    }
    match binary_determinism(&scratch) {
        Ok(()) => println!("binary determinism PASS (--jobs 1 and 8 agree)"),
        Err(e) => {
            println!("binary determinism FAIL {e}");
            unexpected.push(0);
        }
    }
    println!("{passed}/{COUNT} criteria passed");
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
