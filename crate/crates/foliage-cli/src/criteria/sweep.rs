//! Seeded randomized sweep over the module invariants, and the byte-level
//! determinism check across worker counts.

use std::path::Path;

use foliage::circle::{iterate, make_rotation, rotation_number, CircleMap};
use foliage::hill::{band_spectrum, floquet_inverse, floquet_transform, hausdorff_bands, monodromy, FourierTerm, PeriodicPotential};
use foliage::stats::{profile, ProfileConfig};
use foliage::transversal::{classify_holonomy, HolonomyClass};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

const CASES: usize = 100;
const SEED: u64 = 20_240_901;

/// Subcommand runs compared across `--jobs 1` and `--jobs 8`.
const DETERMINISM_RUNS: &[(&str, &[&str])] = &[
    ("spectrum", &["spectrum", "--grid", "256"]),
    ("stats", &["stats", "--n", "20000"]),
    ("family", &["family", "--points", "3", "--grid", "256"]),
    ("sequence", &["sequence", "--iterations", "3"]),
];

type Property = fn(&mut ChaCha8Rng) -> Result<(), String>;

fn random_potential(rng: &mut ChaCha8Rng) -> PeriodicPotential {
    let terms = (1..=3).map(|k| FourierTerm { k, cos: rng.gen_range(-2.0..2.0), sin: 0.0 }).collect();
    PeriodicPotential::fourier(2.0 * std::f64::consts::PI, terms).expect("positive period")
}

fn conjugacy(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let alpha = rng.gen_range(0.01..0.99);
    let f = make_rotation(alpha);
    let h = CircleMap::sine(0.0, 0.2 / (2.0 * std::f64::consts::PI)).map_err(|e| e.to_string())?;
    let g = h.compose(&f.compose(&h.inverse()));
    // Short orbits: the composed inverse is the cost here.
    let tol = 1e-3;
    let a = rotation_number(&f, 2_000, tol).map_err(|e| e.to_string())?;
    let b = rotation_number(&g, 2_000, tol).map_err(|e| e.to_string())?;
    if (a - b).abs() > 2.0 * tol {
        return Err(format!("rotation numbers {a} and {b} of conjugate maps (alpha {alpha})"));
    }
    Ok(())
}

fn profiles(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let alpha = rng.gen_range(0.01..0.99);
    let x = rng.gen_range(0.0..1.0);
    let t = iterate(&make_rotation(alpha), 0.0, 4096);
    let config = ProfileConfig { depth: 8, ..ProfileConfig::default() };
    profile(&t, x, &config).map_err(|e| e.to_string())?.check_invariants()
}

fn determinant(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let v = random_potential(rng);
    let e = v.sup_norm_bound() + rng.gen_range(0.0..50.0);
    let m = monodromy(&v, e, 1e-10).map_err(|e| e.to_string())?;
    let det = m.determinant();
    if (det - 1.0).abs() > 1e-8 {
        return Err(format!("det = {det} at E = {e}"));
    }
    Ok(())
}

fn floquet_round_trip(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let trunc = rng.gen_range(0..=8i64);
    let f: Vec<(i64, Complex64)> =
        (-trunc..=trunc).map(|m| (m, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
    let grid = rng.gen_range(2 * trunc as usize + 1..64);
    let t = floquet_transform(&f, 1.0, grid, trunc).map_err(|e| e.to_string())?;
    let worst = floquet_inverse(&t).iter().zip(&f).map(|(a, b)| (a.1 - b.1).norm()).fold(0.0, f64::max);
    if worst > 1e-10 {
        return Err(format!("round trip error {worst:e}"));
    }
    Ok(())
}

fn rigid_motion(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let th = rng.gen_range(0.1..6.0);
    let b = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let pts: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
    let (s, c) = f64::sin_cos(th);
    let img: Vec<Vec<f64>> = pts.iter().map(|p| vec![c * p[0] - s * p[1] + b[0], s * p[0] + c * p[1] + b[1]]).collect();
    let h = classify_holonomy(&pts, &img).map_err(|e| e.to_string())?;
    if h.residual > 1e-8 || !matches!(h.class, HolonomyClass::Rotation { .. }) {
        return Err(format!("rigid motion by {th} classified as {:?} (residual {:e})", h.class, h.residual));
    }
    Ok(())
}

fn band_continuity(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (va, vb) = (random_potential(rng), random_potential(rng));
    let w = (-1.0, 3.0);
    let m = va.sup_distance(&vb) + 1.0;
    let sa = band_spectrum(&va, (w.0 - m, w.1 + m), 256, 1e-10).map_err(|e| e.to_string())?;
    let sb = band_spectrum(&vb, (w.0 - m, w.1 + m), 256, 1e-10).map_err(|e| e.to_string())?;
    let d = hausdorff_bands(&sa, &sb, w);
    if d > va.sup_distance(&vb) + 1e-6 {
        return Err(format!("band distance {d} exceeds potential distance {}", va.sup_distance(&vb)));
    }
    Ok(())
}

const PROPERTIES: &[(&str, Property)] = &[
    ("rotation number conjugacy", conjugacy),
    ("frequency profile bounds", profiles),
    ("monodromy determinant", determinant),
    ("floquet round trip", floquet_round_trip),
    ("holonomy of rigid motions", rigid_motion),
    ("band continuity", band_continuity),
];

/// CSV bytes of every run must agree between one and eight workers.
fn determinism(scratch: &Path) -> Result<Vec<String>, CliError> {
    let mut failures = Vec::new();
    for (name, args) in DETERMINISM_RUNS {
        let mut outputs = Vec::new();
        for jobs in [1, 8] {
            let dir = scratch.join(format!("jobs-{jobs}")).join(name);
            let mut argv: Vec<String> = vec!["foliage".into()];
            argv.extend(args.iter().map(|s| s.to_string()));
            argv.extend(["--jobs".into(), jobs.to_string(), "--out".into(), dir.display().to_string()]);
            let code = crate::run(argv);
            if code != 0 {
                failures.push(format!("{name} with {jobs} jobs exited {code}"));
            }
            let mut files: Vec<(String, Vec<u8>)> = Vec::new();
            for entry in std::fs::read_dir(&dir)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "csv") {
                    let fname = path.file_name().expect("file").to_string_lossy().into_owned();
                    files.push((fname, std::fs::read(&path)?));
                }
            }
            files.sort();
            outputs.push(files);
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            failures.push(format!("{name}: CSV output differs between 1 and 8 jobs"));
        }
    }
    Ok(failures)
}

pub fn run(scratch: &Path) -> Result<(bool, String), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();
    for (name, prop) in PROPERTIES {
        for case in 0..CASES {
            if let Err(e) = prop(&mut rng) {
                failures.push(format!("{name} case {case}: {e}"));
                break;
            }
        }
    }
    let det = determinism(scratch)?;
    let ok = failures.is_empty() && det.is_empty();
    let detail = if ok {
        format!(
            "{} properties x {CASES} seeded cases green; CSV identical for --jobs 1 and 8 on {} runs",
            PROPERTIES.len(),
            DETERMINISM_RUNS.len()
        )
    } else {
        failures.into_iter().chain(det).collect::<Vec<_>>().join("; ")
    };
    Ok((ok, detail))
}
