//! spectrum, family, limitper and floquet.

use foliage::hill::{
    band_spectrum_with, discriminant_trace, floquet_inverse, floquet_transform, limit_periodic_spectrum,
    spectrum_family, BandSpectrum, LimitPeriodicPotential, PeriodicPotential, PotentialRepr,
};
use num_complex::Complex64;

use crate::config::{FamilyArgs, FloquetArgs, LimitperArgs, RunConfig};
use crate::output::{Report, Table};
use crate::CliError;

const SPECTRUM_WINDOW: (f64, f64) = (-1.0, 5.0);
const SPECTRUM_GRID: usize = 1024;
const LIMITPER_WINDOW: (f64, f64) = (-1.0, 4.0);
const LIMITPER_GRID: usize = 512;
const FLOQUET_GRID: usize = 64;
/// Slack on the band-distance bounds, far above the edge bisection error.
const BOUND_SLACK: f64 = 1e-6;

/// p V for a potential V.
pub fn scaled(v: &PeriodicPotential, p: f64) -> PeriodicPotential {
    let repr = match &v.repr {
        PotentialRepr::Fourier(terms) => PotentialRepr::Fourier(
            terms.iter().map(|t| foliage::hill::FourierTerm { k: t.k, cos: p * t.cos, sin: p * t.sin }).collect(),
        ),
        PotentialRepr::Samples(xs) => PotentialRepr::Samples(xs.iter().map(|x| p * x).collect()),
    };
    PeriodicPotential { period: v.period, repr }
}

fn grid_or(cfg: &RunConfig, default: usize) -> Result<usize, CliError> {
    let n = cfg.grid.unwrap_or(default);
    if n < 256 {
        return Err(CliError::Invalid(format!("--grid {n}: at least 256 points required")));
    }
    Ok(n)
}

pub fn bands_table(name: &str, key: &str, spectra: &[(f64, &BandSpectrum)]) -> Table {
    let mut t = Table::new(name, &[key, "band", "lo", "hi", "lo_kind", "hi_kind", "closed_gaps"]);
    for (p, s) in spectra {
        for (i, b) in s.bands.iter().enumerate() {
            t.push(vec![
                (*p).into(),
                i.into(),
                b.lo.into(),
                b.hi.into(),
                b.lo_kind.label().into(),
                b.hi_kind.label().into(),
                b.closed_gaps.len().into(),
            ]);
        }
    }
    t
}

pub fn spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let v = PeriodicPotential::mathieu();
    let window = cfg.window.unwrap_or(SPECTRUM_WINDOW);
    let grid = grid_or(cfg, SPECTRUM_GRID)?;
    let tol = &cfg.tolerances;
    let mut r = Report::default();
    r.param("potential", serde_json::to_value(&v).expect("serializes"));
    r.param("window", vec![window.0, window.1]);
    r.param("grid", grid);
    let s = band_spectrum_with(&v, window, grid, tol.band_edge, tol.ode)?;
    if let Err(e) = s.check_invariants(&v, tol.ode) {
        r.violation(format!("band spectrum: {e}"));
    }
    let trace = discriminant_trace(&v, window, grid, tol.ode)?;
    let mut d = Table::new("discriminant", &["energy", "delta", "delta_prime"]);
    for (e, dl, dp) in trace {
        d.push(vec![e.into(), dl.into(), dp.into()]);
    }
    let mut bands = Table::new("bands", &["band", "lo", "hi", "lo_kind", "hi_kind", "closed_gaps"]);
    for (i, b) in s.bands.iter().enumerate() {
        bands.push(vec![
            i.into(),
            b.lo.into(),
            b.hi.into(),
            b.lo_kind.label().into(),
            b.hi_kind.label().into(),
            b.closed_gaps.len().into(),
        ]);
    }
    r.summary("bands", s.bands.len());
    r.summary("edges", s.edges());
    r.tables = vec![bands, d];
    Ok(r)
}

pub fn family(cfg: &RunConfig, a: &FamilyArgs) -> Result<Report, CliError> {
    if a.points < 2 {
        return Err(CliError::Invalid("--points must be at least 2".into()));
    }
    let v = PeriodicPotential::mathieu();
    let window = cfg.window.unwrap_or(SPECTRUM_WINDOW);
    let grid = grid_or(cfg, SPECTRUM_GRID)?;
    let ps: Vec<f64> = (0..a.points).map(|i| i as f64 / (a.points - 1) as f64).collect();
    let mut r = Report::default();
    r.param("potential", serde_json::to_value(&v).expect("serializes"));
    r.param("parameters", ps.clone());
    r.param("window", vec![window.0, window.1]);
    r.param("grid", grid);
    let rep = spectrum_family(|p| scaled(&v, p), &ps, window, grid, cfg.tolerances.band_edge)?;
    let mut t = Table::new("family", &["p", "q", "distance", "potential_distance", "within"]);
    for pr in &rep.pairs {
        let ok = pr.distance <= pr.potential_distance + BOUND_SLACK;
        t.push(vec![pr.p.into(), pr.q.into(), pr.distance.into(), pr.potential_distance.into(), ok.into()]);
    }
    if !rep.within(BOUND_SLACK) {
        r.violation(format!("band distance exceeds the potential distance by {:e}", rep.max_excess()));
    }
    r.param("bound_slack", BOUND_SLACK);
    r.summary("max_excess", rep.max_excess());
    let spectra: Vec<(f64, &BandSpectrum)> = rep.spectra.iter().map(|(p, s)| (*p, s)).collect();
    r.tables = vec![t, bands_table("family_bands", "p", &spectra)];
    Ok(r)
}

pub fn limitper(cfg: &RunConfig, a: &LimitperArgs) -> Result<Report, CliError> {
    if a.n_max == 0 || a.n_max > 6 {
        return Err(CliError::Invalid("--n-max must lie in 1..=6".into()));
    }
    let lp = LimitPeriodicPotential::default_family(a.n_max);
    lp.check()?;
    let window = cfg.window.unwrap_or(LIMITPER_WINDOW);
    let grid = grid_or(cfg, LIMITPER_GRID)?;
    let mut r = Report::default();
    r.param("n_max", a.n_max);
    r.param("tails", lp.tails.clone());
    r.param("window", vec![window.0, window.1]);
    r.param("grid", grid);
    r.param("bound_slack", BOUND_SLACK);
    let rep = limit_periodic_spectrum(&lp, window, a.n_max, grid, cfg.tolerances.band_edge)?;
    let mut t = Table::new("limitper", &["n", "distance", "bound", "within"]);
    for (n, (d, b)) in rep.distances.iter().zip(&rep.bounds).enumerate() {
        t.push(vec![n.into(), (*d).into(), (*b).into(), (*d <= b + BOUND_SLACK).into()]);
    }
    if !rep.within(BOUND_SLACK) {
        r.violation("band distance of consecutive approximants exceeds the tail bound");
    }
    r.summary("distances", rep.distances.clone());
    r.summary("monotone", rep.monotone);
    let spectra: Vec<(f64, &BandSpectrum)> = rep.spectra.iter().map(|(n, s)| (*n as f64, s)).collect();
    r.tables = vec![t, bands_table("limitper_bands", "n", &spectra)];
    Ok(r)
}

/// Test function f(x + m a) = exp(-m^2 / 8) e^{i m / 3} on |m| <= truncation.
fn floquet_input(truncation: i64) -> Vec<(i64, Complex64)> {
    (-truncation..=truncation)
        .map(|m| (m, Complex64::from_polar((-(m * m) as f64 / 8.0).exp(), m as f64 / 3.0)))
        .collect()
}

pub fn floquet(cfg: &RunConfig, a: &FloquetArgs) -> Result<Report, CliError> {
    if a.truncation < 0 || a.truncation > 4096 {
        return Err(CliError::Invalid("--truncation must lie in 0..=4096".into()));
    }
    if !(a.lattice > 0.0 && a.lattice.is_finite()) {
        return Err(CliError::Invalid("--lattice must be positive".into()));
    }
    let grid = cfg.grid.unwrap_or(FLOQUET_GRID.max(2 * a.truncation as usize + 1));
    let f = floquet_input(a.truncation);
    let mut r = Report::default();
    r.param("truncation", a.truncation);
    r.param("lattice", a.lattice);
    r.param("grid", grid);
    r.param("input", "exp(-m^2/8) exp(i m/3)");
    let t = floquet_transform(&f, a.lattice, grid, a.truncation)?;
    let back = floquet_inverse(&t);
    let mut tt = Table::new("floquet", &["theta", "re", "im"]);
    for (th, v) in t.thetas.iter().zip(&t.values) {
        tt.push(vec![(*th).into(), v.re.into(), v.im.into()]);
    }
    let mut rt = Table::new("roundtrip", &["m", "re", "im", "error"]);
    let mut worst = 0.0f64;
    for ((m, v), (_, orig)) in back.iter().zip(&f) {
        let err = (v - orig).norm();
        worst = worst.max(err);
        rt.push(vec![(*m).into(), v.re.into(), v.im.into(), err.into()]);
    }
    let lhs: f64 = f.iter().map(|(_, c)| c.norm_sqr()).sum();
    let rhs: f64 = t.values.iter().map(|c| c.norm_sqr()).sum::<f64>() / grid as f64;
    let parseval = (lhs - rhs).abs();
    let tol = cfg.tolerances.floquet;
    if worst > tol {
        r.violation(format!("inverse transform misses the input by {worst:e}"));
    }
    if parseval > tol * lhs.max(1.0) {
        r.violation(format!("Parseval identity off by {parseval:e}"));
    }
    r.summary("roundtrip_error", worst);
    r.summary("parseval_error", parseval);
    r.tables = vec![tt, rt];
    Ok(r)
}
