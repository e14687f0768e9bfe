//! rotation, denjoy and stats.

use std::sync::Arc;

use foliage::circle::{closest_returns_of, convergents, iterate, make_rotation, rotation_number, CircleMap};
use foliage::denjoy::{DenjoyGapSpec, DenjoyMap};
use foliage::stats::{
    box_dimension, compare_growth, decomposition_profile, frequency_nu_estimate, maximal_set, profile, Classification,
    ProfileConfig,
};
use serde_json::json;

use crate::config::{DenjoyArgs, RotationArgs, RunConfig, StatsArgs};
use crate::fixtures::Fixture;
use crate::output::{Report, Table};
use crate::CliError;

pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// The circle map of a fixture, its reference rotation number and a start point.
pub fn circle_fixture(f: Fixture) -> Result<(CircleMap, f64, f64), CliError> {
    match f {
        Fixture::GoldenRotation => Ok((make_rotation(golden()), golden(), 0.0)),
        Fixture::DenjoyDefault => {
            let spec = DenjoyGapSpec::default();
            let d = Arc::new(DenjoyMap::build(&spec)?);
            let x0 = d.exterior_point();
            Ok((CircleMap::Denjoy(d), spec.alpha, x0))
        }
        other => Err(CliError::Invalid(format!("`{other}` is not a circle-map fixture"))),
    }
}

/// Map, reference alpha and start point from `--alpha` or the fixture.
fn select_map(alpha: Option<f64>, fixture: Option<Fixture>, report: &mut Report) -> Result<(CircleMap, f64, f64), CliError> {
    match alpha {
        Some(a) if !a.is_finite() => Err(CliError::Invalid("--alpha must be finite".into())),
        Some(a) => {
            report.param("map", "rotation");
            report.param("alpha", a);
            Ok((make_rotation(a), a, 0.0))
        }
        None => {
            let f = fixture.expect("circle subcommands have a default fixture");
            let (m, a, x0) = circle_fixture(f)?;
            report.param("map", f.name());
            report.param("alpha", a);
            Ok((m, a, x0))
        }
    }
}

pub fn rotation(cfg: &RunConfig, fixture: Option<Fixture>, a: &RotationArgs) -> Result<Report, CliError> {
    let mut r = Report::default();
    let (map, alpha, x0) = select_map(a.alpha, fixture, &mut r)?;
    let denjoy = a.alpha.is_none() && fixture == Some(Fixture::DenjoyDefault);
    let n = a.n.unwrap_or(if denjoy { 1_000_000 } else { 100_000 });
    if n < 2 {
        return Err(CliError::Invalid("--n must be at least 2".into()));
    }
    r.param("n", n);
    r.param("x0", x0);
    let tol = cfg.tolerances.rotation;
    let rho = rotation_number(&map, n, tol)?;
    let trace = iterate(&map, x0, n);
    let mut t = Table::new("closest_returns", &["index", "n", "x_n", "distance"]);
    for (i, n) in closest_returns_of(&trace).into_iter().enumerate() {
        let x = trace.points[n];
        t.push(vec![i.into(), n.into(), x.into(), circle_dist(x, x0).into()]);
    }
    let mut c = Table::new("convergents", &["p", "q"]);
    for (p, q) in convergents(rho, n as u64) {
        c.push(vec![p.into(), (q as usize).into()]);
    }
    let mut s = Table::new("rotation", &["n", "rotation_number", "reference", "error", "tolerance"]);
    s.push(vec![n.into(), rho.into(), alpha.into(), (rho - alpha).abs().into(), tol.into()]);
    r.summary("rotation_number", rho);
    r.summary("reference", alpha);
    r.summary("closest_returns", t.rows.len());
    r.tables = vec![s, t, c];
    Ok(r)
}

pub fn denjoy(cfg: &RunConfig, a: &DenjoyArgs) -> Result<Report, CliError> {
    let mut spec = DenjoyGapSpec::default();
    if let Some(m) = a.m {
        spec.m = m;
    }
    let mut r = Report::default();
    r.param("spec", serde_json::to_value(&spec).expect("spec serializes"));
    r.param("n", a.n);
    let d = Arc::new(DenjoyMap::build(&spec)?);
    let map = CircleMap::Denjoy(d.clone());
    let m = d.truncation();
    let mut gaps = Table::new("gaps", &["k", "left", "right", "length", "gap_map_ok"]);
    let mut bad = Vec::new();
    for k in -m..=m {
        let (lo, hi) = d.gap(k);
        let ok = d.gap_map(k).check(64);
        if !ok {
            bad.push(k);
        }
        gaps.push(vec![k.into(), lo.into(), hi.into(), d.length(k).into(), ok.into()]);
    }
    if !bad.is_empty() {
        r.violation(format!("gap maps fail their derivative bounds at k = {bad:?}"));
    }
    let tol = cfg.tolerances.rotation;
    let (rho, err) = match rotation_number(&map, a.n, tol) {
        Ok(rho) => (rho, (rho - spec.alpha).abs()),
        Err(e) => {
            r.violation(format!("rotation number: {e}"));
            (f64::NAN, f64::NAN)
        }
    };
    if err > tol {
        r.violation(format!("rotation number {rho} differs from alpha by {err:e} > {tol:e}"));
    }
    r.summary("alpha", spec.alpha);
    r.summary("truncation", m);
    r.summary("materialized_length", d.materialized_length());
    r.summary("rotation_number", json!(finite_or_null(rho)));
    r.summary("rotation_error", json!(finite_or_null(err)));
    r.summary("gap_maps_ok", bad.is_empty());
    r.summary("exterior_point", d.exterior_point());
    r.tables = vec![gaps];
    Ok(r)
}

fn finite_or_null(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn classification_label(c: &Classification) -> (&'static str, f64) {
    match c {
        Classification::IsolatedPoint => ("isolated", f64::NAN),
        Classification::LimitPoint { gauge_slope } => ("limit", *gauge_slope),
    }
}

pub fn stats(cfg: &RunConfig, fixture: Option<Fixture>, a: &StatsArgs) -> Result<Report, CliError> {
    if !(a.eps > 0.0 && a.eps < 0.5) {
        return Err(CliError::Invalid("--eps must lie in (0, 1/2)".into()));
    }
    if a.depth == 0 || a.depth > 40 {
        return Err(CliError::Invalid("--depth must lie in 1..=40".into()));
    }
    let mut r = Report::default();
    let (map, _, x0) = select_map(a.alpha, fixture, &mut r)?;
    let window = cfg.window.unwrap_or((0.0, 1.0));
    r.param("n", a.n);
    r.param("x0", x0);
    r.param("eps", a.eps);
    r.param("depth", a.depth);
    r.param("points", a.x.clone());
    r.param("window", vec![window.0, window.1]);
    let trace = iterate(&map, x0, a.n);

    let config = ProfileConfig { depth: a.depth, ..ProfileConfig::default() };
    r.param("eps_grid", config.eps_grid.clone());
    let mut nu = Table::new("profile", &["point", "eps", "nu"]);
    let mut counting = Table::new("counting", &["point", "eps", "n", "count"]);
    let mut gauge = Table::new("gauge", &["point", "k", "value"]);
    let mut class = Table::new("classification", &["point", "class", "gauge_slope", "nu_limit_exists"]);
    let mut profiles = Vec::new();
    for &x in &a.x {
        if !(0.0..1.0).contains(&x) {
            return Err(CliError::Invalid(format!("profile point {x} is not in [0, 1)")));
        }
        let p = profile(&trace, x, &config)?;
        if let Err(e) = p.check_invariants() {
            r.violation(format!("profile at {x}: {e}"));
        }
        for (i, &e) in p.eps.iter().enumerate() {
            nu.push(vec![x.into(), e.into(), p.nu[i].into()]);
            for &(n, c) in &p.counting[i] {
                counting.push(vec![x.into(), e.into(), n.into(), c.into()]);
            }
        }
        for (k, &g) in p.gauge.iter().enumerate() {
            gauge.push(vec![x.into(), (k + 1).into(), g.into()]);
        }
        let est = frequency_nu_estimate(&trace, x, a.eps)?;
        let (label, slope) = classification_label(&p.classification);
        class.push(vec![x.into(), label.into(), slope.into(), est.converged(cfg.tolerances.consistency_gap).into()]);
        profiles.push(p);
    }
    let mut order = Table::new("order", &["point", "other", "relation"]);
    for p in &profiles {
        for q in &profiles {
            order.push(vec![p.x.into(), q.x.into(), format!("{:?}", compare_growth(p, q)).to_lowercase().into()]);
        }
    }

    let m = maximal_set(&[&trace], a.eps, a.depth)?;
    let mut sets = Table::new("maximal", &["set", "x"]);
    for (name, xs) in [("x_max", &m.x_max), ("x_min", &m.x_min)] {
        let mut xs = xs.clone();
        xs.sort_by(f64::total_cmp);
        for x in xs {
            sets.push(vec![name.into(), x.into()]);
        }
    }
    let scales: Vec<f64> = (0..8).map(|i| 0.1 * 0.5f64.powi(i)).collect();
    let dim = box_dimension(&trace.points, &scales)?;
    r.param("box_scales", scales);
    r.summary("x_max_size", m.x_max.len());
    r.summary("x_min_size", m.x_min.len());
    r.summary("box_dimension", dim);
    match decomposition_profile(&trace, window, a.eps) {
        Ok(dec) => r.summary("decomposition", serde_json::to_value(dec).expect("serializes")),
        Err(e) => r.summary("decomposition", format!("unavailable: {e}")),
    }
    r.summary(
        "classifications",
        profiles.iter().map(|p| classification_label(&p.classification).0).collect::<Vec<_>>(),
    );
    r.tables = vec![nu, counting, gauge, class, order, sets];
    Ok(r)
}
