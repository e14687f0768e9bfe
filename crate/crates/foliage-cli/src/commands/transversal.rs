//! transversal, deform, sequence and add.

use std::f64::consts::PI;

use foliage::transversal::fixtures::{example2_tent, example4_flow, example5_planar, seifert};
use foliage::transversal::{
    add_transversals, check_condition_star, check_invariance, default_h_samples, deform_action, isotropy_group,
    transversal_sequence, FoliationModel, HolonomyClass, InvarianceReport, LeafMetric, PlanarAction, SequenceMode,
    SequenceVerdict, Transversal,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{AddArgs, MetricArg, RunConfig, SequenceArgs, SequenceModeArg, TransversalArgs};
use crate::fixtures::Fixture;
use crate::output::{Report, Table};
use crate::CliError;

/// Slope of the flow-transversal used by the example4-flows fixture.
const FLOW_SLOPE: f64 = 1.0;
/// Samples of the deformed planar action compared with the rigid rotation.
const ACTION_SAMPLES: usize = 1000;
const ACTION_SEED: u64 = 11;

pub fn transversal_fixture(f: Fixture) -> Result<(FoliationModel, Transversal), CliError> {
    Ok(match f {
        Fixture::Seifert => seifert()?,
        Fixture::Example2Tent => example2_tent()?,
        Fixture::Example4Flows => example4_flow(FLOW_SLOPE)?,
        Fixture::Example5Planar => example5_planar(PlanarAction::Undeformed)?,
        other => return Err(CliError::Invalid(format!("`{other}` is not a transversal fixture"))),
    })
}

fn class_label(c: &HolonomyClass) -> (&'static str, f64) {
    match c {
        HolonomyClass::Identity => ("identity", f64::NAN),
        HolonomyClass::Shift => ("shift", f64::NAN),
        HolonomyClass::Rotation { angle } => ("rotation", *angle),
        HolonomyClass::NonIsometry { residual } => ("non_isometry", *residual),
    }
}

fn samples_table(name: &str, p: &Transversal) -> Table {
    let mut t = Table::new(name, &["t", "x", "y"]);
    for (s, x) in p.params().into_iter().zip(p.samples()) {
        t.push(vec![s.into(), x[0].into(), x[1].into()]);
    }
    t
}

fn invariance_rows(t: &mut Table, stage: &str, rep: &InvarianceReport) {
    for ((h, hit), d) in rep.tested.iter().zip(&rep.intersects).zip(&rep.displacements) {
        t.push(vec![stage.into(), (*h).into(), (*hit).into(), (*d).into()]);
    }
}

fn fixture_of(fixture: Option<Fixture>) -> Fixture {
    fixture.expect("transversal subcommands have a default fixture")
}

pub fn transversal(cfg: &RunConfig, fixture: Option<Fixture>, a: &TransversalArgs) -> Result<Report, CliError> {
    if !(a.bound > 0.0 && a.bound.is_finite()) {
        return Err(CliError::Invalid("--bound must be positive".into()));
    }
    let (m, p) = transversal_fixture(fixture_of(fixture))?;
    let mut r = Report::default();
    let metric = match a.metric {
        MetricArg::FlowTime => LeafMetric::FlowTime,
        MetricArg::Ambient => LeafMetric::Ambient,
    };
    r.param("model", m.name());
    r.param("metric", serde_json::to_value(metric).expect("serializes"));
    r.param("isotropy_bound", a.bound);
    let star = check_condition_star(&m, &p, metric)?;
    let (class, value) = class_label(&star.holonomy.class);
    r.summary("h_maps_extendable", star.h_maps_extendable);
    r.summary("isometry_ok", star.isometry_ok);
    r.summary("no_turn", star.no_turn);
    r.summary("condition_star", star.passed());
    r.summary("pair_variation", star.pair_variation);
    r.summary("holonomy_class", class);
    r.summary("holonomy_parameter", value.is_finite().then_some(value));
    r.summary("holonomy_residual", star.holonomy.residual);
    r.summary("leaf_period", star.holonomy.leaf_period);

    let mut hol = Table::new("holonomy", &["index", "h"]);
    for (i, h) in star.holonomy.returns.iter().enumerate() {
        hol.push(vec![i.into(), (*h).into()]);
    }
    let inv = check_invariance(&m, &p, &default_h_samples(&m, &p), cfg.tolerances.invariance);
    r.summary("invariant", inv.invariant);
    r.summary("max_displacement", inv.max_displacement());
    let mut it = Table::new("invariance", &["stage", "h", "intersects", "displacement"]);
    invariance_rows(&mut it, "fixture", &inv);
    let iso = isotropy_group(&m, &p, a.bound);
    r.summary("isotropy_generators", iso.generators.clone());
    r.summary("isotropy_discrete", iso.discrete);
    let mut is = Table::new("isotropy", &["h"]);
    for h in &iso.elements {
        is.push(vec![(*h).into()]);
    }
    r.tables = vec![samples_table("transversal", &p), hol, it, is];
    Ok(r)
}

pub fn deform(cfg: &RunConfig, fixture: Option<Fixture>) -> Result<Report, CliError> {
    let f = fixture_of(fixture);
    let (m, p) = transversal_fixture(f)?;
    let tol = cfg.tolerances.invariance;
    let mut r = Report::default();
    r.param("model", m.name());
    let before = check_invariance(&m, &p, &default_h_samples(&m, &p), tol);
    let d = deform_action(&m, &p)?;
    let after = check_invariance(&d, &p, &default_h_samples(&d, &p), tol);
    if !after.invariant {
        r.violation(format!("deformed action leaves P non-invariant (displacement {:e})", after.max_displacement()));
    }
    r.summary("invariant_before", before.invariant);
    r.summary("invariant_after", after.invariant);
    r.summary("max_displacement_before", before.max_displacement());
    r.summary("max_displacement_after", after.max_displacement());
    let mut it = Table::new("invariance", &["stage", "h", "intersects", "displacement"]);
    invariance_rows(&mut it, "before", &before);
    invariance_rows(&mut it, "after", &after);
    let mut tables = vec![it];
    if let FoliationModel::TimeChanged(tc) = &d {
        let mut t = Table::new("time_change", &["t", "first_return", "beta"]);
        for (s, h) in tc.grid.iter().zip(&tc.returns) {
            t.push(vec![(*s).into(), (*h).into(), (h / tc.h1_base).into()]);
        }
        r.summary("base_return", tc.h1_base);
        tables.push(t);
    }
    if f == Fixture::Example5Planar {
        let (t, worst) = planar_action_table(&d);
        r.param("action_samples", ACTION_SAMPLES);
        r.param("action_seed", ACTION_SEED);
        r.summary("rigid_rotation_error", worst);
        if worst > tol {
            r.violation(format!("deformed planar action differs from e^(ih) x by {worst:e}"));
        }
        tables.push(t);
    }
    r.tables = tables;
    Ok(r)
}

/// Deformed action against the rigid rotation e^{ih} x at seeded samples in
/// the annulus swept by the ray.
pub fn planar_action_table(d: &FoliationModel) -> (Table, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(ACTION_SEED);
    let mut t = Table::new("action", &["r", "theta", "h", "x", "y", "error"]);
    let mut worst = 0.0f64;
    for _ in 0..ACTION_SAMPLES {
        let (rad, th, h) = (rng.gen_range(0.6..1.9), rng.gen_range(0.0..2.0 * PI), rng.gen_range(-10.0..10.0));
        let q = [rad * th.cos(), rad * th.sin()];
        let img = d.act(h, q);
        let (s, c) = h.sin_cos();
        let e = [c * q[0] - s * q[1], s * q[0] + c * q[1]];
        let err = (img[0] - e[0]).hypot(img[1] - e[1]);
        worst = worst.max(err);
        t.push(vec![rad.into(), th.into(), h.into(), img[0].into(), img[1].into(), err.into()]);
    }
    (t, worst)
}

/// sup |y| over the samples, with y taken mod 1 on compact charts.
pub fn flat_deviation(p: &Transversal) -> f64 {
    p.samples().iter().map(|s| (s[1] - s[1].round()).abs()).fold(0.0, f64::max)
}

pub fn sequence(cfg: &RunConfig, fixture: Option<Fixture>, a: &SequenceArgs) -> Result<Report, CliError> {
    if a.iterations == 0 || a.iterations > 10_000 {
        return Err(CliError::Invalid("--iterations must lie in 1..=10000".into()));
    }
    let (m, p) = transversal_fixture(fixture_of(fixture))?;
    let mode = match a.mode {
        SequenceModeArg::Halving => SequenceMode::Halving,
        SequenceModeArg::Geometric => SequenceMode::Forced((1..=a.iterations).map(|k| 0.5f64.powi(k as i32)).collect()),
        SequenceModeArg::Harmonic => SequenceMode::Forced((1..=a.iterations).map(|k| 1.0 / k as f64).collect()),
    };
    let mut r = Report::default();
    r.param("model", m.name());
    r.param("mode", serde_json::to_value(a.mode).expect("serializes"));
    r.param("iterations", a.iterations);
    let (seq, rep) = transversal_sequence(&m, &p, a.iterations, &mode)?;
    let tol = &cfg.tolerances;
    let last_sup = rep.sup_steps.last().copied().unwrap_or(f64::INFINITY);
    let verdict = if rep.cauchy_gap < tol.sequence_cauchy && last_sup < tol.sequence_sup {
        SequenceVerdict::Converged
    } else {
        SequenceVerdict::Diverged
    };
    let mut t = Table::new("sequence", &["k", "step", "partial_sum", "sup_step", "deviation"]);
    for k in 0..rep.steps.len() {
        t.push(vec![
            (k + 1).into(),
            rep.steps[k].into(),
            rep.partial_sums[k].into(),
            rep.sup_steps[k].into(),
            flat_deviation(&seq[k + 1]).into(),
        ]);
    }
    let last = seq.last().expect("sequence contains P_0");
    r.summary("verdict", serde_json::to_value(verdict).expect("serializes"));
    r.summary("cauchy_gap", rep.cauchy_gap);
    r.summary("final_sup_step", last_sup);
    r.summary("initial_deviation", flat_deviation(&seq[0]));
    r.summary("final_deviation", flat_deviation(last));
    r.tables = vec![t, samples_table("final", last)];
    Ok(r)
}

pub fn add(cfg: &RunConfig, a: &AddArgs) -> Result<Report, CliError> {
    if !(a.a.is_finite() && a.b.is_finite()) {
        return Err(CliError::Invalid("slopes must be finite".into()));
    }
    let (m, z) = example4_flow(0.0)?;
    let (_, g) = example4_flow(a.a)?;
    let (_, h) = example4_flow(a.b)?;
    let (_, expected) = example4_flow(a.a + a.b)?;
    let mut r = Report::default();
    r.param("model", m.name());
    r.param("a", a.a);
    r.param("b", a.b);
    let s = add_transversals(&g, &h, &z, &m)?;
    let err = s.sup_distance(&m, &expected);
    if err > cfg.tolerances.invariance {
        r.violation(format!("sum differs from the slope {} flow by {err:e}", a.a + a.b));
    }
    let inv = check_invariance(&m, &s, &default_h_samples(&m, &s), cfg.tolerances.invariance);
    if !inv.invariant {
        r.violation(format!("sum is not invariant (displacement {:e})", inv.max_displacement()));
    }
    r.summary("sup_error", err);
    r.summary("sum_invariant", inv.invariant);
    let mut t = Table::new("sum", &["t", "x", "y", "expected_x", "expected_y"]);
    for ((u, x), e) in s.params().into_iter().zip(s.samples()).zip(expected.samples()) {
        t.push(vec![u.into(), x[0].into(), x[1].into(), e[0].into(), e[1].into()]);
    }
    r.tables = vec![t];
    Ok(r)
}
