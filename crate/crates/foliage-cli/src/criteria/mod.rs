//! The twelve acceptance criteria, each checked at its stated tolerance.

mod sweep;

use std::sync::Arc;
use std::time::Instant;

use foliage::circle::{closest_return_times, iterate, make_rotation, omega_limit_set, rotation_number, CircleMap};
use foliage::denjoy::{DenjoyGapSpec, DenjoyMap};
use foliage::hill::{
    band_spectrum_with, discriminant_trace, limit_periodic_spectrum, spectrum_family, LimitPeriodicPotential,
    PeriodicPotential,
};
use foliage::stats::{box_dimension, distance_to_net, growth_gauge, maximal_set};
use foliage::transversal::fixtures::{example2_tent, example5_planar, seifert, tent_slope, torus_meridian};
use foliage::transversal::{
    check_condition_star, check_invariance, default_h_samples, deform_action, transversal_sequence, HolonomyClass,
    LeafMetric, PlanarAction, SequenceMode, SequenceVerdict,
};
use foliage::Tolerances;
use serde::Serialize;

use crate::commands::{flat_deviation, golden, planar_action_table, scaled};
use crate::config::{ReproArgs, RunConfig};
use crate::output::{Report, Table};
use crate::CliError;

/// Criteria the faithful implementation does not meet, with the reason.
pub const KNOWN_UNATTAINED: &[(usize, &str)] = &[(
    9,
    "the halving scheme on the tent fixture reaches sup |y| of about 3.8e-3 after 40 iterations, not 1e-3",
)];

pub const COUNT: usize = 12;

/// Lowest band edges of V = 2 cos x in [-1, 5] from the 64-mode periodic and
/// antiperiodic Fourier matrices.
pub const MATHIEU_EDGES: [f64; 7] = [
    0.5795020425268126,
    0.6867202567970645,
    1.7072687086415892,
    2.31536153302707,
    2.667756775880467,
    4.113008822531186,
    4.162454726703317,
];

const FIBONACCI: [usize; 19] = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181, 6765];

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn known_unattained(&self) -> bool {
        KNOWN_UNATTAINED.iter().any(|(id, _)| *id == self.id)
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {:<28} {} ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub fn name(id: usize) -> &'static str {
    match id {
        1 => "free discriminant",
        2 => "mathieu bands",
        3 => "cosine family continuity",
        4 => "limit-periodic convergence",
        5 => "fibonacci returns",
        6 => "denjoy fixture",
        7 => "kronecker maximality",
        8 => "planar deformation",
        9 => "tent sequence",
        10 => "seifert detection",
        11 => "property sweep and determinism",
        12 => "dimension estimates",
        _ => "unknown",
    }
}

type Check = Result<(bool, String), CliError>;

/// Runs criterion `id` (1-12). `scratch` receives the determinism runs.
pub fn run(id: usize, tol: &Tolerances, scratch: &std::path::Path) -> Outcome {
    let start = Instant::now();
    let res = match id {
        1 => free_discriminant(tol),
        2 => mathieu_bands(tol),
        3 => cosine_family(tol),
        4 => limit_periodic(tol),
        5 => fibonacci(),
        6 => denjoy_fixture(),
        7 => kronecker(),
        8 => planar_deformation(),
        9 => tent_sequence(),
        10 => seifert_detection(),
        11 => sweep::run(scratch),
        12 => dimensions(),
        _ => Err(CliError::Invalid(format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match res {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome { id, name: name(id), passed, detail, seconds }
}

fn timed(passed: bool, detail: String, seconds: f64, limit: f64) -> (bool, String) {
    let ok = seconds < limit;
    (passed && ok, format!("{detail}; runtime {seconds:.2} s (limit {limit} s)"))
}

fn free_discriminant(tol: &Tolerances) -> Check {
    let start = Instant::now();
    let trace = discriminant_trace(&PeriodicPotential::zero(1.0), (0.0, 25.0), 256, tol.ode)?;
    let err = trace.iter().map(|&(e, d, _)| (d - 2.0 * e.sqrt().cos()).abs()).fold(0.0, f64::max);
    Ok(timed(err < 1e-7, format!("max |Delta - 2 cos sqrt E| = {err:.3e} (< 1e-7)"), start.elapsed().as_secs_f64(), 5.0))
}

fn mathieu_bands(tol: &Tolerances) -> Check {
    let start = Instant::now();
    let v = PeriodicPotential::mathieu();
    let window = (-1.0, 5.0);
    let s = band_spectrum_with(&v, window, 1024, tol.band_edge, tol.ode)?;
    let edges = s.edges();
    if edges.len() < 4 {
        return Ok((false, format!("only {} edges found", edges.len())));
    }
    let err = edges.iter().zip(&MATHIEU_EDGES).take(4).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // Delta' at grid samples strictly inside each band, away from closed gaps.
    let trace = discriminant_trace(&v, window, 1024, tol.ode)?;
    let margin = 1e-3;
    let min_slope = s
        .bands
        .iter()
        .flat_map(|b| {
            trace.iter().filter(move |(e, _, _)| {
                *e > b.lo + margin && *e < b.hi - margin && b.closed_gaps.iter().all(|g| (e - g).abs() > margin)
            })
        })
        .map(|t| t.2.abs())
        .fold(f64::INFINITY, f64::min);
    let nonzero = min_slope > 0.0 && min_slope.is_finite();
    Ok(timed(
        err < 1e-4 && nonzero,
        format!("lowest four edges within {err:.3e} of the oracle (< 1e-4); min |Delta'| inside bands {min_slope:.3e}"),
        start.elapsed().as_secs_f64(),
        30.0,
    ))
}

fn cosine_family(tol: &Tolerances) -> Check {
    let v = PeriodicPotential::mathieu();
    let ps: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
    let rep = spectrum_family(|p| scaled(&v, p), &ps, (-1.0, 5.0), 1024, tol.band_edge)?;
    let ok = rep.within(1e-4) && rep.pairs.len() == 10;
    Ok((ok, format!("max(d_H - ||dV||) = {:.3e} over {} pairs (<= 1e-4)", rep.max_excess(), rep.pairs.len())))
}

fn limit_periodic(tol: &Tolerances) -> Check {
    let start = Instant::now();
    let lp = LimitPeriodicPotential::default_family(3);
    lp.check()?;
    let rep = limit_periodic_spectrum(&lp, (-1.0, 4.0), 3, 512, tol.band_edge)?;
    let bounded = rep.distances.iter().enumerate().all(|(n, d)| *d <= 4.0 / 3.0 * 0.25f64.powi(n as i32) + 1e-3);
    let ds: Vec<String> = rep.distances.iter().map(|d| format!("{d:.3e}")).collect();
    Ok(timed(
        rep.monotone && bounded,
        format!("d_H = [{}], monotone {}, within (4/3) 4^-n + 1e-3: {bounded}", ds.join(", "), rep.monotone),
        start.elapsed().as_secs_f64(),
        180.0,
    ))
}

fn fibonacci() -> Check {
    let f = make_rotation(golden());
    let r = closest_return_times(&f, 0.0, 10_000);
    let exact = r == FIBONACCI;
    let g = growth_gauge(&iterate(&f, 0.0, 10_000), 0.0, 10)?;
    let phi = 1.0 + golden();
    let worst = (3..=10)
        .map(|k| g[k as usize - 1] as f64 - (5f64.sqrt() * 2f64.powi(k)).ln() / phi.ln())
        .fold(f64::INFINITY, f64::min);
    Ok((
        exact && worst >= 0.0,
        format!("returns equal Fibonacci: {exact}; min f0 - log_phi(sqrt5 2^k) over k = 3..10: {worst:.3}"),
    ))
}

fn denjoy_fixture() -> Check {
    let spec = DenjoyGapSpec::default();
    let d = Arc::new(DenjoyMap::build(&spec)?);
    let f = CircleMap::Denjoy(d.clone());
    let m = d.truncation();
    let circle = |a: f64, b: f64| {
        let t = (a - b).rem_euclid(1.0);
        t.min(1.0 - t)
    };
    let mut invariants = true;
    for k in -m..=m {
        let (a, b) = d.gap(k);
        invariants &= d.gap_map(k).check(64);
        invariants &= (d.derivative(a, true) - d.derivative(a, false)).abs() < 1e-8;
        invariants &= (d.derivative(b, true) - d.derivative(b, false)).abs() < 1e-8;
        if k < m {
            let (c, e) = d.gap(k + 1);
            invariants &= circle(f.apply(a), c) < 1e-10 && circle(f.apply(b), e) < 1e-10;
        }
    }
    let rho = rotation_number(&f, 1_000_000, 1e-6)?;
    let rho_err = (rho - spec.alpha).abs();
    let eps = 1e-3;
    let trace = iterate(&f, d.exterior_point(), 200_000);
    let omega = omega_limit_set(&trace, eps)?;
    let avoids = omega.iter().all(|&x| d.gap_interior(x, 1e-12).is_none());
    let mut xmax = maximal_set(&[&trace], eps, 8)?.x_max;
    xmax.sort_by(f64::total_cmp);
    let worst = (-m..=m)
        .flat_map(|k| {
            let (a, b) = d.gap(k);
            [a, b]
        })
        .map(|x| distance_to_net(&xmax, x))
        .fold(0.0, f64::max);
    Ok((
        invariants && rho_err < 1e-6 && avoids && worst <= eps,
        format!(
            "M = {m}: gap invariants {invariants}; |rho - alpha| = {rho_err:.2e}; omega avoids gaps {avoids}; \
             max endpoint distance to X_max {worst:.2e} (<= 1e-3)"
        ),
    ))
}

fn kronecker() -> Check {
    let eps = 1e-2;
    let t = iterate(&make_rotation(golden()), 0.0, 100_000);
    let m = maximal_set(&[&t], eps, 6)?;
    let (mut xmax, mut xmin) = (m.x_max, m.x_min);
    xmax.sort_by(f64::total_cmp);
    xmin.sort_by(f64::total_cmp);
    let cover = |s: &[f64]| (0..1000).map(|i| distance_to_net(s, i as f64 / 1000.0)).fold(0.0, f64::max);
    let (a, b) = (cover(&xmax), cover(&xmin));
    Ok((a <= eps && b <= eps, format!("circle covered by X_max within {a:.2e}, by X_min within {b:.2e} (<= 1e-2)")))
}

fn planar_deformation() -> Check {
    let (m, p) = example5_planar(PlanarAction::Undeformed)?;
    let before = check_invariance(&m, &p, &default_h_samples(&m, &p), 1e-8);
    let d = deform_action(&m, &p)?;
    let after = check_invariance(&d, &p, &default_h_samples(&d, &p), 1e-8);
    let (_, worst) = planar_action_table(&d);
    Ok((
        !before.invariant && after.invariant && worst < 1e-8,
        format!(
            "invariant before {} (displacement {:.2e}), after {} ({:.2e}); max |R'_h x - e^(ih) x| = {worst:.2e}",
            before.invariant,
            before.max_displacement(),
            after.invariant,
            after.max_displacement()
        ),
    ))
}

fn tent_sequence() -> Check {
    let (m, p) = example2_tent()?;
    let (seq, rep) = transversal_sequence(&m, &p, 40, &SequenceMode::Halving)?;
    let best = seq.iter().map(flat_deviation).fold(f64::INFINITY, f64::min);
    let last = flat_deviation(seq.last().expect("nonempty"));
    let (mm, mp) = torus_meridian(tent_slope(), true)?;
    let geo: Vec<f64> = (1..=40).map(|k| 0.5f64.powi(k)).collect();
    let harm: Vec<f64> = (1..=40).map(|k| 1.0 / k as f64).collect();
    let g = transversal_sequence(&mm, &mp, 40, &SequenceMode::Forced(geo))?.1.verdict;
    let h = transversal_sequence(&mm, &mp, 40, &SequenceMode::Forced(harm))?.1.verdict;
    let halving_ok = best < 1e-3 && rep.verdict == SequenceVerdict::Converged;
    let forced_ok = g == SequenceVerdict::Converged && h == SequenceVerdict::Diverged;
    Ok((
        halving_ok && forced_ok,
        format!(
            "halving: sup |y| after 40 = {last:.2e}, best {best:.2e} (< 1e-3), verdict {:?}; forced 2^-k {g:?}, 1/k {h:?}",
            rep.verdict
        ),
    ))
}

fn seifert_detection() -> Check {
    let (m, p) = seifert()?;
    let s = check_condition_star(&m, &p, LeafMetric::FlowTime)?;
    let rotation = matches!(s.holonomy.class, HolonomyClass::Rotation { .. });
    Ok((!s.no_turn && rotation, format!("no_turn = {}, holonomy {:?}", s.no_turn, s.holonomy.class)))
}

/// Left endpoints of the middle-thirds construction at the given depth.
fn cantor(depth: u32) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut w = 1.0;
    for _ in 0..depth {
        w /= 3.0;
        pts = pts.iter().flat_map(|&x| [x, x + 2.0 * w]).collect();
    }
    pts
}

fn dimensions() -> Check {
    let scales: Vec<f64> = (0..8).map(|i| 0.1 * 0.5f64.powi(i)).collect();
    let mass: Vec<f64> = (0..1000).map(|i| [0.2, 0.37, 0.81][i % 3]).collect();
    let d0 = box_dimension(&mass, &scales)?;
    let t = iterate(&make_rotation(golden()), 0.0, 100_000);
    let d1 = box_dimension(&t.points, &scales)?;
    let third: Vec<f64> = (1..=8).map(|i| 3f64.powi(-i)).collect();
    let dc = box_dimension(&cantor(10), &third)?;
    let target = 2f64.ln() / 3f64.ln();
    Ok((
        d0.abs() <= 0.05 && (d1 - 1.0).abs() <= 0.1 && (dc - target).abs() <= 0.05,
        format!("point masses {d0:.4} (0 +- 0.05), rotation orbit {d1:.4} (1 +- 0.1), Cantor {dc:.4} ({target:.4} +- 0.05)"),
    ))
}

/// `foliage repro`: runs the selected criteria and prints one row each.
pub fn repro(cfg: &RunConfig, a: &ReproArgs) -> Result<Report, CliError> {
    let ids: Vec<usize> = if a.only.is_empty() { (1..=COUNT).collect() } else { a.only.clone() };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > COUNT) {
        return Err(CliError::Invalid(format!("no criterion {bad}; criteria are 1-{COUNT}")));
    }
    let mut r = Report::default();
    r.param("criteria", ids.clone());
    let scratch = cfg.out.join("determinism");
    let mut t = Table::new("criteria", &["id", "name", "passed", "known_unattained", "detail"]);
    let mut seconds = serde_json::Map::new();
    for id in ids {
        let o = run(id, &cfg.tolerances, &scratch);
        println!("{}", o.line());
        if !o.passed {
            r.violation(format!("criterion {id} ({}) failed", o.name));
        }
        seconds.insert(id.to_string(), o.seconds.into());
        t.push(vec![o.id.into(), o.name.into(), o.passed.into(), o.known_unattained().into(), o.detail.clone().into()]);
    }
    let passed = t.rows.iter().filter(|row| row[2] == true.into()).count();
    println!("{passed}/{} criteria passed", t.rows.len());
    r.summary("passed", passed);
    r.summary("total", t.rows.len());
    r.summary("seconds", seconds);
    r.summary(
        "known_unattained",
        KNOWN_UNATTAINED.iter().map(|(id, why)| serde_json::json!({"id": id, "reason": why})).collect::<Vec<_>>(),
    );
    r.tables = vec![t];
    Ok(r)
}
