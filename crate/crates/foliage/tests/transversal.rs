use std::f64::consts::PI;
use std::sync::OnceLock;

use foliage::circle::make_rotation;
use foliage::transversal::fixtures::*;
use foliage::transversal::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn deformed_planar() -> &'static (FoliationModel, Transversal) {
    static D: OnceLock<(FoliationModel, Transversal)> = OnceLock::new();
    D.get_or_init(|| {
        let (m, p) = example5_planar(PlanarAction::Undeformed).unwrap();
        (deform_action(&m, &p).unwrap(), p)
    })
}

fn suspension_base(alpha: f64) -> (FoliationModel, Transversal) {
    let m = FoliationModel::suspension(make_rotation(alpha));
    let p = Transversal::from_fn(&m, |t| [0.0, t], (0.0, 1.0), SAMPLES, true, true, 0.0).unwrap();
    (m, p)
}

fn rms_of(a: [[f64; 2]; 2], xs: &[[f64; 2]], ys: &[[f64; 2]]) -> f64 {
    // Optimal translation for a fixed linear part maps centroid to centroid.
    let n = xs.len() as f64;
    let cx = xs.iter().fold([0.0, 0.0], |s, p| [s[0] + p[0] / n, s[1] + p[1] / n]);
    let cy = ys.iter().fold([0.0, 0.0], |s, p| [s[0] + p[0] / n, s[1] + p[1] / n]);
    let sq: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let d = [x[0] - cx[0], x[1] - cx[1]];
            let q = [a[0][0] * d[0] + a[0][1] * d[1] + cy[0], a[1][0] * d[0] + a[1][1] * d[1] + cy[1]];
            (q[0] - y[0]).powi(2) + (q[1] - y[1]).powi(2)
        })
        .sum();
    (sq / n).sqrt()
}

fn rot(angle: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    [[c, -s], [s, c]]
}

#[test]
fn slope_one_meridian_meets_leaf_at_unit_spacing() {
    let (m, p) = torus_meridian(1.0, true).unwrap();
    let hits = leaf_transversal_intersection(&m, [0.0, 0.0], &p, 10.0);
    let mut hs: Vec<f64> = hits.iter().map(|i| i.h).collect();
    hs.sort_by(f64::total_cmp);
    assert_eq!(hs.len(), 21, "{hs:?}");
    for (k, h) in hs.iter().enumerate() {
        assert!((h - (k as f64 - 10.0)).abs() < 1e-9);
    }
}

#[test]
fn rational_suspension_leaf_meets_base_five_times() {
    let (m, p) = suspension_base(2.0 / 5.0);
    assert_eq!(leaf_intersection_count(&m, [0.3, 0.1], &p, 12.0), 5);
}

#[test]
fn planar_ray_meets_each_circle_once() {
    let (m, p) = example5_planar(PlanarAction::Deformed).unwrap();
    for r in [0.6, 1.0, 1.7] {
        assert_eq!(leaf_intersection_count(&m, [0.0, r], &p, 20.0), 1);
    }
}

#[test]
fn procrustes_examples() {
    let c = classify_holonomy(&[vec![0.0], vec![1.0], vec![2.0]], &[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    assert_eq!(c.class, HolonomyClass::Shift);
    assert!(c.residual < 1e-15);
    let sq: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]];
    let turned: Vec<Vec<f64>> = sq.iter().map(|p| vec![-p[1], p[0]]).collect();
    match classify_holonomy(&sq, &turned).unwrap().class {
        HolonomyClass::Rotation { angle } => assert!((angle - PI / 2.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        classify_holonomy(&[vec![0.5], vec![0.5]], &[vec![1.0], vec![2.0]]),
        Err(TransversalError::DegenerateConfiguration)
    ));
}

#[test]
fn noisy_shift_matches_angle_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let xs: Vec<[f64; 2]> = (0..40).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
    let ys: Vec<[f64; 2]> = xs
        .iter()
        .map(|p| [p[0] + 0.7 + rng.gen_range(-1e-3..1e-3), p[1] - 0.2 + rng.gen_range(-1e-3..1e-3)])
        .collect();
    let before: Vec<Vec<f64>> = xs.iter().map(|p| p.to_vec()).collect();
    let after: Vec<Vec<f64>> = ys.iter().map(|p| p.to_vec()).collect();
    let c = classify_holonomy_with(&before, &after, 2e-3).unwrap();
    assert_eq!(c.class, HolonomyClass::Shift);
    assert!(c.residual <= 2e-3);
    // Brute-force angle scan: the best rotation is within a millidegree of 0.
    let best = (0..360_000)
        .map(|i| 2.0 * PI * i as f64 / 360_000.0)
        .min_by(|a, b| rms_of(rot(*a), &xs, &ys).total_cmp(&rms_of(rot(*b), &xs, &ys)))
        .unwrap();
    let best = if best > PI { best - 2.0 * PI } else { best };
    assert!(best.abs() < 1e-3, "scan angle {best}");
    let fit = classify_holonomy_with(&before, &after, 1e-9).unwrap();
    assert!(fit.rms <= rms_of(rot(best), &xs, &ys) + 1e-12);
}

#[test]
fn seifert_holonomy_is_a_turn() {
    let (m, p) = seifert().unwrap();
    let s = check_condition_star(&m, &p, LeafMetric::FlowTime).unwrap();
    assert!(!s.no_turn && !s.passed());
    match s.holonomy.class {
        HolonomyClass::Rotation { angle } => assert!((angle.abs() - 2.0 * PI / 3.0).abs() < 1e-6),
        other => panic!("{other:?}"),
    }
}

#[test]
fn meridian_passes_condition_star() {
    let (m, p) = torus_meridian(0.5f64.sqrt(), true).unwrap();
    for metric in [LeafMetric::FlowTime, LeafMetric::Ambient] {
        let s = check_condition_star(&m, &p, metric).unwrap();
        assert!(s.h_maps_extendable && s.isometry_ok && s.no_turn, "{metric:?}");
        assert_eq!(s.holonomy.class, HolonomyClass::Shift);
    }
}

#[test]
fn undeformed_planar_fails_flow_time_isometry() {
    let (m, p) = example5_planar(PlanarAction::Undeformed).unwrap();
    let s = check_condition_star(&m, &p, LeafMetric::FlowTime).unwrap();
    assert!(!s.isometry_ok);
}

#[test]
fn planar_invariance_before_and_after_deformation() {
    let (m, p) = example5_planar(PlanarAction::Undeformed).unwrap();
    let r = check_invariance(&m, &p, &default_h_samples(&m, &p), 1e-8);
    assert!(!r.invariant && r.max_displacement() > 0.1);
    let (m, p) = example5_planar(PlanarAction::Deformed).unwrap();
    assert!(check_invariance(&m, &p, &default_h_samples(&m, &p), 1e-8).invariant);
    let (d, p) = deformed_planar();
    let r = check_invariance(d, p, &default_h_samples(d, p), 1e-8);
    assert!(r.invariant, "max displacement {:e}", r.max_displacement());
}

#[test]
fn meridian_is_invariant_under_leaf_period() {
    let (m, p) = torus_meridian(0.5f64.sqrt(), true).unwrap();
    assert!(check_invariance(&m, &p, &[1.0, -1.0, 2.0], 1e-8).invariant);
}

#[test]
fn deformed_planar_action_is_the_rigid_rotation() {
    let (d, _) = deformed_planar();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (r, th, h) = (rng.gen_range(0.6..1.9), rng.gen_range(0.0..2.0 * PI), rng.gen_range(-10.0..10.0));
        let q = [r * th.cos(), r * th.sin()];
        let a = d.act(h, q);
        let (s, c) = f64::sin_cos(h);
        let e = [c * q[0] - s * q[1], s * q[0] + c * q[1]];
        assert!((a[0] - e[0]).hypot(a[1] - e[1]) < 1e-8);
    }
}

#[test]
fn deforming_an_invariant_transversal_changes_nothing() {
    let (m, p) = torus_meridian(0.5f64.sqrt(), true).unwrap();
    let d = deform_action(&m, &p).unwrap();
    for i in 0..100 {
        let q = [i as f64 / 100.0, (i as f64 * 0.37).fract()];
        assert_eq!(d.act(1.3, q), m.act(1.3, q));
    }
}

#[test]
fn slope_one_sine_graph_is_invariant_after_deformation() {
    let m = FoliationModel::torus(1.0, true);
    let p = Transversal::from_fn(&m, |t| [0.1 * (2.0 * PI * t).sin(), t], (0.0, 1.0), SAMPLES, true, true, 0.0).unwrap();
    let d = deform_action(&m, &p).unwrap();
    assert!(check_invariance(&d, &p, &default_h_samples(&d, &p), 1e-8).invariant);
}

#[test]
fn isotropy_examples() {
    let (m, p) = torus_meridian(0.5f64.sqrt(), true).unwrap();
    let g = isotropy_group(&m, &p, 4.0);
    assert_eq!(g.generators.len(), 1);
    assert!((g.generators[0] - 1.0).abs() < 1e-9 && g.discrete);
    let m = FoliationModel::torus(0.5f64.sqrt(), true);
    let tilted = Transversal::from_fn(&m, |t| [0.1 * (2.0 * PI * t).sin(), t], (0.0, 1.0), SAMPLES, true, true, 0.0).unwrap();
    assert!(isotropy_group(&m, &tilted, 4.0).generators.is_empty());
    let (d, p) = example5_planar(PlanarAction::Deformed).unwrap();
    let g = isotropy_group(&d, &p, 20.0);
    assert_eq!(g.generators.len(), 1);
    assert!((g.generators[0] - 2.0 * PI).abs() < 1e-8);
}

#[test]
fn halving_sequence_flattens_the_tent() {
    let (m, p) = example2_tent().unwrap();
    let (seq, rep) = transversal_sequence(&m, &p, 10, &SequenceMode::Halving).unwrap();
    let dev = |q: &Transversal| q.samples().iter().map(|s| (s[1] - s[1].round()).abs()).fold(0.0, f64::max);
    let devs: Vec<f64> = seq.iter().map(dev).collect();
    assert!((devs[0] - 0.25).abs() < 1e-9);
    // The sup deviation shrinks overall but not at every step.
    assert!(devs[10] < 0.1 * devs[0], "{devs:?}");
    assert_eq!(rep.steps.len(), 10);
}

#[test]
fn forced_sequences_follow_the_series() {
    let (m, p) = torus_meridian(tent_slope(), true).unwrap();
    let geo: Vec<f64> = (1..=40).map(|k| 0.5f64.powi(k)).collect();
    let harm: Vec<f64> = (1..=40).map(|k| 1.0 / k as f64).collect();
    assert_eq!(transversal_sequence(&m, &p, 40, &SequenceMode::Forced(geo)).unwrap().1.verdict, SequenceVerdict::Converged);
    assert_eq!(transversal_sequence(&m, &p, 40, &SequenceMode::Forced(harm)).unwrap().1.verdict, SequenceVerdict::Diverged);
}

#[test]
fn sequence_rejects_turns() {
    let (m, p) = seifert().unwrap();
    assert!(matches!(
        transversal_sequence(&m, &p, 3, &SequenceMode::Halving),
        Err(TransversalError::ConditionStarViolated(_))
    ));
}

#[test]
fn example4_flows_add_slopes() {
    let (m, z) = example4_flow(0.0).unwrap();
    let f = |a: f64| example4_flow(a).unwrap().1;
    let s = add_transversals(&f(1.0), &f(2.0), &z, &m).unwrap();
    assert!(s.sup_distance(&m, &f(3.0)) < 1e-10);
    let t = add_transversals(&f(2.0), &f(1.0), &z, &m).unwrap();
    assert!(s.sup_distance(&m, &t) < 1e-10);
    let id = add_transversals(&f(2.0), &z, &z, &m).unwrap();
    assert!(id.sup_distance(&m, &f(2.0)) < 1e-10);
    let left = add_transversals(&s, &f(-1.0), &z, &m).unwrap();
    let right = add_transversals(&f(1.0), &add_transversals(&f(2.0), &f(-1.0), &z, &m).unwrap(), &z, &m).unwrap();
    assert!(left.sup_distance(&m, &right) < 1e-9);
    assert!(check_invariance(&m, &s, &default_h_samples(&m, &s), 1e-8).invariant);
}

#[test]
fn addition_requires_invariance() {
    let m = FoliationModel::torus(0.5f64.sqrt(), true);
    let tilted = Transversal::from_fn(&m, |t| [0.1 * (2.0 * PI * t).sin(), t], (0.0, 1.0), SAMPLES, true, true, 0.0).unwrap();
    let (_, mer) = torus_meridian(0.5f64.sqrt(), true).unwrap();
    assert!(matches!(add_transversals(&tilted, &mer, &mer, &m), Err(TransversalError::NotInvariant { .. })));
}

#[test]
fn stabilizers_lie_in_the_isotropy_group() {
    for (p, q) in [(1u32, 2u32), (1, 3), (2, 5), (3, 4), (1, 6)] {
        let (m, tr) = suspension_base(p as f64 / q as f64);
        let g = isotropy_group(&m, &tr, 8.0);
        let gen = g.generators[0];
        for i in 0..20 {
            let x = [0.05 * i as f64, (0.137 * i as f64).fract()];
            // Stabilizer elements of x within the search bound.
            for k in 1..=8 {
                let h = k as f64;
                if m.distance(m.act(h, x), x) < 1e-10 {
                    let r = h / gen;
                    assert!((r - r.round()).abs() < 1e-9, "rotation {p}/{q}: stabilizer {h} not in H_P");
                }
            }
        }
    }
}

#[test]
fn intersection_counts_are_bounded_on_compact_suspensions() {
    for (p, q) in [(1u32, 3u32), (2, 5), (3, 7)] {
        let (m, tr) = suspension_base(p as f64 / q as f64);
        let hol = holonomy(&m, &tr, tr.base(), 3.0 * q as f64).unwrap();
        assert!(!matches!(hol.class, HolonomyClass::Shift));
        let period = hol.leaf_period.expect("compact leaf");
        let n = 1 + hol.returns.iter().filter(|&&h| h > 0.0 && h < period - 1e-9).count();
        let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
        for _ in 0..50 {
            let seed = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let c = leaf_intersection_count(&m, seed, &tr, 3.0 * q as f64);
            assert!(c <= n, "rotation {p}/{q}: {c} > {n}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn deformed_flow_stays_on_its_leaf(r in 0.55f64..1.95, th in 0.0f64..6.28, hs in prop::collection::vec(-20.0f64..20.0, 10)) {
        let (d, _) = deformed_planar();
        let base = FoliationModel::planar(PlanarAction::Undeformed);
        let x = [r * th.cos(), r * th.sin()];
        for h in hs {
            let y = d.act(h, x);
            let c = base.leaf_coordinate(x, y, 0.0);
            prop_assert!(c.is_some());
            prop_assert!(base.distance(base.act(c.unwrap(), x), y) < 1e-8);
        }
    }

    #[test]
    fn procrustes_beats_random_orthogonal_candidates(
        pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3..30),
        angle in 0.0f64..6.28,
        shift in (-3.0f64..3.0, -3.0f64..3.0),
        noise in 0.0f64..0.05,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
        let a = rot(angle);
        let ys: Vec<[f64; 2]> = xs
            .iter()
            .map(|p| [
                a[0][0] * p[0] + a[0][1] * p[1] + shift.0 + noise * rng.gen_range(-1.0..1.0),
                a[1][0] * p[0] + a[1][1] * p[1] + shift.1 + noise * rng.gen_range(-1.0..1.0),
            ])
            .collect();
        let before: Vec<Vec<f64>> = xs.iter().map(|p| p.to_vec()).collect();
        let after: Vec<Vec<f64>> = ys.iter().map(|p| p.to_vec()).collect();
        let fit = classify_holonomy_with(&before, &after, 1e-12).unwrap();
        for _ in 0..10_000 {
            let t = rng.gen_range(0.0..2.0 * PI);
            let (sn, cs) = t.sin_cos();
            // Rotations and reflections with equal probability.
            let c = if rng.gen_bool(0.5) { [[cs, -sn], [sn, cs]] } else { [[cs, sn], [sn, -cs]] };
            prop_assert!(fit.rms <= rms_of(c, &xs, &ys) + 1e-12);
        }
    }
}
