use std::sync::{Arc, OnceLock};

use foliage::circle::*;
use foliage::denjoy::{DenjoyGapSpec, DenjoyMap};
use foliage::stats::*;
use proptest::prelude::*;

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Distance from p to the nearest point of a sorted set on the circle.
fn dist_to_set(sorted: &[f64], p: f64) -> f64 {
    let i = sorted.partition_point(|&x| x < p);
    [i.wrapping_sub(1), i, 0, sorted.len().wrapping_sub(1)]
        .iter()
        .filter_map(|&j| sorted.get(j))
        .map(|&x| circle_dist(x, p))
        .fold(f64::INFINITY, f64::min)
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn denjoy() -> &'static (Arc<DenjoyMap>, CircleMap) {
    static D: OnceLock<(Arc<DenjoyMap>, CircleMap)> = OnceLock::new();
    D.get_or_init(|| {
        let d = Arc::new(DenjoyMap::build(&DenjoyGapSpec::default()).unwrap());
        (d.clone(), CircleMap::Denjoy(d))
    })
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

fn geometric(lo: f64, ratio: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

#[test]
fn golden_frequency_matches_direct_count() {
    let t = iterate(&make_rotation(golden()), 0.0, 1_000_000);
    let x = 0.3;
    let direct = t.points[1..].iter().filter(|&&p| circle_dist(p, x) < 0.05).count() as f64 / 1e6;
    let nu = frequency_nu(&t, x, 0.05).unwrap();
    assert!((nu - direct).abs() < 1e-12 && (nu - 0.1).abs() < 0.01, "{nu} {direct}");
}

#[test]
fn half_rotation_misses_quarter() {
    let t = iterate(&make_rotation(0.5), 0.0, 1000);
    assert_eq!(frequency_nu(&t, 0.25, 0.1).unwrap(), 0.0);
}

#[test]
fn denjoy_gap_midpoint_is_never_visited() {
    let (d, f) = denjoy();
    let (a, b) = d.gap(0);
    let t = iterate(f, d.exterior_point(), 100_000);
    let mid = 0.5 * (a + b);
    let eps = 0.2 * (b - a);
    assert!(t.points.iter().all(|&p| circle_dist(p, mid) >= eps));
    assert_eq!(frequency_nu(&t, mid, eps).unwrap(), 0.0);
}

#[test]
fn counting_function_examples() {
    let t = iterate(&make_rotation(golden()), 0.0, 10_000);
    let c = counting_function(&t, 0.7, 0.5, &[1, 10, 100, 10_000]).unwrap();
    assert!(c.samples.iter().all(|&(n, v)| n == v));
    let c = counting_function(&t, 0.7, 0.01, &[10_000]).unwrap();
    let v = c.samples[0].1 as f64;
    assert!((v - 200.0).abs() <= 20.0, "{v}");
    let t = iterate(&make_rotation(0.5), 0.0, 1000);
    let c = counting_function(&t, 0.25, 0.1, &[10, 100, 1000]).unwrap();
    assert!(c.samples.iter().all(|&(_, v)| v == 0));
}

#[test]
fn golden_gauge_beats_fibonacci_bound() {
    let t = iterate(&make_rotation(golden()), 0.0, 100_000);
    let g = growth_gauge(&t, 0.0, 10).unwrap();
    let phi = 1.0 + golden();
    for k in 3..=10 {
        let bound = (5f64.sqrt() * 2f64.powi(k)).ln() / phi.ln();
        assert!(g[k as usize - 1] as f64 >= bound, "k = {k}");
    }
}

#[test]
fn rational_gauge_is_capped_by_the_trace() {
    let t = iterate(&make_rotation(0.25), 0.0, 1000);
    let g = growth_gauge(&t, 0.0, 8).unwrap();
    assert!(g.iter().all(|&v| v == 1000), "{g:?}");
}

#[test]
fn denjoy_endpoint_gauge_is_finite() {
    let (d, f) = denjoy();
    let t = iterate(f, d.exterior_point(), 100_000);
    let g = growth_gauge(&t, d.gap(-3).0, 10).unwrap();
    assert!(g.iter().all(|&v| v > 0 && v <= 100_000));
    assert!(g.windows(2).all(|w| w[1] <= w[0]), "{g:?}");
}

#[test]
fn isolated_point_examples() {
    let t = iterate(&make_rotation(0.2), 0.1, 50);
    assert_eq!(isolated_points(&t.points, 0.01).len(), 5);
    let t = iterate(&make_rotation(golden()), 0.0, 100_000);
    assert!(isolated_points(&t.points, 1e-3).is_empty());
    let mut mixed = vec![0.5];
    mixed.extend((0..100).map(|i| 1e-4 * i as f64));
    assert_eq!(isolated_points(&mixed, 1e-3), vec![0.5]);
}

#[test]
fn isolated_recursion_examples() {
    let pts: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
    assert_eq!(isolated_recursion(&pts, &pts), (0..10).collect::<Vec<_>>());
    assert!(isolated_recursion(&pts, &[]).iter().all(|&v| v == 0));
    let odd: Vec<f64> = pts.iter().copied().skip(1).step_by(2).collect();
    let f = isolated_recursion(&pts, &odd);
    assert_eq!(f, (0..10usize).map(|n| n.div_ceil(2)).collect::<Vec<_>>());
}

#[test]
fn growth_comparisons() {
    let lin: Vec<usize> = (1..=12).collect();
    let exp: Vec<usize> = (1..=12).map(|k| 1 << k).collect();
    assert_eq!(compare_gauges(&lin, &lin), GrowthOrder::Equivalent);
    assert_eq!(compare_gauges(&lin, &exp), GrowthOrder::Geq);
    assert_eq!(compare_gauges(&exp, &lin), GrowthOrder::Leq);
    let t = iterate(&make_rotation(golden()), 0.0, 100_000);
    let cfg = ProfileConfig::default();
    let (p, q) = (profile(&t, 0.2, &cfg).unwrap(), profile(&t, 0.77, &cfg).unwrap());
    assert_eq!(compare_growth(&p, &q), GrowthOrder::Equivalent);
    assert_eq!(compare_growth(&p, &p), GrowthOrder::Equivalent);
}

#[test]
fn kronecker_maximal_set_is_the_circle() {
    let eps = 1e-2;
    let t = iterate(&make_rotation(golden()), 0.0, 100_000);
    let m = maximal_set(&[&t], eps, 6).unwrap();
    let (xmax, xmin) = (sorted(&m.x_max), sorted(&m.x_min));
    for i in 0..1000 {
        let y = i as f64 / 1000.0;
        assert!(dist_to_set(&xmax, y) <= eps && dist_to_set(&xmin, y) <= eps, "{y} uncovered");
    }
}

#[test]
fn rational_maximal_set_is_the_orbit() {
    let t = iterate(&make_rotation(3.0 / 7.0), 0.05, 10_000);
    let m = maximal_set(&[&t], 1e-2, 6).unwrap();
    for set in [&m.x_max, &m.x_min] {
        assert_eq!(set.len(), 7, "{set:?}");
        assert!(set.iter().all(|&x| (0..7).any(|k| circle_dist(x, 0.05 + k as f64 * 3.0 / 7.0) < 1e-9)));
    }
}

#[test]
fn denjoy_maximal_set_is_the_minimal_cantor_set() {
    let (d, f) = denjoy();
    let eps = 1e-3;
    let t = iterate(f, d.exterior_point(), 200_000);
    let m = maximal_set(&[&t], eps, 8).unwrap();
    let xmax = sorted(&m.x_max);
    for &x in &xmax {
        assert!(d.gap_interior(x, eps).is_none() || {
            let k = d.gap_interior(x, eps).unwrap();
            let (a, b) = d.gap(k);
            circle_dist(x, a).min(circle_dist(x, b)) <= eps
        });
    }
    for k in -20_000..=20_000 {
        let (a, b) = d.gap(k);
        assert!(dist_to_set(&xmax, a) <= eps && dist_to_set(&xmax, b) <= eps, "gap {k}");
    }
}

#[test]
fn decomposition_examples() {
    let t = iterate(&make_rotation(2.0 / 9.0), 0.0, 20_000);
    let d = decomposition_profile(&t, (0.0, 1.0), 1e-3).unwrap();
    assert!(d.isolated_component_present && d.limit_point_set_finite && d.limit_count == Some(9), "{d:?}");
    let t = iterate(&make_rotation(golden()), 0.0, 20_000);
    let d = decomposition_profile(&t, (0.0, 1.0), 1e-3).unwrap();
    assert!(!d.isolated_component_present && !d.limit_point_set_finite && d.limit_count.is_none());
    let (dm, f) = denjoy();
    let t = iterate(f, dm.exterior_point(), 100_000);
    let d = decomposition_profile(&t, (0.0, 1.0), 1e-3).unwrap();
    assert!(!d.isolated_component_present && !d.limit_point_set_finite, "{d:?}");
}

#[test]
fn box_dimension_examples() {
    let scales = geometric(0.1, 0.5, 8);
    let mass = vec![0.37; 1000];
    assert!(box_dimension(&mass, &scales).unwrap().abs() < 0.05);
    let t = iterate(&make_rotation(golden()), 0.0, 100_000);
    assert!((box_dimension(&t.points, &scales).unwrap() - 1.0).abs() < 0.1);
    let c = cantor(10);
    let dim = box_dimension(&c, &geometric(1.0 / 3.0, 1.0 / 3.0, 8)).unwrap();
    assert!((dim - 2f64.ln() / 3f64.ln()).abs() < 0.05, "{dim}");
    assert!(box_dimension(&mass, &scales[..3]).is_err());
}

fn arb_rotation() -> impl Strategy<Value = f64> {
    prop_oneof![
        (1u32..40, 2u32..41).prop_map(|(p, q)| (p % q) as f64 / q as f64),
        0.001f64..0.999,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn profiles_satisfy_invariants(alpha in arb_rotation(), x in 0.0f64..1.0) {
        let t = iterate(&make_rotation(alpha), 0.0, 5000);
        let p = profile(&t, x, &ProfileConfig::default()).unwrap();
        prop_assert!(p.check_invariants().is_ok(), "{:?}", p.check_invariants());
        if let Classification::LimitPoint { .. } = p.classification {
            prop_assert!(p.gauge.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn denjoy_profiles_satisfy_invariants(x in 0.0f64..1.0) {
        let (d, f) = denjoy();
        let t = iterate(f, d.exterior_point(), 5000);
        let p = profile(&t, x, &ProfileConfig::default()).unwrap();
        prop_assert!(p.check_invariants().is_ok(), "{:?}", p.check_invariants());
    }

    #[test]
    fn maximal_set_is_invariant_under_the_return_map(alpha in arb_rotation()) {
        let eps = 2e-2;
        let t = iterate(&make_rotation(alpha), 0.0, 20_000);
        let m = maximal_set(&[&t], eps, 5).unwrap();
        let xmax = sorted(&m.x_max);
        for &x in &xmax {
            let y = (x + alpha).rem_euclid(1.0);
            prop_assert!(dist_to_set(&xmax, y) <= eps, "alpha {}: {} -> {}", alpha, x, y);
        }
    }

    #[test]
    fn minimal_set_is_the_sampled_closure(alpha in arb_rotation(), x0 in 0.0f64..1.0) {
        let eps = 1e-2;
        let t = iterate(&make_rotation(alpha), x0, 5000);
        let m = maximal_set(&[&t], eps, 4).unwrap();
        let xmin = sorted(&m.x_min);
        let pts = sorted(&t.points);
        prop_assert!(t.points.iter().all(|&p| dist_to_set(&xmin, p) <= eps));
        prop_assert!(xmin.iter().all(|&p| dist_to_set(&pts, p) <= eps));
    }

    #[test]
    fn isolated_recursion_is_all_or_nothing(alpha in arb_rotation(), x0 in 0.0f64..1.0) {
        let t = iterate(&make_rotation(alpha), x0, 100_000);
        let s0 = isolated_points(&t.points, 1e-3);
        let f = isolated_recursion(&t.points, &s0);
        let zero = f.iter().all(|&v| v == 0);
        let full = f.iter().enumerate().all(|(n, &v)| v == n);
        prop_assert!(zero || full, "alpha {}: mixed table", alpha);
    }

    #[test]
    fn interleaved_sets_compare_by_dimension(
        depth in 10u32..13,
        extra in prop::collection::vec((0usize..3, 0.1f64..0.9), 1..64),
    ) {
        let set1 = cantor(depth);
        let mut set2 = set1.clone();
        // At most 2 points of set 2 inside each gap of set 1.
        for (i, w) in set1.windows(2).enumerate() {
            let (k, u) = extra[i % extra.len()];
            for j in 0..k {
                set2.push(w[0] + (w[1] - w[0]) * (u + j as f64 * 0.05).min(0.95));
            }
        }
        let scales = geometric(1.0 / 3.0, 1.0 / 3.0, 8);
        let d1 = box_dimension(&set1, &scales).unwrap();
        let d2 = box_dimension(&set2, &scales).unwrap();
        prop_assert!(d1 <= d2 + 0.05, "{} vs {}", d1, d2);
    }
}
