use std::f64::consts::PI;

use foliage::hill::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

// Oracles kept independent of the shooting code: a Fourier-basis eigenvalue
// problem for edges and a fixed-step RK4 for the transfer matrix.

/// Eigenvalues of -d^2/dx^2 + sum_k a_k cos(2 pi k x / T) on plane waves
/// exp(2 pi i kappa x / T) with kappa in Z (periodic) or Z + 1/2 (antiperiodic).
fn fourier_eigs(period: f64, cos_terms: &[(u32, f64)], modes: usize, anti: bool) -> Vec<f64> {
    let shift = if anti { 0.5 } else { 0.0 };
    let half = (modes / 2) as f64;
    let kappas: Vec<f64> = (0..modes).map(|j| j as f64 - half + shift).collect();
    let h = DMatrix::from_fn(modes, modes, |r, c| {
        let d = (kappas[r] - kappas[c]).round() as i64;
        let mut v = 0.0;
        if r == c {
            v += (2.0 * PI * kappas[r] / period).powi(2);
        }
        for &(k, a) in cos_terms {
            if k == 0 && d == 0 {
                v += a;
            } else if k > 0 && d.unsigned_abs() == k as u64 {
                v += 0.5 * a;
            }
        }
        v
    });
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn oracle_edges(period: f64, cos_terms: &[(u32, f64)], window: (f64, f64)) -> Vec<f64> {
    let mut e = fourier_eigs(period, cos_terms, 64, false);
    e.extend(fourier_eigs(period, cos_terms, 64, true));
    e.retain(|&x| x > window.0 && x < window.1);
    e.sort_by(f64::total_cmp);
    e
}

fn cos_potential(period: f64, cos_terms: &[(u32, f64)]) -> PeriodicPotential {
    let terms = cos_terms.iter().map(|&(k, a)| FourierTerm { k, cos: a, sin: 0.0 }).collect();
    PeriodicPotential::fourier(period, terms).unwrap()
}

/// Transfer matrix by classical RK4 with `n` uniform steps.
fn rk4_transfer(v: &PeriodicPotential, e: f64, n: usize) -> [[f64; 2]; 2] {
    let h = v.period / n as f64;
    let f = |x: f64, y: [f64; 2]| [y[1], (v.eval(x) - e) * y[0]];
    let mut cols = [[1.0, 0.0], [0.0, 1.0]];
    for y in cols.iter_mut() {
        for i in 0..n {
            let x = i as f64 * h;
            let k1 = f(x, *y);
            let k2 = f(x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = f(x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for j in 0..2 {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
    }
    [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
}

#[test]
fn free_discriminant_matches_closed_form() {
    let v = PeriodicPotential::zero(1.0);
    let mut worst = 0.0f64;
    for i in 0..256 {
        let e = 0.1 + 99.9 * i as f64 / 255.0;
        let (d, _) = discriminant_with_derivative(&v, e, 1e-10).unwrap();
        worst = worst.max((d - 2.0 * e.sqrt().cos()).abs());
    }
    assert!(worst < 1e-7, "free discriminant error {worst:e}");
}

#[test]
fn free_discriminant_special_values() {
    let v = PeriodicPotential::zero(1.0);
    let m = monodromy(&v, PI * PI, 1e-10).unwrap();
    assert!((m.discriminant + 2.0).abs() < 1e-8);
    let m = monodromy(&v, 0.0, 1e-10).unwrap();
    assert!((m.discriminant - 2.0).abs() < 1e-8);
    let d = discriminant_derivative(&v, 0.25 * PI * PI).unwrap();
    assert!((d + 2.0 / PI).abs() < 1e-7, "free derivative {d}");
}

#[test]
fn mathieu_transfer_matrix_matches_rk4() {
    let v = PeriodicPotential::mathieu();
    for e in [-0.5, 0.0, 1.0, 3.3] {
        let m = monodromy(&v, e, 1e-10).unwrap();
        let r = rk4_transfer(&v, e, 20_000);
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.matrix[i][j] - r[i][j]).abs() < 1e-7, "E = {e}: {:?} vs {:?}", m.matrix, r);
            }
        }
    }
}

#[test]
fn mathieu_lowest_eigenvalues_match_fourier_oracle() {
    let p = fourier_eigs(2.0 * PI, &[(1, 2.0)], 64, false)[0];
    let a = fourier_eigs(2.0 * PI, &[(1, 2.0)], 64, true)[0];
    // Frozen from the oracle.
    assert!((p + 1.07013).abs() < 1e-5 && (a + 1.06480).abs() < 1e-5, "{p} {a}");
    let v = PeriodicPotential::mathieu();
    let s = band_spectrum(&v, (-2.0, 0.0), 1024, 1e-10).unwrap();
    let e = s.edges();
    assert!((e[0] - p).abs() < 1e-6 && (e[1] - a).abs() < 1e-6, "{e:?}");
}

#[test]
fn mathieu_edges_match_fourier_oracle() {
    let window = (-1.0, 5.0);
    let v = PeriodicPotential::mathieu();
    let s = band_spectrum(&v, window, 2048, 1e-10).unwrap();
    let oracle = oracle_edges(2.0 * PI, &[(1, 2.0)], window);
    let frozen = [0.57950, 0.68672, 1.70727, 2.31536, 2.66776, 4.11301, 4.16245];
    let got = s.edges();
    assert_eq!(got.len(), oracle.len(), "{got:?} vs {oracle:?}");
    for ((g, o), f) in got.iter().zip(&oracle).zip(frozen) {
        assert!((g - o).abs() < 1e-6, "edge {g} vs oracle {o}");
        assert!((o - f).abs() < 1e-5, "oracle {o} vs frozen {f}");
    }
    s.check_invariants(&v, 1e-10).unwrap();
}

#[test]
fn free_spectrum_is_one_band() {
    let s = band_spectrum(&PeriodicPotential::zero(2.0 * PI), (0.0, 25.0), 1024, 1e-10).unwrap();
    assert_eq!(s.bands.len(), 1, "{:?}", s.intervals());
    assert!(s.bands[0].lo.abs() < 1e-8 && (s.bands[0].hi - 25.0).abs() < 1e-12);
    // Every gap of the free operator is closed.
    assert!(s.bands[0].closed_gaps.len() >= 9, "{:?}", s.bands[0].closed_gaps);
}

#[test]
fn constant_potential_shifts_spectrum() {
    let s0 = band_spectrum(&PeriodicPotential::zero(2.0 * PI), (0.0, 10.0), 1024, 1e-10).unwrap();
    let s1 = band_spectrum(&PeriodicPotential::constant(2.0 * PI, 3.0), (3.0, 13.0), 1024, 1e-10).unwrap();
    assert!(hausdorff_bands(&s0.shifted(3.0), &s1, (3.0, 13.0)) < 1e-8);
}

#[test]
fn cosine_family_is_continuous() {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let r = spectrum_family(|p| PeriodicPotential::cosine(2.0 * PI, 2.0 * p), &grid, (-1.0, 5.0), 1024, 1e-10).unwrap();
    assert_eq!(r.pairs.len(), 10);
    assert!(r.within(1e-4), "excess {}", r.max_excess());
}

#[test]
fn constant_family_distance_equals_shift() {
    let grid = [0.0, 0.5, 1.0];
    let r = spectrum_family(|c| PeriodicPotential::constant(2.0 * PI, c), &grid, (0.0, 8.0), 1024, 1e-10).unwrap();
    for p in &r.pairs {
        assert!(p.distance <= p.potential_distance + 1e-8, "{p:?}");
    }
}

#[test]
fn limit_periodic_single_step_is_within_tails() {
    let lp = LimitPeriodicPotential::default_family(1);
    lp.check().unwrap();
    let r = limit_periodic_spectrum(&lp, (-1.0, 3.0), 1, 1024, 1e-10).unwrap();
    assert_eq!(r.distances.len(), 1);
    assert!(r.within(1e-4), "{:?} vs {:?}", r.distances, r.bounds);
}

#[test]
fn floquet_of_indicator_is_constant() {
    let t = floquet_transform(&[(0, Complex64::new(1.0, 0.0))], 2.0 * PI, 64, 8).unwrap();
    assert!(t.values.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
}

#[test]
fn floquet_rejects_unresolvable_grids() {
    let f = [(5, Complex64::new(1.0, 0.0))];
    assert!(matches!(floquet_transform(&f, 1.0, 64, 4), Err(SpectralError::SupportExceedsTruncation { .. })));
    assert!(matches!(floquet_transform(&f, 1.0, 8, 5), Err(SpectralError::ThetaGridTooCoarse { .. })));
}

fn arb_cos_terms() -> impl Strategy<Value = Vec<(u32, f64)>> {
    prop::collection::vec((0u32..4, -1.5f64..1.5), 1..4)
}

fn arb_support() -> impl Strategy<Value = Vec<(i64, Complex64)>> {
    prop::collection::btree_map(-32i64..=32, (-1.0f64..1.0, -1.0f64..1.0), 1..20)
        .prop_map(|m| m.into_iter().map(|(k, (a, b))| (k, Complex64::new(a, b))).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // Energies above max V keep |M| moderate, where the 2x2 determinant is
    // not dominated by cancellation in double precision.
    #[test]
    fn monodromy_has_unit_determinant(terms in arb_cos_terms(), e in 0.0f64..50.0) {
        let v = cos_potential(2.0 * PI, &terms);
        let e = e + v.sup_norm_bound();
        let m = monodromy(&v, e, 1e-10).unwrap();
        prop_assert!((m.determinant() - 1.0).abs() < 1e-8, "det {}", m.determinant());
    }

    // Below the potential the entries grow like exp(T sqrt(|V - E|)) and
    // only the relative drift is meaningful.
    #[test]
    fn monodromy_determinant_drift_is_relative(terms in arb_cos_terms(), e in -10.0f64..0.0) {
        let m = monodromy(&cos_potential(2.0 * PI, &terms), e, 1e-10).unwrap();
        let a = m.matrix;
        let scale = (a[0][0] * a[1][1]).abs() + (a[0][1] * a[1][0]).abs();
        prop_assert!((m.determinant() - 1.0).abs() < 1e-8 * scale.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn derivative_matches_finite_differences(terms in arb_cos_terms(), e0 in -3.0f64..3.0) {
        let v = cos_potential(2.0 * PI, &terms);
        for j in 0..64 {
            let e = e0 + 0.2 * j as f64;
            let h = 1e-4 * (1.0 + e.abs());
            let (_, d) = discriminant_with_derivative(&v, e, 1e-12).unwrap();
            let (p, _) = discriminant_with_derivative(&v, e + h, 1e-12).unwrap();
            let (m, _) = discriminant_with_derivative(&v, e - h, 1e-12).unwrap();
            let fd = (p - m) / (2.0 * h);
            prop_assert!((fd - d).abs() < 1e-5 * (1.0 + d.abs()), "E = {}: {} vs {}", e, d, fd);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn edges_alternate_and_bound_the_discriminant(terms in arb_cos_terms()) {
        let v = cos_potential(2.0 * PI, &terms);
        let w = (-4.0, 8.0);
        // Edges next to nearly closed gaps have small |Delta'|, so the
        // comparison with the oracle integrates tighter.
        let s = band_spectrum_with(&v, w, 768, 1e-10, 1e-12).unwrap();
        prop_assert!(s.check_invariants(&v, 1e-10).is_ok(), "{:?}", s.check_invariants(&v, 1e-10));
        let oracle = oracle_edges(2.0 * PI, &terms, w);
        let got = s.edges();
        // Closed gaps hide double eigenvalues; compare against the distinct oracle set.
        for g in &got {
            let near = oracle.iter().map(|o| (o - g).abs()).fold(f64::INFINITY, f64::min);
            prop_assert!(near < 1e-6, "edge {} has no oracle partner in {:?}", g, oracle);
        }
    }

    #[test]
    fn constant_shift_is_gauge_covariant(terms in arb_cos_terms(), c in -5.0f64..5.0) {
        let v = cos_potential(2.0 * PI, &terms);
        let mut shifted = terms.clone();
        shifted.push((0, c));
        let w = (-2.0, 6.0);
        let s0 = band_spectrum(&v, (w.0 - c - 1.0, w.1 - c + 1.0), 512, 1e-10).unwrap();
        let s1 = band_spectrum(&cos_potential(2.0 * PI, &shifted), (w.0 - 1.0, w.1 + 1.0), 512, 1e-10).unwrap();
        let d = hausdorff_bands(&s0.shifted(c), &s1, w);
        prop_assert!(d < 1e-8, "shift {} gives distance {:e}", c, d);
    }

    #[test]
    fn band_distance_is_bounded_by_potential_distance(a in arb_cos_terms(), b in arb_cos_terms()) {
        let (va, vb) = (cos_potential(2.0 * PI, &a), cos_potential(2.0 * PI, &b));
        let bound = va.sup_distance(&vb);
        let w = (-2.0, 6.0);
        let m = bound + 1.0;
        let sa = band_spectrum(&va, (w.0 - m, w.1 + m), 768, 1e-10).unwrap();
        let sb = band_spectrum(&vb, (w.0 - m, w.1 + m), 768, 1e-10).unwrap();
        let d = hausdorff_bands(&sa, &sb, w);
        prop_assert!(d <= bound + 1e-6, "distance {} exceeds {}", d, bound);
    }

    #[test]
    fn floquet_round_trip_and_parseval(f in arb_support(), grid in 65usize..160) {
        let t = floquet_transform(&f, 1.0, grid, 32).unwrap();
        let back = floquet_inverse(&t);
        for (m, c) in &f {
            let (_, b) = back.iter().find(|(k, _)| k == m).unwrap();
            prop_assert!((b - c).norm() < 1e-12);
        }
        let l2: f64 = f.iter().map(|(_, c)| c.norm_sqr()).sum();
        let avg: f64 = t.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / grid as f64;
        prop_assert!((l2 - avg).abs() < 1e-10 * (1.0 + l2));
    }

    #[test]
    fn floquet_is_linear(f in arb_support(), g in arb_support(), s in -2.0f64..2.0) {
        let mut sum = f.clone();
        for (m, c) in &g {
            match sum.iter_mut().find(|(k, _)| k == m) {
                Some((_, x)) => *x += c * s,
                None => sum.push((*m, c * s)),
            }
        }
        let (tf, tg, ts) = (
            floquet_transform(&f, 1.0, 72, 32).unwrap(),
            floquet_transform(&g, 1.0, 72, 32).unwrap(),
            floquet_transform(&sum, 1.0, 72, 32).unwrap(),
        );
        for i in 0..72 {
            prop_assert!((ts.values[i] - tf.values[i] - tg.values[i] * s).norm() < 1e-12);
        }
    }
}
