use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ode::discriminant_with_derivative;
use super::potential::{LimitPeriodicPotential, PeriodicPotential};
use super::SpectralError;

/// Extrema with ||Delta| - 2| below this are treated as closed gaps.
const CLOSED_GAP: f64 = 1e-9;
const BAND_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Delta = 2.
    Periodic,
    /// Delta = -2.
    Antiperiodic,
    /// Cut by the window, not a spectral edge.
    Window,
}

impl EdgeKind {
    fn of(delta: f64) -> Self {
        if delta > 0.0 {
            EdgeKind::Periodic
        } else {
            EdgeKind::Antiperiodic
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EdgeKind::Periodic => "periodic",
            EdgeKind::Antiperiodic => "antiperiodic",
            EdgeKind::Window => "window",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub lo_kind: EdgeKind,
    pub hi_kind: EdgeKind,
    /// Extrema inside the band where |Delta| touches 2 (closed gaps).
    pub closed_gaps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSpectrum {
    pub bands: Vec<Band>,
    pub window: (f64, f64),
}

impl BandSpectrum {
    pub fn edges(&self) -> Vec<f64> {
        self.bands
            .iter()
            .flat_map(|b| {
                let lo = (b.lo_kind != EdgeKind::Window).then_some(b.lo);
                let hi = (b.hi_kind != EdgeKind::Window).then_some(b.hi);
                lo.into_iter().chain(hi)
            })
            .collect()
    }

    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.bands.iter().map(|b| (b.lo, b.hi)).collect()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            bands: self
                .bands
                .iter()
                .map(|b| Band {
                    lo: b.lo + c,
                    hi: b.hi + c,
                    closed_gaps: b.closed_gaps.iter().map(|g| g + c).collect(),
                    ..b.clone()
                })
                .collect(),
            window: (self.window.0 + c, self.window.1 + c),
        }
    }

    /// Restriction to a sub-window; cut edges become `Window`.
    pub fn clipped(&self, window: (f64, f64)) -> Self {
        let bands = self
            .bands
            .iter()
            .filter(|b| b.hi >= window.0 && b.lo <= window.1)
            .map(|b| {
                let mut c = b.clone();
                if c.lo < window.0 {
                    c.lo = window.0;
                    c.lo_kind = EdgeKind::Window;
                }
                if c.hi > window.1 {
                    c.hi = window.1;
                    c.hi_kind = EdgeKind::Window;
                }
                c.closed_gaps.retain(|g| *g > c.lo && *g < c.hi);
                c
            })
            .collect();
        Self { bands, window }
    }

    /// Ordering, |Delta| <= 2 inside bands, |Delta| = 2 at edges and edge-kind
    /// alternation (kinds differ across a band with an even number of closed
    /// gaps and agree across every gap).
    pub fn check_invariants(&self, v: &PeriodicPotential, tol: f64) -> Result<(), String> {
        self.check_invariants_with(v, tol, BAND_SLACK)
    }

    /// As `check_invariants` with an explicit slack on |Delta| = 2. Long
    /// periods amplify rounding in Delta near deep edges beyond 1e-8.
    pub fn check_invariants_with(&self, v: &PeriodicPotential, tol: f64, slack: f64) -> Result<(), String> {
        for w in self.bands.windows(2) {
            if w[0].hi > w[1].lo {
                return Err(format!("bands overlap at {} > {}", w[0].hi, w[1].lo));
            }
            let (a, b) = (w[0].hi_kind, w[1].lo_kind);
            if a != EdgeKind::Window && b != EdgeKind::Window && a != b {
                return Err(format!("gap ({}, {}) has edges of different kinds", w[0].hi, w[1].lo));
            }
        }
        for band in &self.bands {
            if band.lo > band.hi || band.lo < self.window.0 || band.hi > self.window.1 {
                return Err(format!("band [{}, {}] malformed or outside the window", band.lo, band.hi));
            }
            if band.lo_kind != EdgeKind::Window && band.hi_kind != EdgeKind::Window {
                let differ = band.lo_kind != band.hi_kind;
                if differ != (band.closed_gaps.len() % 2 == 0) {
                    return Err(format!("edge kinds of band [{}, {}] do not alternate", band.lo, band.hi));
                }
            }
            for i in 1..=16 {
                let e = band.lo + (band.hi - band.lo) * i as f64 / 17.0;
                let (d, _) = discriminant_with_derivative(v, e, tol).map_err(|e| e.to_string())?;
                if d.abs() > 2.0 + slack {
                    return Err(format!("|Delta({e})| = {} inside a band", d.abs()));
                }
            }
            for (e, kind) in [(band.lo, band.lo_kind), (band.hi, band.hi_kind)] {
                if kind == EdgeKind::Window {
                    continue;
                }
                let (d, _) = discriminant_with_derivative(v, e, tol).map_err(|e| e.to_string())?;
                let target = if kind == EdgeKind::Periodic { 2.0 } else { -2.0 };
                if (d - target).abs() > slack {
                    return Err(format!("Delta({e}) = {d} at a {} edge", kind.label()));
                }
            }
        }
        Ok(())
    }
}

fn merge_intervals(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn dist_to_union(x: f64, u: &[(f64, f64)]) -> f64 {
    u.iter()
        .map(|&(a, b)| if x < a { a - x } else if x > b { x - b } else { 0.0 })
        .fold(f64::INFINITY, f64::min)
}

/// sup over x in (A clipped to the window) of dist(x, B).
fn directed(a: &[(f64, f64)], b: &[(f64, f64)], window: (f64, f64)) -> f64 {
    let mut worst = 0.0f64;
    for &(lo, hi) in a {
        let (lo, hi) = (lo.max(window.0), hi.min(window.1));
        if lo > hi {
            continue;
        }
        // dist(., B) is piecewise linear with maxima at ends or at gap midpoints.
        let mut candidates = vec![lo, hi];
        for w in b.windows(2) {
            let m = 0.5 * (w[0].1 + w[1].0);
            if m > lo && m < hi {
                candidates.push(m);
            }
        }
        for x in candidates {
            worst = worst.max(dist_to_union(x, b));
        }
    }
    worst
}

/// Hausdorff distance between two band sets restricted to `window`. Points of
/// one set inside the window are measured against the whole of the other, so
/// spectra computed on a wider window give the exact clipped distance.
pub fn hausdorff_bands(a: &BandSpectrum, b: &BandSpectrum, window: (f64, f64)) -> f64 {
    let ia = merge_intervals(a.intervals());
    let ib = merge_intervals(b.intervals());
    let inside = |u: &[(f64, f64)]| u.iter().any(|&(lo, hi)| hi >= window.0 && lo <= window.1);
    match (inside(&ia), inside(&ib)) {
        (false, false) => 0.0,
        (true, _) if ib.is_empty() => f64::INFINITY,
        (_, true) if ia.is_empty() => f64::INFINITY,
        _ => directed(&ia, &ib, window).max(directed(&ib, &ia, window)),
    }
}

// Bisection until the bracket is below `tol` and the residual below `ftol`
// (or the bracket reaches one ulp); returns the endpoint with smaller residual.
fn bisect_fallible<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, tol: f64, ftol: f64) -> Result<f64, SpectralError>
where
    F: FnMut(f64) -> Result<f64, SpectralError>,
{
    let mut fb = f64::INFINITY;
    loop {
        if (b - a).abs() <= tol && fa.abs().min(fb.abs()) <= ftol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    if ftol.is_finite() {
        Ok(if fa.abs() <= fb.abs() { a } else { b })
    } else {
        Ok(0.5 * (a + b))
    }
}

/// Samples (E, Delta, Delta') on a uniform grid of `n` points over the window.
pub fn discriminant_trace(
    v: &PeriodicPotential,
    window: (f64, f64),
    n: usize,
    ode_tol: f64,
) -> Result<Vec<(f64, f64, f64)>, SpectralError> {
    if n < 2 || !(window.0 < window.1) {
        return Err(SpectralError::Invalid("need at least 2 points on a nonempty window".into()));
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let e = window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64;
            discriminant_with_derivative(v, e, ode_tol).map(|(d, dp)| (e, d, dp))
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Breakpoint {
    e: f64,
    delta: f64,
    critical: bool,
}

// Interior extrema of Delta, located by bisection on Delta'. Cells where the
// sign of Delta' disagrees with the change of Delta hide turning points.
fn critical_points(
    v: &PeriodicPotential,
    trace: &[(f64, f64, f64)],
    tol: f64,
    ode_tol: f64,
) -> Result<Vec<Breakpoint>, SpectralError> {
    let mut out = Vec::new();
    for w in trace.windows(2) {
        let ((e0, d0, p0), (e1, d1, p1)) = (w[0], w[1]);
        let slack = 1e-8 * (1.0 + d0.abs().max(d1.abs()));
        if p0 == 0.0 {
            out.push(Breakpoint { e: e0, delta: d0, critical: true });
            continue;
        }
        if p0 * p1 < 0.0 {
            let e = bisect_fallible(
                |e| discriminant_with_derivative(v, e, ode_tol).map(|r| r.1),
                e0,
                e1,
                p0,
                tol,
                f64::INFINITY,
            )?;
            let (d, _) = discriminant_with_derivative(v, e, ode_tol)?;
            let consistent = if p0 > 0.0 { d >= d0.max(d1) - slack } else { d <= d0.min(d1) + slack };
            if !consistent {
                return Err(SpectralError::WindowTooCoarse { energy: e0 });
            }
            out.push(Breakpoint { e, delta: d, critical: true });
        } else if p1 != 0.0 && (d1 - d0) * p0 < -slack {
            return Err(SpectralError::WindowTooCoarse { energy: e0 });
        }
    }
    Ok(out)
}

fn window_kind(delta: f64) -> EdgeKind {
    if (delta.abs() - 2.0).abs() <= CLOSED_GAP {
        EdgeKind::of(delta)
    } else {
        EdgeKind::Window
    }
}

/// Bands of -d^2/dx^2 + V inside the window: Delta is scanned on `grid_n`
/// points, its extrema split the window into monotone pieces and each
/// crossing of |Delta| = 2 is bisected to `tol`. Integration uses `ode_tol`.
pub fn band_spectrum_with(
    v: &PeriodicPotential,
    window: (f64, f64),
    grid_n: usize,
    tol: f64,
    ode_tol: f64,
) -> Result<BandSpectrum, SpectralError> {
    if grid_n < 256 {
        return Err(SpectralError::Invalid(format!("grid of {grid_n} points; at least 256 required")));
    }
    if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) || !(tol > 0.0) {
        return Err(SpectralError::Invalid("window must be a finite nonempty interval".into()));
    }
    let trace = discriminant_trace(v, window, grid_n, ode_tol)?;
    let mut points = vec![Breakpoint { e: window.0, delta: trace[0].1, critical: false }];
    points.extend(critical_points(v, &trace, tol, ode_tol)?.into_iter().filter(|b| b.e > window.0 && b.e < window.1));
    points.push(Breakpoint { e: window.1, delta: trace[grid_n - 1].1, critical: false });

    let clamp = |b: &Breakpoint| {
        if b.critical && b.delta.abs() > 2.0 && b.delta.abs() - 2.0 <= CLOSED_GAP {
            2.0f64.copysign(b.delta)
        } else {
            b.delta
        }
    };
    let cross = |target: f64, a: f64, b: f64, fa: f64| {
        bisect_fallible(
            |e| discriminant_with_derivative(v, e, ode_tol).map(|r| r.0 - target),
            a,
            b,
            fa - target,
            tol,
            0.1 * CLOSED_GAP,
        )
    };

    let mut bands: Vec<Band> = Vec::new();
    let mut open: Option<Band> = None;
    for w in points.windows(2) {
        let (pa, pb) = (w[0], w[1]);
        let (da, db) = (clamp(&pa), clamp(&pb));
        let (lo_in, hi_in) = if db >= da { (da >= -2.0, db <= 2.0) } else { (da <= 2.0, db >= -2.0) };
        let (enter, leave) = if db >= da { (-2.0, 2.0) } else { (2.0, -2.0) };
        // Piece entirely outside the spectrum.
        if (db >= da && (da > 2.0 || db < -2.0)) || (db < da && (db > 2.0 || da < -2.0)) {
            if let Some(b) = open.take() {
                bands.push(b);
            }
            continue;
        }
        let start = if lo_in {
            match open.as_mut() {
                Some(b) => {
                    if pa.critical {
                        b.closed_gaps.push(pa.e);
                    }
                    None
                }
                None => Some((pa.e, if pa.critical { EdgeKind::of(da) } else { window_kind(pa.delta) })),
            }
        } else {
            if let Some(b) = open.take() {
                bands.push(b);
            }
            Some((cross(enter, pa.e, pb.e, pa.delta)?, EdgeKind::of(enter)))
        };
        if let Some((lo, lo_kind)) = start {
            open = Some(Band { lo, hi: lo, lo_kind, hi_kind: EdgeKind::Window, closed_gaps: Vec::new() });
        }
        let band = open.as_mut().expect("band opened above");
        if hi_in {
            band.hi = pb.e;
            band.hi_kind = if pb.critical { EdgeKind::of(db) } else { window_kind(pb.delta) };
        } else {
            band.hi = cross(leave, pa.e, pb.e, pa.delta)?;
            band.hi_kind = EdgeKind::of(leave);
            bands.push(open.take().expect("band is open"));
        }
    }
    if let Some(b) = open.take() {
        bands.push(b);
    }
    Ok(BandSpectrum { bands, window })
}

/// `band_spectrum_with` at integrator tolerance 1e-10.
pub fn band_spectrum(
    v: &PeriodicPotential,
    window: (f64, f64),
    grid_n: usize,
    tol: f64,
) -> Result<BandSpectrum, SpectralError> {
    band_spectrum_with(v, window, grid_n, tol, 1e-10)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub p: f64,
    pub q: f64,
    /// Hausdorff distance of the band sets on the window.
    pub distance: f64,
    /// sup |V_p - V_q|.
    pub potential_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub spectra: Vec<(f64, BandSpectrum)>,
    pub pairs: Vec<PairReport>,
}

impl FamilyReport {
    /// Largest amount by which a band distance exceeds its potential distance.
    pub fn max_excess(&self) -> f64 {
        self.pairs.iter().map(|r| r.distance - r.potential_distance).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn within(&self, slack: f64) -> bool {
        self.pairs.iter().all(|r| r.distance <= r.potential_distance + slack)
    }
}

/// Spectra along a parameter grid and the adjacent-pair continuity report.
/// Spectra are computed on a widened window so the clipped distance is exact.
pub fn spectrum_family<F>(
    family: F,
    p_grid: &[f64],
    window: (f64, f64),
    grid_n: usize,
    tol: f64,
) -> Result<FamilyReport, SpectralError>
where
    F: Fn(f64) -> PeriodicPotential + Sync,
{
    let potentials: Vec<PeriodicPotential> = p_grid.iter().map(|&p| family(p)).collect();
    let jumps: Vec<f64> = potentials.windows(2).map(|w| w[0].sup_distance(&w[1])).collect();
    let margin = jumps.iter().fold(0.0f64, |a, &b| a.max(b)) + 1.0;
    let wide = (window.0 - margin, window.1 + margin);
    let wide_n = grid_n + (grid_n as f64 * 2.0 * margin / (window.1 - window.0)).ceil() as usize;
    let spectra: Vec<BandSpectrum> = potentials
        .par_iter()
        .map(|v| band_spectrum(v, wide, wide_n, tol))
        .collect::<Result<_, _>>()?;
    let pairs = (0..spectra.len().saturating_sub(1))
        .map(|i| PairReport {
            p: p_grid[i],
            q: p_grid[i + 1],
            distance: hausdorff_bands(&spectra[i], &spectra[i + 1], window),
            potential_distance: jumps[i],
        })
        .collect();
    Ok(FamilyReport {
        spectra: p_grid.iter().zip(&spectra).map(|(&p, s)| (p, s.clipped(window))).collect(),
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub spectra: Vec<(usize, BandSpectrum)>,
    /// d_H(sigma_n, sigma_{n+1}) on the window.
    pub distances: Vec<f64>,
    /// tau_n + tau_{n+1}.
    pub bounds: Vec<f64>,
    pub monotone: bool,
}

impl LimitReport {
    pub fn within(&self, slack: f64) -> bool {
        self.distances.iter().zip(&self.bounds).all(|(d, b)| *d <= b + slack)
    }
}

/// Spectra of the approximants V_0..V_{n_max}. The grid grows with the
/// period, and is doubled (up to three times) when hidden turning points
/// are detected.
pub fn limit_periodic_spectrum(
    lp: &LimitPeriodicPotential,
    window: (f64, f64),
    n_max: usize,
    grid_n: usize,
    tol: f64,
) -> Result<LimitReport, SpectralError> {
    if n_max >= lp.approximants.len() || lp.tails.len() != lp.approximants.len() {
        return Err(SpectralError::Invalid(format!(
            "n_max = {n_max} but only {} approximants",
            lp.approximants.len()
        )));
    }
    let margin = 2.0 * lp.tails[0] + 0.5;
    let wide = (window.0 - margin, window.1 + margin);
    let base = lp.approximants[0].period;
    let spectra: Vec<BandSpectrum> = lp.approximants[..=n_max]
        .par_iter()
        .map(|v| {
            let scale = (v.period / base).max(1.0).round() as usize;
            let mut grid = grid_n * scale;
            let mut attempt = 0;
            loop {
                match band_spectrum(v, wide, grid, tol) {
                    Err(SpectralError::WindowTooCoarse { .. }) if attempt < 3 => {
                        grid *= 2;
                        attempt += 1;
                    }
                    other => return other,
                }
            }
        })
        .collect::<Result<_, _>>()?;
    let distances: Vec<f64> = spectra.windows(2).map(|w| hausdorff_bands(&w[0], &w[1], window)).collect();
    let bounds = (0..n_max).map(|n| lp.tails[n] + lp.tails[n + 1]).collect();
    let monotone = distances.windows(2).all(|w| w[1] <= w[0]);
    Ok(LimitReport {
        spectra: spectra.iter().enumerate().map(|(n, s)| (n, s.clipped(window))).collect(),
        distances,
        bounds,
        monotone,
    })
}
