//! Orientation-preserving circle homeomorphisms given by monotone lifts,
//! their orbits, rotation numbers, closest returns and omega-limit nets.

use std::sync::Arc;

use crate::denjoy::DenjoyMap;
use crate::util::{circle_dist, frac};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircleError {
    #[error("rotation number estimates disagree: {estimates:?}")]
    NotConverged { estimates: Vec<f64> },
    #[error("trace of length {len} is shorter than required {required}")]
    TraceTooShort { len: usize, required: usize },
    #[error("lift is not strictly increasing near x = {x}")]
    NotMonotone { x: f64 },
    #[error("lift is not periodic at x = {x} (defect {defect})")]
    NotPeriodic { x: f64, defect: f64 },
    #[error("invalid circle map: {0}")]
    Invalid(String),
}

/// Monotone piecewise-linear lift through (x_i, y_i), x_0 = 0, closed by y(1) = y_0 + 1.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl LiftTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, CircleError> {
        if xs.is_empty() || xs.len() != ys.len() || xs[0] != 0.0 {
            return Err(CircleError::Invalid("table needs matching knots starting at 0".into()));
        }
        let mut xs = xs;
        let mut ys = ys;
        xs.push(1.0);
        ys.push(ys[0] + 1.0);
        for i in 1..xs.len() {
            if !(xs[i] > xs[i - 1]) || !(ys[i] > ys[i - 1]) {
                return Err(CircleError::NotMonotone { x: xs[i - 1] });
            }
        }
        Ok(Self { xs, ys })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = x.floor();
        let u = x - n;
        let i = self.xs.partition_point(|&k| k <= u).clamp(1, self.xs.len() - 1);
        let (x0, x1, y0, y1) = (self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (u - x0) / (x1 - x0) + n
    }

    fn eval_inverse(&self, y: f64) -> f64 {
        let n = (y - self.ys[0]).floor();
        let v = y - n;
        let i = self.ys.partition_point(|&k| k <= v).clamp(1, self.ys.len() - 1);
        let (x0, x1, y0, y1) = (self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i]);
        x0 + (x1 - x0) * (v - y0) / (y1 - y0) + n
    }
}

/// A circle homeomorphism represented by its lift F with F(x + 1) = F(x) + 1.
#[derive(Clone, Debug)]
pub enum CircleMap {
    /// F(x) = x + alpha.
    Rotation { alpha: f64 },
    /// F(x) = x + shift + coeff * sin(2 pi x), with 2 pi |coeff| < 1.
    Sine { shift: f64, coeff: f64 },
    Table(Arc<LiftTable>),
    Denjoy(Arc<DenjoyMap>),
    /// outer(inner(x)).
    Compose(Arc<CircleMap>, Arc<CircleMap>),
    Inverse(Arc<CircleMap>),
}

pub fn make_rotation(alpha: f64) -> CircleMap {
    CircleMap::Rotation { alpha }
}

impl CircleMap {
    pub fn sine(shift: f64, coeff: f64) -> Result<Self, CircleError> {
        if !(2.0 * std::f64::consts::PI * coeff.abs() < 1.0) {
            return Err(CircleError::NotMonotone { x: 0.0 });
        }
        Ok(CircleMap::Sine { shift, coeff })
    }

    pub fn table(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, CircleError> {
        Ok(CircleMap::Table(Arc::new(LiftTable::new(xs, ys)?)))
    }

    /// self after inner.
    pub fn compose(&self, inner: &CircleMap) -> CircleMap {
        CircleMap::Compose(Arc::new(self.clone()), Arc::new(inner.clone()))
    }

    pub fn inverse(&self) -> CircleMap {
        match self {
            CircleMap::Inverse(f) => (**f).clone(),
            CircleMap::Rotation { alpha } => CircleMap::Rotation { alpha: -alpha },
            other => CircleMap::Inverse(Arc::new(other.clone())),
        }
    }

    pub fn lift(&self, x: f64) -> f64 {
        match self {
            CircleMap::Rotation { alpha } => x + alpha,
            CircleMap::Sine { shift, coeff } => {
                x + shift + coeff * (2.0 * std::f64::consts::PI * x).sin()
            }
            CircleMap::Table(t) => t.eval(x),
            CircleMap::Denjoy(d) => d.lift(x),
            CircleMap::Compose(a, b) => a.lift(b.lift(x)),
            CircleMap::Inverse(f) => f.inverse_lift(x),
        }
    }

    /// Solves lift(y) = x.
    pub fn inverse_lift(&self, x: f64) -> f64 {
        match self {
            CircleMap::Rotation { alpha } => x - alpha,
            CircleMap::Table(t) => t.eval_inverse(x),
            CircleMap::Compose(a, b) => b.inverse_lift(a.inverse_lift(x)),
            CircleMap::Inverse(f) => f.lift(x),
            _ => self.bisect_inverse(x),
        }
    }

    fn bisect_inverse(&self, x: f64) -> f64 {
        // lift(y) - y varies by less than 1, so the preimage lies within 1 of x - D(x).
        let d = self.lift(x) - x;
        let mut lo = x - d - 1.0;
        let mut hi = x - d + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.lift(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// One step on the circle: returns the image in [0, 1) and the integer winding.
    pub fn step(&self, x: f64) -> (f64, i64) {
        let y = self.lift(x);
        let n = y.floor();
        let r = y - n;
        if r >= 1.0 {
            (0.0, n as i64 + 1)
        } else {
            (r, n as i64)
        }
    }

    /// Map on the circle.
    pub fn apply(&self, x: f64) -> f64 {
        self.step(x).0
    }

    /// Verify monotonicity and periodicity of the lift on an n-point grid.
    pub fn check_lift(&self, n: usize) -> Result<(), CircleError> {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            let y = self.lift(x);
            if !(y > prev) {
                return Err(CircleError::NotMonotone { x });
            }
            prev = y;
            let defect = self.lift(x + 1.0) - y - 1.0;
            if defect.abs() > 1e-12 {
                return Err(CircleError::NotPeriodic { x, defect });
            }
        }
        Ok(())
    }
}

/// Forward orbit x_0, ..., x_N of a circle map, stored mod 1 with integer windings.
#[derive(Clone, Debug)]
pub struct OrbitTrace {
    pub map: CircleMap,
    pub points: Vec<f64>,
    /// winding[k] = floor part of lift^k(x_0) - x_0 accumulated step by step.
    pub winding: Vec<i64>,
}

impl OrbitTrace {
    /// Number of steps N.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() <= 1
    }

    /// lift^k(x_0) - x_0.
    pub fn displacement(&self, k: usize) -> f64 {
        self.winding[k] as f64 + (self.points[k] - self.points[0])
    }
}

pub fn iterate(map: &CircleMap, x0: f64, n: usize) -> OrbitTrace {
    let mut points = Vec::with_capacity(n + 1);
    let mut winding = Vec::with_capacity(n + 1);
    let mut x = frac(x0);
    let mut w = 0i64;
    points.push(x);
    winding.push(0);
    for _ in 0..n {
        let (y, k) = map.step(x);
        x = y;
        w += k;
        points.push(x);
        winding.push(w);
    }
    OrbitTrace { map: map.clone(), points, winding }
}

fn displacement_after(map: &CircleMap, x0: f64, n: usize) -> f64 {
    let mut x = frac(x0);
    let mut w = 0i64;
    for _ in 0..n {
        let (y, k) = map.step(x);
        x = y;
        w += k;
    }
    w as f64 + (x - frac(x0))
}

/// Continued-fraction convergents p/q of x with q <= qmax.
pub fn convergents(x: f64, qmax: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0u64, x.floor() as i64, 1u64);
    out.push((p1, q1));
    let mut r = x - x.floor();
    for _ in 0..64 {
        if r.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / r;
        let a = inv.floor();
        r = inv - a;
        let a = a as u64;
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > qmax {
            break;
        }
        let p2 = a as i64 * p1 + p0;
        out.push((p2, q2));
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    out
}

/// Certifies rho = p/q by a sign change (or zero) of lift^q(x) - x - p on a grid.
fn periodic_certificate(map: &CircleMap, p: i64, q: u64, grid: usize) -> bool {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..grid {
        let x = i as f64 / grid as f64;
        let g = displacement_after(map, x, q as usize) - p as f64;
        lo = lo.min(g);
        hi = hi.max(g);
        if lo <= 0.0 && hi >= 0.0 {
            return true;
        }
    }
    false
}

/// Rotation number from the lift displacement over N steps, checked against N/2
/// and a second base point. Rational values certified by a periodic orbit are
/// returned exactly.
pub fn rotation_number(map: &CircleMap, n: usize, tol: f64) -> Result<f64, CircleError> {
    if n < 1000 {
        return Err(CircleError::TraceTooShort { len: n, required: 1000 });
    }
    let bases = [0.123, 0.618];
    let full: Vec<f64> = bases.iter().map(|&x| displacement_after(map, x, n) / n as f64).collect();
    let rho = full[0];
    let qmax = (n as u64 / 8).min(4096);
    for (p, q) in convergents(rho, qmax) {
        if (rho - p as f64 / q as f64).abs() <= 2.0 / n as f64 && periodic_certificate(map, p, q, 256) {
            return Ok(p as f64 / q as f64);
        }
    }
    let half: Vec<f64> =
        bases.iter().map(|&x| displacement_after(map, x, n / 2) / (n / 2) as f64).collect();
    let spread = full
        .iter()
        .zip(&half)
        .map(|(a, b)| (a - b).abs())
        .fold((full[0] - full[1]).abs(), f64::max);
    if spread > tol {
        let mut estimates = full.clone();
        estimates.extend(half);
        return Err(CircleError::NotConverged { estimates });
    }
    Ok(rho)
}

/// Indices n where x_n is strictly closer to x_0 than every earlier iterate.
pub fn closest_return_times(map: &CircleMap, x0: f64, n: usize) -> Vec<usize> {
    let trace = iterate(map, x0, n);
    closest_returns_of(&trace)
}

pub fn closest_returns_of(trace: &OrbitTrace) -> Vec<usize> {
    let x0 = trace.points[0];
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for (k, &x) in trace.points.iter().enumerate().skip(1) {
        let d = circle_dist(x, x0);
        if d < best {
            best = d;
            out.push(k);
        }
    }
    out
}

/// Epsilon-net of accumulation points: one representative (the first tail
/// visit) for every cell of width eps visited in the tail half of the trace.
pub fn omega_limit_set(trace: &OrbitTrace, eps: f64) -> Result<Vec<f64>, CircleError> {
    let required = (10.0 / eps).ceil() as usize;
    if trace.len() < required {
        return Err(CircleError::TraceTooShort { len: trace.len(), required });
    }
    Ok(tail_net(&trace.points, eps))
}

pub(crate) fn tail_net(points: &[f64], eps: f64) -> Vec<f64> {
    let cells = (1.0 / eps).ceil() as usize;
    let mut rep: Vec<Option<f64>> = vec![None; cells];
    let start = points.len() / 2;
    for &x in &points[start..] {
        let c = ((x * cells as f64) as usize).min(cells - 1);
        if rep[c].is_none() {
            rep[c] = Some(x);
        }
    }
    rep.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_orbit_constant() {
        let t = iterate(&make_rotation(0.0), 0.3, 10);
        assert!(t.points.iter().all(|&x| x == 0.3));
    }

    #[test]
    fn half_rotation_has_period_two() {
        let t = iterate(&make_rotation(0.5), 0.2, 10);
        for k in 0..8 {
            assert!(circle_dist(t.points[k], t.points[k + 2]) < 1e-15);
            assert!(circle_dist(t.points[k], t.points[k + 1]) > 0.4);
        }
    }

    #[test]
    fn third_rotation_orbit() {
        let t = iterate(&make_rotation(1.0 / 3.0), 0.0, 6);
        let want = [0.0, 1.0 / 3.0, 2.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0];
        for (a, b) in t.points.iter().zip(want) {
            assert!(circle_dist(*a, b) < 1e-12);
        }
    }

    #[test]
    fn sine_map_with_fixed_points_has_zero_rotation() {
        let g = CircleMap::sine(0.0, 0.1).unwrap();
        assert!(g.check_lift(1000).is_ok());
        assert_eq!(rotation_number(&g, 100_000, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn table_inverse_round_trip() {
        let f = CircleMap::table(vec![0.0, 0.3, 0.7], vec![0.1, 0.2, 0.9]).unwrap();
        for i in 0..100 {
            let x = i as f64 * 0.037 - 1.3;
            assert!((f.inverse_lift(f.lift(x)) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn two_fifths_closest_returns() {
        assert_eq!(closest_return_times(&make_rotation(0.4), 0.0, 50), vec![1, 2, 5]);
    }

    #[test]
    fn convergents_of_golden() {
        let c = convergents((5f64.sqrt() - 1.0) / 2.0, 100);
        let qs: Vec<u64> = c.iter().map(|x| x.1).collect();
        assert_eq!(qs, vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }

    #[test]
    fn short_trace_rejected() {
        let t = iterate(&make_rotation(0.3), 0.0, 50);
        assert!(matches!(omega_limit_set(&t, 0.01), Err(CircleError::TraceTooShort { .. })));
    }
}
