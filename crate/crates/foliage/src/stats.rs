//! Return statistics of an orbit against a reference point: frequencies,
//! counting functions, the growth gauge f0 and the order it induces, isolated
//! points and their recursion, maximal sets, decomposition diagnostics and
//! box-counting dimension.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{tail_net, OrbitTrace};
use crate::util::{circle_dist, lsq_slope};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("trace of length {len} is shorter than required {required}")]
    TraceTooShort { len: usize, required: usize },
    #[error("{x} is not an accumulation point of the trace at scale {scale}")]
    NotAccumulationPoint { x: f64, scale: f64 },
    #[error("no limit points among the candidates")]
    NoLimitPoints,
    #[error("degenerate scales: {0}")]
    DegenerateScales(String),
}

/// Frequency estimate over the full trace and over its tail half.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NuEstimate {
    pub value: f64,
    pub tail_value: f64,
    /// Relative gap between the two estimates.
    pub gap: f64,
}

impl NuEstimate {
    /// The limit is considered to exist when the gap is below the threshold.
    pub fn converged(&self, threshold: f64) -> bool {
        self.gap < threshold
    }
}

fn visits(points: &[f64], x: f64, eps: f64) -> usize {
    points.iter().filter(|&&p| circle_dist(p, x) < eps).count()
}

pub fn frequency_nu_estimate(trace: &OrbitTrace, x: f64, eps: f64) -> Result<NuEstimate, StatsError> {
    let n = trace.len();
    if n < 1000 {
        return Err(StatsError::TraceTooShort { len: n, required: 1000 });
    }
    let pts = &trace.points[1..];
    let value = visits(pts, x, eps) as f64 / n as f64;
    let tail = &pts[n / 2..];
    let tail_value = visits(tail, x, eps) as f64 / tail.len() as f64;
    let scale = value.max(tail_value);
    let gap = if scale == 0.0 { 0.0 } else { (value - tail_value).abs() / scale };
    Ok(NuEstimate { value, tail_value, gap })
}

/// nu_eps(x) = N1 / N over x_1, ..., x_N.
pub fn frequency_nu(trace: &OrbitTrace, x: f64, eps: f64) -> Result<f64, StatsError> {
    Ok(frequency_nu_estimate(trace, x, eps)?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountingFunction {
    /// (n, N1(n)) at each checkpoint.
    pub samples: Vec<(usize, usize)>,
    /// Mean of N1(n) / n over the checkpoints.
    pub cesaro_mean: f64,
}

pub fn counting_function(
    trace: &OrbitTrace,
    x: f64,
    eps: f64,
    checkpoints: &[usize],
) -> Result<CountingFunction, StatsError> {
    let n = trace.len();
    if let Some(&bad) = checkpoints.iter().find(|&&c| c > n) {
        return Err(StatsError::TraceTooShort { len: n, required: bad });
    }
    let mut order: Vec<usize> = checkpoints.to_vec();
    order.sort_unstable();
    let mut cum = vec![0usize; n + 1];
    for k in 1..=n {
        cum[k] = cum[k - 1] + usize::from(circle_dist(trace.points[k], x) < eps);
    }
    let samples: Vec<(usize, usize)> = checkpoints.iter().map(|&c| (c, cum[c])).collect();
    let ratios: Vec<f64> =
        samples.iter().filter(|s| s.0 > 0).map(|&(c, v)| v as f64 / c as f64).collect();
    let cesaro_mean = if ratios.is_empty() { 0.0 } else { ratios.iter().sum::<f64>() / ratios.len() as f64 };
    Ok(CountingFunction { samples, cesaro_mean })
}

/// Largest k <= depth with d < 2^-k (0 if none).
fn depth_reached(d: f64, depth: u32) -> u32 {
    let mut k = 0;
    while k < depth && d < 0.5f64.powi(k as i32 + 1) {
        k += 1;
    }
    k
}

/// f0(x, k) for k = 1..=depth: the largest index n <= N with d(x_n, x) < 2^-k.
pub fn growth_gauge(trace: &OrbitTrace, x: f64, depth: u32) -> Result<Vec<usize>, StatsError> {
    gauge_of(&trace.points, x, depth)
}

pub(crate) fn gauge_of(points: &[f64], x: f64, depth: u32) -> Result<Vec<usize>, StatsError> {
    let mut out = vec![0usize; depth as usize];
    let mut resolved = 0u32;
    for n in (1..points.len()).rev() {
        let k = depth_reached(circle_dist(points[n], x), depth);
        if k > resolved {
            for j in resolved..k {
                out[j as usize] = n;
            }
            resolved = k;
            if resolved == depth {
                break;
            }
        }
    }
    if resolved < depth {
        return Err(StatsError::NotAccumulationPoint { x, scale: 0.5f64.powi(depth as i32) });
    }
    Ok(out)
}

/// Points of the list whose eps-ball contains no other (distinct) point.
pub fn isolated_points(points: &[f64], eps: f64) -> Vec<f64> {
    let distinct = distinct_sorted(points);
    let n = distinct.len();
    if n == 1 {
        return distinct;
    }
    (0..n)
        .filter(|&i| {
            let prev = distinct[(i + n - 1) % n];
            let next = distinct[(i + 1) % n];
            circle_dist(distinct[i], prev) >= eps && circle_dist(distinct[i], next) >= eps
        })
        .map(|i| distinct[i])
        .collect()
}

fn distinct_sorted(points: &[f64]) -> Vec<f64> {
    let mut v = points.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().map_or(true, |&l| x - l > 1e-12) {
            out.push(x);
        }
    }
    if out.len() > 1 && circle_dist(out[0], *out.last().unwrap()) <= 1e-12 {
        out.pop();
    }
    out
}

/// f(0) = 0 and f(n) = f(n - 1) + [x_n in S0] along the given enumeration.
pub fn isolated_recursion(intersection: &[f64], s0: &[f64]) -> Vec<usize> {
    let mut members = s0.to_vec();
    members.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let contains = |x: f64| {
        let i = members.partition_point(|&m| m < x - 1e-12);
        (i < members.len() && (members[i] - x).abs() <= 1e-12)
            || members.first().map_or(false, |&m| circle_dist(m, x) <= 1e-12)
            || members.last().map_or(false, |&m| circle_dist(m, x) <= 1e-12)
    };
    let mut f = Vec::with_capacity(intersection.len());
    let mut acc = 0usize;
    for (n, &x) in intersection.iter().enumerate() {
        if n > 0 && contains(x) {
            acc += 1;
        }
        f.push(acc);
    }
    f
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Classification {
    IsolatedPoint,
    LimitPoint { gauge_slope: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileConfig {
    pub eps_grid: Vec<f64>,
    pub depth: u32,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { eps_grid: (3..=12).map(|k| 0.5f64.powi(k)).collect(), depth: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyProfile {
    pub x: f64,
    pub eps: Vec<f64>,
    pub nu: Vec<f64>,
    /// For each eps, (n, f_eps(n)) at n = 2^j <= N.
    pub counting: Vec<Vec<(usize, usize)>>,
    /// f0(x, k), k = 1..=depth (empty for isolated points).
    pub gauge: Vec<usize>,
    pub classification: Classification,
}

pub fn profile(trace: &OrbitTrace, x: f64, config: &ProfileConfig) -> Result<FrequencyProfile, StatsError> {
    let n = trace.len();
    let checkpoints: Vec<usize> = (0..).map(|j| 1usize << j).take_while(|&c| c <= n).collect();
    let mut nu = Vec::with_capacity(config.eps_grid.len());
    let mut counting = Vec::with_capacity(config.eps_grid.len());
    for &e in &config.eps_grid {
        nu.push(frequency_nu(trace, x, e)?);
        counting.push(counting_function(trace, x, e, &checkpoints)?.samples);
    }
    let (gauge, classification) = match growth_gauge(trace, x, config.depth) {
        Ok(g) => {
            let ks: Vec<f64> = (1..=config.depth).map(f64::from).collect();
            let logs: Vec<f64> = g.iter().map(|&v| (v as f64).log2()).collect();
            let slope = lsq_slope(&ks, &logs);
            (g, Classification::LimitPoint { gauge_slope: slope })
        }
        Err(StatsError::NotAccumulationPoint { .. }) => (Vec::new(), Classification::IsolatedPoint),
        Err(e) => return Err(e),
    };
    Ok(FrequencyProfile { x, eps: config.eps_grid.clone(), nu, counting, gauge, classification })
}

impl FrequencyProfile {
    /// Bounds and monotonicity of nu and f_eps.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut idx: Vec<usize> = (0..self.eps.len()).collect();
        idx.sort_by(|&a, &b| self.eps[a].partial_cmp(&self.eps[b]).unwrap());
        for &i in &idx {
            if !(0.0..=1.0).contains(&self.nu[i]) {
                return Err(format!("nu out of range at eps {}", self.eps[i]));
            }
            for &(n, v) in &self.counting[i] {
                if v > n {
                    return Err(format!("f_eps(n) > n at eps {}, n {}", self.eps[i], n));
                }
            }
        }
        for w in idx.windows(2) {
            let (small, large) = (w[0], w[1]);
            if self.nu[small] > self.nu[large] {
                return Err(format!("nu not monotone between eps {} and {}", self.eps[small], self.eps[large]));
            }
            for (a, b) in self.counting[small].iter().zip(&self.counting[large]) {
                if a.1 > b.1 {
                    return Err(format!("f_eps not monotone in eps at n = {}", a.0));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthOrder {
    Geq,
    Leq,
    Equivalent,
    Incomparable,
}

/// Ratio sequence r_k = a_k / b_k is bounded when its maximum over the tail
/// half of the depth range does not exceed 1.5 times the maximum over the head.
fn ratio_bounded(a: &[usize], b: &[usize]) -> bool {
    let r: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| if y == 0 { f64::INFINITY } else { x as f64 / y as f64 })
        .collect();
    if r.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let h = r.len() / 2;
    let head = r[..h.max(1)].iter().cloned().fold(0.0, f64::max);
    let tail = r[h..].iter().cloned().fold(0.0, f64::max);
    tail <= 1.5 * head.max(f64::MIN_POSITIVE)
}

/// Order of two gauges: x >= y when f0(x)/f0(y) stays bounded.
pub fn compare_gauges(p: &[usize], q: &[usize]) -> GrowthOrder {
    let n = p.len().min(q.len());
    if n == 0 {
        return GrowthOrder::Incomparable;
    }
    let (p, q) = (&p[..n], &q[..n]);
    match (ratio_bounded(p, q), ratio_bounded(q, p)) {
        (true, true) => GrowthOrder::Equivalent,
        (true, false) => GrowthOrder::Geq,
        (false, true) => GrowthOrder::Leq,
        (false, false) => GrowthOrder::Incomparable,
    }
}

pub fn compare_growth(p: &FrequencyProfile, q: &FrequencyProfile) -> GrowthOrder {
    match (&p.classification, &q.classification) {
        (Classification::LimitPoint { .. }, Classification::LimitPoint { .. }) => {
            compare_gauges(&p.gauge, &q.gauge)
        }
        _ => GrowthOrder::Incomparable,
    }
}

/// Pairwise relation table over profiled points: entry (i, j) is true when i >= j.
pub fn order_table(gauges: &[Vec<usize>]) -> Vec<Vec<bool>> {
    gauges
        .par_iter()
        .map(|a| {
            gauges
                .iter()
                .map(|b| matches!(compare_gauges(a, b), GrowthOrder::Geq | GrowthOrder::Equivalent))
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximalSet {
    pub x_max: Vec<f64>,
    pub x_min: Vec<f64>,
    pub resolution: f64,
}

/// X_min is the net (cell width eps / 2) of the whole trace, i.e. its closure at
/// resolution eps; X_max are the limit points of that net that are maximal under
/// the gauge order.
pub fn maximal_set(traces: &[&OrbitTrace], eps: f64, depth: u32) -> Result<MaximalSet, StatsError> {
    let mut all: Vec<f64> = Vec::new();
    for t in traces {
        all.extend_from_slice(&t.points);
    }
    let x_min = closure_net(&all, eps);
    let gauges: Vec<Option<Vec<usize>>> = x_min
        .par_iter()
        .map(|&x| {
            let mut best: Option<Vec<usize>> = None;
            for t in traces {
                if let Ok(g) = gauge_of(&t.points, x, depth) {
                    best = Some(match best {
                        Some(b) => b.iter().zip(&g).map(|(a, c)| *a.max(c)).collect(),
                        None => g,
                    });
                }
            }
            best
        })
        .collect();
    let limit: Vec<(f64, Vec<usize>)> = x_min
        .iter()
        .zip(gauges)
        .filter_map(|(&x, g)| g.map(|g| (x, g)))
        .collect();
    if limit.is_empty() {
        return Err(StatsError::NoLimitPoints);
    }
    let gs: Vec<Vec<usize>> = limit.iter().map(|l| l.1.clone()).collect();
    let table = order_table(&gs);
    let x_max = (0..limit.len())
        .filter(|&i| !(0..limit.len()).any(|j| table[j][i] && !table[i][j]))
        .map(|i| limit[i].0)
        .collect();
    Ok(MaximalSet { x_max, x_min, resolution: eps })
}

/// One representative (first visit) per occupied cell of width eps / 2.
pub fn closure_net(points: &[f64], eps: f64) -> Vec<f64> {
    let cells = (2.0 / eps).ceil() as usize;
    let mut rep: Vec<Option<f64>> = vec![None; cells];
    for &x in points {
        let c = ((x * cells as f64) as usize).min(cells - 1);
        if rep[c].is_none() {
            rep[c] = Some(x);
        }
    }
    rep.into_iter().flatten().collect()
}

/// Distance from x to the nearest point of a sorted circle net.
pub fn distance_to_net(net_sorted: &[f64], x: f64) -> f64 {
    if net_sorted.is_empty() {
        return f64::INFINITY;
    }
    let i = net_sorted.partition_point(|&p| p < x);
    let n = net_sorted.len();
    [i % n, (i + n - 1) % n].iter().map(|&j| circle_dist(net_sorted[j], x)).fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub isolated_component_present: bool,
    pub limit_point_set_finite: bool,
    /// Number of limit points when finite.
    pub limit_count: Option<usize>,
}

fn in_window(x: f64, window: (f64, f64)) -> bool {
    let (a, b) = window;
    if a <= b {
        x >= a && x <= b
    } else {
        x >= a || x <= b
    }
}

fn occupied(points: &[f64], width: f64) -> usize {
    let cells = (1.0 / width).ceil() as usize;
    let mut seen = vec![false; cells];
    for &x in points {
        seen[((x * cells as f64) as usize).min(cells - 1)] = true;
    }
    seen.iter().filter(|&&s| s).count()
}

/// Isolated-point and limit-set diagnostics of the trace restricted to a window of P.
pub fn decomposition_profile(
    trace: &OrbitTrace,
    window: (f64, f64),
    eps: f64,
) -> Result<Decomposition, StatsError> {
    let n = trace.len();
    if n < 10_000 {
        return Err(StatsError::TraceTooShort { len: n, required: 10_000 });
    }
    let pts: Vec<f64> = trace.points.iter().cloned().filter(|&x| in_window(x, window)).collect();
    let isolated_component_present = !isolated_points(&pts, eps).is_empty();
    let tail: Vec<f64> =
        trace.points[n / 2..].iter().cloned().filter(|&x| in_window(x, window)).collect();
    let coarse = occupied(&tail, eps);
    let fine = occupied(&tail, eps / 8.0);
    let finite = coarse > 0 && coarse == fine;
    Ok(Decomposition {
        isolated_component_present,
        limit_point_set_finite: finite,
        limit_count: finite.then_some(fine),
    })
}

/// Least-squares slope of log N(delta) against log(1/delta).
pub fn box_dimension(points: &[f64], scales: &[f64]) -> Result<f64, StatsError> {
    if points.len() < 1000 {
        return Err(StatsError::DegenerateScales(format!("{} points, need 1000", points.len())));
    }
    if scales.len() < 4 {
        return Err(StatsError::DegenerateScales(format!("{} scales, need 4", scales.len())));
    }
    let mut sorted = scales.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    if sorted.iter().any(|&s| !(s > 0.0) || !s.is_finite()) || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(StatsError::DegenerateScales("scales must be distinct and positive".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = scales
        .iter()
        .map(|&d| {
            let mut boxes: Vec<i64> = points.iter().map(|&p| (p / d).floor() as i64).collect();
            boxes.sort_unstable();
            boxes.dedup();
            ((1.0 / d).ln(), (boxes.len() as f64).ln())
        })
        .unzip();
    Ok(lsq_slope(&xs, &ys))
}

/// Cells of width eps visited in the tail half, as an eps-net.
pub fn tail_limit_net(trace: &OrbitTrace, eps: f64) -> Vec<f64> {
    tail_net(&trace.points, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{iterate, make_rotation};

    #[test]
    fn half_rotation_misses_quarter() {
        let t = iterate(&make_rotation(0.5), 0.0, 2000);
        assert_eq!(frequency_nu(&t, 0.25, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn half_ball_counts_everything() {
        let t = iterate(&make_rotation(0.3819660112501051), 0.1, 5000);
        let c = counting_function(&t, 0.4, 0.5, &[10, 100, 5000]).unwrap();
        assert_eq!(c.samples, vec![(10, 10), (100, 100), (5000, 5000)]);
        assert_eq!(c.cesaro_mean, 1.0);
    }

    #[test]
    fn never_approached_counts_zero() {
        let t = iterate(&make_rotation(0.5), 0.0, 100);
        let c = counting_function(&t, 0.25, 0.1, &[1, 50, 100]).unwrap();
        assert!(c.samples.iter().all(|s| s.1 == 0));
    }

    #[test]
    fn recursion_cases() {
        let pts: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
        assert_eq!(isolated_recursion(&pts, &pts), (0..10).collect::<Vec<_>>());
        assert_eq!(isolated_recursion(&pts, &[]), vec![0; 10]);
        let odd: Vec<f64> = pts.iter().cloned().enumerate().filter(|(i, _)| i % 2 == 1).map(|p| p.1).collect();
        let f = isolated_recursion(&pts, &odd);
        assert_eq!(f, (0..10).map(|n| (n + 1) / 2).collect::<Vec<_>>());
    }

    #[test]
    fn mixed_isolation() {
        let mut pts = vec![0.5];
        pts.extend((0..100).map(|k| 0.001 * k as f64 / 100.0));
        assert_eq!(isolated_points(&pts, 0.01), vec![0.5]);
    }

    #[test]
    fn linear_gauge_dominates_exponential() {
        let lin: Vec<usize> = (1..=12).collect();
        let exp: Vec<usize> = (1..=12).map(|k| 1usize << k).collect();
        assert_eq!(compare_gauges(&lin, &exp), GrowthOrder::Geq);
        assert_eq!(compare_gauges(&exp, &lin), GrowthOrder::Leq);
        assert_eq!(compare_gauges(&lin, &lin), GrowthOrder::Equivalent);
    }

    #[test]
    fn degenerate_scales_rejected() {
        let pts = vec![0.1; 1000];
        assert!(box_dimension(&pts, &[0.1, 0.01, 0.001]).is_err());
        assert!(box_dimension(&pts[..10], &[0.1, 0.01, 0.001, 1e-4]).is_err());
    }
}
