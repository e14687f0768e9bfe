//! C^1 Denjoy circle maps: the orbit of the base point 0 under rotation by
//! alpha is blown up into wandering gaps I_k of lengths l_k, |k| <= M, and the
//! remaining circle carries the rotation. The chain is closed off by two
//! virtual end gaps inside the continuum: I_M is mapped onto an arc J+ and an
//! arc J- is mapped onto I_{-M}, both realized by C^1 bump perturbations of
//! the rotation supported away from all other gaps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::util::{frac, near_rational, smoothstep};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DenjoyError {
    #[error("gap lengths are not summable")]
    NonSummableGaps,
    #[error("gap ratio l_m/l_(m+1) = {ratio} at m = {m} is not close to 1")]
    RatioDivergent { m: i64, ratio: f64 },
    #[error("alpha is within 1e-12 of {p}/{q}")]
    DegenerateRotation { p: i64, q: u32 },
    #[error("gap map {m} violates its derivative bounds")]
    GapBoundViolated { m: i64 },
    #[error("bump window too small for the end gaps")]
    WindowTooSmall,
    #[error("invalid gap specification: {0}")]
    InvalidSpec(String),
}

/// Rule producing the gap length l_k for k in Z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapRule {
    /// l_k proportional to 1 / (1 + k^2).
    InverseSquare,
    /// l_k proportional to (1 + |k|)^(-exponent).
    PowerLaw { exponent: f64 },
    /// l_k = 1 for every k.
    Constant,
    /// Explicit lengths for k = -(M+1) ..= M+1.
    Table { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenjoyGapSpec {
    pub alpha: f64,
    pub rule: GapRule,
    /// Total gap length for normalized rules (ignored by `Table`).
    pub total_length: f64,
    /// Truncation index: gaps with |k| <= m are materialized.
    pub m: usize,
}

impl Default for DenjoyGapSpec {
    fn default() -> Self {
        Self {
            alpha: (5f64.sqrt() - 1.0) / 2.0,
            rule: GapRule::InverseSquare,
            total_length: 0.5,
            m: 20_000,
        }
    }
}

fn raw_length(rule: &GapRule, k: i64) -> f64 {
    match rule {
        GapRule::InverseSquare => 1.0 / (1.0 + (k * k) as f64),
        GapRule::PowerLaw { exponent } => (1.0 + k.abs() as f64).powf(-exponent),
        GapRule::Constant => 1.0,
        GapRule::Table { .. } => unreachable!(),
    }
}

/// Sum of raw lengths over |k| <= n.
fn raw_partial(rule: &GapRule, n: i64) -> f64 {
    let mut s = raw_length(rule, 0);
    for k in (1..=n).rev() {
        s += 2.0 * raw_length(rule, k);
    }
    s
}

/// Total of the raw series (with a tail integral estimate).
fn raw_total(rule: &GapRule) -> f64 {
    match rule {
        GapRule::InverseSquare => PI / (PI).tanh(),
        GapRule::PowerLaw { exponent } => {
            let n = 1_000_000i64;
            let head = raw_partial(rule, n);
            // sum over k > n of (1+k)^(-e) ~ integral from n+1/2 to inf of (1+x)^(-e) dx, doubled
            let tail = 2.0 * (n as f64 + 1.5).powf(1.0 - exponent) / (exponent - 1.0);
            head + tail
        }
        _ => unreachable!(),
    }
}

impl DenjoyGapSpec {
    /// Gap lengths l_k for k = -(M+1) ..= M+1, plus the total length of the full series.
    pub fn lengths(&self) -> Result<(Vec<f64>, f64), DenjoyError> {
        let m = self.m as i64;
        if m < 2 {
            return Err(DenjoyError::InvalidSpec("truncation index must be at least 2".into()));
        }
        if let GapRule::Table { values } = &self.rule {
            if values.len() != 2 * self.m + 3 {
                return Err(DenjoyError::InvalidSpec(format!(
                    "table needs {} values, got {}",
                    2 * self.m + 3,
                    values.len()
                )));
            }
            if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(DenjoyError::InvalidSpec("table lengths must be positive".into()));
            }
            let total: f64 = values.iter().sum();
            if total >= 1.0 {
                return Err(DenjoyError::NonSummableGaps);
            }
            return Ok((values.clone(), total));
        }
        if !(self.total_length > 0.0 && self.total_length < 1.0) {
            return Err(DenjoyError::InvalidSpec("total length must lie in (0, 1)".into()));
        }
        // Cauchy check on partial sums over doubling windows.
        let s: Vec<f64> = (0..4).map(|j| raw_partial(&self.rule, m << j)).collect();
        let d: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
        if !(d[2] <= 0.75 * d[1] && d[1] <= 0.75 * d[0]) || !s[3].is_finite() {
            return Err(DenjoyError::NonSummableGaps);
        }
        let scale = self.total_length / raw_total(&self.rule);
        let lengths = (-(m + 1)..=m + 1).map(|k| scale * raw_length(&self.rule, k)).collect();
        Ok((lengths, self.total_length))
    }

    fn validate(&self, lengths: &[f64]) -> Result<(), DenjoyError> {
        if !self.alpha.is_finite() {
            return Err(DenjoyError::InvalidSpec("alpha must be finite".into()));
        }
        if let Some((p, q)) = near_rational(self.alpha, 50, 1e-12) {
            return Err(DenjoyError::DegenerateRotation { p, q });
        }
        let m = self.m as i64;
        let l = |k: i64| lengths[(k + m + 1) as usize];
        for k in (m / 2..=m).flat_map(|k| [k, -k]) {
            let (a, b) = if k >= 0 { (l(k), l(k + 1)) } else { (l(k), l(k - 1)) };
            let ratio = a / b;
            if (ratio - 1.0).abs() > 0.1 {
                return Err(DenjoyError::RatioDivergent { m: k, ratio });
            }
        }
        Ok(())
    }
}

/// C^1 diffeomorphism [0, l] -> [0, l * rho] whose derivative equals 1 on the
/// shoulders [0, kappa l] and [l - kappa l, l], ramps linearly over the next
/// kappa l, and is constant in the middle.
#[derive(Clone, Debug)]
pub struct GapMap {
    pub l: f64,
    pub rho: f64,
    pub kappa: f64,
    p: f64,
}

impl GapMap {
    pub fn new(l: f64, l_next: f64) -> Self {
        let rho = l_next / l;
        let dev = (rho - 1.0).abs();
        let kappa = if dev == 0.0 {
            0.25
        } else {
            let mut k = (0.9 * dev / (3.0 * (1.0 + dev))).min(0.25);
            if rho < 1.0 {
                k = k.min(0.9 * rho / 3.0);
            }
            k
        };
        let p = 1.0 + (rho - 1.0) / (1.0 - 3.0 * kappa);
        Self { l, rho, kappa, p }
    }

    fn bump(&self, u: f64) -> f64 {
        let k = self.kappa;
        if u < k || u > 1.0 - k {
            0.0
        } else if u < 2.0 * k {
            (u - k) / k
        } else if u <= 1.0 - 2.0 * k {
            1.0
        } else {
            (1.0 - k - u) / k
        }
    }

    fn bump_integral(&self, u: f64) -> f64 {
        let k = self.kappa;
        if u <= k {
            0.0
        } else if u < 2.0 * k {
            (u - k) * (u - k) / (2.0 * k)
        } else if u <= 1.0 - 2.0 * k {
            0.5 * k + (u - 2.0 * k)
        } else if u < 1.0 - k {
            let r = 1.0 - k - u;
            1.0 - 3.0 * k - r * r / (2.0 * k)
        } else {
            1.0 - 3.0 * k
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s >= self.l {
            return self.l * self.rho;
        }
        let u = s / self.l;
        self.l * (u + (self.p - 1.0) * self.bump_integral(u))
    }

    pub fn derivative(&self, s: f64) -> f64 {
        1.0 + (self.p - 1.0) * self.bump((s / self.l).clamp(0.0, 1.0))
    }

    /// Two-sided derivative bound (lower clamped at 1e-6).
    pub fn bounds(&self) -> (f64, f64) {
        let r = self.rho;
        let q = (1.0 - r) * (1.0 - r);
        ((r.min(1.0) - q).max(1e-6), r.max(1.0) + q)
    }

    /// Derivative positivity and bounds on a sample grid.
    pub fn check(&self, samples: usize) -> bool {
        let (lo, hi) = self.bounds();
        (0..=samples).all(|i| {
            let d = self.derivative(self.l * i as f64 / samples as f64);
            d > 0.0 && d >= lo - 1e-15 && d <= hi + 1e-15
        })
    }
}

/// Location of a circle point relative to the gap structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    Gap { k: i64, offset: f64 },
    Continuum { theta: f64 },
}

#[derive(Clone, Debug)]
pub struct DenjoyMap {
    pub spec: DenjoyGapSpec,
    alpha: f64,
    m: i64,
    /// l_k for k = -(M+1) ..= M+1.
    lengths: Vec<f64>,
    /// a_k (left endpoint of I_k) for k = -M ..= M.
    left: Vec<f64>,
    sorted_theta: Vec<f64>,
    sorted_left: Vec<f64>,
    sorted_k: Vec<i64>,
    /// Position scale of the continuum.
    c: f64,
    /// Gap maps I_k -> I_(k+1) for k = -(M+1) ..= M (index k + M + 1).
    maps: Vec<GapMap>,
    theta_top: f64,
    theta_plus: f64,
    theta_minus: f64,
    j_plus: f64,
    j_minus: f64,
    w_plus: f64,
    w_minus: f64,
    disp_lo: f64,
}

fn sdiff(a: f64, b: f64) -> f64 {
    (a - b + 0.5).rem_euclid(1.0) - 0.5
}

impl DenjoyMap {
    pub fn build(spec: &DenjoyGapSpec) -> Result<Self, DenjoyError> {
        let (lengths, _total) = spec.lengths()?;
        spec.validate(&lengths)?;
        let m = spec.m as i64;
        let alpha = frac(spec.alpha);
        let lk = |k: i64| lengths[(k + m + 1) as usize];
        let theta = |k: i64| frac(k as f64 * alpha);

        let maps: Vec<GapMap> = (-(m + 1)..=m).map(|k| GapMap::new(lk(k), lk(k + 1))).collect();
        for (i, g) in maps.iter().enumerate() {
            if !g.check(64) {
                return Err(DenjoyError::GapBoundViolated { m: i as i64 - m - 1 });
            }
        }

        let mut ks: Vec<i64> = (-m..=m).collect();
        ks.sort_by(|&a, &b| theta(a).partial_cmp(&theta(b)).unwrap());
        let materialized: f64 = (-m..=m).map(lk).sum();
        let c = 1.0 - materialized;
        let mut sorted_theta = Vec::with_capacity(ks.len());
        let mut sorted_left = Vec::with_capacity(ks.len());
        let mut left = vec![0.0; ks.len()];
        let mut pos = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for &k in &ks {
            let t = theta(k);
            if let Some((pt, pl)) = prev {
                pos += pl + c * (t - pt);
            }
            sorted_theta.push(t);
            sorted_left.push(pos);
            left[(k + m) as usize] = pos;
            prev = Some((t, lk(k)));
        }

        let theta_top = theta(m);
        let theta_plus = theta(m + 1);
        let theta_minus = theta(-m - 1);
        let theta_low = theta(-m);
        let dist_to_atoms = |t: f64, skip: Option<i64>| {
            (-m..=m)
                .filter(|&k| Some(k) != skip)
                .map(|k| sdiff(t, theta(k)).abs())
                .fold(f64::INFINITY, f64::min)
        };
        let cross = sdiff(theta_top, theta_minus).abs();
        let d_plus = dist_to_atoms(theta_top, Some(m))
            .min(cross)
            .min(dist_to_atoms(theta_plus, None))
            .min(sdiff(theta_plus, theta_minus).abs());
        let d_minus = dist_to_atoms(theta_minus, None)
            .min(cross)
            .min(dist_to_atoms(theta_low, Some(-m)))
            .min(sdiff(theta_low, theta_plus).abs());
        let w_plus = 0.3 * d_plus;
        let w_minus = 0.3 * d_minus;
        let j_plus = lk(m + 1) / c;
        let j_minus = lk(-m - 1) / c;
        if !(w_plus > 2.0 * j_plus && w_minus > 3.0 * j_minus) {
            return Err(DenjoyError::WindowTooSmall);
        }

        Ok(Self {
            spec: spec.clone(),
            alpha,
            m,
            lengths,
            left,
            sorted_theta,
            sorted_left,
            sorted_k: ks,
            c,
            maps,
            theta_top,
            theta_plus,
            theta_minus,
            j_plus,
            j_minus,
            w_plus,
            w_minus,
            disp_lo: c * alpha - 0.5 * c,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn truncation(&self) -> i64 {
        self.m
    }

    /// Length l_k for |k| <= M + 1.
    pub fn length(&self, k: i64) -> f64 {
        self.lengths[(k + self.m + 1) as usize]
    }

    /// Materialized gap I_k = [a_k, a_k + l_k] for |k| <= M.
    pub fn gap(&self, k: i64) -> (f64, f64) {
        let a = self.left[(k + self.m) as usize];
        (a, a + self.length(k))
    }

    /// Gap map I_k -> I_(k+1) for -(M+1) <= k <= M.
    pub fn gap_map(&self, k: i64) -> &GapMap {
        &self.maps[(k + self.m + 1) as usize]
    }

    /// Total length of materialized gaps.
    pub fn materialized_length(&self) -> f64 {
        1.0 - self.c
    }

    pub fn locate(&self, x: f64) -> Location {
        let x = frac(x);
        let i = self.sorted_left.partition_point(|&a| a <= x).max(1) - 1;
        let k = self.sorted_k[i];
        let a = self.sorted_left[i];
        let l = self.length(k);
        if x < a + l {
            Location::Gap { k, offset: x - a }
        } else {
            Location::Continuum { theta: self.sorted_theta[i] + (x - a - l) / self.c }
        }
    }

    /// Index of the materialized gap whose interior contains x (margin tol).
    pub fn gap_interior(&self, x: f64, tol: f64) -> Option<i64> {
        match self.locate(x) {
            Location::Gap { k, offset } if offset > tol && offset < self.length(k) - tol => Some(k),
            _ => None,
        }
    }

    /// Gap index k if x is exactly the right endpoint of I_k.
    fn right_endpoint_of(&self, x: f64) -> Option<i64> {
        let i = self.sorted_left.partition_point(|&a| a <= x).max(1) - 1;
        let k = self.sorted_k[i];
        (self.sorted_left[i] + self.length(k) == x).then_some(k)
    }

    /// Position of a continuum point theta (atoms resolve to the right endpoint).
    fn position(&self, theta: f64) -> f64 {
        let t = frac(theta);
        let i = self.sorted_theta.partition_point(|&s| s <= t).max(1) - 1;
        let k = self.sorted_k[i];
        self.sorted_left[i] + self.length(k) + self.c * (t - self.sorted_theta[i])
    }

    /// Collapse of gaps: the semiconjugacy to the rotation.
    pub fn theta_of(&self, x: f64) -> f64 {
        match self.locate(x) {
            Location::Gap { k, .. } => frac(k as f64 * self.alpha),
            Location::Continuum { theta } => theta,
        }
    }

    /// Bump perturbation sigma(theta) and its derivative.
    fn sigma(&self, theta: f64) -> (f64, f64) {
        let u = sdiff(theta, self.theta_top);
        if u.abs() < self.w_plus {
            let (s, ds) = smoothstep(u.abs() / self.w_plus);
            let sgn = if u >= 0.0 { 1.0 } else { -1.0 };
            return (sgn * 0.5 * self.j_plus * (1.0 - s), -0.5 * self.j_plus * ds / self.w_plus);
        }
        let v = sdiff(theta, self.theta_minus);
        let h = 0.5 * self.j_minus;
        if v.abs() < self.w_minus && v.abs() > h {
            let width = self.w_minus - h;
            let (s, ds) = smoothstep((v.abs() - h) / width);
            let sgn = if v >= 0.0 { 1.0 } else { -1.0 };
            return (-sgn * h * (1.0 - s), h * ds / width);
        }
        (0.0, 0.0)
    }

    /// Image of x in [0, 1), as an unnormalized position.
    fn image(&self, x: f64) -> f64 {
        match self.locate(x) {
            Location::Gap { k, offset } => {
                let g = self.gap_map(k);
                if k < self.m {
                    self.gap(k + 1).0 + g.eval(offset)
                } else {
                    self.position(self.theta_plus - 0.5 * self.j_plus) + g.eval(offset)
                }
            }
            Location::Continuum { theta } => {
                if let Some(k) = self.right_endpoint_of(x) {
                    return if k < self.m {
                        self.gap(k + 1).1
                    } else {
                        self.position(self.theta_plus + 0.5 * self.j_plus)
                    };
                }
                let v = sdiff(theta, self.theta_minus);
                if v.abs() <= 0.5 * self.j_minus {
                    let s = (v + 0.5 * self.j_minus) * self.c;
                    self.gap(-self.m).0 + self.gap_map(-self.m - 1).eval(s)
                } else {
                    self.position(theta + self.alpha + self.sigma(theta).0)
                }
            }
        }
    }

    pub fn lift(&self, x: f64) -> f64 {
        let n = x.floor();
        let u = x - n;
        let y = self.image(u);
        let d = y - u - self.disp_lo;
        y - d.div_euclid(1.0) + n
    }

    /// One-sided derivative of the map at x (from the left if `left`).
    pub fn derivative(&self, x: f64, left: bool) -> f64 {
        let x = frac(x);
        if left {
            if let Location::Gap { k, offset } = self.locate(x) {
                if offset == 0.0 {
                    return 1.0 + self.sigma(frac(k as f64 * self.alpha) - 1e-15).1;
                }
            }
            if let Location::Continuum { .. } = self.locate(x) {
                let i = self.sorted_left.partition_point(|&a| a <= x).max(1) - 1;
                let k = self.sorted_k[i];
                if (self.sorted_left[i] + self.length(k) - x).abs() < 1e-15 {
                    return self.gap_map(k).derivative(self.length(k));
                }
            }
        }
        match self.locate(x) {
            Location::Gap { k, offset } => self.gap_map(k).derivative(offset),
            Location::Continuum { theta } => {
                let v = sdiff(theta, self.theta_minus);
                if v.abs() <= 0.5 * self.j_minus {
                    self.gap_map(-self.m - 1).derivative((v + 0.5 * self.j_minus) * self.c)
                } else {
                    1.0 + self.sigma(theta).1
                }
            }
        }
    }

    /// Right endpoint of I_0, a point whose orbit stays in the minimal set.
    pub fn exterior_point(&self) -> f64 {
        self.gap(0).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DenjoyMap {
        DenjoyMap::build(&DenjoyGapSpec { m: 200, ..Default::default() }).unwrap()
    }

    #[test]
    fn constant_gaps_rejected() {
        let spec = DenjoyGapSpec { rule: GapRule::Constant, ..Default::default() };
        assert_eq!(spec.lengths().unwrap_err(), DenjoyError::NonSummableGaps);
        let spec = DenjoyGapSpec { rule: GapRule::PowerLaw { exponent: 1.0 }, ..Default::default() };
        assert_eq!(spec.lengths().unwrap_err(), DenjoyError::NonSummableGaps);
    }

    #[test]
    fn rational_alpha_rejected() {
        let spec = DenjoyGapSpec { alpha: 0.4, m: 50, ..Default::default() };
        assert!(matches!(DenjoyMap::build(&spec), Err(DenjoyError::DegenerateRotation { p: 2, q: 5 })));
    }

    #[test]
    fn gaps_cover_their_share() {
        let d = small();
        let (lengths, total) = d.spec.lengths().unwrap();
        assert!((total - 0.5).abs() < 1e-12);
        let full: f64 = lengths.iter().sum();
        assert!(full < 0.5);
        assert!((d.gap(0).0).abs() < 1e-15);
    }

    #[test]
    fn derivative_is_one_at_gap_zero_ends() {
        let d = small();
        let (a, b) = d.gap(0);
        assert_eq!(d.derivative(a, false), 1.0);
        assert_eq!(d.derivative(b, true), 1.0);
        assert_eq!(d.gap_map(0).derivative(0.0), 1.0);
        assert_eq!(d.gap_map(0).derivative(d.length(0)), 1.0);
    }

    #[test]
    fn gaps_map_onto_next_gap() {
        let d = small();
        for k in -200..200 {
            let (a, b) = d.gap(k);
            let (c0, c1) = d.gap(k + 1);
            let fa = frac(d.lift(a));
            let fb = frac(d.lift(b));
            assert!((fa - c0).abs() < 1e-10 || (fa - c0).abs() > 1.0 - 1e-10, "k={k}");
            assert!((fb - c1).abs() < 1e-10 || (fb - c1).abs() > 1.0 - 1e-10, "k={k}");
        }
    }

    #[test]
    fn gap_map_profile_bounds() {
        for (l, ln) in [(1.0, 0.5), (1.0, 0.9), (1.0, 1.2), (1.0, 0.05), (2.0, 2.0)] {
            let g = GapMap::new(l, ln);
            assert!(g.check(1000));
            assert!((g.eval(l) - ln).abs() < 1e-12);
            assert!((g.l * (1.0 + (g.p - 1.0) * (1.0 - 3.0 * g.kappa)) - ln).abs() < 1e-12);
        }
    }
}
