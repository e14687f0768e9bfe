use std::f64::consts::PI;
use std::sync::Arc;

use super::curve::Transversal;
use super::{scan, Point};
use crate::circle::CircleMap;

/// Same-leaf acceptance for leaf coordinates.
const LEAF_TOL: f64 = 1e-8;
/// Integer search radius for leaf coordinates on wrapped charts.
const WIND_SEARCH: i64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanarAction {
    /// R_h x = e^{i h / |x|} x.
    Undeformed,
    /// R_h x = e^{i h} x.
    Deformed,
}

/// Foliations of two-dimensional charts by the orbits of an R-action.
#[derive(Clone, Debug)]
pub enum FoliationModel {
    /// Lines y = slope x + b on S^1 x R (x mod 1), or on T^2 when `compact_y`;
    /// R_h (x, y) = (x + h, y + slope h).
    TorusLinearFlow { slope: f64, compact_y: bool },
    /// Suspension of a circle map with roof 1: chart (s, y) in [0, 1) x S^1,
    /// (1, y) ~ (0, f(y)); R_h (s, y) = (s + h, y).
    Suspension { map: CircleMap },
    /// Concentric circles on R^2 minus the origin.
    PlanarCircles { action: PlanarAction },
    /// The same leaves with the action reparameterized by a leafwise constant
    /// factor: R'_h p = R_{beta(p) h} p.
    TimeChanged(Arc<TimeChange>),
}

/// Time change making a transversal invariant: beta on the leaf through P(t)
/// is h_1(t) / h_1(t_0), h_1 the continued first return to P.
#[derive(Clone, Debug)]
pub struct TimeChange {
    pub base: FoliationModel,
    pub transversal: Transversal,
    /// Parameters where the return was continued, increasing.
    pub grid: Vec<f64>,
    pub returns: Vec<f64>,
    /// h_1(t_0).
    pub h1_base: f64,
}

fn wrap_half(d: f64) -> f64 {
    d - d.round()
}

fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl TimeChange {
    fn interpolated_return(&self, t: f64) -> f64 {
        let g = &self.grid;
        let t = if self.transversal.closed() {
            let (a, b) = self.transversal.range();
            g[0] + (t - g[0]).rem_euclid(b - a)
        } else {
            t
        };
        let i = g.partition_point(|&x| x <= t).clamp(1, g.len() - 1);
        let (t0, t1) = (g[i - 1], g[i]);
        let u = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        self.returns[i - 1] + u * (self.returns[i] - self.returns[i - 1])
    }

    /// Leafwise factor; None off the saturation of the transversal.
    pub fn beta(&self, p: Point) -> Option<f64> {
        let reach = self.returns.iter().fold(0.0f64, |a, &b| a.max(b.abs())) * 1.05;
        let hits = scan::crossings(&self.base, p, &self.transversal, -reach, reach);
        let hit = hits.iter().min_by(|a, b| a.h.abs().total_cmp(&b.h.abs()))?;
        let guess = self.interpolated_return(hit.t);
        let foot = self.transversal.eval(&self.base, hit.t);
        let w = 0.1 * guess.abs();
        let local = scan::crossings(&self.base, foot, &self.transversal, guess - w, guess + w);
        let h1 = local.iter().min_by(|a, b| (a.h - guess).abs().total_cmp(&(b.h - guess).abs()))?.h;
        Some(h1 / self.h1_base)
    }
}

impl FoliationModel {
    pub fn torus(slope: f64, compact_y: bool) -> Self {
        FoliationModel::TorusLinearFlow { slope, compact_y }
    }

    pub fn suspension(map: CircleMap) -> Self {
        FoliationModel::Suspension { map }
    }

    pub fn planar(action: PlanarAction) -> Self {
        FoliationModel::PlanarCircles { action }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FoliationModel::TorusLinearFlow { .. } => "torus-linear-flow",
            FoliationModel::Suspension { .. } => "suspension",
            FoliationModel::PlanarCircles { .. } => "planar-circles",
            FoliationModel::TimeChanged(_) => "time-changed",
        }
    }

    fn base(&self) -> &FoliationModel {
        match self {
            FoliationModel::TimeChanged(tc) => tc.base.base(),
            other => other,
        }
    }

    /// Canonical chart representative.
    pub fn normalize(&self, p: Point) -> Point {
        match self {
            FoliationModel::TorusLinearFlow { compact_y, .. } => {
                [frac(p[0]), if *compact_y { frac(p[1]) } else { p[1] }]
            }
            FoliationModel::Suspension { map } => {
                let (mut s, mut y) = (p[0], p[1]);
                while s >= 1.0 {
                    s -= 1.0;
                    y = map.lift(y);
                }
                while s < 0.0 {
                    s += 1.0;
                    y = map.inverse_lift(y);
                }
                [s, frac(y)]
            }
            FoliationModel::PlanarCircles { .. } => p,
            FoliationModel::TimeChanged(tc) => tc.base.normalize(p),
        }
    }

    /// p moved by the chart vector v.
    pub fn offset(&self, p: Point, v: [f64; 2]) -> Point {
        self.normalize([p[0] + v[0], p[1] + v[1]])
    }

    /// Shortest chart vector from p to q.
    pub fn displacement(&self, p: Point, q: Point) -> [f64; 2] {
        match self {
            FoliationModel::TorusLinearFlow { compact_y, .. } => {
                let dy = q[1] - p[1];
                [wrap_half(q[0] - p[0]), if *compact_y { wrap_half(dy) } else { dy }]
            }
            FoliationModel::Suspension { map } => {
                let (p, q) = (self.normalize(p), self.normalize(q));
                let direct = [q[0] - p[0], wrap_half(q[1] - p[1])];
                let fwd = [q[0] - 1.0 - p[0], wrap_half(map.lift(q[1]) - p[1])];
                let back = [q[0] + 1.0 - p[0], wrap_half(map.inverse_lift(q[1]) - p[1])];
                let n = |v: &[f64; 2]| v[0] * v[0] + v[1] * v[1];
                // q near s = 1 is close to (s - 1, f(y)); q near s = 0 to (s + 1, f^-1(y)).
                [direct, fwd, back].into_iter().min_by(|a, b| n(a).total_cmp(&n(b))).expect("three candidates")
            }
            FoliationModel::PlanarCircles { .. } => [q[0] - p[0], q[1] - p[1]],
            FoliationModel::TimeChanged(tc) => tc.base.displacement(p, q),
        }
    }

    pub fn distance(&self, p: Point, q: Point) -> f64 {
        let d = self.displacement(p, q);
        d[0].hypot(d[1])
    }

    /// R_h p.
    pub fn act(&self, h: f64, p: Point) -> Point {
        match self {
            FoliationModel::TorusLinearFlow { slope, .. } => self.normalize([p[0] + h, p[1] + slope * h]),
            FoliationModel::Suspension { .. } => self.normalize([p[0] + h, p[1]]),
            FoliationModel::PlanarCircles { action } => {
                let r = p[0].hypot(p[1]);
                let phase = match action {
                    PlanarAction::Undeformed => h / r,
                    PlanarAction::Deformed => h,
                };
                let (s, c) = phase.sin_cos();
                [c * p[0] - s * p[1], s * p[0] + c * p[1]]
            }
            FoliationModel::TimeChanged(tc) => match tc.beta(p) {
                Some(b) => tc.base.act(b * h, p),
                None => [f64::NAN, f64::NAN],
            },
        }
    }

    /// d/dh R_h p at h = 0.
    pub fn leaf_vector(&self, p: Point) -> [f64; 2] {
        match self {
            FoliationModel::TorusLinearFlow { slope, .. } => [1.0, *slope],
            FoliationModel::Suspension { .. } => [1.0, 0.0],
            FoliationModel::PlanarCircles { action } => {
                let k = match action {
                    PlanarAction::Undeformed => 1.0 / p[0].hypot(p[1]),
                    PlanarAction::Deformed => 1.0,
                };
                [-k * p[1], k * p[0]]
            }
            FoliationModel::TimeChanged(tc) => {
                let b = tc.beta(p).unwrap_or(f64::NAN);
                let v = tc.base.leaf_vector(p);
                [b * v[0], b * v[1]]
            }
        }
    }

    /// Unit tangent of the leaf; independent of the time parameterization.
    pub fn leaf_direction(&self, p: Point) -> [f64; 2] {
        let v = self.base().leaf_vector(p);
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    }

    /// Chart speed |d/dh R_h p|, constant along each leaf in every model.
    pub fn leaf_speed(&self, p: Point) -> f64 {
        let v = self.leaf_vector(p);
        v[0].hypot(v[1])
    }

    /// Typical return time to a transversal through p; sets scan resolution
    /// and default search bounds.
    pub fn return_scale(&self, p: Point) -> f64 {
        match self {
            FoliationModel::TorusLinearFlow { .. } | FoliationModel::Suspension { .. } => 1.0,
            FoliationModel::PlanarCircles { action: PlanarAction::Undeformed } => 2.0 * PI * p[0].hypot(p[1]),
            FoliationModel::PlanarCircles { action: PlanarAction::Deformed } => 2.0 * PI,
            FoliationModel::TimeChanged(tc) => tc.base.return_scale(p) / tc.beta(p).unwrap_or(1.0),
        }
    }

    /// The h with R_h p = q nearest to `hint`, if p and q share a leaf.
    pub fn leaf_coordinate(&self, p: Point, q: Point, hint: f64) -> Option<f64> {
        match self {
            FoliationModel::TorusLinearFlow { slope, compact_y } => {
                let dx = q[0] - p[0];
                if !compact_y {
                    if *slope == 0.0 {
                        if (q[1] - p[1]).abs() > LEAF_TOL {
                            return None;
                        }
                        return Some(dx + (hint - dx).round());
                    }
                    let h = (q[1] - p[1]) / slope;
                    return (wrap_half(p[0] + h - q[0]).abs() <= LEAF_TOL).then_some(h);
                }
                let m0 = (hint - dx).round() as i64;
                (0..=WIND_SEARCH)
                    .flat_map(|k| if k == 0 { vec![m0] } else { vec![m0 - k, m0 + k] })
                    .map(|m| dx + m as f64)
                    .find(|&h| wrap_half(p[1] + slope * h - q[1]).abs() <= LEAF_TOL)
            }
            FoliationModel::Suspension { map } => {
                let ds = q[0] - p[0];
                let m0 = (hint - ds).round() as i64;
                let iterate = |m: i64| {
                    let mut y = p[1];
                    for _ in 0..m.abs() {
                        y = if m > 0 { map.lift(y) } else { map.inverse_lift(y) };
                    }
                    y
                };
                (0..=WIND_SEARCH)
                    .flat_map(|k| if k == 0 { vec![m0] } else { vec![m0 - k, m0 + k] })
                    .find(|&m| wrap_half(iterate(m) - q[1]).abs() <= LEAF_TOL)
                    .map(|m| ds + m as f64)
            }
            FoliationModel::PlanarCircles { action } => {
                let (rp, rq) = (p[0].hypot(p[1]), q[0].hypot(q[1]));
                if (rp - rq).abs() > LEAF_TOL {
                    return None;
                }
                let unit = match action {
                    PlanarAction::Undeformed => rp,
                    PlanarAction::Deformed => 1.0,
                };
                let phi = q[1].atan2(q[0]) - p[1].atan2(p[0]);
                let turns = (hint / unit - phi) / (2.0 * PI);
                Some(unit * (phi + 2.0 * PI * turns.round()))
            }
            FoliationModel::TimeChanged(tc) => {
                let b = tc.beta(p)?;
                tc.base.leaf_coordinate(p, q, hint * b).map(|h| h / b)
            }
        }
    }
}
