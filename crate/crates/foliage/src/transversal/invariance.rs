use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::Transversal;
use super::model::FoliationModel;
use super::procrustes::{classify_holonomy_with, HolonomyClass, HolonomyClassification};
use super::scan::{continue_return, crossings, returns};
use super::TransversalError;

/// Exact-return threshold for detecting a compact leaf.
const CLOSE_TOL: f64 = 1e-10;
/// Number of return maps continued along P.
const MAX_CONTINUED: usize = 4;
/// Grid size of the continuation along P.
const STAR_GRID: usize = 128;
/// Samples of hP used for the one-sided Hausdorff distance.
const HP_SAMPLES: usize = 256;

/// How leafwise distances between points of L intersected with P are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafMetric {
    /// |h_i - h_j| in the group parameter.
    FlowTime,
    /// Length of the shortest leaf arc between the two points in the chart metric.
    Ambient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionStarReport {
    pub metric: LeafMetric,
    pub h_maps_extendable: bool,
    pub isometry_ok: bool,
    pub no_turn: bool,
    /// Holonomy at the base point.
    pub holonomy: HolonomyClassification,
    /// Return elements continued along P.
    pub continued: Vec<f64>,
    /// Largest variation along P of a pairwise leafwise distance.
    pub pair_variation: f64,
}

impl ConditionStarReport {
    pub fn passed(&self) -> bool {
        self.h_maps_extendable && self.isometry_ok && self.no_turn
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub tested: Vec<f64>,
    /// Whether hP meets P, per tested element.
    pub intersects: Vec<bool>,
    /// One-sided Hausdorff distance from hP to P, per tested element.
    pub displacements: Vec<f64>,
    pub tol: f64,
    pub invariant: bool,
}

impl InvarianceReport {
    /// Largest displacement over elements with hP meeting P.
    pub fn max_displacement(&self) -> f64 {
        self.displacements
            .iter()
            .zip(&self.intersects)
            .filter(|(_, &i)| i)
            .map(|(d, _)| *d)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropyGroup {
    pub generators: Vec<f64>,
    /// Sampled elements with hP = P.
    pub elements: Vec<f64>,
    /// Every element is a multiple of the generator and no fraction of it
    /// preserves P.
    pub discrete: bool,
}

fn default_bound(model: &FoliationModel, p: &Transversal) -> f64 {
    4.0 * model.return_scale(p.eval(model, p.base()))
}

fn trivial_holonomy() -> HolonomyClassification {
    HolonomyClassification {
        dim: 1,
        matrix: [[1.0, 0.0], [0.0, 1.0]],
        offset: [0.0, 0.0],
        residual: 0.0,
        rms: 0.0,
        class: HolonomyClass::Identity,
        returns: Vec::new(),
        h1: None,
        leaf_period: None,
    }
}

/// Holonomy of L intersected with P at x = P(t), for leaf coordinates up to
/// `bound`. On a compact leaf of period L the points of one period are
/// placed on a circle of circumference L and mapped to their successors; on
/// a non-compact leaf each point maps to the next one along the leaf.
pub fn holonomy(
    model: &FoliationModel,
    p: &Transversal,
    t: f64,
    bound: f64,
) -> Result<HolonomyClassification, TransversalError> {
    let x = p.eval(model, t);
    let hs = returns(model, p, t, bound);
    let mut ascending: Vec<f64> = hs.iter().copied().filter(|h| *h > 0.0).collect();
    ascending.sort_by(f64::total_cmp);
    let period = ascending.iter().copied().find(|&h| model.distance(model.act(h, x), x) <= CLOSE_TOL);
    let mut fitted = match period {
        Some(l) => {
            let mut pts: Vec<f64> = vec![0.0];
            pts.extend(ascending.iter().copied().filter(|&h| h < l - 1e-9));
            if pts.len() < 2 {
                trivial_holonomy()
            } else {
                let rad = l / (2.0 * PI);
                let emb = |h: f64| vec![rad * (2.0 * PI * h / l).cos(), rad * (2.0 * PI * h / l).sin()];
                let before: Vec<Vec<f64>> = pts.iter().map(|&h| emb(h)).collect();
                let after: Vec<Vec<f64>> = (0..pts.len()).map(|i| emb(pts[(i + 1) % pts.len()])).collect();
                classify_holonomy_with(&before, &after, 1e-8)?
            }
        }
        None => {
            let mut pts: Vec<f64> = hs.clone();
            pts.push(0.0);
            pts.sort_by(f64::total_cmp);
            if pts.len() < 2 {
                trivial_holonomy()
            } else {
                let before: Vec<Vec<f64>> = pts[..pts.len() - 1].iter().map(|&h| vec![h]).collect();
                let after: Vec<Vec<f64>> = pts[1..].iter().map(|&h| vec![h]).collect();
                classify_holonomy_with(&before, &after, 1e-8)?
            }
        }
    };
    fitted.h1 = hs.first().copied();
    fitted.returns = hs;
    fitted.leaf_period = period;
    Ok(fitted)
}

// Continuation grid: the whole closed curve centred at the base, or the
// central half of an open window with the base inserted.
fn star_grid(p: &Transversal) -> Vec<f64> {
    let (a, b) = p.range();
    let t0 = p.base();
    if p.closed() {
        let half = (STAR_GRID / 2) as f64;
        return (0..=STAR_GRID).map(|j| t0 + (b - a) * (j as f64 - half) / STAR_GRID as f64).collect();
    }
    let q = 0.25 * (b - a);
    let (lo, hi) = ((a + q).min(t0), (b - q).max(t0));
    let mut g: Vec<f64> = (0..=STAR_GRID).map(|j| lo + (hi - lo) * j as f64 / STAR_GRID as f64).collect();
    g.push(t0);
    g.sort_by(f64::total_cmp);
    g.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    if let Some(k) = g.iter().position(|&x| (x - t0).abs() <= 1e-12 * (1.0 + t0.abs())) {
        g[k] = t0;
    }
    g
}

/// Checks condition (*) on P at its base point: the return maps h_i(t)
/// continue along P, the pairwise leafwise distances between h_i(t) P(t)
/// do not depend on t, and the holonomy is not a turn.
pub fn check_condition_star(
    model: &FoliationModel,
    p: &Transversal,
    metric: LeafMetric,
) -> Result<ConditionStarReport, TransversalError> {
    let bound = default_bound(model, p);
    let hol = holonomy(model, p, p.base(), bound)?;
    let no_turn = !matches!(hol.class, HolonomyClass::Rotation { .. });
    let chosen: Vec<f64> = hol.returns.iter().copied().take(MAX_CONTINUED).collect();
    let grid = star_grid(p);
    let continued: Vec<Vec<f64>> = chosen
        .iter()
        .map(|&h| continue_return(model, p, &grid, h))
        .collect::<Result<_, _>>()?;
    let mut variation = 0.0f64;
    if !continued.is_empty() {
        let k = continued.len() + 1;
        let mut lo = vec![f64::INFINITY; k * k];
        let mut hi = vec![f64::NEG_INFINITY; k * k];
        for (g, &t) in grid.iter().enumerate() {
            let x = p.eval(model, t);
            let mut hs = vec![0.0];
            hs.extend(continued.iter().map(|c| c[g]));
            let speed = model.leaf_speed(x);
            let period = hs
                .iter()
                .copied()
                .filter(|h| *h > 0.0)
                .fold(None, |acc: Option<f64>, h| {
                    if model.distance(model.act(h, x), x) <= 1e3 * CLOSE_TOL {
                        Some(acc.map_or(h, |a| a.min(h)))
                    } else {
                        acc
                    }
                });
            for i in 0..k {
                for j in (i + 1)..k {
                    let d = (hs[i] - hs[j]).abs();
                    let a = match metric {
                        LeafMetric::FlowTime => d,
                        LeafMetric::Ambient => {
                            let r = period.map_or(d, |l| {
                                let m = d.rem_euclid(l);
                                m.min(l - m)
                            });
                            speed * r
                        }
                    };
                    lo[i * k + j] = lo[i * k + j].min(a);
                    hi[i * k + j] = hi[i * k + j].max(a);
                }
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                variation = variation.max(hi[i * k + j] - lo[i * k + j]);
            }
        }
    }
    Ok(ConditionStarReport {
        metric,
        h_maps_extendable: true,
        isometry_ok: variation <= 1e-6,
        no_turn,
        holonomy: hol,
        continued: chosen,
        pair_variation: variation,
    })
}

// One-sided Hausdorff distance from hP to P and whether hP meets P.
fn displacement(model: &FoliationModel, p: &Transversal, ts: &[f64], h: f64) -> (bool, f64) {
    let proj: Vec<_> = ts
        .iter()
        .map(|&t| model.act(h, p.eval(model, t)))
        .filter(|q| q[0].is_finite() && q[1].is_finite())
        .map(|q| (q, p.project(model, q)))
        .collect();
    if proj.is_empty() {
        return (false, 0.0);
    }
    let worst = proj.iter().map(|(_, r)| r.distance).fold(0.0, f64::max);
    let touches = proj.iter().any(|(_, r)| r.distance <= 1e-6)
        || proj.windows(2).any(|w| {
            let ((q0, r0), (q1, r1)) = (w[0], w[1]);
            let gap = model.distance(q0, q1);
            r0.signed * r1.signed < 0.0 && r0.distance.min(r1.distance) <= gap
        });
    (touches, worst)
}

/// Definition 1 as a test: for each h with hP meeting P, the one-sided
/// Hausdorff distance from hP to P must be below `tol`.
pub fn check_invariance(model: &FoliationModel, p: &Transversal, h_samples: &[f64], tol: f64) -> InvarianceReport {
    let ts = p.test_params(HP_SAMPLES);
    let rows: Vec<(bool, f64)> = h_samples.par_iter().map(|&h| displacement(model, p, &ts, h)).collect();
    let invariant = rows.iter().all(|&(hit, d)| !hit || d < tol);
    InvarianceReport {
        tested: h_samples.to_vec(),
        intersects: rows.iter().map(|r| r.0).collect(),
        displacements: rows.iter().map(|r| r.1).collect(),
        tol,
        invariant,
    }
}

/// Group elements worth testing: the returns of the base point and k times
/// the smallest positive return for |k| <= 5.
pub fn default_h_samples(model: &FoliationModel, p: &Transversal) -> Vec<f64> {
    let hs = returns(model, p, p.base(), default_bound(model, p));
    let mut out = hs.clone();
    if let Some(g) = hs.iter().copied().filter(|h| *h > 0.0).reduce(f64::min) {
        for k in 1..=5 {
            out.push(k as f64 * g);
            out.push(-(k as f64) * g);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    out.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(b.total_cmp(a)));
    out
}

/// H_P within `search_bound`: returns of the base point that map P onto
/// itself, with the smallest positive one as generator.
pub fn isotropy_group(model: &FoliationModel, p: &Transversal, search_bound: f64) -> IsotropyGroup {
    let x = p.eval(model, p.base());
    let mut cands: Vec<f64> = crossings(model, x, p, -search_bound, search_bound)
        .into_iter()
        .map(|i| i.h)
        .filter(|h| h.abs() > 1e-9)
        .collect();
    cands.sort_by(f64::total_cmp);
    let ts = p.test_params(HP_SAMPLES);
    let keep: Vec<bool> = cands.par_iter().map(|&h| displacement(model, p, &ts, h).1 < 1e-8).collect();
    let elements: Vec<f64> = cands.iter().zip(&keep).filter(|(_, &k)| k).map(|(h, _)| *h).collect();
    let Some(g) = elements.iter().copied().filter(|h| *h > 0.0).reduce(f64::min) else {
        return IsotropyGroup { generators: Vec::new(), elements, discrete: true };
    };
    let multiples = elements.iter().all(|&h| {
        let m = (h / g).round();
        (h - m * g).abs() <= 1e-8 * (1.0 + h.abs())
    });
    let fractions = [0.5, 1.0 / 3.0, 0.25].iter().all(|&s| displacement(model, p, &ts, s * g).1 >= 1e-8);
    IsotropyGroup { generators: vec![g], elements, discrete: multiples && fractions }
}
