use serde::{Deserialize, Serialize};

use super::curve::Transversal;
use super::model::FoliationModel;
use super::{Point, TransversalError};
use crate::util::illinois;

/// Bisection tolerance on the leaf coordinate.
const H_TOL: f64 = 1e-10;
/// Accepted distance between a bisected leaf point and the transversal.
const HIT_TOL: f64 = 1e-8;

/// A point of L intersected with P: parameter on P and leaf coordinate from the seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub t: f64,
    pub h: f64,
}

/// Crossings of the leaf through `seed` with P for leaf coordinates in
/// [lo, hi], sorted by h. The step follows the distance to P, so no crossing
/// is skipped while the leaf is far from the curve.
pub(crate) fn crossings(model: &FoliationModel, seed: Point, p: &Transversal, lo: f64, hi: f64) -> Vec<Intersection> {
    let speed = model.leaf_speed(seed);
    let scale = model.return_scale(seed);
    if !(speed > 0.0 && speed.is_finite() && scale.is_finite()) || !(lo <= hi) {
        return Vec::new();
    }
    let (dmin, dmax) = (1e-3 * scale, 0.05 * scale);
    let probe = |h: f64| p.project(model, model.act(h, seed));
    let mut out: Vec<Intersection> = Vec::new();
    let push = |hit: Intersection, out: &mut Vec<Intersection>| {
        if out.last().is_none_or(|l| (hit.h - l.h).abs() > 1e-9) {
            out.push(hit);
        }
    };
    let mut h = lo;
    let mut cur = probe(h);
    loop {
        if cur.distance <= 1e-12 && !cur.at_end {
            push(Intersection { t: cur.t, h }, &mut out);
        }
        if h >= hi {
            break;
        }
        let step = (0.5 * cur.distance / speed).clamp(dmin, dmax);
        let h2 = (h + step).min(hi);
        let next = probe(h2);
        let near = cur.distance.min(next.distance) <= 1.5 * speed * (h2 - h) + 1e-12;
        if near && cur.signed != 0.0 && next.signed != 0.0 && (cur.signed < 0.0) != (next.signed < 0.0) {
            let hm = illinois(|m| probe(m).signed, (h, cur.signed), (h2, next.signed), H_TOL, 1e-13);
            let pm = probe(hm);
            if pm.distance <= HIT_TOL && !pm.at_end {
                push(Intersection { t: pm.t, h: hm }, &mut out);
            }
        }
        h = h2;
        cur = next;
    }
    out
}

/// All points of L intersected with P with |leaf coordinate| <= bound, sorted by t.
pub fn leaf_transversal_intersection(
    model: &FoliationModel,
    seed: Point,
    p: &Transversal,
    bound: f64,
) -> Vec<Intersection> {
    let mut hits = crossings(model, seed, p, -bound, bound);
    hits.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.h.total_cmp(&b.h)));
    hits
}

/// H_x for x = P(t): nonzero h with |h| <= bound and R_h x in P, sorted by
/// norm with the positive element first on ties.
pub fn returns(model: &FoliationModel, p: &Transversal, t: f64, bound: f64) -> Vec<f64> {
    let x = p.eval(model, t);
    let mut hs: Vec<f64> = crossings(model, x, p, -bound, bound)
        .into_iter()
        .map(|i| i.h)
        .filter(|h| h.abs() > 1e-9)
        .collect();
    hs.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(b.total_cmp(a)));
    hs
}

// The crossing nearest to `guess` within `guess +- w` for the leaf through
// P(t): a bracket grown outward from the guess, then false position. Falls
// back to a full scan of the window.
fn polish(model: &FoliationModel, p: &Transversal, t: f64, guess: f64, w: f64) -> Option<f64> {
    let x = p.eval(model, t);
    let speed = model.leaf_speed(x);
    let probe = |h: f64| p.project(model, model.act(h, x));
    let c = probe(guess);
    if c.distance <= 1e-13 && !c.at_end {
        return Some(guess);
    }
    let mut d = (c.distance / speed).max(1e-9 * w);
    while d <= w {
        for dir in [1.0, -1.0] {
            let e = probe(guess + dir * d);
            if e.signed != 0.0 && c.signed != 0.0 && (e.signed < 0.0) != (c.signed < 0.0) {
                let h = illinois(|m| probe(m).signed, (guess, c.signed), (guess + dir * d, e.signed), H_TOL, 1e-13);
                let pm = probe(h);
                if pm.distance <= HIT_TOL && !pm.at_end {
                    return Some(h);
                }
            }
        }
        d *= 2.0;
    }
    crossings(model, x, p, guess - w, guess + w)
        .into_iter()
        .min_by(|a, b| (a.h - guess).abs().total_cmp(&(b.h - guess).abs()))
        .map(|i| i.h)
}

/// Continues the return h(t) with h(t_0) near h0 along increasing `grid`, which
/// must contain t_0 = P.base(). Predictor: linear extrapolation; corrector:
/// the nearest crossing within 30% of |h|.
pub fn continue_return(
    model: &FoliationModel,
    p: &Transversal,
    grid: &[f64],
    h0: f64,
) -> Result<Vec<f64>, TransversalError> {
    let t0 = p.base();
    let i0 = grid
        .iter()
        .position(|&t| (t - t0).abs() <= 1e-12 * (1.0 + t0.abs()))
        .ok_or_else(|| TransversalError::Invalid("continuation grid must contain the base parameter".into()))?;
    let mut out = vec![f64::NAN; grid.len()];
    out[i0] = polish(model, p, t0, h0, 0.3 * h0.abs()).ok_or(TransversalError::ContinuationFailed { t: t0 })?;
    for dir in [1isize, -1] {
        let mut i = i0 as isize + dir;
        while i >= 0 && (i as usize) < grid.len() {
            let (k, prev) = (i as usize, (i - dir) as usize);
            let pp = prev as isize - dir;
            let guess = if pp >= 0 && (pp as usize) < grid.len() && !out[pp as usize].is_nan() {
                let pp = pp as usize;
                let slope = (out[prev] - out[pp]) / (grid[prev] - grid[pp]);
                out[prev] + slope * (grid[k] - grid[prev])
            } else {
                out[prev]
            };
            let w = 0.3 * out[prev].abs();
            out[k] = polish(model, p, grid[k], guess, w).ok_or(TransversalError::ContinuationFailed { t: grid[k] })?;
            i += dir;
        }
    }
    Ok(out)
}

/// Number of distinct points of L intersected with P (distinct parameters on P).
pub fn leaf_intersection_count(model: &FoliationModel, seed: Point, p: &Transversal, bound: f64) -> usize {
    let hits = leaf_transversal_intersection(model, seed, p, bound);
    let span = p.range().1 - p.range().0;
    let mut ts: Vec<f64> = hits.iter().map(|i| i.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-8);
    if p.closed() && ts.len() > 1 && (ts[ts.len() - 1] - ts[0] - span).abs() < 1e-8 {
        ts.pop();
    }
    ts.len()
}
