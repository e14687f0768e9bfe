use std::sync::Arc;

use super::curve::Transversal;
use super::invariance::{check_condition_star, LeafMetric};
use super::model::{FoliationModel, TimeChange};
use super::scan::continue_return;
use super::TransversalError;

/// Grid size of the return continuation stored in the time change.
const DEFORM_GRID: usize = 256;

fn deform_grid(p: &Transversal) -> Vec<f64> {
    let (a, b) = p.range();
    let t0 = p.base();
    let mut g: Vec<f64> = if p.closed() {
        let half = (DEFORM_GRID / 2) as f64;
        (0..=DEFORM_GRID).map(|j| t0 + (b - a) * (j as f64 - half) / DEFORM_GRID as f64).collect()
    } else {
        let q = 0.25 * (b - a);
        let (lo, hi) = ((a + q).min(t0), (b - q).max(t0));
        (0..=DEFORM_GRID).map(|j| lo + (hi - lo) * j as f64 / DEFORM_GRID as f64).collect()
    };
    if !p.closed() {
        g.push(t0);
        g.sort_by(f64::total_cmp);
        g.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
        if let Some(k) = g.iter().position(|&x| (x - t0).abs() <= 1e-12 * (1.0 + t0.abs())) {
            g[k] = t0;
        }
    }
    g
}

/// Reparameterizes the action along each leaf so that P becomes invariant.
/// With h_1 the minimal-norm return of the base point and h_1(t) its
/// continuation along P, the leaf through P(t) is run at speed
/// h_1(t) / h_1(t_0); every point of P then returns after the same time.
/// The leaves are unchanged. In one-parameter groups one pass suffices.
pub fn deform_action(model: &FoliationModel, p: &Transversal) -> Result<FoliationModel, TransversalError> {
    let star = check_condition_star(model, p, LeafMetric::Ambient)?;
    if !star.passed() {
        let why = if !star.no_turn {
            format!("holonomy is a turn ({:?})", star.holonomy.class)
        } else {
            format!("leafwise distances vary by {:.3e} along P", star.pair_variation)
        };
        return Err(TransversalError::ConditionStarViolated(why));
    }
    let h1 = star.holonomy.h1.ok_or(TransversalError::NoReturnElement)?;
    let grid = deform_grid(p);
    let returns = continue_return(model, p, &grid, h1)?;
    let h1_base = returns[grid.iter().position(|&t| t == p.base()).expect("base on grid")];
    if returns.iter().all(|&r| (r / h1_base - 1.0).abs() <= 1e-12) {
        return Ok(model.clone());
    }
    Ok(FoliationModel::TimeChanged(Arc::new(TimeChange {
        base: model.clone(),
        transversal: p.clone(),
        grid,
        returns,
        h1_base,
    })))
}
