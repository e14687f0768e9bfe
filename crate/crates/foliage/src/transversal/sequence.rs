use serde::{Deserialize, Serialize};

use super::curve::Transversal;
use super::invariance::{check_condition_star, LeafMetric};
use super::model::FoliationModel;
use super::scan::{continue_return, returns};
use super::TransversalError;

/// Window of the Cauchy test on partial sums.
const CAUCHY_WINDOW: usize = 10;
const CAUCHY_TOL: f64 = 1e-8;
const SUP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceMode {
    /// Each point of P_k moves along its leaf by half the deviation of its
    /// first return from that of the base point.
    Halving,
    /// Every point moves along its leaf by the prescribed a_k.
    Forced(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceVerdict {
    Converged,
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    /// a_k: the largest leafwise step from P_k to P_{k+1}.
    pub steps: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Pointwise sup-distance between P_{k+1} and P_k.
    pub sup_steps: Vec<f64>,
    /// |S_K - S_{K-10}|.
    pub cauchy_gap: f64,
    pub verdict: SequenceVerdict,
}

impl SequenceReport {
    /// Verdict from the step sizes and sup-distances alone.
    pub fn from_steps(steps: Vec<f64>, sup_steps: Vec<f64>) -> Self {
        let mut partial_sums = Vec::with_capacity(steps.len());
        let mut s = 0.0;
        for a in &steps {
            s += a;
            partial_sums.push(s);
        }
        let n = partial_sums.len();
        let cauchy_gap = if n > CAUCHY_WINDOW {
            (partial_sums[n - 1] - partial_sums[n - 1 - CAUCHY_WINDOW]).abs()
        } else {
            f64::INFINITY
        };
        let last = sup_steps.last().copied().unwrap_or(f64::INFINITY);
        let verdict = if cauchy_gap < CAUCHY_TOL && last < SUP_TOL {
            SequenceVerdict::Converged
        } else {
            SequenceVerdict::Diverged
        };
        Self { steps, partial_sums, sup_steps, cauchy_gap, verdict }
    }
}

/// Iterates P_{k+1} = (1/2 h_k(t)) P_k for k < `iterations`, where h_k(t)
/// is the first return of P_k(t) minus that of the base point, which stays
/// fixed. Returns P_0, ..., P_K and the convergence report.
pub fn transversal_sequence(
    model: &FoliationModel,
    p0: &Transversal,
    iterations: usize,
    mode: &SequenceMode,
) -> Result<(Vec<Transversal>, SequenceReport), TransversalError> {
    let mut seq = vec![p0.clone()];
    let mut steps = Vec::new();
    let mut sup_steps = Vec::new();
    let params = p0.params();
    let (iterations, mut h1) = match mode {
        SequenceMode::Forced(a) => (iterations.min(a.len()), 0.0),
        SequenceMode::Halving => {
            let star = check_condition_star(model, p0, LeafMetric::Ambient)?;
            if !star.no_turn {
                return Err(TransversalError::ConditionStarViolated(format!(
                    "holonomy is a turn ({:?})",
                    star.holonomy.class
                )));
            }
            let first = returns(model, p0, p0.base(), 4.0 * model.return_scale(p0.eval(model, p0.base())))
                .first()
                .copied()
                .ok_or(TransversalError::NoReturnElement)?;
            (iterations, first)
        }
    };
    let i0 = params
        .iter()
        .position(|&t| t == p0.base())
        .ok_or_else(|| TransversalError::Invalid("base parameter must be a sample parameter".into()))?;
    for k in 0..iterations {
        let cur = seq.last().expect("nonempty");
        let moves: Vec<f64> = match mode {
            SequenceMode::Forced(a) => vec![a[k]; params.len()],
            SequenceMode::Halving => {
                let r = continue_return(model, cur, &params, h1)?;
                h1 = r[i0];
                r.iter().map(|&x| 0.5 * (x - h1)).collect()
            }
        };
        let pts: Vec<_> = cur.samples().iter().zip(&moves).map(|(&q, &u)| model.act(u, q)).collect();
        let sup = cur.samples().iter().zip(&pts).map(|(a, b)| model.distance(*a, *b)).fold(0.0, f64::max);
        let (a, b) = cur.range();
        let next = Transversal::from_samples(model, pts, (a, b), cur.closed(), cur.complete(), cur.base())?;
        steps.push(moves.iter().fold(0.0f64, |m, u| m.max(u.abs())));
        sup_steps.push(sup);
        seq.push(next);
    }
    Ok((seq, SequenceReport::from_steps(steps, sup_steps)))
}
