use super::curve::Transversal;
use super::invariance::{check_invariance, default_h_samples};
use super::model::FoliationModel;
use super::TransversalError;

/// h(t) with gamma(t) = h(t) gamma_0(t) at every sample, on the continuous
/// branch starting from the smallest |h| at the first sample.
pub fn leaf_offsets(
    model: &FoliationModel,
    gamma0: &Transversal,
    gamma: &Transversal,
) -> Result<Vec<f64>, TransversalError> {
    if gamma0.len() != gamma.len() || gamma0.range() != gamma.range() {
        return Err(TransversalError::Invalid("transversals must share the parameter grid".into()));
    }
    let mut hint = 0.0;
    let mut out = Vec::with_capacity(gamma0.len());
    for (i, (&p, &q)) in gamma0.samples().iter().zip(gamma.samples()).enumerate() {
        let h = model.leaf_coordinate(p, q, hint).ok_or(TransversalError::LeafMismatch { t: gamma0.param(i) })?;
        out.push(h);
        hint = h;
    }
    Ok(out)
}

fn require_invariant(model: &FoliationModel, p: &Transversal) -> Result<(), TransversalError> {
    let report = check_invariance(model, p, &default_h_samples(model, p), 1e-8);
    if report.invariant {
        Ok(())
    } else {
        Err(TransversalError::NotInvariant { displacement: report.max_displacement() })
    }
}

/// (gamma + gamma')(t) = (h(t) + h'(t)) gamma_0(t) for invariant
/// transversals gamma = h gamma_0 and gamma' = h' gamma_0.
pub fn add_transversals(
    gamma: &Transversal,
    gamma_prime: &Transversal,
    gamma0: &Transversal,
    model: &FoliationModel,
) -> Result<Transversal, TransversalError> {
    for p in [gamma, gamma_prime, gamma0] {
        require_invariant(model, p)?;
    }
    let h = leaf_offsets(model, gamma0, gamma)?;
    let hp = leaf_offsets(model, gamma0, gamma_prime)?;
    let pts = gamma0
        .samples()
        .iter()
        .zip(h.iter().zip(&hp))
        .map(|(&x, (a, b))| model.act(a + b, x))
        .collect();
    Transversal::from_samples(model, pts, gamma0.range(), gamma0.closed(), gamma0.complete(), gamma0.base())
}
