//! Foliated model geometries with one-dimensional leaves given by an R-action
//! on a two-dimensional chart: transversal curves, their intersections with
//! leaves, holonomy classification, invariance, deformation of the action,
//! the halving sequence of transversals and the addition of transversals.

mod add;
mod curve;
mod deform;
pub mod fixtures;
mod invariance;
mod model;
mod procrustes;
mod scan;
mod sequence;

pub use add::{add_transversals, leaf_offsets};
pub use curve::{Projection, Transversal};
pub use deform::deform_action;
pub use invariance::{
    check_condition_star, check_invariance, default_h_samples, holonomy, isotropy_group, ConditionStarReport,
    InvarianceReport, IsotropyGroup, LeafMetric,
};
pub use model::{FoliationModel, PlanarAction, TimeChange};
pub use procrustes::{classify_holonomy, classify_holonomy_with, HolonomyClass, HolonomyClassification};
pub use scan::{continue_return, leaf_intersection_count, leaf_transversal_intersection, returns, Intersection};
pub use sequence::{transversal_sequence, SequenceMode, SequenceReport, SequenceVerdict};

/// A point of the two-dimensional model chart.
pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransversalError {
    #[error("return map cannot be continued at t = {t}")]
    ContinuationFailed { t: f64 },
    #[error("all points coincide")]
    DegenerateConfiguration,
    #[error("condition (*) violated: {0}")]
    ConditionStarViolated(String),
    #[error("no return element within the search bound")]
    NoReturnElement,
    #[error("transversal is not invariant (displacement {displacement})")]
    NotInvariant { displacement: f64 },
    #[error("points at t = {t} lie on different leaves")]
    LeafMismatch { t: f64 },
    #[error("curve is not transversal at t = {t} (cosine {cosine})")]
    NotTransversal { t: f64, cosine: f64 },
    #[error("invalid transversal: {0}")]
    InvalidTransversal(String),
    #[error("invalid request: {0}")]
    Invalid(String),
}
