//! Central tolerance record shared by all modules.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Equality of circle points.
    pub circle_eq: f64,
    /// Agreement of rotation-number estimates at N and N/2.
    pub rotation: f64,
    /// Bisection target for leaf/transversal intersections.
    pub bisection: f64,
    /// Constancy of pairwise leafwise distances along a transversal.
    pub isometry: f64,
    /// Residual threshold of the holonomy isometry fit.
    pub procrustes: f64,
    /// Sup-distance below which hP is identified with P.
    pub invariance: f64,
    /// Upper bound of |cos| between transversal and leaf directions.
    pub transversality_margin: f64,
    /// Cauchy threshold on partial sums of sequence steps.
    pub sequence_cauchy: f64,
    /// Final sup-distance threshold between consecutive sequence members.
    pub sequence_sup: f64,
    /// Local error tolerance of the ODE integrator.
    pub ode: f64,
    /// Bisection target for band edges.
    pub band_edge: f64,
    /// Round-trip tolerance of the Floquet transform.
    pub floquet: f64,
    /// Relative gap between full and tail-half estimates accepted as a limit.
    pub consistency_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            circle_eq: 1e-12,
            rotation: 1e-9,
            bisection: 1e-10,
            isometry: 1e-6,
            procrustes: 1e-8,
            invariance: 1e-8,
            transversality_margin: 0.95,
            sequence_cauchy: 1e-8,
            sequence_sup: 1e-6,
            ode: 1e-10,
            band_edge: 1e-12,
            floquet: 1e-10,
            consistency_gap: 0.1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown tolerance `{0}`")]
pub struct UnknownTolerance(pub String);

impl Tolerances {
    /// All tolerances as (name, value) pairs in declaration order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("circle_eq", self.circle_eq),
            ("rotation", self.rotation),
            ("bisection", self.bisection),
            ("isometry", self.isometry),
            ("procrustes", self.procrustes),
            ("invariance", self.invariance),
            ("transversality_margin", self.transversality_margin),
            ("sequence_cauchy", self.sequence_cauchy),
            ("sequence_sup", self.sequence_sup),
            ("ode", self.ode),
            ("band_edge", self.band_edge),
            ("floquet", self.floquet),
            ("consistency_gap", self.consistency_gap),
        ]
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), UnknownTolerance> {
        let slot = match name {
            "circle_eq" => &mut self.circle_eq,
            "rotation" => &mut self.rotation,
            "bisection" => &mut self.bisection,
            "isometry" => &mut self.isometry,
            "procrustes" => &mut self.procrustes,
            "invariance" => &mut self.invariance,
            "transversality_margin" => &mut self.transversality_margin,
            "sequence_cauchy" => &mut self.sequence_cauchy,
            "sequence_sup" => &mut self.sequence_sup,
            "ode" => &mut self.ode,
            "band_edge" => &mut self.band_edge,
            "floquet" => &mut self.floquet,
            "consistency_gap" => &mut self.consistency_gap,
            other => return Err(UnknownTolerance(other.to_string())),
        };
        *slot = value;
        Ok(())
    }
}
