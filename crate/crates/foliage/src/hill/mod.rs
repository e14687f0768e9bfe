//! Hill operators -d^2/dx^2 + V with periodic V: monodromy and Floquet
//! discriminant by adaptive shooting, band spectra, continuity in a parameter,
//! limit-periodic approximation, and the lattice Floquet transform.

mod floquet;
mod ode;
mod potential;
mod spectrum;

pub use floquet::{floquet_inverse, floquet_transform, FloquetTransform};
pub use ode::{discriminant_derivative, discriminant_with_derivative, monodromy, MonodromyResult};
pub use potential::{FourierTerm, LimitPeriodicPotential, PeriodicPotential, PotentialRepr};
pub use spectrum::{
    band_spectrum, band_spectrum_with, discriminant_trace, hausdorff_bands, limit_periodic_spectrum, spectrum_family, Band, BandSpectrum,
    EdgeKind, FamilyReport, LimitReport, PairReport,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("integrator stalled at x = {x} (step {h})")]
    IntegratorStalled { x: f64, h: f64 },
    #[error("monodromy determinant drifted to {det}")]
    WronskianDrift { det: f64 },
    #[error("grid too coarse near E = {energy}: hidden turning points of the discriminant")]
    WindowTooCoarse { energy: f64 },
    #[error("support index {index} exceeds truncation {truncation}")]
    SupportExceedsTruncation { index: i64, truncation: i64 },
    #[error("theta grid of {grid} points cannot resolve truncation {truncation}")]
    ThetaGridTooCoarse { grid: usize, truncation: i64 },
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid request: {0}")]
    Invalid(String),
}
