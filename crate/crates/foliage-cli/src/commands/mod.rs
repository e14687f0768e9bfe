//! Subcommand implementations. Each returns a `Report`; `dispatch` writes it.

mod circle;
mod hill;
mod transversal;

use foliage::circle::CircleError;
use foliage::denjoy::DenjoyError;
use foliage::hill::SpectralError;
use foliage::stats::StatsError;
use foliage::transversal::TransversalError;

use crate::config::{Command, RunConfig};
use crate::fixtures::{self, Fixture};
use crate::output::write_report;
use crate::{criteria, CliError, EXIT_OK, EXIT_VIOLATION};

pub use circle::{circle_fixture, golden};
pub use hill::scaled;
pub use transversal::{flat_deviation, planar_action_table, transversal_fixture};

/// Subcommands that read `--window` and `--grid`.
const USES_WINDOW: &[&str] = &["stats", "spectrum", "family", "limitper"];
const USES_GRID: &[&str] = &["spectrum", "family", "limitper", "floquet"];

/// Tolerance defaults a fixture needs, applied under explicit overrides.
fn fixture_tolerances(cfg: &mut RunConfig, fixture: Option<Fixture>) {
    // Rotation numbers of the truncated Denjoy map are certified to 1e-6, not 1e-9.
    if fixture == Some(Fixture::DenjoyDefault) && !cfg.tol_overrides.contains_key("rotation") {
        cfg.tolerances.rotation = 1e-6;
    }
}

/// Runs the configured subcommand and writes its artifacts.
pub fn dispatch(cfg: &RunConfig) -> Result<i32, CliError> {
    let name = cfg.subcommand.as_str();
    if cfg.window.is_some() && !USES_WINDOW.contains(&name) {
        return Err(CliError::Invalid(format!("`{name}` does not take --window")));
    }
    if cfg.grid.is_some() && !USES_GRID.contains(&name) {
        return Err(CliError::Invalid(format!("`{name}` does not take --grid")));
    }
    let fixture = fixtures::resolve(name, cfg.fixture.as_deref())?;
    let mut cfg = cfg.clone();
    fixture_tolerances(&mut cfg, fixture);
    let cfg = &cfg;
    let mut report = match &cfg.command {
        Command::Rotation(a) => circle::rotation(cfg, fixture, a)?,
        Command::Denjoy(a) => circle::denjoy(cfg, a)?,
        Command::Stats(a) => circle::stats(cfg, fixture, a)?,
        Command::Transversal(a) => transversal::transversal(cfg, fixture, a)?,
        Command::Deform => transversal::deform(cfg, fixture)?,
        Command::Sequence(a) => transversal::sequence(cfg, fixture, a)?,
        Command::Add(a) => transversal::add(cfg, a)?,
        Command::Spectrum => hill::spectrum(cfg)?,
        Command::Family(a) => hill::family(cfg, a)?,
        Command::Limitper(a) => hill::limitper(cfg, a)?,
        Command::Floquet(a) => hill::floquet(cfg, a)?,
        Command::Repro(a) => criteria::repro(cfg, a)?,
    };
    report.param("fixture", fixture.map(|f| f.name()));
    write_report(cfg, &report)?;
    for v in &report.violations {
        eprintln!("foliage: {v}");
    }
    Ok(if report.violations.is_empty() { EXIT_OK } else { EXIT_VIOLATION })
}

impl From<CircleError> for CliError {
    fn from(e: CircleError) -> Self {
        CliError::Violation(e.to_string())
    }
}

impl From<DenjoyError> for CliError {
    fn from(e: DenjoyError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::TraceTooShort { .. } | StatsError::DegenerateScales(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Violation(e.to_string()),
        }
    }
}

impl From<TransversalError> for CliError {
    fn from(e: TransversalError) -> Self {
        match e {
            TransversalError::Invalid(_) | TransversalError::InvalidTransversal(_) | TransversalError::NotTransversal { .. } => {
                CliError::Invalid(e.to_string())
            }
            _ => CliError::Violation(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Invalid(_)
            | SpectralError::InvalidPotential(_)
            | SpectralError::SupportExceedsTruncation { .. }
            | SpectralError::ThetaGridTooCoarse { .. } => CliError::Invalid(e.to_string()),
            _ => CliError::Violation(e.to_string()),
        }
    }
}
