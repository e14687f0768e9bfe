//! Command line, config file and their merge into one resolved run record.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use foliage::Tolerances;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "foliage", version, about = "Foliated models, return statistics and Hill band spectra")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Named built-in fixture.
    #[arg(long, global = true)]
    pub fixture: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output formats, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// Worker threads for data-parallel batches.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Energy or parameter window.
    #[arg(long, global = true, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,
    /// Grid size of the main scan.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// TOML config file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Rotation number and closest returns of a circle map.
    Rotation(RotationArgs),
    /// Build a Denjoy map and export its gaps.
    Denjoy(DenjoyArgs),
    /// Frequency profiles, gauges, maximal sets and dimensions of an orbit.
    Stats(StatsArgs),
    /// Condition (*), holonomy, invariance and isotropy of a transversal.
    Transversal(TransversalArgs),
    /// Deform the action so the transversal becomes invariant.
    Deform,
    /// Halving or forced sequence of transversals.
    Sequence(SequenceArgs),
    /// Add two invariant transversals over a base transversal.
    Add(AddArgs),
    /// Band spectrum and discriminant trace of a periodic potential.
    Spectrum,
    /// Band continuity along the family p * V.
    Family(FamilyArgs),
    /// Spectra of limit-periodic approximants.
    Limitper(LimitperArgs),
    /// Lattice Floquet transform and its inverse.
    Floquet(FloquetArgs),
    /// Run every acceptance criterion and print a pass/fail table.
    Repro(ReproArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rotation(_) => "rotation",
            Command::Denjoy(_) => "denjoy",
            Command::Stats(_) => "stats",
            Command::Transversal(_) => "transversal",
            Command::Deform => "deform",
            Command::Sequence(_) => "sequence",
            Command::Add(_) => "add",
            Command::Spectrum => "spectrum",
            Command::Family(_) => "family",
            Command::Limitper(_) => "limitper",
            Command::Floquet(_) => "floquet",
            Command::Repro(_) => "repro",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RotationArgs {
    /// Rotation angle, overriding the fixture with a rigid rotation.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Orbit length [default: 100000, or 1000000 for denjoy-default].
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DenjoyArgs {
    /// Truncation index of the gap family.
    #[arg(long)]
    pub m: Option<usize>,
    /// Orbit length of the rotation-number check.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StatsArgs {
    /// Rotation angle, overriding the fixture with a rigid rotation.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Orbit length.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Resolution of maximal sets and nets.
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    /// Points to profile, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.35, 0.6, 0.85])]
    pub x: Vec<f64>,
    /// Depth of the growth gauges.
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    FlowTime,
    Ambient,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TransversalArgs {
    /// Leafwise metric of the isometry check.
    #[arg(long, value_enum, default_value_t = MetricArg::FlowTime)]
    pub metric: MetricArg,
    /// Search bound of the isotropy group.
    #[arg(long, default_value_t = 8.0)]
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SequenceModeArg {
    Halving,
    /// Forced steps a_k = 2^-k.
    Geometric,
    /// Forced steps a_k = 1/k.
    Harmonic,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SequenceArgs {
    #[arg(long, default_value_t = 40)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value_t = SequenceModeArg::Halving)]
    pub mode: SequenceModeArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AddArgs {
    /// Slope of the first flow-transversal.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Slope of the second flow-transversal.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub b: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FamilyArgs {
    /// Number of points of the parameter grid on [0, 1].
    #[arg(long, default_value_t = 11)]
    pub points: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LimitperArgs {
    /// Largest approximant index.
    #[arg(long, default_value_t = 3)]
    pub n_max: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FloquetArgs {
    /// Support truncation |m| <= truncation.
    #[arg(long, default_value_t = 8)]
    pub truncation: i64,
    /// Lattice spacing.
    #[arg(long, default_value_t = 1.0)]
    pub lattice: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReproArgs {
    /// Run only these criteria (1-12), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
}

/// Structured config file, merged under the explicit flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub fixture: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub jobs: Option<usize>,
    pub window: Option<[f64; 2]>,
    pub grid: Option<usize>,
    #[serde(default)]
    pub tol: BTreeMap<String, f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved configuration, echoed in every manifest.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub fixture: Option<String>,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub jobs: usize,
    pub window: Option<(f64, f64)>,
    pub grid: Option<usize>,
    pub config_file: Option<PathBuf>,
    /// Tolerances set by the config file or flags, which fixture defaults do not replace.
    pub tol_overrides: BTreeMap<String, f64>,
    pub tolerances: Tolerances,
    pub command: Command,
}

/// Splits `--tol.<name> <value>` and `--tol.<name>=<value>` out of argv.
pub fn take_tolerances(argv: Vec<String>) -> Result<(Vec<String>, Vec<(String, f64)>), CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut tols = Vec::new();
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let Some(spec) = arg.strip_prefix("--tol.") else {
            rest.push(arg);
            continue;
        };
        let (name, raw) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| CliError::Invalid(format!("--tol.{spec} needs a value")))?;
                (spec.to_string(), v)
            }
        };
        let value: f64 =
            raw.parse().map_err(|_| CliError::Invalid(format!("--tol.{name}: `{raw}` is not a number")))?;
        tols.push((name, value));
    }
    Ok((rest, tols))
}

impl RunConfig {
    pub fn resolve(cli: Cli, flag_tols: Vec<(String, f64)>) -> Result<Self, CliError> {
        let file = match &cli.global.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let mut tolerances = Tolerances::default();
        let mut tol_overrides = BTreeMap::new();
        for (name, v) in file.tol.into_iter().chain(flag_tols) {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Invalid(format!("tolerance {name} must be positive and finite")));
            }
            tolerances.set(&name, v).map_err(|e| CliError::Invalid(e.to_string()))?;
            tol_overrides.insert(name, v);
        }
        let g = cli.global;
        let window = match g.window.map(|w| (w[0], w[1])).or(file.window.map(|w| (w[0], w[1]))) {
            Some((a, b)) if !(a < b && a.is_finite() && b.is_finite()) => {
                return Err(CliError::Invalid(format!("window [{a}, {b}] is empty")))
            }
            w => w,
        };
        let mut formats = if g.format.is_empty() { file.format.unwrap_or_else(|| vec![Format::Csv]) } else { g.format };
        formats.sort();
        formats.dedup();
        let jobs = g.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(CliError::Invalid("--jobs must be at least 1".into()));
        }
        Ok(Self {
            subcommand: cli.command.name().to_string(),
            fixture: g.fixture.or(file.fixture),
            out: g.out.or(file.out).unwrap_or_else(|| PathBuf::from("foliage-out")),
            formats,
            jobs,
            window,
            grid: g.grid.or(file.grid),
            config_file: g.config,
            tol_overrides,
            tolerances,
            command: cli.command,
        })
    }
}
