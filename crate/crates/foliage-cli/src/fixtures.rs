//! Named built-in fixtures and the subcommands that accept them.

use std::fmt;
use std::str::FromStr;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    Seifert,
    Example2Tent,
    Example4Flows,
    Example5Planar,
    GoldenRotation,
    DenjoyDefault,
    MathieuQ1,
    LimitperDefault,
}

impl Fixture {
    pub const ALL: [Fixture; 8] = [
        Fixture::Seifert,
        Fixture::Example2Tent,
        Fixture::Example4Flows,
        Fixture::Example5Planar,
        Fixture::GoldenRotation,
        Fixture::DenjoyDefault,
        Fixture::MathieuQ1,
        Fixture::LimitperDefault,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Seifert => "seifert",
            Fixture::Example2Tent => "example2-tent",
            Fixture::Example4Flows => "example4-flows",
            Fixture::Example5Planar => "example5-planar",
            Fixture::GoldenRotation => "golden-rotation",
            Fixture::DenjoyDefault => "denjoy-default",
            Fixture::MathieuQ1 => "mathieu-q1",
            Fixture::LimitperDefault => "limitper-default",
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fixture {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Fixture::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Fixture::ALL.iter().map(|f| f.name()).collect();
            CliError::Invalid(format!("unknown fixture `{s}`; known: {}", names.join(", ")))
        })
    }
}

/// Fixtures a subcommand accepts; the first is its default. Empty when the
/// subcommand takes no fixture.
pub fn accepted(subcommand: &str) -> &'static [Fixture] {
    use Fixture::*;
    match subcommand {
        "rotation" | "stats" => &[GoldenRotation, DenjoyDefault],
        "denjoy" => &[DenjoyDefault],
        "transversal" => &[Seifert, Example2Tent, Example4Flows, Example5Planar],
        "deform" => &[Example5Planar, Example4Flows, Example2Tent, Seifert],
        "sequence" => &[Example2Tent, Seifert, Example4Flows, Example5Planar],
        "add" => &[Example4Flows],
        "spectrum" | "family" => &[MathieuQ1],
        "limitper" => &[LimitperDefault],
        _ => &[],
    }
}

/// The fixture named in the config, or the subcommand's default.
pub fn resolve(subcommand: &str, requested: Option<&str>) -> Result<Option<Fixture>, CliError> {
    let ok = accepted(subcommand);
    match requested {
        None => Ok(ok.first().copied()),
        Some(name) => {
            let f: Fixture = name.parse()?;
            if ok.contains(&f) {
                Ok(Some(f))
            } else if ok.is_empty() {
                Err(CliError::Invalid(format!("`{subcommand}` takes no fixture")))
            } else {
                let names: Vec<&str> = ok.iter().map(|f| f.name()).collect();
                Err(CliError::Invalid(format!("`{subcommand}` accepts fixtures {}, not `{f}`", names.join(", "))))
            }
        }
    }
}
