//! Scenario runner behind the `dynalg` binary.
//!
//! `verify <suite>` runs a seeded battery with default settings; `run`
//! reads a scenario file. Both produce a [`Report`].

pub mod config;
pub mod report;
mod suites;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::schrep::{build_rep, RepConfig};
use crate::timeaxis::TimeGrid;

pub use config::{parse_config, ScenarioConfig, StateSpec};
pub use report::{Record, Report};

pub const DEFAULT_SEED: u64 = 7;

/// Exit statuses of the binary.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const ENVIRONMENT: i32 = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Propagators,
    Weyl,
    Dyson,
    Causal,
    Adjoint,
    TbarDynamical,
    Embedding,
    States,
    Regularity,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Propagators,
        Suite::Weyl,
        Suite::Dyson,
        Suite::Causal,
        Suite::Adjoint,
        Suite::TbarDynamical,
        Suite::Embedding,
        Suite::States,
        Suite::Regularity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Propagators => "propagators",
            Suite::Weyl => "weyl",
            Suite::Dyson => "dyson",
            Suite::Causal => "causal",
            Suite::Adjoint => "adjoint",
            Suite::TbarDynamical => "tbar-dynamical",
            Suite::Embedding => "embedding",
            Suite::States => "states",
            Suite::Regularity => "regularity",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "suite".into(),
                name: s.into(),
            })
    }
}

/// Command-line settings that override defaults and scenario files.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub grid_points: Option<usize>,
    /// Half-width of the position box.
    pub box_half: Option<f64>,
    pub k_track: Option<usize>,
    pub tolerance_scale: Option<f64>,
    pub seed: Option<u64>,
}

/// Fully resolved run settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub grid: TimeGrid,
    pub rep: RepConfig,
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grid: TimeGrid::default(),
            rep: RepConfig::default(),
            seed: DEFAULT_SEED,
            tolerance_scale: 1.0,
        }
    }
}

impl Settings {
    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(n) = o.grid_points {
            self.grid = TimeGrid::new(self.grid.t_min(), self.grid.t_max(), n)?;
        }
        if let Some(b) = o.box_half {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Argument(format!("--box must be positive, got {b}")));
            }
            self.rep.x_min = -b;
            self.rep.x_max = b;
        }
        if let Some(k) = o.k_track {
            self.rep.k_track = k;
        }
        if let Some(s) = o.tolerance_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Argument(format!(
                    "--tolerance-scale must be positive, got {s}"
                )));
            }
            self.tolerance_scale = s;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        Ok(self)
    }
}

/// Exit status for an error that stopped a run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Unknown { .. } | Error::Argument(_) | Error::Io(_) => exit::CONFIG,
        Error::RepConfig { .. } | Error::Leakage { .. } | Error::StepUnderflow { .. } | Error::Range(_) => {
            exit::ENVIRONMENT
        }
        _ => exit::CHECK_FAILED,
    }
}

/// Runs the seeded batteries of `suites`.
pub fn verify(suites: &[Suite], settings: &Settings) -> Result<Report> {
    let rep = build_rep(&settings.rep)?;
    let mut report = Report::default();
    for &s in suites {
        let mut ctx = suites::Ctx::new(s.name(), settings, &rep);
        suites::battery(s, &mut ctx)?;
        report.extend(ctx.finish());
    }
    report.sort();
    Ok(report)
}

/// Runs a parsed scenario file: the literal checks it names, plus the
/// seeded battery when asked for.
pub fn run_scenario(cfg: &ScenarioConfig, overrides: &Overrides) -> Result<Report> {
    let base = Settings {
        grid: cfg.grid,
        rep: cfg.rep.clone(),
        seed: cfg.seed.unwrap_or(DEFAULT_SEED),
        tolerance_scale: cfg.tolerance_scale.unwrap_or(1.0),
    };
    let settings = base.apply(overrides)?;
    let rep = build_rep(&settings.rep)?;
    // Literals were parsed on the scenario grid; a different grid would
    // silently resample them.
    if settings.grid != cfg.grid && cfg.has_literals() {
        return Err(Error::Argument(
            "--grid-points cannot be combined with functional literals".into(),
        ));
    }
    let mut ctx = suites::Ctx::new(&cfg.id, &settings, &rep);
    suites::literal_checks(cfg, &mut ctx)?;
    if cfg.battery {
        suites::battery(cfg.kind, &mut ctx)?;
    }
    let mut report = ctx.finish();
    report.sort();
    Ok(report)
}

pub fn run_config_text(text: &str, overrides: &Overrides) -> Result<Report> {
    run_scenario(&parse_config(text)?, overrides)
}
