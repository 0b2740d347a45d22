//! Configuration types shared by the subcommands.

use std::path::Path;
use std::str::FromStr;

use colombeau_core::aaa::{AAASpec, AaaSettings};
use colombeau_core::{Domain, EpsSchedule, Error, Grid, Result, Verdict};
use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Geometric schedule `eps_i = eps0 * ratio^i`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSpec {
    pub eps0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        let s = EpsSchedule::default();
        Self {
            eps0: s.eps0,
            ratio: s.ratio,
            count: s.count,
        }
    }
}

impl ScheduleSpec {
    pub fn schedule(&self) -> Result<EpsSchedule> {
        EpsSchedule::new(self.eps0, self.ratio, self.count)
    }
}

impl FromStr for ScheduleSpec {
    type Err = String;

    /// `eps0,ratio,count`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected eps0,ratio,count, got '{s}'"));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("'{p}': {e}"));
        let spec = Self {
            eps0: num(parts[0])?,
            ratio: num(parts[1])?,
            count: parts[2].parse().map_err(|e| format!("'{}': {e}", parts[2]))?,
        };
        spec.schedule().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

/// `points` equally spaced points on `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl GridSpec {
    pub const fn new(start: f64, end: f64, points: usize) -> Self {
        Self { start, end, points }
    }

    pub fn grid(&self) -> Result<Grid> {
        if !(self.start.is_finite() && self.end.is_finite() && self.end > self.start) || self.points < 2 {
            return Err(Error::InvalidInput(format!(
                "grid [{}, {}] with {} points is not a proper interval",
                self.start, self.end, self.points
            )));
        }
        Ok(Grid::uniform(self.start, self.end, self.points))
    }
}

pub fn grid_or(spec: &Option<GridSpec>, default: Grid) -> Result<Grid> {
    spec.as_ref().map_or(Ok(default), GridSpec::grid)
}

/// Principal part on the real line and corrective part on the half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PartsSpec {
    pub principal: String,
    pub corrective: String,
}

impl PartsSpec {
    pub fn spec(&self) -> Result<AAASpec> {
        AAASpec::parse(&self.principal, &self.corrective)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum DomainSpec {
    #[default]
    Real,
    HalfLine,
}

impl From<DomainSpec> for Domain {
    fn from(d: DomainSpec) -> Self {
        match d {
            DomainSpec::Real => Domain::Real,
            DomainSpec::HalfLine => Domain::HalfLine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum VerdictSpec {
    #[serde(alias = "moderate")]
    Moderate,
    #[serde(alias = "negligible")]
    Negligible,
    #[serde(alias = "neither")]
    Neither,
}

impl From<VerdictSpec> for Verdict {
    fn from(v: VerdictSpec) -> Self {
        match v {
            VerdictSpec::Moderate => Verdict::Moderate,
            VerdictSpec::Negligible => Verdict::Negligible,
            VerdictSpec::Neither => Verdict::Neither,
        }
    }
}

/// Default decomposition settings with the given grids and orders.
pub fn aaa_settings(
    real_grid: &Option<GridSpec>,
    half_grid: &Option<GridSpec>,
    k_max: usize,
    j_max: usize,
    probe_tolerance: f64,
) -> Result<AaaSettings> {
    let mut s = AaaSettings::default();
    s.real_grid = grid_or(real_grid, s.real_grid)?;
    s.half_grid = grid_or(half_grid, s.half_grid)?;
    s.half_grid.check_in(Domain::HalfLine)?;
    s.k_max = k_max;
    s.j_max = j_max;
    s.probe.tolerance = probe_tolerance;
    Ok(s)
}

/// Command-line values that replace configuration entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub schedule: Option<ScheduleSpec>,
    pub k_max: Option<usize>,
    pub tolerance: Option<f64>,
    pub len: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    /// Rejects flags the subcommand has no use for.
    pub fn refuse(&self, command: &str, schedule: bool, k_max: bool) -> std::result::Result<(), String> {
        if schedule && self.schedule.is_some() {
            return Err(format!("--schedule does not apply to {command}"));
        }
        if k_max && self.k_max.is_some() {
            return Err(format!("--kmax does not apply to {command}"));
        }
        Ok(())
    }
}

/// Reads TOML, or JSON when the extension is `.json`; no path means an empty table.
pub fn load<T: DeserializeOwned>(path: Option<&Path>) -> std::result::Result<T, String> {
    let Some(path) = path else {
        return toml::from_str("").map_err(|e| format!("configuration required: {}", e.message()));
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    } else {
        toml::from_str(&text).map_err(|e| format!("{}: {}", path.display(), e.message()))
    }
}

pub(crate) mod defaults {
    pub fn k_max() -> usize {
        2
    }
    pub fn one() -> usize {
        1
    }
    pub fn moments() -> usize {
        8
    }
    pub fn ceiling() -> f64 {
        6.0
    }
    pub fn probe_tolerance() -> f64 {
        1e-2
    }
    pub fn zero_floor() -> f64 {
        colombeau_core::ndds::SOLUTION_ZERO_FLOOR
    }
    pub fn half() -> f64 {
        0.5
    }
}
