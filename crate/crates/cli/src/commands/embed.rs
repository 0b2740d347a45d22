use std::sync::Arc;

use colombeau_core::embedding::{consistency_residual, Mollifier, MollifierConfig, MollifierHeader};
use colombeau_core::func::expr_fn;
use colombeau_core::nets::classify;
use colombeau_core::{parse, Classification, Grid, Result, Thresholds};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Outcome, Workflow};
use crate::config::{defaults, grid_or, GridSpec, Overrides, ScheduleSpec};

fn default_radius() -> f64 {
    MollifierConfig::default().radius
}

fn default_spacing() -> f64 {
    MollifierConfig::default().spacing
}

fn default_ceiling() -> f64 {
    3.0
}

/// Mollifier construction and the consistency residual `f*rho_eps - f`.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct EmbedConfig {
    /// Number of vanishing moments.
    #[serde(default = "defaults::moments")]
    pub moments: usize,
    /// Tabulation radius.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Spacing of the exported table.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// Smooth function of `x` whose consistency residual is classified.
    #[serde(default)]
    pub function: Option<String>,
    /// Moments of the mollifier used for the residual; defaults to `moments`.
    #[serde(default)]
    pub consistency_moments: Option<usize>,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default = "defaults::one")]
    pub k_max: usize,
    /// Decay order the residual must reach.
    #[serde(default = "default_ceiling")]
    pub ceiling: f64,
    /// Defaults to `[-10, 10]` with 201 points.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

#[derive(Serialize)]
struct Consistency {
    function: String,
    moments: usize,
    classification: Classification,
}

#[derive(Serialize)]
struct EmbedResult {
    mollifier: MollifierHeader,
    consistency: Option<Consistency>,
}

impl EmbedConfig {
    fn mollifier(&self, moments: usize) -> Result<Mollifier> {
        Mollifier::build(MollifierConfig {
            moments,
            radius: self.radius,
            spacing: self.spacing,
            ..MollifierConfig::default()
        })
    }
}

impl Workflow for EmbedConfig {
    const NAME: &'static str = "embed";

    fn apply(&mut self, o: &Overrides) -> std::result::Result<(), String> {
        if let Some(s) = o.schedule {
            self.schedule = s;
        }
        if let Some(k) = o.k_max {
            self.k_max = k;
        }
        if let Some(t) = o.tolerance {
            self.ceiling = t;
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome> {
        let mollifier = Arc::new(self.mollifier(self.moments)?);
        let csv = mollifier.to_csv()?;
        let consistency = match &self.function {
            None => None,
            Some(text) => {
                let f = expr_fn(parse(text)?);
                let moments = self.consistency_moments.unwrap_or(self.moments);
                let rho = if moments == self.moments {
                    mollifier.clone()
                } else {
                    Arc::new(self.mollifier(moments)?)
                };
                let net = consistency_residual(f, rho);
                let grid = grid_or(&self.grid, Grid::uniform(-10.0, 10.0, 201))?;
                let schedule = self.schedule.schedule()?;
                let th = Thresholds::default().with_ceiling(self.ceiling);
                Some(Consistency {
                    function: text.clone(),
                    moments,
                    classification: classify(&net, self.k_max, &schedule, &grid, &th)?,
                })
            }
        };
        let passed = consistency.as_ref().is_none_or(|c| c.classification.is_negligible());
        let result = EmbedResult {
            mollifier: mollifier.header(),
            consistency,
        };
        let mut out = Outcome::new(passed, &result);
        out.csv = Some(csv);
        Ok(out)
    }
}
