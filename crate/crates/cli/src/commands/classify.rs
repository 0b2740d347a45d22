use colombeau_core::jetcalc::{parse_net_template, DEFAULT_MAX_ORDER};
use colombeau_core::nets::{SeminormTable, LOG_FLOOR};
use colombeau_core::{Classification, Domain, Error, Grid, Net, Result, Thresholds, Verdict};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Outcome, Table, Workflow};
use crate::config::{defaults, grid_or, DomainSpec, GridSpec, Overrides, ScheduleSpec, VerdictSpec};

/// Moderate/negligible classification of a net.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Expression in `x` and `eps`.
    pub net: String,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default = "defaults::k_max")]
    pub k_max: usize,
    /// Decay order certified for negligibility.
    #[serde(default = "defaults::ceiling")]
    pub ceiling: f64,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    /// Defaults to `[-50, 50]` on the real line and `[0, 100]` on the half-line, 4001 points.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Verdict required for a pass; without it any moderate verdict passes.
    #[serde(default)]
    pub expect: Option<VerdictSpec>,
}

#[derive(Serialize)]
struct ClassifyResult {
    #[serde(flatten)]
    classification: Classification,
    seminorms: SeminormTable,
}

fn log_table(table: &SeminormTable) -> Table {
    let k_max = table.k_max();
    let mut header = vec!["eps".to_string(), "ln_eps".to_string()];
    header.extend((0..=k_max).map(|k| format!("seminorm_{k}")));
    header.extend((0..=k_max).map(|k| format!("ln_seminorm_{k}")));
    let rows = table
        .eps
        .iter()
        .zip(&table.values)
        .map(|(e, row)| {
            let mut r = vec![*e, e.ln()];
            r.extend(row);
            r.extend(row.iter().map(|v| v.max(LOG_FLOOR).ln()));
            r
        })
        .collect();
    Table { header, rows }
}

impl Workflow for ClassifyConfig {
    const NAME: &'static str = "classify";

    fn apply(&mut self, o: &Overrides) -> std::result::Result<(), String> {
        if let Some(s) = o.schedule {
            self.schedule = s;
        }
        if let Some(k) = o.k_max {
            self.k_max = k;
        }
        if o.tolerance.is_some() {
            return Err("--tolerance does not apply to classify".into());
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome> {
        let domain = Domain::from(self.domain);
        if self.k_max > DEFAULT_MAX_ORDER {
            return Err(Error::InvalidInput(format!(
                "k_max = {} exceeds the jet order bound {DEFAULT_MAX_ORDER}",
                self.k_max
            )));
        }
        let net = Net::from_template(parse_net_template(&self.net)?, domain);
        let grid = grid_or(&self.grid, Grid::default_for(domain))?;
        grid.check_in(domain)?;
        let schedule = self.schedule.schedule()?;
        let thresholds = Thresholds::default().with_ceiling(self.ceiling);
        let seminorms = SeminormTable::compute(&net, self.k_max, &schedule, &grid)?;
        let classification = Classification::from_table(&seminorms, &schedule, &thresholds);
        let passed = match self.expect {
            Some(v) => classification.verdict == Verdict::from(v),
            None => classification.verdict != Verdict::Neither,
        };
        let table = log_table(&seminorms);
        Ok(Outcome::new(passed, &ClassifyResult { classification, seminorms }).with_table(table))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ClassifyConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn scaled_sine_is_moderate() {
        let c = config("net = \"eps^-2*sin(x)\"\nexpect = \"Moderate\"\n[grid]\nstart = -5\nend = 5\npoints = 201");
        let out = c.run().unwrap();
        assert!(out.passed);
        assert_eq!(out.result["verdict"], "Moderate");
        let slope = out.result["per_k"][0]["slope"].as_f64().unwrap();
        assert!((slope + 2.0).abs() < 1e-9);
        assert_eq!(out.csv.unwrap().lines().count(), 13);
    }

    #[test]
    fn wrong_expectation_fails() {
        let c = config("net = \"eps^3\"\nexpect = \"moderate\"\nceiling = 3\n[grid]\nstart = -1\nend = 1\npoints = 11");
        let out = c.run().unwrap();
        assert_eq!(out.result["verdict"], "Negligible");
        assert!(!out.passed);
    }

    #[test]
    fn half_line_grid_is_checked() {
        let c = config("net = \"x\"\ndomain = \"half_line\"\n[grid]\nstart = -1\nend = 1\npoints = 11");
        assert!(matches!(c.run(), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn overrides() {
        let mut c = config("net = \"sin(x)\"");
        c.apply(&Overrides {
            k_max: Some(1),
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!(c.k_max, 1);
        let bad = Overrides {
            tolerance: Some(1e-3),
            ..Overrides::default()
        };
        assert!(c.apply(&bad).is_err());
    }
}
