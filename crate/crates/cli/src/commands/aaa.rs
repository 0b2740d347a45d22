use colombeau_core::aaa::{
    certify, compose, AAASpec, decompose_net, faa_di_bruno, uniqueness_report, CompositionReport, DecompositionReport,
    UniquenessReport,
};
use colombeau_core::{parse, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Outcome, Table, Workflow};
use crate::config::{aaa_settings, defaults, GridSpec, Overrides, PartsSpec, ScheduleSpec};

/// Splits `g + h` into an almost automorphic principal and a vanishing corrective part.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    /// Almost automorphic part, an expression in `x` and `eps`.
    pub principal: String,
    /// Part vanishing at `+inf`, an expression in `x` and `eps`.
    pub corrective: String,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default = "defaults::k_max")]
    pub k_max: usize,
    /// Highest derivative checked for vanishing.
    #[serde(default = "defaults::k_max")]
    pub j_max: usize,
    /// Return-limit residual accepted by the Bochner probe, relative to the sampled scale.
    #[serde(default = "defaults::probe_tolerance")]
    pub tolerance: f64,
    /// Defaults to `[-50, 50]` with 4001 points.
    #[serde(default)]
    pub real_grid: Option<GridSpec>,
    /// Defaults to `[0, 100]` with 4001 points.
    #[serde(default)]
    pub half_grid: Option<GridSpec>,
    /// Second decomposition of the same sum, tested for uniqueness.
    #[serde(default)]
    pub compare: Option<PartsSpec>,
    /// Parameter value at which the two decompositions are compared.
    #[serde(default = "defaults::half")]
    pub compare_eps: f64,
}

#[derive(Serialize)]
struct DecomposeResult {
    decomposition: DecompositionReport,
    uniqueness: Option<UniquenessReport>,
}

impl Workflow for DecomposeConfig {
    const NAME: &'static str = "decompose";

    fn apply(&mut self, o: &Overrides) -> std::result::Result<(), String> {
        if let Some(s) = o.schedule {
            self.schedule = s;
        }
        if let Some(k) = o.k_max {
            self.k_max = k;
        }
        if let Some(t) = o.tolerance {
            self.tolerance = t;
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome> {
        let spec = AAASpec::parse(&self.principal, &self.corrective)?;
        let schedule = self.schedule.schedule()?;
        let settings = aaa_settings(&self.real_grid, &self.half_grid, self.k_max, self.j_max, self.tolerance)?;
        let decomposition = decompose_net(&spec, &schedule, &settings)?.report;
        let uniqueness = match &self.compare {
            None => None,
            Some(other) => Some(uniqueness_report(&spec, &other.spec()?, self.compare_eps, &settings)?),
        };
        let violation = uniqueness.as_ref().and_then(|u| u.violation.clone());
        let mut table = Table::new(&["eps", "probe_residual", "probe_passed", "vanishing"]);
        for p in &decomposition.parts {
            let flag = |b: bool| if b { 1.0 } else { 0.0 };
            table.rows.push(vec![
                p.eps,
                p.probe_residual.unwrap_or(f64::NAN),
                flag(p.probe_passed),
                flag(p.vanishing.vanishing),
            ]);
        }
        let passed = decomposition.passed && violation.is_none();
        let mut out = Outcome::new(passed, &DecomposeResult { decomposition, uniqueness }).with_table(table);
        out.error = violation.map(|v| Error::UniquenessViolation(v).to_string());
        Ok(out)
    }
}

fn default_window() -> f64 {
    10.0
}

fn default_fdb_tolerance() -> f64 {
    1e-9
}

fn default_cases() -> usize {
    200
}

/// Composition `F(u)` of a tempered `F` with a decomposed `u`.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ComposeConfig {
    /// Tempered function of `x`.
    pub outer: String,
    /// Growth of `outer` is certified on `[-window, window]`.
    #[serde(default = "default_window")]
    pub window: f64,
    /// Almost automorphic part, an expression in `x` and `eps`.
    pub principal: String,
    /// Part vanishing at `+inf`, an expression in `x` and `eps`.
    pub corrective: String,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default = "defaults::k_max")]
    pub k_max: usize,
    #[serde(default = "defaults::k_max")]
    pub j_max: usize,
    #[serde(default = "defaults::probe_tolerance")]
    pub probe_tolerance: f64,
    /// Defaults to `[-50, 50]` with 4001 points.
    #[serde(default)]
    pub real_grid: Option<GridSpec>,
    /// Defaults to `[0, 100]` with 4001 points.
    #[serde(default)]
    pub half_grid: Option<GridSpec>,
    /// Randomized chain-rule checks against direct jets of the composition.
    #[serde(default = "default_cases")]
    pub random_cases: usize,
    #[serde(default)]
    pub seed: u64,
    /// Largest accepted relative chain-rule discrepancy.
    #[serde(default = "default_fdb_tolerance")]
    pub tolerance: f64,
}

#[derive(Serialize)]
struct ChainRuleCheck {
    cases: usize,
    seed: u64,
    max_relative_difference: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ComposeResult {
    composition: CompositionReport,
    chain_rule: ChainRuleCheck,
}

impl ComposeConfig {
    fn chain_rule(&self, sum: &colombeau_core::Expr, outer: &colombeau_core::Expr, eps: &[f64], span: (f64, f64)) -> Result<ChainRuleCheck> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let composed = outer.compose(sum);
        let mut worst = 0.0f64;
        for _ in 0..self.random_cases {
            let e = eps[rng.gen_range(0..eps.len())];
            let x = rng.gen_range(span.0..=span.1);
            let u = sum.bind("eps", e).jet(x, self.k_max)?;
            let f = outer.jet(u.value(), self.k_max)?;
            let direct = composed.bind("eps", e).jet(x, self.k_max)?;
            for j in 0..=self.k_max {
                let d = direct.derivs[j];
                let diff = (faa_di_bruno(&f, &u, j)? - d).abs() / d.abs().max(1.0);
                worst = worst.max(if diff.is_nan() { f64::INFINITY } else { diff });
            }
        }
        Ok(ChainRuleCheck {
            cases: self.random_cases,
            seed: self.seed,
            max_relative_difference: worst,
            passed: worst <= self.tolerance,
        })
    }
}

impl Workflow for ComposeConfig {
    const NAME: &'static str = "compose";

    fn apply(&mut self, o: &Overrides) -> std::result::Result<(), String> {
        if let Some(s) = o.schedule {
            self.schedule = s;
        }
        if let Some(k) = o.k_max {
            self.k_max = k;
        }
        if let Some(t) = o.tolerance {
            self.tolerance = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome> {
        let outer = parse(&self.outer)?;
        let spec = AAASpec::parse(&self.principal, &self.corrective)?;
        let schedule = self.schedule.schedule()?;
        let settings = aaa_settings(&self.real_grid, &self.half_grid, self.k_max, self.j_max, self.probe_tolerance)?;
        let tempered = certify(outer.clone(), self.k_max, self.window)?;
        let composition = compose(&tempered, &spec, &schedule, &settings)?.report;
        let span = (settings.half_grid.min(), settings.half_grid.max());
        let chain_rule = self.chain_rule(&spec.sum(), &outer, &schedule.values(), span)?;
        let mut table = Table::new(&["eps", "probe_residual", "probe_passed", "vanishing"]);
        for p in &composition.parts {
            let flag = |b: bool| if b { 1.0 } else { 0.0 };
            table.rows.push(vec![
                p.eps,
                p.probe_residual.unwrap_or(f64::NAN),
                flag(p.probe_passed),
                flag(p.vanishing.vanishing),
            ]);
        }
        let passed = composition.passed && chain_rule.passed;
        Ok(Outcome::new(passed, &ComposeResult { composition, chain_rule }).with_table(table))
    }
}
