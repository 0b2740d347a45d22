use std::sync::Arc;

use colombeau_core::aaa::{check_vanishing, AAASpec, TailWindows, VanishingReport};
use colombeau_core::embedding::{Mollifier, MollifierConfig};
use colombeau_core::func::expr_fn;
use colombeau_core::jetcalc::parse_net_template;
use colombeau_core::ndds::{
    apply_operator, primitive, primitive_split, split_solve, verify_solution, Kernel, MollifierKernel, NDDSystem,
    SolutionReport, SolutionSettings, SolutionVerdict, SplitReport, Term,
};
use colombeau_core::{parse, Domain, Error, Expr, Fun, Grid, Net, Result, Thresholds};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Outcome, Table, Workflow};
use crate::config::{aaa_settings, defaults, grid_or, DomainSpec, GridSpec, Overrides, PartsSpec, ScheduleSpec};

fn default_solve_tolerance() -> f64 {
    1e-6
}

fn settings(grid: &Option<GridSpec>, k_max: usize, zero_floor: f64) -> Result<SolutionSettings> {
    let base = SolutionSettings::default();
    Ok(SolutionSettings {
        grid: grid_or(grid, base.grid)?,
        k_max,
        thresholds: Thresholds {
            zero_floor,
            ..base.thresholds
        },
    })
}

/// `u' + A u = g + h` split into a bounded and a decaying solution.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    /// Hyperbolic constant matrix.
    pub a: Vec<Vec<f64>>,
    /// One decomposed forcing per component.
    pub forcing: Vec<PartsSpec>,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    /// Largest accepted substitution residual of either part.
    #[serde(default = "default_solve_tolerance")]
    pub tolerance: f64,
    #[serde(default = "defaults::k_max")]
    pub j_max: usize,
    #[serde(default = "defaults::one")]
    pub k_max: usize,
    #[serde(default = "defaults::zero_floor")]
    pub zero_floor: f64,
    /// Grid of the principal residual; defaults to `[-50, 50]` with 4001 points.
    #[serde(default)]
    pub real_grid: Option<GridSpec>,
    /// Grid of the corrective residual; defaults to `[0, 100]` with 4001 points.
    #[serde(default)]
    pub half_grid: Option<GridSpec>,
    /// Verification and table grid; defaults to `[0, 50]` with 1001 points.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

impl Workflow for SolveConfig {
    const NAME: &'static str = "solve";

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
        let forcing = self.forcing.iter().map(PartsSpec::spec).collect::<Result<Vec<_>>>()?;
        let schedule = self.schedule.schedule()?;
        let aaa = aaa_settings(&self.real_grid, &self.half_grid, self.k_max, self.j_max, 1e-2)?;
        let verification = settings(&self.grid, self.k_max, self.zero_floor)?;
        let solution = split_solve(&self.a, &forcing, &schedule, &aaa, &verification)?;
        let report: &SplitReport = &solution.report;
        let residuals_ok = report
            .principal_residuals
            .iter()
            .chain(&report.corrective_residuals)
            .all(|r| *r <= self.tolerance);
        let passed = residuals_ok && report.solution.verdict == SolutionVerdict::Solution;
        let n = self.a.len();
        let mut header = vec!["x".to_string()];
        for i in 0..n {
            header.extend([format!("u_{i}"), format!("v_{i}"), format!("w_{i}")]);
        }
        let members = |nets: &[Net]| nets.iter().map(|c| c.at(schedule.eps0)).collect::<Result<Vec<Fun>>>();
        let (u, v, w) = (members(&solution.u)?, members(&solution.v)?, members(&solution.w)?);
        let mut table = Table { header, rows: Vec::new() };
        for &x in &verification.grid.points {
            let mut row = vec![x];
            for i in 0..n {
                row.extend([u[i].value(x)?, v[i].value(x)?, w[i].value(x)?]);
            }
            table.rows.push(row);
        }
        Ok(Outcome::new(passed, report).with_table(table))
    }
}

/// One term `A (tau_omega u)^(i)`.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// Derivative order.
    pub i: usize,
    /// Delay.
    #[serde(default)]
    pub omega: f64,
    /// Constant coefficient matrix, entries as expressions.
    pub a: Vec<Vec<String>>,
}

/// Convolution kernel; entries are `"rho"`, `"0"` or an expression in `x`.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub entries: Vec<Vec<String>>,
    /// Support radius; defaults to the mollifier radius.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Vanishing moments of `rho`.
    #[serde(default = "defaults::moments")]
    pub moments: usize,
}

impl KernelSpec {
    fn kernel(&self) -> Result<Kernel> {
        let uses_rho = self.entries.iter().flatten().any(|e| e.trim() == "rho");
        let mollifier = if uses_rho {
            Some(Arc::new(Mollifier::build(MollifierConfig::with_moments(self.moments))?))
        } else {
            None
        };
        let entries = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| match (e.trim(), &mollifier) {
                        ("rho", Some(m)) => Ok(Some(Arc::new(MollifierKernel(m.clone())) as Fun)),
                        ("0", _) => Ok(None),
                        (text, _) => Ok(Some(expr_fn(parse(text)?))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let radius = match (self.radius, &mollifier) {
            (Some(r), _) => r,
            (None, Some(m)) => m.config.radius,
            (None, None) => return Err(Error::InvalidInput("kernel radius is required without rho".into())),
        };
        Ok(Kernel { entries, radius })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionSpec {
    Solution,
    NotSolution,
}

/// Checks a candidate net against a neutral difference-differential system.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub n: usize,
    pub terms: Vec<TermSpec>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    /// Candidate components, expressions in `x` and `eps`.
    pub u: Vec<String>,
    #[serde(default)]
    pub domain: DomainSpec,
    /// Right-hand side; defaults to the image of `u` under the operator.
    #[serde(default)]
    pub forcing: Option<Vec<String>>,
    /// Added to the forcing.
    #[serde(default)]
    pub forcing_perturbation: Option<Vec<String>>,
    /// Verdict required for a pass; defaults to `solution`.
    #[serde(default)]
    pub expect: Option<SolutionSpec>,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default = "defaults::one")]
    pub k_max: usize,
    /// Residual seminorms at or below this count as zero.
    #[serde(default = "defaults::zero_floor")]
    pub zero_floor: f64,
    /// Defaults to `[0, 50]` with 1001 points.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

#[derive(Serialize)]
struct VerifyResult {
    manufactured_forcing: bool,
    #[serde(flatten)]
    report: SolutionReport,
}

fn nets(texts: &[String], domain: Domain) -> Result<Vec<Net>> {
    texts
        .iter()
        .map(|t| Ok(Net::from_template(parse_net_template(t)?, domain)))
        .collect()
}

impl VerifyConfig {
    fn system(&self, forcing: Vec<Net>) -> Result<NDDSystem> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let a = t
                    .a
                    .iter()
                    .map(|row| row.iter().map(|e| parse(e)).collect::<Result<Vec<Expr>>>())
                    .collect::<Result<Vec<_>>>()?;
                Ok(Term { i: t.i, omega: t.omega, a })
            })
            .collect::<Result<Vec<_>>>()?;
        let kernel = self.kernel.as_ref().map(KernelSpec::kernel).transpose()?;
        NDDSystem::new(self.n, terms, kernel, forcing)
    }

    fn count(&self, what: &str, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::InvalidInput(format!("{what} has {len} components, expected {}", self.n)));
        }
        Ok(())
    }
}

impl Workflow for VerifyConfig {
    const NAME: &'static str = "verify";
    const TABLE: bool = false;

    fn apply(&mut self, o: &Overrides) -> std::result::Result<(), String> {
        if let Some(s) = o.schedule {
            self.schedule = s;
        }
        if let Some(k) = o.k_max {
            self.k_max = k;
        }
        if let Some(t) = o.tolerance {
            self.zero_floor = t;
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome> {
        let domain = Domain::from(self.domain);
        let u = nets(&self.u, domain)?;
        self.count("u", u.len())?;
        let zero = Net::from_template(Expr::constant(0.0), Domain::Real);
        let unforced = self.system(vec![zero; self.n])?;
        let mut forcing = match &self.forcing {
            Some(f) => nets(f, Domain::Real)?,
            None => apply_operator(&unforced, &u)?,
        };
        self.count("forcing", forcing.len())?;
        if let Some(p) = &self.forcing_perturbation {
            let p = nets(p, Domain::Real)?;
            self.count("forcing_perturbation", p.len())?;
            forcing = forcing.iter().zip(&p).map(|(f, d)| f.add(d)).collect();
        }
        let sys = unforced.with_forcing(forcing)?;
        let schedule = self.schedule.schedule()?;
        let report = verify_solution(&sys, &u, &schedule, &settings(&self.grid, self.k_max, self.zero_floor)?)?;
        let expected = match self.expect {
            Some(SolutionSpec::NotSolution) => SolutionVerdict::NotSolution,
            _ => SolutionVerdict::Solution,
        };
        let passed = report.verdict == expected;
        let result = VerifyResult {
            manufactured_forcing: self.forcing.is_none(),
            report,
        };
        Ok(Outcome::new(passed, &result))
    }
}

fn default_horizon() -> f64 {
    40.0
}

fn default_primitive_tolerance() -> f64 {
    1e-8
}

fn default_primitive_grid() -> GridSpec {
    GridSpec::new(0.0, 10.0, 101)
}

/// Decomposed integrand for the split primitive.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub principal: String,
    pub corrective: String,
    /// Truncation of the corrective tail integral.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

/// Primitive `U(x) = int_{x0}^x u` of one member of a net.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveConfig {
    /// Integrand, an expression in `x` and `eps`.
    #[serde(default)]
    pub u: Option<String>,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "defaults::half")]
    pub eps: f64,
    /// Tabulation grid.
    #[serde(default = "default_primitive_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub split: Option<SplitSpec>,
    /// Largest accepted gap between the split primitive and the direct one.
    #[serde(default = "default_primitive_tolerance")]
    pub tolerance: f64,
}

#[derive(Serialize)]
struct SplitResult {
    tail_integral: f64,
    principal: Vec<f64>,
    corrective: Vec<f64>,
    identity_residual: f64,
    vanishing: VanishingReport,
}

#[derive(Serialize)]
struct PrimitiveResult {
    eps: f64,
    x: Vec<f64>,
    value: Option<Vec<f64>>,
    split: Option<SplitResult>,
}

fn values(f: &Fun, grid: &Grid) -> Result<Vec<f64>> {
    grid.points.iter().map(|&x| f.value(x)).collect()
}

impl Workflow for PrimitiveConfig {
    const NAME: &'static str = "primitive";

    fn apply(&mut self, o: &Overrides) -> std::result::Result<(), String> {
        o.refuse(Self::NAME, true, true)?;
        if let Some(t) = o.tolerance {
            self.tolerance = t;
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome> {
        if self.u.is_none() && self.split.is_none() {
            return Err(Error::InvalidInput("primitive needs u, split or both".into()));
        }
        let grid = self.grid.grid()?;
        let mut passed = true;
        let value = match &self.u {
            None => None,
            Some(text) => {
                let domain = Domain::from(self.domain);
                grid.check_in(domain)?;
                let net = Net::from_template(parse_net_template(text)?, domain);
                let v = values(&primitive(&net, self.x0).at(self.eps)?, &grid)?;
                passed &= v.iter().all(|y| y.is_finite());
                Some(v)
            }
        };
        let split = match &self.split {
            None => None,
            Some(s) => {
                grid.check_in(Domain::HalfLine)?;
                let spec = AAASpec::parse(&s.principal, &s.corrective)?;
                let parts = primitive_split(&spec, self.x0, self.eps, s.horizon)?;
                let principal = values(&parts.principal, &grid)?;
                let corrective = values(&parts.corrective, &grid)?;
                let whole = values(&primitive(&spec.net(), self.x0).at(self.eps)?, &grid)?;
                let identity_residual = principal
                    .iter()
                    .zip(&corrective)
                    .zip(&whole)
                    .map(|((p, c), w)| (p + c - w).abs())
                    .fold(0.0, |m: f64, d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
                let vanishing = check_vanishing(&*parts.corrective, 2, &TailWindows::default())?;
                passed &= identity_residual <= self.tolerance && vanishing.vanishing;
                Some(SplitResult {
                    tail_integral: parts.tail_integral,
                    principal,
                    corrective,
                    identity_residual,
                    vanishing,
                })
            }
        };
        let mut header = vec!["x"];
        if value.is_some() {
            header.push("value");
        }
        if split.is_some() {
            header.extend(["principal", "corrective"]);
        }
        let mut table = Table::new(&header);
        for (i, &x) in grid.points.iter().enumerate() {
            let mut row = vec![x];
            if let Some(v) = &value {
                row.push(v[i]);
            }
            if let Some(s) = &split {
                row.extend([s.principal[i], s.corrective[i]]);
            }
            table.rows.push(row);
        }
        let result = PrimitiveResult {
            eps: self.eps,
            x: grid.points.clone(),
            value,
            split,
        };
        Ok(Outcome::new(passed, &result).with_table(table))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_primitive() {
        let c: PrimitiveConfig = toml::from_str("u = \"cos(x)\"\n[grid]\nstart = 0\nend = 3\npoints = 7").unwrap();
        let out = c.run().unwrap();
        assert!(out.passed);
        for (x, v) in out.result["x"].as_array().unwrap().iter().zip(out.result["value"].as_array().unwrap()) {
            assert!((x.as_f64().unwrap().sin() - v.as_f64().unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn split_primitive() {
        let text = "[split]\nprincipal = \"cos(x)\"\ncorrective = \"exp(-x)\"";
        let c: PrimitiveConfig = toml::from_str(text).unwrap();
        let out = c.run().unwrap();
        assert!(out.passed, "{}", out.result["split"]["identity_residual"]);
        let tail = out.result["split"]["tail_integral"].as_f64().unwrap();
        assert!((tail - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nothing_to_integrate() {
        let c: PrimitiveConfig = toml::from_str("x0 = 1").unwrap();
        assert!(matches!(c.run(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn scalar_lse() {
        let text = "a = [[1.0]]\nforcing = [{ principal = \"sin(x)\", corrective = \"exp(-2*x)\" }]\n\
                    [real_grid]\nstart = -10\nend = 10\npoints = 101\n[half_grid]\nstart = 0\nend = 20\npoints = 101\n\
                    [grid]\nstart = 0\nend = 20\npoints = 101";
        let c: SolveConfig = toml::from_str(text).unwrap();
        let out = c.run().unwrap();
        assert!(out.passed, "{}", out.result["principal_residuals"]);
        assert!(out.csv.unwrap().starts_with("x,u_0,v_0,w_0"));
    }

    #[test]
    fn manufactured_forcing_is_solved_and_perturbation_is_not() {
        let text = "n = 1\nu = [\"sin(x) + eps*exp(-x^2)\"]\n\
                    [[terms]]\ni = 1\na = [[\"1\"]]\n[[terms]]\ni = 0\nomega = 1.5\na = [[\"2\"]]\n\
                    [schedule]\ncount = 6\n[grid]\nstart = 0\nend = 10\npoints = 101";
        let mut c: VerifyConfig = toml::from_str(text).unwrap();
        let out = c.run().unwrap();
        assert!(out.passed, "{}", out.result);
        assert_eq!(out.result["verdict"], "solution");
        c.forcing_perturbation = Some(vec!["eps*cos(x)".into()]);
        let out = c.run().unwrap();
        assert!(!out.passed);
        assert_eq!(out.result["verdict"], "not-solution");
    }
}
