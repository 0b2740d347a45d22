//! Asymptotically almost automorphic functions: vanishing-at-infinity
//! checks, Bochner translation probes, principal/corrective decompositions
//! and Faà di Bruno composition with tempered functions.

mod bochner;
mod composition;
mod vanishing;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::func::{expr_fn, Fun, SmoothFn};
use crate::jetcalc::{parse_net_template, Expr};
use crate::nets::{classify, Classification, Domain, EpsSchedule, Grid, Net, Thresholds};

pub use bochner::{bochner_probe, BochnerProbe, ProbeConfig, SequenceSpec};
pub use composition::{
    certify, compose, faa_di_bruno, Composition, CompositionReport, TemperedSpec,
    MAX_GROWTH_EXPONENT,
};
pub use vanishing::{check_vanishing, TailWindows, VanishingReport};

pub const PART_TOLERANCE: f64 = 1e-6;
pub const SUM_TOLERANCE: f64 = 1e-12;

pub(crate) fn serialize_display<S: Serializer, T: std::fmt::Display>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// `f = g + h` on `J` with `g` almost automorphic on `ℝ` and `h` vanishing
/// at `+∞`. Both may depend on the parameter `eps`.
#[derive(Debug, Clone, Serialize)]
pub struct AAASpec {
    #[serde(serialize_with = "serialize_display")]
    pub principal: Expr,
    #[serde(serialize_with = "serialize_display")]
    pub corrective: Expr,
}

impl AAASpec {
    pub fn new(principal: Expr, corrective: Expr) -> Result<Self> {
        for e in [&principal, &corrective] {
            if let Some(p) = e.params().into_iter().find(|p| p != "eps") {
                return Err(Error::InvalidInput(format!("unbound parameter '{p}'")));
            }
        }
        Ok(Self {
            principal,
            corrective,
        })
    }

    pub fn parse(principal: &str, corrective: &str) -> Result<Self> {
        Self::new(parse_net_template(principal)?, parse_net_template(corrective)?)
    }

    pub fn sum(&self) -> Expr {
        Expr::Add(
            Box::new(self.principal.clone()),
            Box::new(self.corrective.clone()),
        )
    }

    /// The parts with `eps` bound.
    pub fn at(&self, eps: f64) -> (Expr, Expr) {
        (self.principal.bind("eps", eps), self.corrective.bind("eps", eps))
    }

    pub fn net(&self) -> Net {
        Net::from_template(self.sum(), Domain::HalfLine)
    }

    pub fn principal_net(&self) -> Net {
        Net::from_template(self.principal.clone(), Domain::Real)
    }

    pub fn corrective_net(&self) -> Net {
        Net::from_template(self.corrective.clone(), Domain::HalfLine)
    }

    /// `(g + h)·a = g·a + h·a` for an almost automorphic `a`.
    pub fn times_aa(&self, a: &Expr) -> Result<Self> {
        let mul = |e: &Expr| Expr::Mul(Box::new(e.clone()), Box::new(a.clone()));
        Self::new(mul(&self.principal), mul(&self.corrective))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AaaSettings {
    pub real_grid: Grid,
    pub half_grid: Grid,
    pub k_max: usize,
    /// Highest derivative checked for vanishing.
    pub j_max: usize,
    pub thresholds: Thresholds,
    pub probe: ProbeConfig,
    pub tails: TailWindows,
}

impl Default for AaaSettings {
    fn default() -> Self {
        Self {
            real_grid: Grid::default_for(Domain::Real),
            half_grid: Grid::default_for(Domain::HalfLine),
            k_max: 2,
            j_max: 2,
            thresholds: Thresholds::default(),
            probe: ProbeConfig::default(),
            tails: TailWindows::default(),
        }
    }
}

/// Sequence-length growth factor and number of retries when no cluster is found.
pub const PROBE_GROWTH: usize = 10;
pub const PROBE_RETRIES: usize = 2;

/// Runs the probe, lengthening an arithmetic sequence when it is too short
/// to contain a cluster.
pub fn probe_lengthening(g: &dyn SmoothFn, cfg: &ProbeConfig) -> Result<BochnerProbe> {
    let mut cfg = cfg.clone();
    let mut retries = 0;
    loop {
        match bochner_probe(g, &cfg) {
            Err(Error::NoConvergentSubsequence(_)) if retries < PROBE_RETRIES => {
                let SequenceSpec::Arithmetic { step, count } = cfg.sequence else {
                    return bochner_probe(g, &cfg);
                };
                cfg.sequence = SequenceSpec::Arithmetic {
                    step,
                    count: count * PROBE_GROWTH,
                };
                retries += 1;
            }
            other => return other,
        }
    }
}

/// Per-ε evidence for one principal/corrective pair.
#[derive(Debug, Clone, Serialize)]
pub struct PartDiagnostics {
    pub eps: f64,
    pub probe_residual: Option<f64>,
    pub probe_passed: bool,
    pub probe_error: Option<String>,
    pub vanishing: VanishingReport,
}

impl PartDiagnostics {
    pub fn measure(eps: f64, principal: &Fun, corrective: &Fun, s: &AaaSettings) -> Result<Self> {
        let (probe_residual, probe_passed, probe_error) = match probe_lengthening(&**principal, &s.probe) {
            Ok(p) => (Some(p.residual), p.passed, None),
            Err(e @ Error::NoConvergentSubsequence(_)) => (None, false, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        Ok(Self {
            eps,
            probe_residual,
            probe_passed,
            probe_error,
            vanishing: check_vanishing(&**corrective, s.j_max, &s.tails)?,
        })
    }

    pub fn passed(&self) -> bool {
        self.probe_passed && self.vanishing.vanishing
    }
}

pub struct Decomposition {
    pub principal: Net,
    pub corrective: Net,
    pub report: DecompositionReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub spec: AAASpec,
    pub principal: Classification,
    pub corrective: Classification,
    pub parts: Vec<PartDiagnostics>,
    /// `sup_J |g_ε + h_ε − u_ε|` over the schedule.
    pub roundtrip_residual: f64,
    pub passed: bool,
}

/// ε-wise split of the net generated by `spec`, with probes on the
/// principal part and tail checks on the corrective part.
pub fn decompose_net(
    spec: &AAASpec,
    schedule: &EpsSchedule,
    settings: &AaaSettings,
) -> Result<Decomposition> {
    let whole = spec.net();
    let mut parts = Vec::new();
    let mut roundtrip_residual = 0.0f64;
    for eps in schedule.values() {
        let (g, h) = spec.at(eps);
        let (g, h) = (expr_fn(g), expr_fn(h));
        let u = whole.at(eps)?;
        for &x in &settings.half_grid.points {
            let d = g.value(x)? + h.value(x)? - u.value(x)?;
            roundtrip_residual = roundtrip_residual.max(d.abs());
        }
        parts.push(PartDiagnostics::measure(eps, &g, &h, settings)?);
    }
    let principal = spec.principal_net();
    let corrective = spec.corrective_net();
    let p_class = classify(&principal, settings.k_max, schedule, &settings.real_grid, &settings.thresholds)?;
    let c_class = classify(&corrective, settings.k_max, schedule, &settings.half_grid, &settings.thresholds)?;
    let passed = p_class.is_moderate()
        && parts.iter().all(|p| p.passed())
        && roundtrip_residual <= SUM_TOLERANCE;
    Ok(Decomposition {
        principal,
        corrective,
        report: DecompositionReport {
            spec: spec.clone(),
            principal: p_class,
            corrective: c_class,
            parts,
            roundtrip_residual,
            passed,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    /// `sup_J |f_1 − f_2|`.
    pub sum_difference: f64,
    /// `sup_ℝ |g_1 − g_2|`.
    pub principal_difference: f64,
    /// `sup_J |h_1 − h_2|`.
    pub corrective_difference: f64,
    pub probes: Vec<PartDiagnostics>,
    pub violation: Option<String>,
}

fn sup_difference(a: &Expr, b: &Expr, grid: &Grid) -> Result<f64> {
    let mut m = 0.0f64;
    for &x in &grid.points {
        let d = (a.eval(x)? - b.eval(x)?).abs();
        m = m.max(if d.is_nan() { f64::INFINITY } else { d });
    }
    Ok(m)
}

/// Compares two decompositions of the same sum without raising on a violation.
pub fn uniqueness_report(
    spec1: &AAASpec,
    spec2: &AAASpec,
    eps: f64,
    settings: &AaaSettings,
) -> Result<UniquenessReport> {
    let (g1, h1) = spec1.at(eps);
    let (g2, h2) = spec2.at(eps);
    let f1 = Expr::Add(Box::new(g1.clone()), Box::new(h1.clone()));
    let f2 = Expr::Add(Box::new(g2.clone()), Box::new(h2.clone()));
    let sum_difference = sup_difference(&f1, &f2, &settings.half_grid)?;
    if sum_difference > SUM_TOLERANCE {
        return Err(Error::Precondition(format!(
            "the decompositions have different sums (sup difference {sum_difference:e})"
        )));
    }
    let principal_difference = sup_difference(&g1, &g2, &settings.real_grid)?;
    let corrective_difference = sup_difference(&h1, &h2, &settings.half_grid)?;
    let probes = vec![
        PartDiagnostics::measure(eps, &expr_fn(g1), &expr_fn(h1), settings)?,
        PartDiagnostics::measure(eps, &expr_fn(g2), &expr_fn(h2), settings)?,
    ];
    let mut violation = None;
    for (i, p) in probes.iter().enumerate() {
        if let (false, Some(r)) = (p.probe_passed, p.probe_residual) {
            violation.get_or_insert(format!(
                "principal part of decomposition {} fails the Bochner probe: return-limit residual {r:e}",
                i + 1
            ));
        }
    }
    if principal_difference >= PART_TOLERANCE || corrective_difference >= PART_TOLERANCE {
        violation.get_or_insert(format!(
            "equal sums with different parts: principal {principal_difference:e}, corrective {corrective_difference:e}"
        ));
    }
    Ok(UniquenessReport {
        sum_difference,
        principal_difference,
        corrective_difference,
        probes,
        violation,
    })
}

/// Raises `UniquenessViolation` when two decompositions of one sum differ.
pub fn decompose_uniqueness_test(
    spec1: &AAASpec,
    spec2: &AAASpec,
    eps: f64,
    settings: &AaaSettings,
) -> Result<UniquenessReport> {
    let report = uniqueness_report(spec1, spec2, eps, settings)?;
    match &report.violation {
        Some(v) => Err(Error::UniquenessViolation(v.clone())),
        None => Ok(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::parse;

    fn spec(g: &str, h: &str) -> AAASpec {
        AAASpec::parse(g, h).unwrap()
    }

    fn quick() -> AaaSettings {
        AaaSettings {
            real_grid: Grid::uniform(-20.0, 20.0, 401),
            half_grid: Grid::uniform(0.0, 40.0, 401),
            ..AaaSettings::default()
        }
    }

    #[test]
    fn identical_and_rearranged_parts_agree() {
        let s = quick();
        let r = decompose_uniqueness_test(&spec("sin(x)", "exp(-x)"), &spec("sin(x)", "exp(-x)"), 0.5, &s)
            .unwrap();
        assert_eq!(r.principal_difference, 0.0);
        let r = decompose_uniqueness_test(&spec("sin(x) + 0", "exp(-x)"), &spec("sin(x)", "exp(-x) + 0"), 0.5, &s)
            .unwrap();
        assert_eq!(r.principal_difference + r.corrective_difference, 0.0);
    }

    #[test]
    fn corrupted_principal_is_a_violation() {
        let err = decompose_uniqueness_test(
            &spec("sin(x)", "exp(-x)"),
            &spec("sin(x) + exp(-x)", "0"),
            0.5,
            &quick(),
        )
        .unwrap_err();
        match err {
            Error::UniquenessViolation(m) => assert!(m.contains("Bochner")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn different_sums_are_rejected() {
        assert!(matches!(
            uniqueness_report(&spec("sin(x)", "exp(-x)"), &spec("cos(x)", "exp(-x)"), 0.5, &quick()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn structure_directed_split() {
        let schedule = EpsSchedule::default();
        let d = decompose_net(&spec("sin(x)", "eps*exp(-x)"), &schedule, &quick()).unwrap();
        assert!(d.report.passed);
        assert_eq!(d.report.roundtrip_residual, 0.0);
        assert_eq!(d.report.principal.verdict, crate::nets::Verdict::Moderate);
        let s1 = AaaSettings {
            thresholds: Thresholds::default().with_ceiling(1.0),
            ..quick()
        };
        let d = decompose_net(&spec("sin(x)", "eps*exp(-x)"), &schedule, &s1).unwrap();
        assert_eq!(d.report.corrective.verdict, crate::nets::Verdict::Negligible);
    }

    #[test]
    fn scaled_oscillation_principal() {
        let d = decompose_net(&spec("sin(x/eps)/eps", "exp(-x)"), &EpsSchedule::default(), &quick())
            .unwrap();
        assert!((d.report.principal.slope(0).unwrap() + 1.0).abs() < 0.1);
        assert!(d.report.parts.iter().all(|p| p.vanishing.vanishing));
    }

    #[test]
    fn product_with_aa_factor_keeps_vanishing_corrective() {
        let s = spec("sin(x)", "exp(-x)").times_aa(&parse("cos(2*x)").unwrap()).unwrap();
        let d = decompose_net(&s, &EpsSchedule::default(), &quick()).unwrap();
        assert!(d.report.passed);
    }

    #[test]
    fn foreign_parameters_rejected() {
        assert!(AAASpec::parse("a*sin(x)", "0").is_err());
    }
}
