//! Bundled analytic nets and decompositions with known behaviour.

use std::sync::Arc;

use crate::aaa::AAASpec;
use crate::embedding::Mollifier;
use crate::error::Result;
use crate::func::Fun;
use crate::jetcalc::{parse, parse_net_template, Expr};
use crate::ndds::{Kernel, MollifierKernel, NDDSystem, Term};
use crate::nets::{Domain, Net, Verdict};

pub struct AnalyticNet {
    pub name: &'static str,
    pub template: &'static str,
    pub verdict: Verdict,
    /// Exact order-0 slope when the seminorm is a power of ε.
    pub slope0: Option<f64>,
}

impl AnalyticNet {
    pub fn net(&self) -> Result<Net> {
        Ok(Net::from_template(parse_net_template(self.template)?, Domain::Real))
    }
}

/// Nets classified with certification ceiling 3.
pub const ANALYTIC_NETS: [AnalyticNet; 5] = [
    AnalyticNet {
        name: "scaled-sine",
        template: "eps^-2*sin(x)",
        verdict: Verdict::Moderate,
        slope0: Some(-2.0),
    },
    AnalyticNet {
        name: "fast-oscillation",
        template: "sin(x/eps)",
        verdict: Verdict::Moderate,
        slope0: Some(0.0),
    },
    AnalyticNet {
        name: "cubic-constant",
        template: "eps^3",
        verdict: Verdict::Negligible,
        slope0: Some(3.0),
    },
    AnalyticNet {
        name: "exponentially-small",
        template: "exp(-1/eps)*sin(x/eps)",
        verdict: Verdict::Negligible,
        slope0: None,
    },
    AnalyticNet {
        name: "exponentially-large",
        template: "exp(1/eps)",
        verdict: Verdict::Neither,
        slope0: None,
    },
];

pub const CERTIFICATION_CEILING: f64 = 3.0;

/// `(principal, corrective)` pairs.
pub const AAA_SPECS: [(&str, &str); 5] = [
    ("sin(x)", "exp(-x)"),
    ("sin(x) + eps*cos(sqrt(2)*x)", "eps*exp(-x)"),
    ("sin(x/eps)/eps", "exp(-x)"),
    ("cos(x)*cos(sqrt(2)*x)", "1/(1 + x^2)"),
    ("2 + sin(x)", "x*exp(-x)"),
];

pub fn aaa_specs() -> Result<Vec<AAASpec>> {
    AAA_SPECS.iter().map(|(g, h)| AAASpec::parse(g, h)).collect()
}

/// The classical almost automorphic, non almost periodic forcing.
pub const AA_FORCING: &str = "sin(1/(2 + cos(x) + cos(sqrt(2)*x)))";

fn matrix(rows: &[&[&str]]) -> Result<Vec<Vec<Expr>>> {
    rows.iter()
        .map(|r| r.iter().map(|e| parse(e)).collect())
        .collect()
}

fn zero_forcing(n: usize) -> Vec<Net> {
    let zero = Net::from_template(Expr::constant(0.0), Domain::Real);
    vec![zero; n]
}

/// `u′ + u` on one component.
pub fn scalar_lse_system() -> Result<NDDSystem> {
    NDDSystem::lse(&vec![vec![1.0]], zero_forcing(1))
}

/// `u(x + π)` on one component.
pub fn translation_system() -> Result<NDDSystem> {
    let term = Term {
        i: 0,
        omega: std::f64::consts::PI,
        a: matrix(&[&["1"]])?,
    };
    NDDSystem::new(1, vec![term], None, zero_forcing(1))
}

/// Two components with an undelayed zeroth-order term, a delayed first
/// derivative and the mollifier on the kernel diagonal.
pub fn neutral_pair_system(mollifier: Arc<Mollifier>) -> Result<NDDSystem> {
    let radius = mollifier.config.radius;
    let rho: Fun = Arc::new(MollifierKernel(mollifier));
    let terms = vec![
        Term {
            i: 0,
            omega: 0.0,
            a: matrix(&[&["2", "0"], &["0", "3"]])?,
        },
        Term {
            i: 1,
            omega: 0.5,
            a: matrix(&[&["1", "0.5"], &["0.25", "1"]])?,
        },
    ];
    let kernel = Kernel {
        entries: vec![vec![Some(rho.clone()), None], vec![None, Some(rho)]],
        radius,
    };
    NDDSystem::new(2, terms, Some(kernel), zero_forcing(2))
}

/// Every bundled system, unforced.
pub fn bundled_systems(mollifier: Arc<Mollifier>) -> Result<Vec<(&'static str, NDDSystem)>> {
    Ok(vec![
        ("scalar-lse", scalar_lse_system()?),
        ("translation", translation_system()?),
        ("neutral-pair", neutral_pair_system(mollifier)?),
    ])
}
