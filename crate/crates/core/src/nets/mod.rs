//! ε-parametrized nets of smooth functions and their asymptotic
//! classification.

mod classify;
mod seminorm;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{self, Fun};
use crate::jetcalc::Expr;

pub use classify::{
    classify, fit_order, lk_check, null_characterization, ols, LOG_FLOOR, Classification, KReport, LkCheck,
    NullReport, OrderFit, Thresholds, Verdict,
};
pub use seminorm::{derivative_sups, seminorm, SeminormTable};

/// Where a net's functions live: ℝ or the half-line J = [0, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Real,
    HalfLine,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Real => write!(f, "R"),
            Domain::HalfLine => write!(f, "J"),
        }
    }
}

/// Geometric schedule `ε_i = ε_0 r^i`, `i < N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub eps0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        Self {
            eps0: 0.5,
            ratio: 0.7,
            count: 12,
        }
    }
}

impl EpsSchedule {
    pub fn new(eps0: f64, ratio: f64, count: usize) -> Result<Self> {
        let s = Self { eps0, ratio, count };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0 <= 1.0) {
            return Err(Error::InvalidInput(format!("eps0 = {} not in (0, 1]", self.eps0)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidInput(format!("ratio = {} not in (0, 1)", self.ratio)));
        }
        if self.count < 6 {
            return Err(Error::InvalidInput(format!(
                "schedule needs at least 6 points, got {}",
                self.count
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.eps0 * self.ratio.powi(i as i32))
            .collect()
    }
}

/// Evaluation points for sup-norm estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub points: Vec<f64>,
}

impl Grid {
    pub fn uniform(a: f64, b: f64, n: usize) -> Self {
        assert!(n >= 2 && b > a);
        let h = (b - a) / (n - 1) as f64;
        Self {
            points: (0..n).map(|i| if i + 1 == n { b } else { a + i as f64 * h }).collect(),
        }
    }

    /// `[-50, 50]` on ℝ, `[0, 100]` on J, 4001 points.
    pub fn default_for(domain: Domain) -> Self {
        match domain {
            Domain::Real => Self::uniform(-50.0, 50.0, 4001),
            Domain::HalfLine => Self::uniform(0.0, 100.0, 4001),
        }
    }

    pub fn check_in(&self, domain: Domain) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidInput("empty grid".into()));
        }
        if domain == Domain::HalfLine && self.points.iter().any(|&x| x < 0.0) {
            return Err(Error::OutOfDomain("grid leaves J = [0, inf)".into()));
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.points.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.points.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

type Generator = dyn Fn(f64) -> Result<Fun> + Send + Sync;

/// A family `(u_ε)` of smooth functions.
#[derive(Clone)]
pub struct Net {
    generator: Arc<Generator>,
    pub domain: Domain,
    pub label: String,
}

impl fmt::Debug for Net {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Net")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Net {
    pub fn from_fn<F>(label: impl Into<String>, domain: Domain, f: F) -> Self
    where
        F: Fn(f64) -> Result<Fun> + Send + Sync + 'static,
    {
        Self {
            generator: Arc::new(f),
            domain,
            label: label.into(),
        }
    }

    /// Net whose member at ε is `template` with the parameter `eps` bound.
    pub fn from_template(template: Expr, domain: Domain) -> Self {
        let label = template.to_string();
        Self::from_fn(label, domain, move |eps| Ok(func::expr_fn(template.bind("eps", eps))))
    }

    pub fn constant_in_eps(f: Fun, label: impl Into<String>, domain: Domain) -> Self {
        Self::from_fn(label, domain, move |_| Ok(f.clone()))
    }

    pub fn at(&self, eps: f64) -> Result<Fun> {
        (self.generator)(eps)
    }

    fn combine(&self, other: &Net, label: String, op: fn(Fun, Fun) -> Fun) -> Net {
        let (a, b) = (self.clone(), other.clone());
        let domain = if self.domain == Domain::HalfLine || other.domain == Domain::HalfLine {
            Domain::HalfLine
        } else {
            Domain::Real
        };
        Net::from_fn(label, domain, move |eps| Ok(op(a.at(eps)?, b.at(eps)?)))
    }

    pub fn add(&self, other: &Net) -> Net {
        self.combine(other, format!("({}) + ({})", self.label, other.label), func::sum)
    }

    pub fn sub(&self, other: &Net) -> Net {
        self.combine(other, format!("({}) - ({})", self.label, other.label), func::difference)
    }

    pub fn mul(&self, other: &Net) -> Net {
        self.combine(other, format!("({}) * ({})", self.label, other.label), func::product)
    }

    pub fn scale(&self, c: f64) -> Net {
        let a = self.clone();
        Net::from_fn(format!("{c} * ({})", self.label), self.domain, move |eps| {
            Ok(func::linear(vec![(c, a.at(eps)?)]))
        })
    }

    pub fn with_domain(mut self, domain: Domain) -> Net {
        self.domain = domain;
        self
    }
}
