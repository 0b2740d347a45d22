//! Linear neutral difference-differential operators
//! `L_ω u = Σ_{i,j} A_ij (τ_{ω_j} u)^(i) + K∗u`: application, solution
//! verification on `J`, the constant-coefficient bounded-solution solver
//! and primitives.

mod lse;
mod primitive;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::func::{Fun, SmoothFn};
use crate::jetcalc::{Expr, Jet};
use crate::nets::{classify, Classification, Domain, EpsSchedule, Grid, Net, Thresholds, Verdict};
use crate::quadrature::{integrate, select_panels, GaussLegendre, Refinement};

pub use lse::{
    expm, solve_constant_lse, split_solve, substitution_residual, LseSolution, Matrix, Spectrum,
    SplitReport, SplitSolution, HORIZON_DECAY,
};
pub use primitive::{primitive, primitive_split, PrimitiveSplit};

pub const KERNEL_TAIL_TOLERANCE: f64 = 1e-8;
const CONV_ORDER: usize = 16;
const CONV_TOL: f64 = 1e-10;
const CONV_DOUBLINGS: usize = 6;
const PROBES: [f64; 3] = [0.0, 0.37, 1.9];

/// `A · (τ_ω u)^(i)` with an `n×n` coefficient matrix.
#[derive(Debug, Clone)]
pub struct Term {
    pub i: usize,
    pub omega: f64,
    pub a: Vec<Vec<Expr>>,
}

/// Convolution kernel supported on `[−R, R]`; `None` entries are zero.
#[derive(Clone)]
pub struct Kernel {
    pub entries: Vec<Vec<Option<Fun>>>,
    pub radius: f64,
}

#[derive(Clone)]
pub struct NDDSystem {
    pub n: usize,
    pub terms: Vec<Term>,
    pub kernel: Option<Kernel>,
    pub forcing: Vec<Net>,
    /// `∫_{|y|>R} |K|` summed over entries.
    pub kernel_tail_mass: f64,
}

impl NDDSystem {
    pub fn new(n: usize, terms: Vec<Term>, kernel: Option<Kernel>, forcing: Vec<Net>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("system dimension must be positive".into()));
        }
        for t in &terms {
            if !(t.omega >= 0.0) {
                return Err(Error::InvalidInput(format!("negative delay {}", t.omega)));
            }
            if t.a.len() != n || t.a.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidInput(format!("coefficient matrix is not {n}x{n}")));
            }
            if let Some(p) = t.a.iter().flatten().flat_map(|e| e.params()).next() {
                return Err(Error::InvalidInput(format!("unbound parameter '{p}' in coefficient")));
            }
        }
        if forcing.len() != n {
            return Err(Error::InvalidInput(format!(
                "forcing has {} components, expected {n}",
                forcing.len()
            )));
        }
        let mut kernel_tail_mass = 0.0;
        if let Some(k) = &kernel {
            if k.entries.len() != n || k.entries.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidInput(format!("kernel is not {n}x{n}")));
            }
            if !(k.radius > 0.0) {
                return Err(Error::InvalidInput("kernel radius must be positive".into()));
            }
            let cfg = Refinement::default();
            let span = 4.0 * k.radius;
            for f in k.entries.iter().flatten().flatten() {
                let abs = |y: f64| f.value(y).map(f64::abs);
                kernel_tail_mass += integrate(abs, k.radius, k.radius + span, &cfg)?;
                kernel_tail_mass += integrate(abs, -k.radius - span, -k.radius, &cfg)?;
            }
            if kernel_tail_mass >= KERNEL_TAIL_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "kernel tail mass {kernel_tail_mass:e} outside radius {} exceeds {KERNEL_TAIL_TOLERANCE:e}",
                    k.radius
                )));
            }
        }
        Ok(Self {
            n,
            terms,
            kernel,
            forcing,
            kernel_tail_mass,
        })
    }

    /// `u′ + A u = f` as a neutral system without delays or kernel.
    pub fn lse(a: &Matrix, forcing: Vec<Net>) -> Result<Self> {
        let n = a.len();
        let identity = (0..n)
            .map(|r| (0..n).map(|c| Expr::Const(if r == c { 1.0 } else { 0.0 })).collect())
            .collect();
        let coeffs = a
            .iter()
            .map(|row| row.iter().map(|v| Expr::Const(*v)).collect())
            .collect();
        Self::new(
            n,
            vec![
                Term { i: 1, omega: 0.0, a: identity },
                Term { i: 0, omega: 0.0, a: coeffs },
            ],
            None,
            forcing,
        )
    }

    /// Same operator with the forcing replaced; the kernel check is not repeated.
    pub fn with_forcing(&self, forcing: Vec<Net>) -> Result<Self> {
        if forcing.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "forcing has {} components, expected {}",
                forcing.len(),
                self.n
            )));
        }
        Ok(Self {
            forcing,
            ..self.clone()
        })
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.i).max().unwrap_or(0)
    }
}

/// Row `row` of `L_ω u` at a fixed ε.
struct OperatorImage {
    sys: Arc<NDDSystem>,
    u: Vec<Fun>,
    row: usize,
    half_line: bool,
    conv: Option<Convolution>,
}

struct Convolution {
    nodes: Vec<f64>,
    /// `w_n K_{row,c}(y_n)` per column.
    weighted: Vec<Option<Vec<f64>>>,
}

fn conv_rule(kernel: &Kernel, row: usize, panels: usize) -> Result<Convolution> {
    let (nodes, ws) = GaussLegendre::cached(CONV_ORDER).composite(-kernel.radius, kernel.radius, panels);
    let weighted = kernel.entries[row]
        .iter()
        .map(|e| {
            e.as_ref()
                .map(|k| {
                    nodes
                        .iter()
                        .zip(&ws)
                        .map(|(y, w)| Ok(w * k.value(*y)?))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()
        })
        .collect::<Result<_>>()?;
    Ok(Convolution { nodes, weighted })
}

impl OperatorImage {
    fn new(sys: Arc<NDDSystem>, u: Vec<Fun>, row: usize, half_line: bool) -> Result<Self> {
        let mut img = Self {
            sys,
            u,
            row,
            half_line,
            conv: None,
        };
        if let Some(kernel) = img.sys.kernel.clone() {
            let initial = (2.0 * kernel.radius).ceil() as usize;
            let panels = select_panels(initial, CONV_DOUBLINGS, CONV_TOL, |p| {
                let c = conv_rule(&kernel, row, p)?;
                PROBES
                    .iter()
                    .map(|&x| img.convolve(&c, x + kernel.radius, 0).map(|d| d[0]))
                    .collect()
            })?;
            img.conv = Some(conv_rule(&kernel, row, panels)?);
        }
        Ok(img)
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.half_line && x < 0.0 {
            return Err(Error::OutOfDomain(format!(
                "operator needs u at {x}, outside the half-line"
            )));
        }
        Ok(())
    }

    fn convolve(&self, c: &Convolution, x: f64, k: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; k + 1];
        for (col, w) in c.weighted.iter().enumerate() {
            let Some(w) = w else { continue };
            for (y, wk) in c.nodes.iter().zip(w) {
                self.check(x - y)?;
                let j = self.u[col].jet(x - y, k)?;
                for (o, d) in out.iter_mut().zip(&j.derivs) {
                    *o += wk * d;
                }
            }
        }
        Ok(out)
    }
}

impl SmoothFn for OperatorImage {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let mut out = Jet {
            x,
            derivs: vec![0.0; k + 1],
        };
        for t in &self.sys.terms {
            self.check(x + t.omega)?;
            for (col, a) in t.a[self.row].iter().enumerate() {
                if matches!(a, Expr::Const(c) if *c == 0.0) {
                    continue;
                }
                let uj = self.u[col].jet(x + t.omega, t.i + k)?;
                let shifted = Jet {
                    x,
                    derivs: uj.derivs[t.i..].to_vec(),
                };
                let term = SmoothFn::jet(a, x, k)?.mul(&shifted);
                for (o, d) in out.derivs.iter_mut().zip(&term.derivs) {
                    *o += d;
                }
            }
        }
        if let Some(c) = &self.conv {
            for (o, d) in out.derivs.iter_mut().zip(self.convolve(c, x, k)?) {
                *o += d;
            }
        }
        Ok(out)
    }
}

/// `L_ω u`, componentwise.
pub fn apply_operator(sys: &NDDSystem, u: &[Net]) -> Result<Vec<Net>> {
    if u.len() != sys.n {
        return Err(Error::InvalidInput(format!(
            "input has {} components, system has {}",
            u.len(),
            sys.n
        )));
    }
    let half_line = u.iter().any(|c| c.domain == Domain::HalfLine);
    let domain = if half_line { Domain::HalfLine } else { Domain::Real };
    let sys = Arc::new(sys.clone());
    Ok((0..sys.n)
        .map(|row| {
            let (sys, u) = (sys.clone(), u.to_vec());
            Net::from_fn(format!("L[u]_{row}"), domain, move |eps| {
                let fns = u.iter().map(|c| c.at(eps)).collect::<Result<Vec<_>>>()?;
                Ok(Arc::new(OperatorImage::new(sys.clone(), fns, row, half_line)?) as Fun)
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionVerdict {
    Solution,
    NotSolution,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSettings {
    pub grid: Grid,
    pub k_max: usize,
    pub thresholds: Thresholds,
}

/// Residuals below this are treated as quadrature noise.
pub const SOLUTION_ZERO_FLOOR: f64 = 1e-8;

impl Default for SolutionSettings {
    fn default() -> Self {
        Self {
            grid: Grid::uniform(0.0, 50.0, 1001),
            k_max: 1,
            thresholds: Thresholds {
                zero_floor: SOLUTION_ZERO_FLOOR,
                ..Thresholds::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub components: Vec<Classification>,
    pub verdict: SolutionVerdict,
}

/// Classifies `L_ω u − f` on `J`; a solution iff every component is negligible.
pub fn verify_solution(
    sys: &NDDSystem,
    u: &[Net],
    schedule: &EpsSchedule,
    settings: &SolutionSettings,
) -> Result<SolutionReport> {
    settings.grid.check_in(Domain::HalfLine)?;
    let image = apply_operator(sys, u)?;
    let mut components = Vec::with_capacity(sys.n);
    for (lu, f) in image.iter().zip(&sys.forcing) {
        let residual = lu.sub(f).with_domain(Domain::HalfLine);
        components.push(classify(&residual, settings.k_max, schedule, &settings.grid, &settings.thresholds)?);
    }
    let verdict = if components.iter().all(|c| c.verdict == Verdict::Negligible) {
        SolutionVerdict::Solution
    } else {
        SolutionVerdict::NotSolution
    };
    Ok(SolutionReport { components, verdict })
}

/// `ρ` at scale one as a smooth function, for use as a kernel.
pub struct MollifierKernel(pub Arc<crate::embedding::Mollifier>);

impl SmoothFn for MollifierKernel {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        Ok(Jet {
            x,
            derivs: (0..=k).map(|n| self.0.derivative(x, n)).collect(),
        })
    }

    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.0.value(x))
    }
}
