//! Regularization `T ↦ (T∗ρ_ε)_ε` of finite-order distribution
//! representatives and the Taylor-remainder consistency net `f∗ρ_ε − f`.

pub mod mollifier;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::func::{Fun, SmoothFn};
use crate::jetcalc::Jet;
use crate::nets::{Domain, Grid, Net};
use crate::quadrature::select_panels;

pub use mollifier::{Mollifier, MollifierConfig, MollifierHeader, MomentReport};

pub const MAX_REP_ORDER: usize = 4;
pub const REFINE_TOL: f64 = 1e-10;
const MAX_PANEL_DOUBLINGS: usize = 6;
const PROBES: [f64; 3] = [0.0, 0.37, 1.9];

/// `T = Σ f_i^(i)` with bounded continuous `f_i`.
#[derive(Clone)]
pub struct DistributionRep {
    pub terms: Vec<(usize, Fun)>,
}

impl DistributionRep {
    pub fn new(terms: Vec<(usize, Fun)>) -> Result<Self> {
        if let Some((i, _)) = terms.iter().find(|(i, _)| *i > MAX_REP_ORDER) {
            return Err(Error::InvalidInput(format!(
                "derivative order {i} exceeds {MAX_REP_ORDER}"
            )));
        }
        Ok(Self { terms })
    }

    pub fn function(f: Fun) -> Self {
        Self {
            terms: vec![(0, f)],
        }
    }

    /// `T′`: every order raised by one.
    pub fn derivative(&self) -> Result<Self> {
        Self::new(self.terms.iter().map(|(i, f)| (i + 1, f.clone())).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(i, f)| (*i, crate::func::linear(vec![(c, f.clone())])))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn order(&self) -> usize {
        self.terms.iter().map(|(i, _)| *i).max().unwrap_or(0)
    }

    /// Every `f_i` finite and bounded by `bound` on `grid`.
    pub fn check_bounded(&self, grid: &Grid, bound: f64) -> Result<()> {
        for (i, f) in &self.terms {
            for &x in &grid.points {
                let v = f.value(x)?;
                if !v.is_finite() || v.abs() > bound {
                    return Err(Error::InvalidInput(format!(
                        "component of order {i} is {v} at x = {x}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `T∗ρ_ε`, with derivatives moved onto `ρ`.
pub struct Regularized {
    rep: DistributionRep,
    mollifier: Arc<Mollifier>,
    eps: f64,
    panels: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Regularized {
    pub fn panels(&self) -> usize {
        self.panels
    }

    fn eval_with(&self, x: f64, k: usize, panels: usize, ys: &[f64], ws: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; k + 1];
        let mut samples = vec![0.0; ys.len()];
        for (i, f) in &self.rep.terms {
            for (s, y) in samples.iter_mut().zip(ys) {
                *s = f.value(x - self.eps * y)?;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let table = self.mollifier.derivative_table(panels, i + j);
                let mut acc = 0.0;
                for ((s, w), r) in samples.iter().zip(ws).zip(table.iter()) {
                    acc += s * w * r;
                }
                *o += acc * self.eps.powi(-((i + j) as i32));
            }
        }
        Ok(out)
    }
}

impl SmoothFn for Regularized {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let derivs = self.eval_with(x, k, self.panels, &self.nodes, &self.weights)?;
        Ok(Jet { x, derivs })
    }
}

fn choose_panels<F>(mollifier: &Mollifier, mut probe: F) -> Result<usize>
where
    F: FnMut(usize, &[f64], &[f64]) -> Result<Vec<f64>>,
{
    select_panels(mollifier.config.panels, MAX_PANEL_DOUBLINGS, REFINE_TOL, |p| {
        let (ys, ws) = mollifier.nodes(p);
        probe(p, &ys, &ws)
    })
}

pub fn regularize(rep: &DistributionRep, mollifier: &Arc<Mollifier>, eps: f64) -> Result<Fun> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside (0, 1]")));
    }
    let mut reg = Regularized {
        rep: rep.clone(),
        mollifier: mollifier.clone(),
        eps,
        panels: 0,
        nodes: vec![],
        weights: vec![],
    };
    reg.panels = choose_panels(mollifier, |p, ys, ws| {
        let mut v = vec![];
        for x in PROBES {
            v.extend(reg.eval_with(x, 0, p, ys, ws)?);
        }
        Ok(v)
    })?;
    (reg.nodes, reg.weights) = mollifier.nodes(reg.panels);
    Ok(Arc::new(reg))
}

/// `f∗ρ_ε − f`, differentiated as `f^(j)∗ρ_ε − f^(j)`.
pub struct ConsistencyResidual {
    f: Fun,
    eps: f64,
    nodes: Vec<f64>,
    /// `w_n ρ(y_n)`.
    masses: Vec<f64>,
}

impl ConsistencyResidual {
    pub fn new(f: Fun, mollifier: &Mollifier, eps: f64) -> Result<Self> {
        let masses_for = |p: usize, ws: &[f64]| -> Vec<f64> {
            let rho = mollifier.derivative_table(p, 0);
            ws.iter().zip(rho.iter()).map(|(w, r)| w * r).collect()
        };
        let panels = choose_panels(mollifier, |p, ys, ws| {
            let masses = masses_for(p, ws);
            PROBES
                .iter()
                .map(|&x| convolve_jet(&*f, x, 0, eps, ys, &masses).map(|d| d[0]))
                .collect()
        })?;
        let (nodes, ws) = mollifier.nodes(panels);
        let masses = masses_for(panels, &ws);
        Ok(Self {
            f,
            eps,
            nodes,
            masses,
        })
    }
}

fn convolve_jet(
    f: &dyn SmoothFn,
    x: f64,
    k: usize,
    eps: f64,
    ys: &[f64],
    masses: &[f64],
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; k + 1];
    if k == 0 {
        for (y, m) in ys.iter().zip(masses) {
            out[0] += m * f.value(x - eps * y)?;
        }
    } else {
        for (y, m) in ys.iter().zip(masses) {
            let j = f.jet(x - eps * y, k)?;
            for (o, d) in out.iter_mut().zip(&j.derivs) {
                *o += m * d;
            }
        }
    }
    Ok(out)
}

impl SmoothFn for ConsistencyResidual {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let mut derivs = convolve_jet(&*self.f, x, k, self.eps, &self.nodes, &self.masses)?;
        let own = self.f.jet(x, k)?;
        for (d, o) in derivs.iter_mut().zip(&own.derivs) {
            *d -= o;
        }
        Ok(Jet { x, derivs })
    }
}

/// The net `ε ↦ f∗ρ_ε − f`.
pub fn consistency_residual(f: Fun, mollifier: Arc<Mollifier>) -> Net {
    Net::from_fn("consistency residual", Domain::Real, move |eps| {
        Ok(Arc::new(ConsistencyResidual::new(f.clone(), &mollifier, eps)?) as Fun)
    })
}

/// The net `ε ↦ T∗ρ_ε`.
pub fn regularization_net(rep: DistributionRep, mollifier: Arc<Mollifier>) -> Net {
    Net::from_fn("regularization", Domain::Real, move |eps| {
        regularize(&rep, &mollifier, eps)
    })
}
