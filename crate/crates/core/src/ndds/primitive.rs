use std::sync::Arc;

use crate::aaa::AAASpec;
use crate::error::Result;
use crate::func::{expr_fn, Fun, SmoothFn};
use crate::jetcalc::Jet;
use crate::nets::Net;
use crate::quadrature::{integrate, Refinement};

/// `x ↦ c + ∫_{x0}^x u`.
struct Primitive {
    u: Fun,
    x0: f64,
    offset: f64,
    cfg: Refinement,
}

impl SmoothFn for Primitive {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let mut derivs = Vec::with_capacity(k + 1);
        derivs.push(self.offset + integrate(|t| self.u.value(t), self.x0, x, &self.cfg)?);
        if k > 0 {
            derivs.extend(self.u.jet(x, k - 1)?.derivs);
        }
        Ok(Jet { x, derivs })
    }
}

/// `U_ε(x) = ∫_{x0}^x u_ε(t) dt`.
pub fn primitive(u: &Net, x0: f64) -> Net {
    let inner = u.clone();
    Net::from_fn(format!("int[{}]", u.label), u.domain, move |eps| {
        Ok(Arc::new(Primitive {
            u: inner.at(eps)?,
            x0,
            offset: 0.0,
            cfg: Refinement::default(),
        }) as Fun)
    })
}

/// `−∫_x^{x+T} h`, the truncated tail primitive.
struct TailPrimitive {
    h: Fun,
    horizon: f64,
    cfg: Refinement,
}

impl SmoothFn for TailPrimitive {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let mut derivs = Vec::with_capacity(k + 1);
        derivs.push(-integrate(|t| self.h.value(t), x, x + self.horizon, &self.cfg)?);
        if k > 0 {
            let (a, b) = (self.h.jet(x, k - 1)?, self.h.jet(x + self.horizon, k - 1)?);
            derivs.extend(a.derivs.iter().zip(&b.derivs).map(|(p, q)| p - q));
        }
        Ok(Jet { x, derivs })
    }
}

/// Primitive of `g + h` split as `(∫_{x0}^x g + ∫_{x0}^∞ h) + (−∫_x^∞ h)`.
pub struct PrimitiveSplit {
    pub principal: Fun,
    pub corrective: Fun,
    /// `∫_{x0}^∞ h`, truncated at `x0 + horizon`.
    pub tail_integral: f64,
}

pub fn primitive_split(spec: &AAASpec, x0: f64, eps: f64, horizon: f64) -> Result<PrimitiveSplit> {
    let (g, h) = spec.at(eps);
    let (g, h) = (expr_fn(g), expr_fn(h));
    let cfg = Refinement::default();
    let tail_integral = integrate(|t| h.value(t), x0, x0 + horizon, &cfg)?;
    Ok(PrimitiveSplit {
        principal: Arc::new(Primitive {
            u: g,
            x0,
            offset: tail_integral,
            cfg,
        }),
        corrective: Arc::new(TailPrimitive { h, horizon, cfg }),
        tail_integral,
    })
}
