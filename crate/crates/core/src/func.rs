//! Smooth functions of one real variable, as seen by every module: anything
//! that can produce a jet at a point.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Result;
use crate::jetcalc::{Expr, Jet, Taylor};

pub trait SmoothFn: Send + Sync {
    /// Derivatives `f^(j)(x)` for `j = 0..=k`.
    fn jet(&self, x: f64, k: usize) -> Result<Jet>;

    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.jet(x, 0)?.derivs[0])
    }
}

pub type Fun = Arc<dyn SmoothFn>;

impl SmoothFn for Expr {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        Ok(self.jet_unbounded(x, k)?)
    }

    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?)
    }
}

pub fn expr_fn(e: Expr) -> Fun {
    Arc::new(e)
}

/// `Σ c_i f_i`.
pub struct LinearCombination {
    pub terms: Vec<(f64, Fun)>,
}

impl SmoothFn for LinearCombination {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let mut derivs = vec![0.0; k + 1];
        for (c, f) in &self.terms {
            let j = f.jet(x, k)?;
            for (d, v) in derivs.iter_mut().zip(&j.derivs) {
                *d += c * v;
            }
        }
        Ok(Jet { x, derivs })
    }

    fn value(&self, x: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (c, f) in &self.terms {
            acc += c * f.value(x)?;
        }
        Ok(acc)
    }
}

pub fn linear(terms: Vec<(f64, Fun)>) -> Fun {
    Arc::new(LinearCombination { terms })
}

pub fn sum(a: Fun, b: Fun) -> Fun {
    linear(vec![(1.0, a), (1.0, b)])
}

pub fn difference(a: Fun, b: Fun) -> Fun {
    linear(vec![(1.0, a), (-1.0, b)])
}

/// Pointwise product, differentiated by the Leibniz rule.
pub struct Product(pub Fun, pub Fun);

impl SmoothFn for Product {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let a = self.0.jet(x, k)?.to_taylor();
        let b = self.1.jet(x, k)?.to_taylor();
        Ok(a.mul(&b).to_jet(x))
    }

    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.0.value(x)? * self.1.value(x)?)
    }
}

pub fn product(a: Fun, b: Fun) -> Fun {
    Arc::new(Product(a, b))
}

/// `x ↦ f(x + omega)`.
pub struct Shifted(pub Fun, pub f64);

impl SmoothFn for Shifted {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let mut j = self.0.jet(x + self.1, k)?;
        j.x = x;
        Ok(j)
    }
}

/// `x ↦ F(g(x))` with `F` given as an expression.
pub struct Composed {
    pub outer: Expr,
    pub inner: Fun,
}

impl SmoothFn for Composed {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let inner: Taylor = self.inner.jet(x, k)?.to_taylor();
        let t = self.outer.eval_taylor(&inner)?.check_finite(x)?;
        Ok(t.to_jet(x))
    }
}

pub struct Constant(pub f64);

impl SmoothFn for Constant {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let mut derivs = vec![0.0; k + 1];
        derivs[0] = self.0;
        Ok(Jet { x, derivs })
    }
}

/// Caches jets by evaluation point and order.
pub struct Memoized {
    inner: Fun,
    cache: Mutex<HashMap<(u64, usize), Jet>>,
}

impl SmoothFn for Memoized {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let key = (x.to_bits(), k);
        if let Some(j) = self.cache.lock().expect("memo poisoned").get(&key) {
            return Ok(j.clone());
        }
        let j = self.inner.jet(x, k)?;
        self.cache
            .lock()
            .expect("memo poisoned")
            .insert(key, j.clone());
        Ok(j)
    }
}

pub fn memoized(inner: Fun) -> Fun {
    Arc::new(Memoized {
        inner,
        cache: Mutex::new(HashMap::new()),
    })
}
