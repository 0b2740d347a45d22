//! Truncated Taylor arithmetic.
//!
//! A [`Taylor`] stores normalized coefficients `c[j] = f^(j)(x0) / j!`; a
//! [`Jet`] stores the raw derivatives `d[j] = f^(j)(x0)`. All arithmetic is
//! carried out on the normalized form, where products are plain Cauchy
//! convolutions.

use serde::{Deserialize, Serialize};

use crate::error::EvalError;

/// Normalized truncated power series around an implicit base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor {
    pub coeffs: Vec<f64>,
}

impl Taylor {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The identity function expanded at `x`.
    pub fn variable(x: f64, order: usize) -> Self {
        let mut t = Self::constant(x, order);
        if order >= 1 {
            t.coeffs[1] = 1.0;
        }
        t
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut t = self.clone();
        t.coeffs[0] += c;
        t
    }

    /// Cauchy product (Leibniz rule in normalized form).
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..=k {
                acc += self.coeffs[i] * other.coeffs[k - i];
            }
            *slot = acc;
        }
        Self { coeffs: out }
    }

    pub fn div(&self, other: &Self, x: f64) -> Result<Self, EvalError> {
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(EvalError::DivisionByZero { x });
        }
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for i in 1..=k {
                acc -= other.coeffs[i] * q[k - i];
            }
            q[k] = acc / b0;
        }
        Ok(Self { coeffs: q })
    }

    pub fn recip(&self, x: f64) -> Result<Self, EvalError> {
        Self::constant(1.0, self.order()).div(self, x)
    }

    pub fn powi(&self, n: i32, x: f64) -> Result<Self, EvalError> {
        if n < 0 {
            return self.powi(-n, x)?.recip(x);
        }
        let mut result = Self::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    pub fn exp(&self) -> Self {
        let n = self.coeffs.len();
        let mut e = vec![0.0; n];
        e[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += i as f64 * self.coeffs[i] * e[k - i];
            }
            e[k] = acc / k as f64;
        }
        Self { coeffs: e }
    }

    /// Simultaneous sine and cosine series.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.coeffs.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        let (s0, c0) = self.coeffs[0].sin_cos();
        s[0] = s0;
        c[0] = c0;
        for k in 1..n {
            let mut acc_s = 0.0;
            let mut acc_c = 0.0;
            for i in 1..=k {
                let w = i as f64 * self.coeffs[i];
                acc_s += w * c[k - i];
                acc_c += w * s[k - i];
            }
            s[k] = acc_s / k as f64;
            c[k] = -acc_c / k as f64;
        }
        (Self { coeffs: s }, Self { coeffs: c })
    }

    /// Series composition `outer ∘ self`, where `outer` is expanded around
    /// `self.value()`. Horner evaluation in the shifted variable.
    pub fn compose(outer: &Self, inner: &Self) -> Self {
        let n = inner.coeffs.len().min(outer.coeffs.len());
        let mut shifted = inner.coeffs[..n].to_vec();
        shifted[0] = 0.0;
        let shifted = Self { coeffs: shifted };
        let mut acc = Self::constant(outer.coeffs[n - 1], n - 1);
        for m in (0..n - 1).rev() {
            acc = acc.mul(&shifted).add_const(outer.coeffs[m]);
        }
        acc
    }

    pub fn to_jet(&self, x: f64) -> Jet {
        let mut derivs = Vec::with_capacity(self.coeffs.len());
        let mut fact = 1.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            derivs.push(c * fact);
        }
        Jet { x, derivs }
    }

    pub fn check_finite(self, x: f64) -> Result<Self, EvalError> {
        if self.coeffs.iter().all(|c| c.is_finite()) {
            Ok(self)
        } else {
            Err(EvalError::NonFinite { x })
        }
    }
}

/// Derivatives `d[0..=k]` of a function at a base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub x: f64,
    pub derivs: Vec<f64>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.derivs[0]
    }

    pub fn to_taylor(&self) -> Taylor {
        let mut coeffs = Vec::with_capacity(self.derivs.len());
        let mut fact = 1.0;
        for (j, d) in self.derivs.iter().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            coeffs.push(d / fact);
        }
        Taylor { coeffs }
    }

    /// Leibniz product of two jets at the same point.
    pub fn mul(&self, other: &Jet) -> Jet {
        self.to_taylor().mul(&other.to_taylor()).to_jet(self.x)
    }

    /// Jet of `outer ∘ inner`, with `outer` taken at `inner.value()`.
    pub fn compose(outer: &Jet, inner: &Jet) -> Jet {
        Taylor::compose(&outer.to_taylor(), &inner.to_taylor()).to_jet(inner.x)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        Jet {
            x: self.x,
            derivs: self.derivs[..=order.min(self.order())].to_vec(),
        }
    }
}
