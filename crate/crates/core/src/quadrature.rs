//! Gauss–Legendre rules and composite quadrature with panel doubling.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule of order `n`, built once per process.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static RULES: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let mut rules = RULES
            .get_or_init(|| Mutex::new(HashMap::new()))
            .lock()
            .expect("rule cache poisoned");
        rules
            .entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Composite rule: `panels` equal panels on `[a, b]`, nodes in
    /// increasing order.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.len());
        let mut ws = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (t, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * h * t);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Settings for panel-doubling integration.
#[derive(Debug, Clone, Copy)]
pub struct Refinement {
    pub order: usize,
    pub initial_panels: usize,
    /// Finest panel width is `(b - a) / max_panels`.
    pub max_panels: usize,
    /// Accept a panel when its halves change the estimate by at most
    /// `rel_tol * max(1, |I_panel|)`.
    pub rel_tol: f64,
}

impl Default for Refinement {
    fn default() -> Self {
        Self {
            order: 16,
            initial_panels: 4,
            max_panels: 1 << 14,
            rel_tol: 1e-10,
        }
    }
}

/// Integrates a vector-valued integrand on `[a, b]` by adaptive bisection:
/// each of the initial panels is halved until the two-half estimate agrees
/// with the whole-panel estimate in every component.
pub fn integrate_vec<F>(
    f: F,
    a: f64,
    b: f64,
    dim: usize,
    cfg: &Refinement,
) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    if a == b {
        return Ok(vec![0.0; dim]);
    }
    let rule = GaussLegendre::cached(cfg.order);
    let panel = |lo: f64, hi: f64| -> Result<Vec<f64>> {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut acc = vec![0.0; dim];
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(mid + half * t)?;
            for (s, vi) in acc.iter_mut().zip(&v) {
                *s += half * w * vi;
            }
        }
        Ok(acc)
    };
    let initial = cfg.initial_panels.max(1);
    let max_depth = (cfg.max_panels / initial).max(1).ilog2();
    let h = (b - a) / initial as f64;
    let mut total = vec![0.0; dim];
    let mut stack = Vec::new();
    for p in (0..initial).rev() {
        let lo = a + p as f64 * h;
        let hi = if p + 1 == initial { b } else { lo + h };
        stack.push((lo, hi, panel(lo, hi)?, 0u32));
    }
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid)?;
        let right = panel(mid, hi)?;
        let converged = whole
            .iter()
            .zip(left.iter().zip(&right))
            .all(|(w, (l, r))| (l + r - w).abs() <= cfg.rel_tol * (l + r).abs().max(1.0));
        if converged {
            for (t, (l, r)) in total.iter_mut().zip(left.iter().zip(&right)) {
                *t += l + r;
            }
        } else if depth + 1 >= max_depth {
            return Err(Error::Quadrature(format!(
                "no convergence on [{lo}, {hi}] within [{a}, {b}] after {depth} bisections"
            )));
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if total.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite integral on [{a}, {b}]")));
    }
    Ok(total)
}

/// Doubles the panel count, starting at `initial`, until `probe` changes
/// by at most `rel_tol · max(1, |value|)` in every component. Returns the
/// coarser of the two agreeing panel counts.
pub fn select_panels<F>(initial: usize, max_doublings: usize, rel_tol: f64, mut probe: F) -> Result<usize>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    let mut panels = initial.max(1);
    let mut prev = probe(panels)?;
    for _ in 0..max_doublings {
        let next = probe(2 * panels)?;
        let converged = prev
            .iter()
            .zip(&next)
            .all(|(a, b)| (a - b).abs() <= rel_tol * b.abs().max(1.0));
        if converged {
            return Ok(panels);
        }
        panels *= 2;
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "fixed rule did not converge with {panels} panels"
    )))
}

pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &Refinement) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(integrate_vec(|x| Ok(vec![f(x)?]), a, b, 1, cfg)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let r = GaussLegendre::new(8);
        // exact for degree <= 15
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-15);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-15);
    }

    #[test]
    fn odd_rule_has_center_node() {
        let r = GaussLegendre::new(5);
        assert_eq!(r.nodes[2], 0.0);
        assert!((r.weights[2] - 128.0 / 225.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_integration_of_oscillatory_function() {
        let v = integrate(|x| Ok(x.cos()), 0.0, 30.0, &Refinement::default()).unwrap();
        assert!((v - 30f64.sin()).abs() < 1e-12);
    }
}
