//! Moment-vanishing mollifier built from its Fourier profile.
//!
//! The profile is the flat-top Gaussian
//! `ρ̂(ξ) = e^{-ξ²/2} Σ_{j≤J} (ξ²/2)^j / j!` with `J = ⌊K/2⌋`, so
//! `ρ̂ - 1 = O(ξ^{2J+2})` at the origin and the moments `1..=K` of `ρ`
//! vanish. `ρ` and its derivatives are recovered by quadrature of the
//! inverse transform, never from a closed form.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierConfig {
    /// Number of vanishing moments required.
    pub moments: usize,
    /// Tabulation radius `R`.
    pub radius: f64,
    /// Spacing of the exported uniform table.
    pub spacing: f64,
    /// Gauss–Legendre order used for every panel.
    pub order: usize,
    /// Panels on `[-R, R]` for the base rule.
    pub panels: usize,
    /// Frequency cutoff of the inverse transform.
    pub freq_cutoff: f64,
    pub freq_panels: usize,
}

impl Default for MollifierConfig {
    fn default() -> Self {
        Self {
            moments: 8,
            radius: 12.0,
            spacing: 0.05,
            order: 16,
            panels: 24,
            freq_cutoff: 16.0,
            freq_panels: 64,
        }
    }
}

impl MollifierConfig {
    pub fn with_moments(moments: usize) -> Self {
        Self {
            moments,
            ..Self::default()
        }
    }
}

pub const MU0_TOLERANCE: f64 = 1e-8;
pub const MOMENT_TOLERANCE: f64 = 1e-6;
/// `|ρ|` must be below this outside the tabulation radius.
pub const TAIL_BOUND: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub mu0: f64,
    /// `μ_k` for `k = 1..=K`.
    pub residuals: Vec<f64>,
    pub tail_max: f64,
}

/// Derivative table keyed by `(panels, order)`.
type Table = Arc<Vec<f64>>;

#[derive(Debug)]
pub struct Mollifier {
    pub config: MollifierConfig,
    pub moments: MomentReport,
    freq_nodes: Vec<f64>,
    freq_weights: Vec<f64>,
    rule: GaussLegendre,
    cache: Mutex<HashMap<(usize, usize), Table>>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl Mollifier {
    /// Builds the mollifier and verifies its moment residuals.
    pub fn build(config: MollifierConfig) -> Result<Self> {
        if config.radius <= 0.0 || config.panels == 0 || config.spacing <= 0.0 {
            return Err(Error::InvalidInput("bad mollifier grid parameters".into()));
        }
        let rule = GaussLegendre::new(config.order);
        let (freq_nodes, mut freq_weights) =
            rule.composite(0.0, config.freq_cutoff, config.freq_panels);
        let half_k = config.moments / 2;
        for (w, xi) in freq_weights.iter_mut().zip(&freq_nodes) {
            *w *= profile(*xi, half_k) / std::f64::consts::PI;
        }
        let mut m = Self {
            config,
            moments: MomentReport {
                mu0: 0.0,
                residuals: vec![],
                tail_max: 0.0,
            },
            freq_nodes,
            freq_weights,
            rule,
            cache: Mutex::new(HashMap::new()),
        };
        m.moments = m.compute_moments();
        if m.moments.tail_max >= TAIL_BOUND {
            return Err(Error::InvalidInput(format!(
                "radius {} too small: |rho| reaches {:e} outside",
                config.radius, m.moments.tail_max
            )));
        }
        if (m.moments.mu0 - 1.0).abs() >= MU0_TOLERANCE {
            return Err(Error::MomentFailure {
                k: 0,
                residual: (m.moments.mu0 - 1.0).abs(),
                tolerance: MU0_TOLERANCE,
            });
        }
        for (i, r) in m.moments.residuals.iter().enumerate() {
            if r.abs() >= MOMENT_TOLERANCE {
                return Err(Error::MomentFailure {
                    k: i + 1,
                    residual: r.abs(),
                    tolerance: MOMENT_TOLERANCE,
                });
            }
        }
        Ok(m)
    }

    /// Fourier profile `ρ̂(ξ)`.
    pub fn profile(&self, xi: f64) -> f64 {
        profile(xi, self.config.moments / 2)
    }

    /// `ρ^(n)(x)` by quadrature of `(1/π) ∫_0^Ξ ρ̂(ξ) ξ^n cos(xξ + nπ/2) dξ`.
    pub fn derivative(&self, x: f64, n: usize) -> f64 {
        let phase = n as f64 * std::f64::consts::FRAC_PI_2;
        let mut acc = 0.0;
        for (xi, w) in self.freq_nodes.iter().zip(&self.freq_weights) {
            acc += w * xi.powi(n as i32) * (x * xi + phase).cos();
        }
        acc
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// Quadrature rule on `[-R, R]` with `panels` panels.
    pub fn nodes(&self, panels: usize) -> (Vec<f64>, Vec<f64>) {
        self.rule.composite(-self.config.radius, self.config.radius, panels)
    }

    /// `ρ^(n)` at the nodes of [`Mollifier::nodes`], cached.
    pub fn derivative_table(&self, panels: usize, n: usize) -> Arc<Vec<f64>> {
        let mut cache = self.cache.lock().expect("mollifier cache poisoned");
        cache
            .entry((panels, n))
            .or_insert_with(|| {
                let (ys, _) = self.nodes(panels);
                Arc::new(ys.iter().map(|&y| self.derivative(y, n)).collect())
            })
            .clone()
    }

    fn compute_moments(&self) -> MomentReport {
        let panels = self.config.panels;
        let (ys, ws) = self.nodes(panels);
        let rho = self.derivative_table(panels, 0);
        let mut mus = vec![0.0; self.config.moments + 1];
        for ((y, w), r) in ys.iter().zip(&ws).zip(rho.iter()) {
            let mut p = w * r;
            for mu in mus.iter_mut() {
                *mu += p;
                p *= y;
            }
        }
        let r = self.config.radius;
        let tail_max = (0..40)
            .map(|i| self.value(r + 0.25 * i as f64).abs())
            .fold(0.0, f64::max);
        MomentReport {
            mu0: mus[0],
            residuals: mus[1..].to_vec(),
            tail_max,
        }
    }

    /// Uniform table `(x, ρ(x))` on `[-R, R]`.
    pub fn table(&self) -> Vec<(f64, f64)> {
        let n = (2.0 * self.config.radius / self.config.spacing).round() as usize;
        (0..=n)
            .map(|i| {
                let x = -self.config.radius + i as f64 * self.config.spacing;
                (x, self.value(x))
            })
            .collect()
    }

    pub fn header(&self) -> MollifierHeader {
        MollifierHeader {
            config: self.config,
            moments: self.moments.clone(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["x", "rho"]).map_err(err)?;
        for (x, r) in self.table() {
            w.write_record([x.to_string(), r.to_string()]).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf-8"))
    }

    /// Rebuilds from an exported header and checks the table against it.
    pub fn import(header: &MollifierHeader, csv_text: &str) -> Result<Self> {
        let m = Self::build(header.config)?;
        let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
        let expected = m.table();
        let mut rows = 0;
        for (rec, (x, r)) in rdr.records().zip(&expected) {
            let rec = rec.map_err(|e| Error::InvalidInput(e.to_string()))?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("bad mollifier table entry: {e}")))
            };
            let (xi, ri) = (parse(&rec[0])?, parse(&rec[1])?);
            if xi != *x || ri != *r {
                return Err(Error::InvalidInput(format!(
                    "table row {rows} disagrees with rebuilt mollifier"
                )));
            }
            rows += 1;
        }
        if rows != expected.len() {
            return Err(Error::InvalidInput(format!(
                "table has {rows} rows, expected {}",
                expected.len()
            )));
        }
        Ok(m)
    }
}

fn profile(xi: f64, half_k: usize) -> f64 {
    let t = 0.5 * xi * xi;
    let mut s = 0.0;
    for j in 0..=half_k {
        s += t.powi(j as i32) / factorial(j);
    }
    (-t).exp() * s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MollifierHeader {
    pub config: MollifierConfig,
    pub moments: MomentReport,
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form of the same mollifier: `φ(x) Σ_j (-1)^j He_{2j}(x) / (2^j j!)`.
    fn hermite_oracle(x: f64, half_k: usize) -> f64 {
        let mut he = vec![1.0, x];
        for n in 2..=2 * half_k {
            let next = x * he[n - 1] - (n - 1) as f64 * he[n - 2];
            he.push(next);
        }
        let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = 0.0;
        for j in 0..=half_k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * he[2 * j] / (2f64.powi(j as i32) * factorial(j));
        }
        phi * s
    }

    #[test]
    fn spectral_values_match_closed_form() {
        let m = Mollifier::build(MollifierConfig::default()).unwrap();
        for x in [0.0, 0.3, 1.0, 2.5, 4.0, 7.0] {
            assert!((m.value(x) - hermite_oracle(x, 4)).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn moments_within_tolerance() {
        let m = Mollifier::build(MollifierConfig::default()).unwrap();
        assert!((m.moments.mu0 - 1.0).abs() < 1e-8);
        assert!(m.moments.residuals[0].abs() < 1e-12);
        assert!(m.moments.residuals[5].abs() < 1e-6);
        assert!(m.moments.residuals.iter().all(|r| r.abs() < 1e-6));
        assert_eq!(m.moments.residuals.len(), 8);
    }

    #[test]
    fn even_and_real() {
        let m = Mollifier::build(MollifierConfig::default()).unwrap();
        for x in [0.2, 1.7, 3.3] {
            assert_eq!(m.value(x), m.value(-x));
        }
        assert_eq!(m.profile(0.0), 1.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = Mollifier::build(MollifierConfig::default()).unwrap();
        let h = 1e-3;
        for x in [0.4, 1.5, 3.0] {
            let fd = (m.value(x - 2.0 * h) - 8.0 * m.value(x - h) + 8.0 * m.value(x + h)
                - m.value(x + 2.0 * h))
                / (12.0 * h);
            assert!((m.derivative(x, 1) - fd).abs() < 1e-9);
        }
    }

    #[test]
    fn too_small_radius_is_rejected() {
        let cfg = MollifierConfig {
            radius: 4.0,
            panels: 8,
            ..MollifierConfig::default()
        };
        assert!(Mollifier::build(cfg).is_err());
    }

    #[test]
    fn csv_export_import_round_trip() {
        let cfg = MollifierConfig {
            spacing: 0.5,
            ..MollifierConfig::with_moments(4)
        };
        let m = Mollifier::build(cfg).unwrap();
        let csv = m.to_csv().unwrap();
        let back = Mollifier::import(&m.header(), &csv).unwrap();
        assert_eq!(back.moments.mu0, m.moments.mu0);
        let tampered = csv.replacen("0.", "1.", 1);
        assert!(Mollifier::import(&m.header(), &tampered).is_err());
    }
}
