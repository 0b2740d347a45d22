use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::SmoothFn;

/// Translation sequence `s_m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSpec {
    /// `s_m = step · m`, `m = 1..=count`.
    Arithmetic { step: f64, count: usize },
    Explicit { values: Vec<f64> },
}

impl Default for SequenceSpec {
    fn default() -> Self {
        SequenceSpec::Arithmetic {
            step: 2.0 * std::f64::consts::PI,
            count: 200,
        }
    }
}

impl SequenceSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SequenceSpec::Arithmetic { step, count } => {
                (1..=*count).map(|m| step * m as f64).collect()
            }
            SequenceSpec::Explicit { values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub sequence: SequenceSpec,
    /// Probe grid `X`.
    pub grid: Vec<f64>,
    /// Cluster radii, relative to the sampled scale `max(1, sup |g(x + s_m)|)`.
    pub delta_start: f64,
    pub delta_target: f64,
    pub min_cluster: usize,
    pub pivot_candidates: usize,
    /// Number of trailing cluster members averaged into `g̃` and used for
    /// the return limit.
    pub limit_tail: usize,
    /// Return-limit residual accepted as a pass, relative to the sampled scale.
    pub tolerance: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            sequence: SequenceSpec::default(),
            grid: (0..=40).map(|i| -10.0 + 0.5 * i as f64).collect(),
            delta_start: 1.0,
            delta_target: 1.0 / 256.0,
            min_cluster: 4,
            pivot_candidates: 256,
            limit_tail: 16,
            tolerance: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BochnerProbe {
    pub sequence: Vec<f64>,
    /// Strictly increasing indices into `sequence`.
    pub indices: Vec<usize>,
    pub grid: Vec<f64>,
    /// `g̃(x)` at the probe points.
    pub limit: Vec<f64>,
    /// `max_k |g̃(x − s_{m_k}) − g(x)|` over the tail, at each probe point.
    pub residuals: Vec<f64>,
    pub residual: f64,
    /// `max(1, sup |g(x + s_m)|)` over the sampled translates.
    pub scale: f64,
    pub delta: f64,
    pub passed: bool,
}

fn sup_distance(a: &[f64], b: &[f64], bound: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= bound)
}

/// Greedy Cauchy clustering of the translates `g(· + s_m)` with halving `δ`.
pub fn bochner_probe(g: &dyn SmoothFn, cfg: &ProbeConfig) -> Result<BochnerProbe> {
    let seq = cfg.sequence.values();
    if seq.is_empty() || cfg.grid.is_empty() {
        return Err(Error::InvalidInput("empty probe sequence or grid".into()));
    }
    let samples: Vec<Vec<f64>> = seq
        .iter()
        .map(|s| cfg.grid.iter().map(|x| g.value(x + s)).collect())
        .collect::<Result<_>>()?;
    let scale = samples
        .iter()
        .flatten()
        .fold(1.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
    let mut cluster: Vec<usize> = (0..seq.len()).collect();
    let mut delta = cfg.delta_start;
    loop {
        let mut best: Option<(usize, Vec<usize>)> = None;
        for (pos, &pivot) in cluster.iter().enumerate().take(cfg.pivot_candidates) {
            let possible = cluster.len() - pos - 1;
            if best.as_ref().is_some_and(|(_, n)| n.len() >= possible) {
                break;
            }
            let neighbors: Vec<usize> = cluster[pos + 1..]
                .iter()
                .copied()
                .filter(|&m| sup_distance(&samples[pivot], &samples[m], delta * scale))
                .collect();
            if best.as_ref().is_none_or(|(_, n)| neighbors.len() > n.len()) {
                best = Some((pivot, neighbors));
            }
        }
        let (pivot, neighbors) = best.expect("nonempty cluster");
        cluster = std::iter::once(pivot).chain(neighbors).collect();
        if cluster.len() < cfg.min_cluster {
            return Err(Error::NoConvergentSubsequence(format!(
                "largest cluster at delta = {delta:e} has {} of {} translates, need {}",
                cluster.len(),
                seq.len(),
                cfg.min_cluster
            )));
        }
        if delta <= cfg.delta_target {
            break;
        }
        delta = (0.5 * delta).max(cfg.delta_target);
    }
    let tail = &cluster[cluster.len().saturating_sub(cfg.limit_tail.max(1))..];
    let limit_at = |y: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &j in tail {
            acc += g.value(y + seq[j])?;
        }
        Ok(acc / tail.len() as f64)
    };
    let limit = cfg.grid.iter().map(|&x| limit_at(x)).collect::<Result<Vec<_>>>()?;
    let mut residuals = vec![0.0f64; cfg.grid.len()];
    for &k in tail {
        for (r, &x) in residuals.iter_mut().zip(&cfg.grid) {
            let d = match limit_at(x - seq[k]) {
                Ok(v) => (v - g.value(x)?).abs(),
                Err(Error::Eval(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            *r = r.max(if d.is_nan() { f64::INFINITY } else { d });
        }
    }
    let residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(BochnerProbe {
        sequence: seq,
        indices: cluster,
        grid: cfg.grid.clone(),
        limit,
        residuals,
        residual,
        scale,
        delta,
        passed: residual <= cfg.tolerance * scale,
    })
}
