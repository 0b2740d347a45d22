use std::sync::Arc;

use colombeau_core::func::expr_fn;
use colombeau_core::seeley::{
    build_sequence_with_precision, extension_bound_check, smoothness_gap, BoundCheck, Gap, SequenceExport,
    DEFAULT_PRECISION_BITS, RESIDUAL_TOLERANCE,
};
use colombeau_core::{parse, Grid, Result};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Outcome, Table, Workflow};
use crate::config::{defaults, grid_or, GridSpec, Overrides};

fn default_len() -> usize {
    8
}

fn default_bits() -> u64 {
    DEFAULT_PRECISION_BITS
}

fn default_tolerance() -> f64 {
    RESIDUAL_TOLERANCE
}

/// Seeley sequence and, optionally, the extension of one function on the half-line.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SeeleyConfig {
    #[serde(rename = "L", default = "default_len")]
    pub len: usize,
    #[serde(default = "default_bits")]
    pub precision_bits: u64,
    /// Largest accepted moment residual.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Function of `x` on the half-line to extend.
    #[serde(default)]
    pub u: Option<String>,
    /// Highest derivative for the smoothness gaps; defaults to `min(L - 1, 3)`.
    #[serde(default)]
    pub n_max: Option<usize>,
    /// Highest order of the extension bound checks.
    #[serde(default = "defaults::k_max")]
    pub k_max: usize,
    /// Defaults to `[-1, 1]` with 401 points.
    #[serde(default)]
    pub real_grid: Option<GridSpec>,
    /// Defaults to `[0, 2^(L-1)]` with 4001 points, covering every `b_l x` for `x` in `[-1, 0]`.
    #[serde(default)]
    pub half_grid: Option<GridSpec>,
}

#[derive(Serialize)]
struct Extension {
    u: String,
    gaps: Vec<Gap>,
    bounds: Vec<BoundCheck>,
}

#[derive(Serialize)]
struct SeeleyResult {
    sequence: SequenceExport,
    max_residual: f64,
    extension: Option<Extension>,
}

impl Workflow for SeeleyConfig {
    const NAME: &'static str = "seeley";

    fn apply(&mut self, o: &Overrides) -> std::result::Result<(), String> {
        o.refuse(Self::NAME, true, false)?;
        if let Some(l) = o.len {
            self.len = l;
        }
        if let Some(k) = o.k_max {
            self.k_max = k;
        }
        if let Some(t) = o.tolerance {
            self.tolerance = t;
        }
        Ok(())
    }

    fn run(&self) -> Result<Outcome> {
        let seq = Arc::new(build_sequence_with_precision(self.len, self.precision_bits)?);
        let max_residual = seq.max_residual();
        let mut passed = max_residual < self.tolerance;
        let extension = match &self.u {
            None => None,
            Some(text) => {
                let u = expr_fn(parse(text)?);
                let n_max = self.n_max.unwrap_or(self.len.saturating_sub(1).min(3));
                let gaps = smoothness_gap(&*u, &seq, n_max)?;
                let reach = 2f64.powi(self.len as i32 - 1);
                let real = grid_or(&self.real_grid, Grid::uniform(-1.0, 1.0, 401))?;
                let half = grid_or(&self.half_grid, Grid::uniform(0.0, reach, 4001))?;
                let bounds = (0..=self.k_max)
                    .map(|k| extension_bound_check(&u, &seq, k, &real, &half))
                    .collect::<Result<Vec<_>>>()?;
                passed &= gaps.iter().all(|g| g.within_tolerance) && bounds.iter().all(|b| b.holds);
                Some(Extension {
                    u: text.clone(),
                    gaps,
                    bounds,
                })
            }
        };
        let mut table = Table::new(&["l", "b", "a"]);
        for (l, (b, a)) in seq.nodes.iter().zip(&seq.weights).enumerate() {
            table.rows.push(vec![l as f64, *b, *a]);
        }
        let result = SeeleyResult {
            sequence: seq.export(),
            max_residual,
            extension,
        };
        Ok(Outcome::new(passed, &result).with_table(table))
    }
}
