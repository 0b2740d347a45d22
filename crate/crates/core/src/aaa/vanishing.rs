use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::func::SmoothFn;
use crate::nets::{derivative_sups, Grid};

/// Successive tail windows on which derivative sups must decay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailWindows {
    pub windows: Vec<(f64, f64)>,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for TailWindows {
    fn default() -> Self {
        Self {
            windows: (0..5).map(|i| (30.0 * i as f64, 30.0 * (i + 1) as f64)).collect(),
            samples: 301,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingReport {
    pub j_max: usize,
    /// `sups[j][w]`: sup of `|h^(j)|` over window `w`.
    pub sups: Vec<Vec<f64>>,
    pub per_j: Vec<bool>,
    pub vanishing: bool,
}

/// Each derivative's sup must fall below tolerance on the last window and
/// not exceed its sup on the earlier windows.
pub fn check_vanishing(
    h: &dyn SmoothFn,
    j_max: usize,
    tails: &TailWindows,
) -> Result<VanishingReport> {
    let mut sups = vec![Vec::with_capacity(tails.windows.len()); j_max + 1];
    for &(a, b) in &tails.windows {
        let grid = Grid::uniform(a, b, tails.samples);
        for (j, s) in derivative_sups(h, j_max, &grid)?.into_iter().enumerate() {
            sups[j].push(s);
        }
    }
    let per_j: Vec<bool> = sups
        .iter()
        .map(|s| {
            let (last, earlier) = s.split_last().expect("at least one window");
            let earlier_max = earlier.iter().cloned().fold(0.0, f64::max);
            *last < tails.tolerance && (earlier.is_empty() || *last <= earlier_max)
        })
        .collect();
    Ok(VanishingReport {
        j_max,
        vanishing: per_j.iter().all(|b| *b),
        sups,
        per_j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::parse;

    fn vanishes(s: &str, j: usize) -> bool {
        check_vanishing(&parse(s).unwrap(), j, &TailWindows::default())
            .unwrap()
            .vanishing
    }

    #[test]
    fn examples() {
        assert!(vanishes("exp(-x)", 3));
        assert!(!vanishes("sin(x)", 0));
        assert!(vanishes("1/(1 + x^2)", 2));
        assert!(vanishes("0", 2));
        assert!(!vanishes("exp(-x) + 0.001", 0));
    }

    #[test]
    fn derivative_tails_checked_separately() {
        let r = check_vanishing(&parse("sin(x^2)/(1 + x^2)").unwrap(), 1, &TailWindows::default())
            .unwrap();
        assert!(r.per_j[0]);
        assert!(!r.per_j[1]);
    }
}
