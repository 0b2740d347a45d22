use serde::{Deserialize, Serialize};

use super::{derivative_sups, EpsSchedule, Grid, Net, SeminormTable};
use crate::error::{Error, Result};
use crate::func::SmoothFn;

/// Values are clamped to this before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;

/// Least-squares line through `(ln ε, ln |u_ε|_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub k: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares line `y = slope·x + intercept`, returned with `R²`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // a constant column is fitted exactly by a flat line
    let r2 = if ss_tot <= f64::EPSILON * f64::EPSILON * n * (1.0 + my * my) {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).max(0.0)
    };
    (slope, intercept, r2)
}

fn fit_points(k: usize, eps: &[f64], values: &[f64]) -> Result<OrderFit> {
    if values.iter().all(|&v| v < LOG_FLOOR) {
        return Err(Error::DegenerateFit { k, floor: LOG_FLOOR });
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.max(LOG_FLOOR).ln()).collect();
    let (slope, intercept, r2) = ols(&xs, &ys);
    Ok(OrderFit { k, slope, intercept, r2 })
}

/// Fits the exponent `m` in `|u_ε|_{k,∞} ≈ C ε^m` over the whole schedule.
pub fn fit_order(net: &Net, k: usize, schedule: &EpsSchedule, grid: &Grid) -> Result<OrderFit> {
    let table = SeminormTable::compute(net, k, schedule, grid)?;
    fit_points(k, &table.eps, &table.column(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Moderate nets must grow no faster than `ε^{-m_cap}`.
    pub m_cap: f64,
    /// Highest decay order certified for negligibility.
    pub ceiling: f64,
    pub r2_min: f64,
    /// A column whose every entry is at or below this is treated as
    /// identically zero.
    pub zero_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            m_cap: 12.0,
            ceiling: 6.0,
            r2_min: 0.9,
            zero_floor: LOG_FLOOR,
        }
    }
}

impl Thresholds {
    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.ceiling = ceiling;
        self
    }

    /// Slack allowed when comparing a fitted slope against exponent `m`.
    pub fn slope_tolerance(m: f64) -> f64 {
        0.05 * m.abs() + 0.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Moderate,
    Negligible,
    Neither,
}

/// Evidence for one seminorm order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KReport {
    pub k: usize,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    /// Slope over the smallest-ε half of the schedule.
    pub tail_slope: Option<f64>,
    pub identically_negligible: bool,
    pub moderate: bool,
    pub negligible: bool,
}

impl KReport {
    fn assess(k: usize, eps: &[f64], column: &[f64], th: &Thresholds) -> Self {
        if column.iter().all(|&v| v <= th.zero_floor) {
            return Self {
                k,
                slope: None,
                intercept: None,
                r2: None,
                tail_slope: None,
                identically_negligible: true,
                moderate: true,
                negligible: true,
            };
        }
        let fit = fit_points(k, eps, column).expect("column above floor");
        let half = eps.len() / 2;
        let tail = fit_points(k, &eps[half..], &column[half..]).expect("column above floor");
        // worst case as ε → 0
        let slope = fit.slope.min(tail.slope);
        let bounded = slope >= -Thresholds::slope_tolerance(0.0);
        let capped = slope >= -(th.m_cap + Thresholds::slope_tolerance(th.m_cap)) && fit.r2 >= th.r2_min;
        let moderate = bounded || capped;
        let negligible = moderate && slope >= th.ceiling - Thresholds::slope_tolerance(th.ceiling);
        Self {
            k,
            slope: Some(fit.slope),
            intercept: Some(fit.intercept),
            r2: Some(fit.r2),
            tail_slope: Some(tail.slope),
            identically_negligible: false,
            moderate,
            negligible,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub k_max: usize,
    pub per_k: Vec<KReport>,
    pub thresholds: Thresholds,
    pub schedule: EpsSchedule,
}

impl Classification {
    pub fn from_table(table: &SeminormTable, schedule: &EpsSchedule, th: &Thresholds) -> Self {
        let per_k: Vec<KReport> = (0..=table.k_max())
            .map(|k| KReport::assess(k, &table.eps, &table.column(k), th))
            .collect();
        let verdict = if per_k.iter().all(|r| r.negligible) {
            Verdict::Negligible
        } else if per_k.iter().all(|r| r.moderate) {
            Verdict::Moderate
        } else {
            Verdict::Neither
        };
        Self {
            verdict,
            k_max: table.k_max(),
            per_k,
            thresholds: *th,
            schedule: *schedule,
        }
    }

    /// Negligible nets are moderate too.
    pub fn is_moderate(&self) -> bool {
        self.verdict != Verdict::Neither
    }

    pub fn is_negligible(&self) -> bool {
        self.verdict == Verdict::Negligible
    }

    pub fn slope(&self, k: usize) -> Option<f64> {
        self.per_k.get(k).and_then(|r| r.slope)
    }
}

pub fn classify(
    net: &Net,
    k_max: usize,
    schedule: &EpsSchedule,
    grid: &Grid,
    thresholds: &Thresholds,
) -> Result<Classification> {
    if k_max > crate::jetcalc::DEFAULT_MAX_ORDER {
        return Err(Error::InvalidInput(format!(
            "k_max = {k_max} exceeds the jet order bound {}",
            crate::jetcalc::DEFAULT_MAX_ORDER
        )));
    }
    let table = SeminormTable::compute(net, k_max, schedule, grid)?;
    Ok(Classification::from_table(&table, schedule, thresholds))
}

/// Order-0 versus all-order negligibility of a moderate net.
#[derive(Debug, Clone, Serialize)]
pub struct NullReport {
    pub order0_negligible: bool,
    pub per_k_negligible: Vec<bool>,
    /// order-0 negligible ∧ moderate ⇒ every probed order negligible
    pub consistent: bool,
    pub classification: Classification,
}

pub fn null_characterization(
    net: &Net,
    k_max: usize,
    schedule: &EpsSchedule,
    grid: &Grid,
    thresholds: &Thresholds,
) -> Result<NullReport> {
    let classification = classify(net, k_max, schedule, grid, thresholds)?;
    if !classification.is_moderate() {
        return Err(Error::Precondition(format!(
            "net `{}` is not moderate",
            net.label
        )));
    }
    let per_k_negligible: Vec<bool> = classification.per_k.iter().map(|r| r.negligible).collect();
    let order0_negligible = per_k_negligible[0];
    if order0_negligible {
        if let Some(k) = per_k_negligible.iter().position(|n| !n) {
            return Err(Error::InconsistentEvidence { k });
        }
    }
    Ok(NullReport {
        order0_negligible,
        per_k_negligible,
        consistent: true,
        classification,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LkCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Landau–Kolmogorov check `‖f^(p)‖ ≤ 2π ‖f‖^{1-p/n} ‖f^(n)‖^{p/n}` with
/// grid sup-norms.
pub fn lk_check(f: &dyn SmoothFn, p: usize, n: usize, grid: &Grid) -> Result<LkCheck> {
    if !(0 < p && p < n) {
        return Err(Error::InvalidInput(format!("need 0 < p < n, got p = {p}, n = {n}")));
    }
    let sups = derivative_sups(f, n, grid)?;
    let lhs = sups[p];
    let t = p as f64 / n as f64;
    let rhs = 2.0 * std::f64::consts::PI * sups[0].powf(1.0 - t) * sups[n].powf(t);
    Ok(LkCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}
