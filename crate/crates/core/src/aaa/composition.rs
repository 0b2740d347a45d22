use serde::Serialize;

use crate::error::{Error, Result};
use crate::func::{expr_fn, Fun};
use crate::jetcalc::{Expr, Jet, DEFAULT_MAX_ORDER};
use crate::nets::{classify, Classification, Domain, EpsSchedule, Grid, Net};

use super::{AAASpec, AaaSettings, PartDiagnostics};

/// `(F∘u)^(j)(x)` by the explicit partition sum
/// `j! Σ F^(r)(u) / (l_1!⋯l_j!) Π (u^(i)/i!)^{l_i}` over `Σ i l_i = j`.
pub fn faa_di_bruno(f: &Jet, u: &Jet, j: usize) -> Result<f64> {
    if j > DEFAULT_MAX_ORDER {
        return Err(Error::OrderTooHigh(j));
    }
    if f.order() < j || u.order() < j {
        return Err(Error::Precondition(format!(
            "jets of order {} and {} cannot give derivative {j}",
            f.order(),
            u.order()
        )));
    }
    if j == 0 {
        return Ok(f.derivs[0]);
    }
    let fact: Vec<f64> = (0..=j)
        .scan(1.0, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();
    let normalized: Vec<f64> = (0..=j).map(|i| u.derivs[i] / fact[i]).collect();
    let mut counts = vec![0usize; j + 1];
    let mut total = 0.0;
    partitions(j, j, &mut counts, &mut |l| {
        let r: usize = l.iter().sum();
        let mut term = f.derivs[r];
        for i in 1..=j {
            if l[i] > 0 {
                term *= normalized[i].powi(l[i] as i32) / fact[l[i]];
            }
        }
        total += term;
    });
    Ok(total * fact[j])
}

/// Visits every `l` with `Σ i l_i = remaining`, parts at most `largest`.
fn partitions(remaining: usize, largest: usize, l: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
    if remaining == 0 {
        visit(l);
        return;
    }
    for part in (1..=largest.min(remaining)).rev() {
        l[part] += 1;
        partitions(remaining - part, part, l, visit);
        l[part] -= 1;
    }
}

/// `F` with measured polynomial growth exponents on `[−W, W]`.
#[derive(Debug, Clone, Serialize)]
pub struct TemperedSpec {
    #[serde(serialize_with = "crate::aaa::serialize_display")]
    pub expr: Expr,
    pub window: f64,
    /// `N_j` for `j ≤ k_max`.
    pub exponents: Vec<u32>,
    pub slopes: Vec<f64>,
    /// `sup (1+|x|)^{−N_j} |F^(j)(x)|` on the window.
    pub weighted_sups: Vec<f64>,
}

pub const MAX_GROWTH_EXPONENT: u32 = 8;
const CERTIFY_SAMPLES: usize = 4001;
const CERTIFY_RADII: usize = 4;
/// Slack subtracted from the fitted slope before rounding up.
const EXPONENT_SLACK: f64 = 0.25;

/// Growth exponents from the slope of `ln sup_{|x|≤R} |F^(j)|` against
/// `ln(1+R)` over the radii `R = W, W/2, W/4, W/8`.
pub fn certify(expr: Expr, k_max: usize, window: f64) -> Result<TemperedSpec> {
    if !(window > 0.0) {
        return Err(Error::InvalidInput(format!("window {window} must be positive")));
    }
    let params = expr.params();
    if !params.is_empty() {
        return Err(Error::InvalidInput(format!(
            "tempered function has free parameters {params:?}"
        )));
    }
    let grid = Grid::uniform(-window, window, CERTIFY_SAMPLES);
    let mut abs = vec![Vec::with_capacity(CERTIFY_SAMPLES); k_max + 1];
    for &x in &grid.points {
        let j = expr.jet_bounded(x, k_max, DEFAULT_MAX_ORDER)?;
        for (col, d) in abs.iter_mut().zip(&j.derivs) {
            col.push(d.abs());
        }
    }
    let mut exponents = Vec::with_capacity(k_max + 1);
    let mut weighted_sups = Vec::with_capacity(k_max + 1);
    let mut slopes = Vec::with_capacity(k_max + 1);
    for (j, col) in abs.iter().enumerate() {
        let (mut xs, mut ys) = (vec![], vec![]);
        for i in 0..CERTIFY_RADII {
            let r = window / 2f64.powi(i as i32);
            let sup = grid
                .points
                .iter()
                .zip(col)
                .filter(|(x, _)| x.abs() <= r)
                .map(|(_, v)| *v)
                .fold(0.0, f64::max);
            xs.push((1.0 + r).ln());
            ys.push(sup.max(crate::nets::LOG_FLOOR).ln());
        }
        let slope = crate::nets::ols(&xs, &ys).0;
        let n = (slope - EXPONENT_SLACK).max(0.0).ceil();
        if n > MAX_GROWTH_EXPONENT as f64 || !n.is_finite() {
            return Err(Error::NotTempered(format!(
                "derivative {j} of {expr} grows like (1+|x|)^{slope:.2} on [-{window}, {window}]"
            )));
        }
        let n = n as u32;
        let weighted = grid
            .points
            .iter()
            .zip(col)
            .map(|(x, v)| v / (1.0 + x.abs()).powi(n as i32))
            .fold(0.0, f64::max);
        exponents.push(n);
        slopes.push(slope);
        weighted_sups.push(weighted);
    }
    Ok(TemperedSpec {
        expr,
        window,
        exponents,
        slopes,
        weighted_sups,
    })
}

impl TemperedSpec {
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        lo >= -self.window && hi <= self.window
    }
}

pub struct Composition {
    pub composed: Net,
    pub principal: Net,
    pub corrective: Net,
    pub report: CompositionReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport {
    pub tempered: TemperedSpec,
    pub composed: Classification,
    pub parts: Vec<PartDiagnostics>,
    /// `sup_J |principal + corrective − F∘u|` over the schedule.
    pub identity_residual: f64,
    pub passed: bool,
}

fn range_on(f: &Fun, grid: &Grid) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in &grid.points {
        let v = f.value(x)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// `F∘u` with principal `F(g_ε)` and corrective `F(g_ε + h_ε) − F(g_ε)`.
pub fn compose(
    tempered: &TemperedSpec,
    u: &AAASpec,
    schedule: &EpsSchedule,
    settings: &AaaSettings,
) -> Result<Composition> {
    let f = &tempered.expr;
    let spec = AAASpec::new(
        f.compose(&u.principal),
        Expr::Sub(
            Box::new(f.compose(&u.sum())),
            Box::new(f.compose(&u.principal)),
        ),
    )?;
    let composed = Net::from_template(f.compose(&u.sum()), Domain::HalfLine);
    let mut parts = Vec::new();
    let mut identity_residual = 0.0f64;
    for eps in schedule.values() {
        let (g, h) = u.at(eps);
        let (glo, ghi) = range_on(&expr_fn(g.clone()), &settings.real_grid)?;
        let (ulo, uhi) = range_on(&expr_fn(Expr::Add(Box::new(g), Box::new(h))), &settings.half_grid)?;
        if !tempered.covers(glo.min(ulo), ghi.max(uhi)) {
            return Err(Error::Precondition(format!(
                "range [{}, {}] of u at eps = {eps} leaves the certified window",
                glo.min(ulo),
                ghi.max(uhi)
            )));
        }
        let whole = composed.at(eps)?;
        let (p, c) = spec.at(eps);
        let (p, c): (Fun, Fun) = (expr_fn(p), expr_fn(c));
        for &x in &settings.half_grid.points {
            let d = p.value(x)? + c.value(x)? - whole.value(x)?;
            identity_residual = identity_residual.max(d.abs());
        }
        parts.push(PartDiagnostics::measure(eps, &p, &c, settings)?);
    }
    let classification = classify(
        &composed,
        settings.k_max,
        schedule,
        &settings.half_grid,
        &settings.thresholds,
    )?;
    let passed = classification.is_moderate()
        && parts.iter().all(|p| p.passed())
        && identity_residual <= 1e-12;
    Ok(Composition {
        principal: spec.principal_net(),
        corrective: spec.corrective_net(),
        composed,
        report: CompositionReport {
            tempered: tempered.clone(),
            composed: classification,
            parts,
            identity_residual,
            passed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::{parse, random::random_expr};
    use rand::SeedableRng;

    fn jet(s: &str, x: f64, k: usize) -> Jet {
        parse(s).unwrap().jet(x, k).unwrap()
    }

    #[test]
    fn worked_examples() {
        let u = jet("x^2", 0.0, 4);
        let f = jet("exp(x)", u.value(), 4);
        assert_eq!(faa_di_bruno(&f, &u, 4).unwrap(), 12.0);
        let u = jet("sin(x)", 0.0, 4);
        let f = jet("x^2", u.value(), 4);
        assert_eq!(faa_di_bruno(&f, &u, 4).unwrap(), -8.0);
        let u = jet("exp(x)*cos(x)", 0.3, 6);
        let f = jet("x", u.value(), 6);
        for j in 0..=6 {
            assert_eq!(faa_di_bruno(&f, &u, j).unwrap(), u.derivs[j]);
        }
    }

    #[test]
    fn order_bound() {
        let u = jet("x", 0.0, 8);
        let f = jet("x", 0.0, 8);
        assert!(faa_di_bruno(&f, &u, 8).is_ok());
        let u9 = Jet {
            x: 0.0,
            derivs: vec![0.0; 10],
        };
        assert!(matches!(faa_di_bruno(&u9, &u9, 9), Err(Error::OrderTooHigh(9))));
        assert!(matches!(faa_di_bruno(&f, &jet("x", 0.0, 2), 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn partition_counts() {
        let expect = [1, 1, 2, 3, 5, 7, 11, 15, 22];
        for (j, e) in expect.iter().enumerate() {
            let mut n = 0;
            partitions(j, j, &mut vec![0; j + 1], &mut |_| n += 1);
            assert_eq!(n, *e);
        }
    }

    #[test]
    fn agrees_with_taylor_composition() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (fe, ue) = (random_expr(&mut rng, 3), random_expr(&mut rng, 3));
            let j = 6;
            let u = ue.jet(0.4, j).unwrap();
            let f = fe.jet(u.value(), j).unwrap();
            let oracle = Jet::compose(&f, &u);
            for k in 0..=j {
                let v = faa_di_bruno(&f, &u, k).unwrap();
                let o = oracle.derivs[k];
                assert!((v - o).abs() <= 1e-10 * o.abs(), "{fe} o {ue}, j = {k}: {v} vs {o}");
            }
        }
    }

    #[test]
    fn certificates() {
        let sq = certify(parse("x^2").unwrap(), 3, 100.0).unwrap();
        assert_eq!(sq.exponents, vec![2, 1, 0, 0]);
        assert!(sq.weighted_sups[0] <= 1.0);
        let s = certify(parse("sin(x)").unwrap(), 4, 100.0).unwrap();
        assert!(s.exponents.iter().all(|n| *n == 0));
        assert!(certify(parse("exp(x)").unwrap(), 2, 100.0).is_err());
        let e = certify(parse("exp(x)").unwrap(), 2, 4.0).unwrap();
        assert!(e.exponents.iter().all(|n| *n <= MAX_GROWTH_EXPONENT));
        assert!(e.covers(-1.0, 2.0));
        assert!(certify(parse("eps*x").unwrap(), 1, 4.0).is_err());
    }

    fn settings() -> AaaSettings {
        AaaSettings {
            real_grid: Grid::uniform(-20.0, 20.0, 401),
            half_grid: Grid::uniform(0.0, 40.0, 401),
            ..AaaSettings::default()
        }
    }

    #[test]
    fn exponential_of_aaa_function() {
        let f = certify(parse("exp(x)").unwrap(), 2, 4.0).unwrap();
        let u = AAASpec::parse("sin(x)", "exp(-x)").unwrap();
        let c = compose(&f, &u, &EpsSchedule::default(), &settings()).unwrap();
        assert!(c.report.passed);
        assert!(c.report.identity_residual <= 1e-12);
        let corr = c.corrective.at(0.5).unwrap();
        for x in [0.0f64, 0.7, 3.0, 12.0] {
            let closed = x.sin().exp() * ((-x).exp().exp() - 1.0);
            assert!((corr.value(x).unwrap() - closed).abs() < 1e-14);
        }
    }

    #[test]
    fn square_and_identity() {
        let sq = certify(parse("x^2").unwrap(), 2, 100.0).unwrap();
        let u = AAASpec::parse("sin(x)", "exp(-x)").unwrap();
        let c = compose(&sq, &u, &EpsSchedule::default(), &settings()).unwrap();
        let corr = c.corrective.at(0.5).unwrap();
        for x in [0.0f64, 1.3, 5.0] {
            let closed = 2.0 * x.sin() * (-x).exp() + (-2.0 * x).exp();
            assert!((corr.value(x).unwrap() - closed).abs() < 1e-14);
        }
        let id = certify(parse("x").unwrap(), 2, 100.0).unwrap();
        let c = compose(&id, &u, &EpsSchedule::default(), &settings()).unwrap();
        let (p, h) = (c.principal.at(0.3).unwrap(), c.corrective.at(0.3).unwrap());
        assert_eq!(p.value(1.1).unwrap(), 1.1f64.sin());
        assert!((h.value(1.1).unwrap() - (-1.1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn range_must_be_certified() {
        let f = certify(parse("exp(x)").unwrap(), 2, 1.1).unwrap();
        let u = AAASpec::parse("sin(x)", "exp(-x)").unwrap();
        assert!(matches!(
            compose(&f, &u, &EpsSchedule::default(), &settings()),
            Err(Error::Precondition(_))
        ));
    }
}
