use std::sync::{Arc, OnceLock};

use colombeau_core::catalog::CERTIFICATION_CEILING;
use colombeau_core::embedding::{
    consistency_residual, regularization_net, regularize, DistributionRep, Mollifier, MollifierConfig,
};
use colombeau_core::func::expr_fn;
use colombeau_core::nets::classify;
use colombeau_core::{parse, EpsSchedule, Fun, Grid, Thresholds, Verdict};
use proptest::prelude::*;

fn mollifier() -> Arc<Mollifier> {
    static M: OnceLock<Arc<Mollifier>> = OnceLock::new();
    M.get_or_init(|| Arc::new(Mollifier::build(MollifierConfig::default()).unwrap()))
        .clone()
}

fn f(s: &str) -> Fun {
    expr_fn(parse(s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn regularization_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, eps in 0.05f64..1.0, x in -4.0f64..4.0) {
        let m = mollifier();
        let t = DistributionRep::function(f("sin(x)"));
        let s = DistributionRep::new(vec![(0, f("cos(2*x)")), (1, f("1/(2 + cos(x))"))]).unwrap();
        let combined = t.scale(alpha).add(&s.scale(beta));
        let lhs = regularize(&combined, &m, eps).unwrap().jet(x, 2).unwrap();
        let rt = regularize(&t, &m, eps).unwrap().jet(x, 2).unwrap();
        let rs = regularize(&s, &m, eps).unwrap().jet(x, 2).unwrap();
        for d in 0..=2 {
            let rhs = alpha * rt.derivs[d] + beta * rs.derivs[d];
            prop_assert!((lhs.derivs[d] - rhs).abs() <= 1e-12 * rhs.abs().max(1.0) / eps.powi(d as i32 + 1));
        }
    }

    #[test]
    fn regularization_commutes_with_derivatives(eps in 0.1f64..1.0, x in -4.0f64..4.0) {
        let m = mollifier();
        let t = DistributionRep::function(f("sin(x)*cos(x/3)"));
        let dt = t.derivative().unwrap();
        let direct = regularize(&dt, &m, eps).unwrap().value(x).unwrap();
        let differentiated = regularize(&t, &m, eps).unwrap().jet(x, 1).unwrap().derivs[1];
        prop_assert!((direct - differentiated).abs() < 1e-8);
    }
}

#[test]
fn smooth_consistency_residual_is_negligible() {
    let m4 = Arc::new(Mollifier::build(MollifierConfig::with_moments(4)).unwrap());
    let th = Thresholds::default().with_ceiling(CERTIFICATION_CEILING);
    let grid = Grid::uniform(-20.0, 20.0, 801);
    for s in ["sin(x)", "cos(x)*sin(x/2)"] {
        let net = consistency_residual(f(s), m4.clone());
        let c = classify(&net, 1, &EpsSchedule::default(), &grid, &th).unwrap();
        assert_eq!(c.verdict, Verdict::Negligible, "{s}: {:?}", c.per_k);
    }
}

#[test]
fn eight_moment_residual_is_negligible_above_rounding_floor() {
    // Below eps ~ 0.07 the residual is at the 1e-15 rounding floor.
    let schedule = EpsSchedule::new(0.5, 0.7, 6).unwrap();
    let th = Thresholds::default().with_ceiling(CERTIFICATION_CEILING);
    let net = consistency_residual(f("sin(x)"), mollifier());
    let c = classify(&net, 1, &schedule, &Grid::uniform(-20.0, 20.0, 401), &th).unwrap();
    assert_eq!(c.verdict, Verdict::Negligible);
    assert!(c.slope(0).unwrap() > 8.0, "{:?}", c.per_k);
}

#[test]
fn distinct_functions_have_distinct_regularizations() {
    let a = DistributionRep::function(f("sin(x)"));
    let b = DistributionRep::function(f("sin(x) + 0.01*cos(x)"));
    let diff = regularization_net(a, mollifier()).sub(&regularization_net(b, mollifier()));
    let th = Thresholds::default().with_ceiling(CERTIFICATION_CEILING);
    let c = classify(&diff, 1, &EpsSchedule::default(), &Grid::uniform(-10.0, 10.0, 401), &th).unwrap();
    assert_ne!(c.verdict, Verdict::Negligible);
    assert!(c.slope(0).unwrap().abs() < 0.1);
}
