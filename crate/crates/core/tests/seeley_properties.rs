use std::sync::{Arc, OnceLock};

use colombeau_core::func::{expr_fn, linear};
use colombeau_core::nets::classify;
use colombeau_core::seeley::{
    build_sequence, extend, extend_net, extension_bound_check, smoothness_gap, SeeleySequence,
};
use colombeau_core::{parse, Domain, EpsSchedule, Fun, Grid, Net, Thresholds, Verdict};
use proptest::prelude::*;

fn seq8() -> Arc<SeeleySequence> {
    static S: OnceLock<Arc<SeeleySequence>> = OnceLock::new();
    S.get_or_init(|| Arc::new(build_sequence(8).unwrap())).clone()
}

fn f(s: &str) -> Fun {
    expr_fn(parse(s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extension_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, x in -3.0f64..3.0) {
        let (u, v) = (f("exp(-x)*sin(x)"), f("1/(1 + x^2)"));
        let combo = extend(linear(vec![(alpha, u.clone()), (beta, v.clone())]), &seq8());
        let (eu, ev) = (extend(u, &seq8()), extend(v, &seq8()));
        let lhs = combo.jet(x, 2).unwrap();
        let (ju, jv) = (eu.jet(x, 2).unwrap(), ev.jet(x, 2).unwrap());
        for d in 0..=2 {
            let rhs = alpha * ju.derivs[d] + beta * jv.derivs[d];
            prop_assert!((lhs.derivs[d] - rhs).abs() <= 1e-12 * rhs.abs().max(1.0) * 1e3);
        }
    }

    #[test]
    fn extension_restricts_to_the_input(x in 0.0f64..20.0) {
        let u = f("exp(-x)*sin(x) + cos(x)");
        let e = extend(u.clone(), &seq8());
        prop_assert_eq!(e.jet(x, 3).unwrap().derivs, u.jet(x, 3).unwrap().derivs);
    }
}

#[test]
fn gap_equals_residual_times_derivative() {
    let s = seq8();
    let u = f("exp(-x)*sin(x)");
    for g in smoothness_gap(&*u, &s, 7).unwrap() {
        let expected = s.residuals[g.n] * g.derivative_at_zero.abs();
        assert_eq!(g.gap, expected);
    }
}

#[test]
fn gaps_do_not_grow_with_length() {
    // Rounding the weights to 256 bits leaves residuals near 2^-256.
    let floor = 2f64.powi(-200);
    let u = f("exp(-x)*sin(x)");
    let mut prev = f64::INFINITY;
    for len in [4, 6, 8, 12] {
        let s = build_sequence(len).unwrap();
        let worst = smoothness_gap(&*u, &s, 3)
            .unwrap()
            .iter()
            .map(|g| g.gap)
            .fold(0.0, f64::max);
        assert!(worst <= prev + floor, "L = {len}: {worst} > {prev}");
        prev = worst;
    }
}

fn classify_extension(template: &str, k_max: usize, ceiling: f64) -> colombeau_core::Classification {
    classify_extension_on(template, k_max, ceiling, &Grid::default_for(Domain::Real))
}

fn classify_extension_on(
    template: &str,
    k_max: usize,
    ceiling: f64,
    grid: &Grid,
) -> colombeau_core::Classification {
    let net = Net::from_template(parse(template).unwrap(), Domain::HalfLine);
    let ext = extend_net(&net, &seq8()).unwrap();
    let th = Thresholds::default().with_ceiling(ceiling);
    classify(&ext, k_max, &EpsSchedule::default(), grid, &th).unwrap()
}

#[test]
fn extension_preserves_negligibility() {
    let c = classify_extension("eps^2*exp(-x)", 2, 2.0);
    assert_eq!(c.verdict, Verdict::Negligible);
    assert!((c.slope(0).unwrap() - 2.0).abs() < 0.1);
}

#[test]
fn extension_preserves_moderate_growth() {
    // The reflected terms oscillate at frequency |b_l|/eps and decay like exp(-|b_l x|).
    let grid = Grid::uniform(-1.0, 1.0, 200_001);
    let half = Grid::uniform(0.0, 2.0, 200_001);
    let template = parse("exp(-x)*sin(x/eps)").unwrap();
    let net = Net::from_template(template, Domain::HalfLine);
    for eps in EpsSchedule::default().values() {
        let u = net.at(eps).unwrap();
        for k in 0..=2 {
            let b = extension_bound_check(&u, &seq8(), k, &grid, &half).unwrap();
            assert!(b.holds, "eps {eps}, order {k}: {} > {} * {}", b.lhs, b.growth, b.seminorm_j);
        }
    }
    let c = classify_extension_on("exp(-x)*sin(x/eps)", 2, 3.0, &grid);
    assert_ne!(c.verdict, Verdict::Negligible);
    for k in 0..=2 {
        let r = &c.per_k[k];
        let (s, t) = (r.slope.unwrap(), r.tail_slope.unwrap());
        assert!(s > -(k as f64) - 0.5 && t > -(k as f64) - 0.5, "order {k}: slope {s}, tail {t}");
    }
    for k in 1..=2 {
        assert!((c.slope(k).unwrap() + k as f64).abs() < 0.5, "order {k}");
    }
}

#[test]
fn extension_of_one_is_one() {
    let c = classify_extension("1", 1, 3.0);
    assert_eq!(c.verdict, Verdict::Moderate);
    let e = extend(f("1"), &seq8());
    for x in [-7.0, -1.0, 0.0, 3.0] {
        assert!((e.value(x).unwrap() - 1.0).abs() < 1e-12);
    }
}
