use colombeau_core::jetcalc::random::random_expr;
use colombeau_core::jetcalc::{parse, translate, Expr, Taylor};
use proptest::prelude::*;
use rand::SeedableRng;

fn expr_from_seed(seed: u64, depth: usize) -> Expr {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    random_expr(&mut rng, depth)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_print_round_trip(seed in any::<u64>(), depth in 0usize..5) {
        let e = expr_from_seed(seed, depth);
        let printed = e.to_string();
        let reparsed = parse(&printed).unwrap();
        prop_assert_eq!(&reparsed, &e, "printed as {}", printed);
    }

    #[test]
    fn first_derivative_matches_central_difference(seed in any::<u64>(), x in -3.0f64..3.0) {
        let e = expr_from_seed(seed, 3);
        let d1 = e.jet(x, 1).unwrap().derivs[1];
        let fd5 = |h: f64| (-e.eval(x + 2.0 * h).unwrap() + 8.0 * e.eval(x + h).unwrap()
            - 8.0 * e.eval(x - h).unwrap() + e.eval(x - 2.0 * h).unwrap()) / (12.0 * h);
        // best step: truncation error falls and rounding error grows as h shrinks
        let best = (0..12)
            .map(|i| fd5(1e-3 * 0.5f64.powi(i)))
            .min_by(|p, q| (p - d1).abs().total_cmp(&(q - d1).abs()))
            .unwrap();
        let scale = d1.abs().max(1.0);
        prop_assert!((d1 - best).abs() <= 1e-6 * scale, "{e}: jet {d1}, difference {best}");
    }

    #[test]
    fn leibniz_rule_is_coefficient_convolution(a in any::<u64>(), b in any::<u64>(), x in -2.0f64..2.0, k in 0usize..=8) {
        let (f, g) = (expr_from_seed(a, 2), expr_from_seed(b, 2));
        let product = Expr::Mul(Box::new(f.clone()), Box::new(g.clone()));
        let input = Taylor::variable(x, k);
        let tf = f.eval_taylor(&input).unwrap();
        let tg = g.eval_taylor(&input).unwrap();
        prop_assert_eq!(product.eval_taylor(&input).unwrap(), tf.mul(&tg));
    }

    #[test]
    fn translation_shifts_the_jet_exactly(seed in any::<u64>(), x in -2.0f64..2.0, omega in -3.0f64..3.0, k in 0usize..6) {
        let e = expr_from_seed(seed, 3);
        let shifted = translate(&e, omega).jet(x, k).unwrap();
        let direct = e.jet(x + omega, k).unwrap();
        prop_assert_eq!(shifted.derivs, direct.derivs);
    }

    #[test]
    fn translations_compose(seed in any::<u64>(), x in -2.0f64..2.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let e = expr_from_seed(seed, 3);
        let twice = translate(&translate(&e, a), b).eval(x).unwrap();
        let once = translate(&e, a + b).eval(x).unwrap();
        prop_assert!((twice - once).abs() <= 1e-9 * once.abs().max(1.0));
    }
}

#[test]
fn jet_examples() {
    assert_eq!(parse("sin(x)").unwrap().jet(0.0, 3).unwrap().derivs, vec![0.0, 1.0, 0.0, -1.0]);
    assert_eq!(parse("exp(x)").unwrap().jet(0.0, 4).unwrap().derivs, vec![1.0; 5]);
    assert_eq!(parse("x^2").unwrap().jet(3.0, 3).unwrap().derivs, vec![9.0, 6.0, 2.0, 0.0]);
}

#[test]
fn translation_examples() {
    let s = translate(&parse("sin(x)").unwrap(), std::f64::consts::PI);
    for x in [0.0, 1.0, 2.0] {
        assert!((s.eval(x).unwrap() + f64::sin(x)).abs() < 1e-15);
    }
    let e = parse("x^2").unwrap();
    assert_eq!(translate(&e, 0.0), e);
    assert_eq!(translate(&e, 1.0).eval(2.0).unwrap(), 9.0);
}

#[test]
fn syntax_error_reports_offset() {
    let msg = parse("x^^2").unwrap_err().to_string();
    assert!(msg.contains('2'), "{msg}");
}
