use colombeau_core::catalog::{ANALYTIC_NETS, CERTIFICATION_CEILING};
use colombeau_core::func::expr_fn;
use colombeau_core::jetcalc::random::random_expr;
use colombeau_core::nets::{classify, seminorm};
use colombeau_core::{parse, Domain, EpsSchedule, Grid, Net, Thresholds, Verdict};
use proptest::prelude::*;
use rand::SeedableRng;

fn net(s: &str) -> Net {
    Net::from_template(parse(s).unwrap(), Domain::Real)
}

fn verdict(n: &Net, schedule: &EpsSchedule) -> Verdict {
    let th = Thresholds::default().with_ceiling(CERTIFICATION_CEILING);
    classify(n, 2, schedule, &Grid::default_for(Domain::Real), &th)
        .unwrap()
        .verdict
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn seminorm_is_monotone_in_order(seed in any::<u64>(), k in 0usize..5) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = expr_fn(random_expr(&mut rng, 3));
        let grid = Grid::uniform(-5.0, 5.0, 201);
        let lo = seminorm(&*f, k, &grid).unwrap();
        let hi = seminorm(&*f, k + 1, &grid).unwrap();
        prop_assert!(hi >= lo);
    }
}

#[test]
fn products_of_moderate_nets_are_moderate() {
    let s = EpsSchedule::default();
    for (u, v) in [
        ("eps^-2*sin(x)", "sin(x/eps)"),
        ("sin(x/eps)", "cos(x)"),
        ("eps^-1", "eps^-2*cos(x/eps)"),
    ] {
        assert_eq!(verdict(&net(u), &s), Verdict::Moderate);
        assert_eq!(verdict(&net(u).mul(&net(v)), &s), Verdict::Moderate, "{u} * {v}");
    }
}

#[test]
fn negligible_times_moderate_is_negligible() {
    let s = EpsSchedule::default();
    for (u, v) in [
        ("exp(-1/eps)", "eps^-2*sin(x/eps)"),
        ("eps^6*cos(x)", "sin(x/eps)"),
        ("eps^5", "eps^-1*sin(x)"),
    ] {
        assert_eq!(verdict(&net(u), &s), Verdict::Negligible);
        assert_eq!(verdict(&net(u).mul(&net(v)), &s), Verdict::Negligible, "{u} * {v}");
    }
}

#[test]
fn verdicts_survive_halving_eps0() {
    let full = EpsSchedule::default();
    let half = EpsSchedule::new(full.eps0 / 2.0, full.ratio, full.count).unwrap();
    for n in &ANALYTIC_NETS {
        let net = n.net().unwrap();
        assert_eq!(verdict(&net, &full), verdict(&net, &half), "{}", n.template);
    }
}

#[test]
fn negligible_implies_moderate() {
    let s = EpsSchedule::default();
    let th = Thresholds::default().with_ceiling(CERTIFICATION_CEILING);
    for n in &ANALYTIC_NETS {
        let c = classify(&n.net().unwrap(), 2, &s, &Grid::default_for(Domain::Real), &th).unwrap();
        if c.is_negligible() {
            assert!(c.is_moderate(), "{}", n.template);
        }
    }
}
