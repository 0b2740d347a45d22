use std::sync::Arc;

use colombeau_core::aaa::{check_vanishing, decompose_net, AaaSettings, PartDiagnostics};
use colombeau_core::catalog::{aaa_specs, AA_FORCING};
use colombeau_core::embedding::{regularize, DistributionRep, Mollifier, MollifierConfig};
use colombeau_core::func::expr_fn;
use colombeau_core::{parse, EpsSchedule, Grid};

fn short_schedule() -> EpsSchedule {
    EpsSchedule::new(0.5, 0.7, 6).unwrap()
}

#[test]
fn bundled_decompositions_round_trip() {
    let settings = AaaSettings::default();
    for spec in aaa_specs().unwrap() {
        let d = decompose_net(&spec, &short_schedule(), &settings).unwrap();
        assert!(d.report.roundtrip_residual <= 1e-12, "{:?}", spec);
        assert!(d.report.passed, "{:?}: {:?}", spec, d.report.parts);
    }
}

#[test]
fn products_with_almost_automorphic_factors_keep_vanishing_correctives() {
    let settings = AaaSettings::default();
    // The AA forcing has derivatives of size ~1e4, so only the values of its
    // products with algebraically decaying correctives fall below tolerance
    // inside the tail windows.
    for (factor, algebraic_orders) in [("cos(x)", 2), (AA_FORCING, 0)] {
        let a = parse(factor).unwrap();
        for spec in aaa_specs().unwrap() {
            let j_max = if spec.corrective.to_string().contains("exp") { 2 } else { algebraic_orders };
            let product = spec.times_aa(&a).unwrap();
            for eps in [0.5, 0.1] {
                let (_, h) = product.at(eps);
                let r = check_vanishing(&h, j_max, &settings.tails).unwrap();
                assert!(r.vanishing, "{factor} times {:?} at eps {eps}: {:?}", spec, r.sups);
            }
        }
    }
}

#[test]
fn mollified_parts_pass_both_checks() {
    let m = Arc::new(Mollifier::build(MollifierConfig::default()).unwrap());
    let settings = AaaSettings {
        real_grid: Grid::uniform(-20.0, 20.0, 201),
        ..AaaSettings::default()
    };
    for (g, h) in [("sin(x)", "exp(-x)"), ("2 + sin(x)", "x*exp(-x)")] {
        for eps in [0.5, 0.1] {
            let gc = regularize(&DistributionRep::function(expr_fn(parse(g).unwrap())), &m, eps).unwrap();
            let hc = regularize(&DistributionRep::function(expr_fn(parse(h).unwrap())), &m, eps).unwrap();
            let d = PartDiagnostics::measure(eps, &gc, &hc, &settings).unwrap();
            assert!(d.passed(), "{g} + {h} at eps {eps}: {d:?}");
        }
    }
}
