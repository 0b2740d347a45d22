//! Seeded generator of well-behaved expressions for randomized checks.
//!
//! Every generated expression is defined on all of ℝ: denominators are
//! bounded away from zero and exponentials only see bounded arguments.
//! Negative constants are written as negations, as the parser produces them.

use rand::Rng;

use super::expr::{Expr, Func};

pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Expr {
    if depth == 0 {
        return if rng.gen_bool(0.6) {
            Expr::Var
        } else {
            let c = round_const(rng.gen_range(-2.0..2.0)) + 0.0;
            if c < 0.0 {
                Expr::Neg(Box::new(Expr::Const(-c)))
            } else {
                Expr::Const(c)
            }
        };
    }
    let sub = |rng: &mut R| Box::new(random_expr(rng, depth - 1));
    match rng.gen_range(0..9) {
        0 => Expr::Add(sub(rng), sub(rng)),
        1 => Expr::Sub(sub(rng), sub(rng)),
        2 => Expr::Mul(sub(rng), sub(rng)),
        3 => Expr::Func(Func::Sin, sub(rng)),
        4 => Expr::Func(Func::Cos, sub(rng)),
        5 => Expr::Func(Func::Exp, Box::new(Expr::Func(Func::Sin, sub(rng)))),
        6 => {
            let den = Expr::Add(
                Box::new(Expr::Const(2.0)),
                Box::new(Expr::Func(Func::Cos, sub(rng))),
            );
            Expr::Div(sub(rng), Box::new(den))
        }
        7 => Expr::Pow(sub(rng), rng.gen_range(2..=3)),
        _ => Expr::Neg(sub(rng)),
    }
}

fn round_const(c: f64) -> f64 {
    (c * 100.0).round() / 100.0
}
