use std::collections::BTreeSet;
use std::fmt;

use super::taylor::{Jet, Taylor};
use crate::error::EvalError;

/// Default bound on jet order.
pub const DEFAULT_MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

/// Expression over the variable `x`, named parameters and real constants.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var,
    Param(String),
    Const(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Denominator is checked against zero on every evaluation.
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Func(Func, Box<Expr>),
    /// Square root of a variable-free, strictly positive subexpression.
    Sqrt(Box<Expr>),
    /// `Shift(e, w)` evaluates `e` at `x + w`.
    Shift(Box<Expr>, f64),
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var() -> Self {
        Expr::Var
    }

    pub fn sin(self) -> Self {
        Expr::Func(Func::Sin, Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Func(Func::Cos, Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Func(Func::Exp, Box::new(self))
    }

    pub fn powi(self, n: i32) -> Self {
        Expr::Pow(Box::new(self), n)
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Var | Expr::Shift(..) => true,
            Expr::Param(_) | Expr::Const(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) | Expr::Sqrt(a) => a.depends_on_x(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
        }
    }

    /// Names of all parameters occurring in the expression.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Var | Expr::Const(_) => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) | Expr::Sqrt(a) | Expr::Shift(a, _) => {
                a.collect_params(out)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// Replaces every occurrence of parameter `name` by the constant `value`.
    pub fn bind(&self, name: &str, value: f64) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Param(p) if p == name => Some(Expr::Const(value)),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        let bx = |e: &Expr| Box::new(e.map_leaves(f));
        match self {
            Expr::Var | Expr::Param(_) | Expr::Const(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(bx(a)),
            Expr::Add(a, b) => Expr::Add(bx(a), bx(b)),
            Expr::Sub(a, b) => Expr::Sub(bx(a), bx(b)),
            Expr::Mul(a, b) => Expr::Mul(bx(a), bx(b)),
            Expr::Div(a, b) => Expr::Div(bx(a), bx(b)),
            Expr::Pow(a, n) => Expr::Pow(bx(a), *n),
            Expr::Func(g, a) => Expr::Func(*g, bx(a)),
            Expr::Sqrt(a) => Expr::Sqrt(bx(a)),
            Expr::Shift(a, w) => Expr::Shift(bx(a), *w),
        }
    }

    /// `translate(e, w)(x) = e(x + w)`. Nested shifts are merged and a zero
    /// shift is dropped, so `translate(translate(e, a), b)` is structurally
    /// `translate(e, a + b)`.
    pub fn translate(&self, omega: f64) -> Expr {
        if omega == 0.0 {
            return self.clone();
        }
        if !self.depends_on_x() {
            return self.clone();
        }
        match self {
            Expr::Shift(inner, w) => {
                let total = w + omega;
                if total == 0.0 {
                    (**inner).clone()
                } else {
                    Expr::Shift(inner.clone(), total)
                }
            }
            _ => Expr::Shift(Box::new(self.clone()), omega),
        }
    }

    /// Substitutes `inner` for the variable: the result is `self ∘ inner`.
    pub fn compose(&self, inner: &Expr) -> Expr {
        let bx = |e: &Expr| Box::new(e.compose(inner));
        match self {
            Expr::Var => inner.clone(),
            Expr::Param(_) | Expr::Const(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(bx(a)),
            Expr::Add(a, b) => Expr::Add(bx(a), bx(b)),
            Expr::Sub(a, b) => Expr::Sub(bx(a), bx(b)),
            Expr::Mul(a, b) => Expr::Mul(bx(a), bx(b)),
            Expr::Div(a, b) => Expr::Div(bx(a), bx(b)),
            Expr::Pow(a, n) => Expr::Pow(bx(a), *n),
            Expr::Func(g, a) => Expr::Func(*g, bx(a)),
            Expr::Sqrt(a) => Expr::Sqrt(bx(a)),
            Expr::Shift(a, w) => {
                let shifted = Expr::Add(Box::new(inner.clone()), Box::new(Expr::Const(*w)));
                a.compose(&shifted)
            }
        }
    }

    /// Scalar evaluation.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = self.eval_raw(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { x })
        }
    }

    fn eval_raw(&self, x: f64) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Var => x,
            Expr::Param(p) => return Err(EvalError::UnboundParameter(p.clone())),
            Expr::Const(c) => *c,
            Expr::Neg(a) => -a.eval_raw(x)?,
            Expr::Add(a, b) => a.eval_raw(x)? + b.eval_raw(x)?,
            Expr::Sub(a, b) => a.eval_raw(x)? - b.eval_raw(x)?,
            Expr::Mul(a, b) => a.eval_raw(x)? * b.eval_raw(x)?,
            Expr::Div(a, b) => {
                let d = b.eval_raw(x)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero { x });
                }
                a.eval_raw(x)? / d
            }
            Expr::Pow(a, n) => {
                let b = a.eval_raw(x)?;
                if *n < 0 && b == 0.0 {
                    return Err(EvalError::DivisionByZero { x });
                }
                b.powi(*n)
            }
            Expr::Func(g, a) => {
                let v = a.eval_raw(x)?;
                match g {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
            Expr::Sqrt(a) => {
                let v = a.eval_raw(x)?;
                if v <= 0.0 {
                    return Err(EvalError::Domain(format!("sqrt of non-positive constant {v}")));
                }
                v.sqrt()
            }
            Expr::Shift(a, w) => a.eval_raw(x + w)?,
        })
    }

    /// Evaluates the expression on a Taylor series standing in for `x`.
    pub fn eval_taylor(&self, input: &Taylor) -> Result<Taylor, EvalError> {
        let x = input.value();
        let order = input.order();
        Ok(match self {
            Expr::Var => input.clone(),
            Expr::Param(p) => return Err(EvalError::UnboundParameter(p.clone())),
            Expr::Const(c) => Taylor::constant(*c, order),
            Expr::Neg(a) => a.eval_taylor(input)?.neg(),
            Expr::Add(a, b) => a.eval_taylor(input)?.add(&b.eval_taylor(input)?),
            Expr::Sub(a, b) => a.eval_taylor(input)?.sub(&b.eval_taylor(input)?),
            Expr::Mul(a, b) => a.eval_taylor(input)?.mul(&b.eval_taylor(input)?),
            Expr::Div(a, b) => a.eval_taylor(input)?.div(&b.eval_taylor(input)?, x)?,
            Expr::Pow(a, n) => a.eval_taylor(input)?.powi(*n, x)?,
            Expr::Func(g, a) => {
                let t = a.eval_taylor(input)?;
                match g {
                    Func::Sin => t.sin_cos().0,
                    Func::Cos => t.sin_cos().1,
                    Func::Exp => t.exp(),
                }
            }
            Expr::Sqrt(a) => {
                let v = a.eval(x)?;
                if v <= 0.0 {
                    return Err(EvalError::Domain(format!("sqrt of non-positive constant {v}")));
                }
                Taylor::constant(v.sqrt(), order)
            }
            Expr::Shift(a, w) => a.eval_taylor(&input.add_const(*w))?,
        })
    }

    /// Derivatives `f^(j)(x)` for `j = 0..=k`, with `k` bounded by
    /// [`DEFAULT_MAX_ORDER`].
    pub fn jet(&self, x: f64, k: usize) -> Result<Jet, EvalError> {
        self.jet_bounded(x, k, DEFAULT_MAX_ORDER)
    }

    pub fn jet_bounded(&self, x: f64, k: usize, bound: usize) -> Result<Jet, EvalError> {
        if k > bound {
            return Err(EvalError::OrderTooHigh {
                requested: k,
                bound,
            });
        }
        self.jet_unbounded(x, k)
    }

    pub(crate) fn jet_unbounded(&self, x: f64, k: usize) -> Result<Jet, EvalError> {
        let t = self.eval_taylor(&Taylor::variable(x, k))?.check_finite(x)?;
        Ok(t.to_jet(x))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn fmt_const(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{})", -c)
    } else {
        write!(f, "{c}")
    }
}

fn fmt_child(e: &Expr, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var => write!(f, "x"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Const(c) => fmt_const(*c, f),
            Expr::Neg(a) => {
                write!(f, "-")?;
                fmt_child(a, a.precedence() < 3, f)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let p = self.precedence();
                let op = match self {
                    Expr::Add(..) => "+",
                    Expr::Sub(..) => "-",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                fmt_child(a, a.precedence() < p, f)?;
                write!(f, " {op} ")?;
                fmt_child(b, b.precedence() <= p, f)
            }
            Expr::Pow(a, n) => {
                fmt_child(a, a.precedence() < 5, f)?;
                write!(f, "^{n}")
            }
            Expr::Func(g, a) => write!(f, "{}({a})", g.name()),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Shift(a, w) => write!(f, "shift({a}, {w})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin() -> Expr {
        Expr::Var.sin()
    }

    #[test]
    fn sine_jet_at_zero() {
        assert_eq!(sin().jet(0.0, 3).unwrap().derivs, vec![0.0, 1.0, 0.0, -1.0]);
    }

    #[test]
    fn exp_jet_at_zero() {
        assert_eq!(Expr::Var.exp().jet(0.0, 4).unwrap().derivs, vec![1.0; 5]);
    }

    #[test]
    fn square_jet_at_three() {
        let sq = Expr::Var.powi(2);
        assert_eq!(sq.jet(3.0, 3).unwrap().derivs, vec![9.0, 6.0, 2.0, 0.0]);
    }

    #[test]
    fn translate_sine_by_pi_is_negated_sine() {
        let t = sin().translate(std::f64::consts::PI);
        for x in [0.0, 1.0, 2.0] {
            assert!((t.eval(x).unwrap() + x.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn translate_by_zero_is_structural_identity() {
        let e = sin().exp();
        assert_eq!(e.translate(0.0), e);
    }

    #[test]
    fn translate_square_by_one() {
        assert_eq!(Expr::Var.powi(2).translate(1.0).eval(2.0).unwrap(), 9.0);
    }

    #[test]
    fn translations_compose_additively() {
        let e = sin().exp();
        assert_eq!(e.translate(0.5).translate(1.25), e.translate(1.75));
        assert_eq!(e.translate(0.5).translate(-0.5), e);
    }

    #[test]
    fn translated_jet_equals_jet_at_shifted_point() {
        let e = Expr::Var.sin().exp().powi(2);
        let (x, w) = (0.3, 1.7);
        assert_eq!(e.translate(w).jet(x, 5).unwrap(), {
            let mut j = e.jet(x + w, 5).unwrap();
            j.x = x;
            j
        });
    }

    #[test]
    fn division_by_zero_is_reported() {
        let e = Expr::Div(Box::new(Expr::Const(1.0)), Box::new(Expr::Var));
        assert!(matches!(e.eval(0.0), Err(EvalError::DivisionByZero { .. })));
        assert!(matches!(e.jet(0.0, 2), Err(EvalError::DivisionByZero { .. })));
    }

    #[test]
    fn jet_order_is_bounded() {
        assert!(matches!(
            sin().jet(0.0, 9),
            Err(EvalError::OrderTooHigh { requested: 9, bound: 8 })
        ));
        assert_eq!(sin().jet_bounded(0.0, 9, 12).unwrap().derivs.len(), 10);
    }

    #[test]
    fn unbound_parameter_is_an_error() {
        let e = Expr::Param("eps".into());
        assert!(matches!(e.eval(1.0), Err(EvalError::UnboundParameter(_))));
        assert_eq!(e.bind("eps", 0.25).eval(1.0).unwrap(), 0.25);
    }

    #[test]
    fn composition_through_a_shift() {
        // shift(sin, 1) ∘ x^2 = sin(x^2 + 1)
        let outer = sin().translate(1.0);
        let c = outer.compose(&Expr::Var.powi(2));
        assert!((c.eval(0.7).unwrap() - (0.49f64 + 1.0).sin()).abs() < 1e-15);
    }
}
