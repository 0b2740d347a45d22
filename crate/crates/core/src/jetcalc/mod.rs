//! Expression language and arbitrary-order jet arithmetic.

mod expr;
mod parser;
pub mod random;
mod taylor;

pub use expr::{Expr, Func, DEFAULT_MAX_ORDER};
pub use parser::parse;
pub use taylor::{Jet, Taylor};

use crate::error::{EvalError, Result};

/// Jet of `expr` at `x` through order `k`.
pub fn jet(expr: &Expr, x: f64, k: usize) -> std::result::Result<Jet, EvalError> {
    expr.jet(x, k)
}

pub fn translate(expr: &Expr, omega: f64) -> Expr {
    expr.translate(omega)
}

/// Parses and binds `eps`, the conventional net parameter.
pub fn parse_net_template(text: &str) -> Result<Expr> {
    let e = parse(text)?;
    let extra: Vec<_> = e.params().into_iter().filter(|p| p != "eps").collect();
    if !extra.is_empty() {
        return Err(crate::error::Error::InvalidInput(format!(
            "unknown parameters {extra:?}; only `eps` may appear in a net template"
        )));
    }
    Ok(e)
}
