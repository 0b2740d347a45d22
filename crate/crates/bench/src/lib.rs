//! Benchmark inputs shared by the criterion targets.

use colombeau_core::{parse, Expr, Grid};

/// Expression using every elementary function, quotients and powers.
pub const MIXED: &str = "exp(-x^2/2)*sin(3*x) + cos(x)/(1 + x^2) + sin(sqrt(2)*x)^3";

pub fn mixed() -> Expr {
    parse(MIXED).expect("benchmark expression parses")
}

pub fn seminorm_grid() -> Grid {
    Grid::uniform(-10.0, 10.0, 1001)
}
