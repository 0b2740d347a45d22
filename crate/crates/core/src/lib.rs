//! Numerical workbench for Colombeau-type generalized functions built from
//! ε-parametrized nets of smooth functions.
//!
//! Modules, bottom-up:
//! - [`jetcalc`]: expression language and jet (truncated Taylor) arithmetic
//! - [`nets`]: seminorms, ε-order fitting, moderate/negligible classification
//! - [`embedding`]: moment-vanishing mollifiers and the regularization map
//! - [`seeley`]: Seeley sequences and the half-line extension operator
//! - [`aaa`]: vanishing checks, Bochner probes, decompositions, composition
//! - [`ndds`]: neutral difference-differential operators and the ODE solver

pub mod aaa;
pub mod catalog;
pub mod embedding;
pub mod error;
pub mod func;
pub mod jetcalc;
pub mod ndds;
pub mod nets;
pub mod quadrature;
pub mod seeley;

pub use error::{Error, EvalError, Result};
pub use func::{Fun, SmoothFn};
pub use jetcalc::{parse, Expr, Jet};
pub use nets::{Classification, Domain, EpsSchedule, Grid, Net, Thresholds, Verdict};
