//! Scalar numerical kernels shared by every solver in the crate.
//!
//! Everything here is a pure function of its inputs.

mod quad;
mod root;
mod special;

pub use quad::{integrate, integrate_semiinf, MAX_EVALUATIONS};
pub use root::{expand_bracket, find_root, Bracket, Tolerance, MAX_EXPANSIONS};
pub use special::{erf, erfc, ln_gamma};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("root finder did not converge within {iterations} iterations (bracket width {width})")]
    MaxIterExceeded { iterations: usize, width: f64 },
    #[error("no bracket found after {expansions} expansions from seed {seed}")]
    NoBracketFound { seed: f64, expansions: usize },
    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),
    #[error("function returned NaN at x = {x}")]
    NotANumber { x: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
