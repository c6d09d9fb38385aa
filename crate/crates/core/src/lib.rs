pub mod cli;
pub mod distributions;
pub mod error;
pub mod market;
pub mod montecarlo;
pub mod numerics;
mod serde_ext;
pub mod solver;
pub mod statedep;

pub use distributions::{GEvaluator, JumpLaw};
pub use error::{Error, Result};
pub use market::{MarketParams, MarketRuinSolution};
pub use solver::{Investment, ModelParams, Regime, RuinSolution};
