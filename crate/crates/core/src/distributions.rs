//! Jump-size laws for the profit process.
//!
//! Three families are provided. Only the exponential law admits closed-form
//! exponents; gamma and deterministic jumps exercise the general root
//! solvers. A new family needs a Laplace transform, its first two moments
//! and a sampler.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::numerics::ln_gamma;

/// Below this β, `g` switches to its second-order Taylor expansion.
pub const BETA_SWITCH: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpLaw {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    Deterministic { value: f64 },
}

impl JumpLaw {
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::Gamma { shape, rate }.validated()
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        Self::Deterministic { value }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Exponential { rate } => require_positive("exponential rate", rate)?,
            Self::Gamma { shape, rate } => {
                require_positive("gamma shape", shape)?;
                require_positive("gamma rate", rate)?;
            }
            Self::Deterministic { value } => require_positive("jump size", value)?,
        }
        Ok(self)
    }

    /// Rate ν of an exponential law, if this is one.
    pub fn exponential_rate(&self) -> Option<f64> {
        match *self {
            Self::Exponential { rate } => Some(rate),
            _ => None,
        }
    }

    /// Density at `y`; `None` for the point mass.
    pub fn density(&self, y: f64) -> Option<f64> {
        match *self {
            Self::Exponential { rate } => Some(if y < 0.0 { 0.0 } else { rate * (-rate * y).exp() }),
            Self::Gamma { shape, rate } => Some(if y < 0.0 {
                0.0
            } else if y == 0.0 {
                match shape.partial_cmp(&1.0) {
                    Some(std::cmp::Ordering::Less) => f64::INFINITY,
                    Some(std::cmp::Ordering::Equal) => rate,
                    _ => 0.0,
                }
            } else {
                ((shape - 1.0) * y.ln() + shape * rate.ln() - rate * y - ln_gamma(shape)).exp()
            }),
            Self::Deterministic { .. } => None,
        }
    }

    /// `L(β) = E[exp(-β Y)]`.
    pub fn laplace(&self, beta: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => rate / (rate + beta),
            Self::Gamma { shape, rate } => (-shape * (beta / rate).ln_1p()).exp(),
            Self::Deterministic { value } => (-beta * value).exp(),
        }
    }

    /// `1 - L(β)`, computed without cancellation for small β.
    pub fn one_minus_laplace(&self, beta: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => beta / (rate + beta),
            Self::Gamma { shape, rate } => -(-shape * (beta / rate).ln_1p()).exp_m1(),
            Self::Deterministic { value } => -(-beta * value).exp_m1(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Gamma { shape, rate } => shape / rate,
            Self::Deterministic { value } => value,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 2.0 / (rate * rate),
            Self::Gamma { shape, rate } => shape * (shape + 1.0) / (rate * rate),
            Self::Deterministic { value } => value * value,
        }
    }

    /// `g(β) = (1 - L(β)) / β`, continuous at 0 with `g(0) = E[Y]`.
    pub fn g(&self, beta: f64) -> f64 {
        if beta <= BETA_SWITCH {
            self.mean() - 0.5 * beta * self.second_moment()
        } else {
            self.one_minus_laplace(beta) / beta
        }
    }

    /// One draw. For bulk sampling build a [`JumpSampler`] once instead.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }

    pub fn sampler(&self) -> JumpSampler {
        match *self {
            Self::Exponential { rate } => JumpSampler::Exponential(rate),
            Self::Gamma { shape, rate } => JumpSampler::Gamma(
                Gamma::new(shape, 1.0 / rate).expect("validated gamma parameters"),
            ),
            Self::Deterministic { value } => JumpSampler::Deterministic(value),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Self::Exponential { rate } => format!("exponential(rate={rate})"),
            Self::Gamma { shape, rate } => format!("gamma(shape={shape}, rate={rate})"),
            Self::Deterministic { value } => format!("deterministic({value})"),
        }
    }
}

/// Prebuilt sampler for repeated draws.
#[derive(Debug, Clone, Copy)]
pub enum JumpSampler {
    Exponential(f64),
    Gamma(Gamma<f64>),
    Deterministic(f64),
}

impl JumpSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            // Inverse CDF; `1 - u` lies in (0, 1].
            Self::Exponential(rate) => -(1.0 - rng.random::<f64>()).ln() / rate,
            Self::Gamma(g) => g.sample(rng),
            Self::Deterministic(v) => *v,
        }
    }
}

/// Evaluates `g(β)` with a configurable switch point for the Taylor branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEvaluator {
    law: JumpLaw,
    beta_switch: f64,
}

impl GEvaluator {
    pub fn new(law: JumpLaw) -> Self {
        Self {
            law,
            beta_switch: BETA_SWITCH,
        }
    }

    pub fn with_switch(law: JumpLaw, beta_switch: f64) -> Result<Self> {
        if !(beta_switch >= 0.0 && beta_switch.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta_switch must be finite and non-negative, got {beta_switch}"
            )));
        }
        Ok(Self { law, beta_switch })
    }

    pub fn law(&self) -> &JumpLaw {
        &self.law
    }

    pub fn g(&self, beta: f64) -> f64 {
        if beta <= self.beta_switch {
            self.taylor(beta)
        } else {
            self.direct(beta)
        }
    }

    fn taylor(&self, beta: f64) -> f64 {
        self.law.mean() - 0.5 * beta * self.law.second_moment()
    }

    fn direct(&self, beta: f64) -> f64 {
        self.law.one_minus_laplace(beta) / beta
    }
}

pub fn laplace(law: &JumpLaw, beta: f64) -> f64 {
    law.laplace(beta)
}

pub fn g_of_beta(ev: &GEvaluator, beta: f64) -> f64 {
    ev.g(beta)
}
