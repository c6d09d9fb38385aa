//! The two state-dependent models with closed-form ruin probabilities.

use serde::Serialize;

use super::{Coefficient, Policy, StateModel};
use crate::error::{require_positive, Error, Result};
use crate::numerics::erfc;
use crate::solver::implicit_c_star;

/// `ρ(x) = ρ0`, `λ(x) = λ0(c1 x + c2)`, `δ(x) = δ0(c1 x + c2)`, `γ < 1`.
///
/// The `(c1 x + c2)` factor cancels in the pointwise optimality condition, so
/// the optimal rate is a constant `C0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateExampleIParams {
    pub rho0: f64,
    pub lambda0: f64,
    pub delta0: f64,
    pub c1: f64,
    pub c2: f64,
    pub nu: f64,
    pub gamma: f64,
    pub c0: f64,
}

impl StateExampleIParams {
    pub fn new(rho0: f64, lambda0: f64, delta0: f64, c1: f64, c2: f64, nu: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [
            ("rho0", rho0),
            ("lambda0", lambda0),
            ("delta0", delta0),
            ("c1", c1),
            ("c2", c2),
            ("nu", nu),
        ] {
            require_positive(name, v)?;
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "first example needs 0 < gamma < 1, got {gamma}"
            )));
        }
        let c0 = implicit_c_star(rho0, lambda0, delta0, gamma)?;
        Ok(Self {
            rho0,
            lambda0,
            delta0,
            c1,
            c2,
            nu,
            gamma,
            c0,
        })
    }

    /// Same model with the spending rate replaced by `c0` (0 gives the
    /// no-investment curve).
    pub fn with_c0(self, c0: f64) -> Result<Self> {
        if !(c0 >= 0.0 && c0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spending rate must be finite and non-negative, got {c0}"
            )));
        }
        Ok(Self { c0, ..self })
    }

    /// `(λ0 + δ0 C0^γ) / (ρ0 + C0)`.
    pub fn k(&self) -> f64 {
        (self.lambda0 + self.delta0 * self.c0.powf(self.gamma)) / (self.rho0 + self.c0)
    }

    pub fn a(&self) -> f64 {
        self.c1
    }

    pub fn b(&self) -> f64 {
        self.c2
    }

    pub fn c(&self) -> f64 {
        self.nu - self.k() * self.c2
    }

    pub fn d(&self) -> f64 {
        self.k() * self.c1 / 2.0
    }

    pub fn model(&self) -> Result<StateModel> {
        StateModel::new(
            Coefficient::constant(self.rho0),
            Coefficient::affine(self.lambda0, self.c1, self.c2),
            Coefficient::affine(self.delta0, self.c1, self.c2),
            self.gamma,
        )
    }

    pub fn policy(&self) -> Policy {
        Policy::Constant { rate: self.c0 }
    }

    fn unnormalised(&self, x: f64) -> f64 {
        let (a, b, c, d) = (self.a(), self.b(), self.c(), self.d());
        let sd = d.sqrt();
        2.0 * a * sd * (c * x - d * x * x).exp()
            + std::f64::consts::PI.sqrt()
                * (c * c / (4.0 * d)).exp()
                * (a * c + 2.0 * b * d)
                * erfc((2.0 * d * x - c) / (2.0 * sd))
    }
}

/// Ruin probability of the first example under the constant rate `C0`.
pub fn closed_form_state_ex1(p: &StateExampleIParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("wealth must be non-negative, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok((p.unnormalised(x) / p.unnormalised(0.0)).clamp(0.0, 1.0))
}

/// `ρ(x) = ρ0(c1 x + c2)`, `λ(x) = (ν + λ0/(1+x)) ρ(x)`, `δ(x) = δ0`, `γ = 1`,
/// with `ν < δ0 < ν + λ0`. Spending switches on above
/// `x* = (λ0 - δ0 + ν)/(δ0 - ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateExampleIIParams {
    pub rho0: f64,
    pub c1: f64,
    pub c2: f64,
    pub lambda0: f64,
    pub delta0: f64,
    pub nu: f64,
    pub x_star: f64,
}

impl StateExampleIIParams {
    pub fn new(rho0: f64, c1: f64, c2: f64, lambda0: f64, delta0: f64, nu: f64) -> Result<Self> {
        for (name, v) in [
            ("rho0", rho0),
            ("c2", c2),
            ("lambda0", lambda0),
            ("delta0", delta0),
            ("nu", nu),
        ] {
            require_positive(name, v)?;
        }
        if !(c1 >= 0.0 && c1.is_finite()) {
            return Err(Error::InvalidParameter(format!("c1 must be non-negative, got {c1}")));
        }
        if !(nu < delta0 && delta0 < nu + lambda0) {
            return Err(Error::InvalidParameter(format!(
                "second example needs nu < delta0 < nu + lambda0, got nu = {nu}, delta0 = {delta0}, lambda0 = {lambda0}"
            )));
        }
        if lambda0 == 1.0 {
            return Err(Error::InvalidParameter(
                "lambda0 = 1 makes the below-threshold branch singular (1/(1 - lambda0)); perturb lambda0".into(),
            ));
        }
        Ok(Self {
            rho0,
            c1,
            c2,
            lambda0,
            delta0,
            nu,
            x_star: (lambda0 - delta0 + nu) / (delta0 - nu),
        })
    }

    pub fn model(&self) -> Result<StateModel> {
        StateModel::new(
            Coefficient::affine(self.rho0, self.c1, self.c2),
            Coefficient::rational(self.nu, self.lambda0),
            Coefficient::constant(self.delta0),
            1.0,
        )
    }

    /// `∫_x^∞` of the integrand behind the ratio form, scaled by `(1+x*)^λ0`.
    fn tail(&self, x: f64) -> f64 {
        let (nu, l0, d0, xs) = (self.nu, self.lambda0, self.delta0, self.x_star);
        let above = |x: f64| d0 / (d0 - nu) * (-(d0 - nu) * (x - xs)).exp();
        if x >= xs {
            return above(x);
        }
        let u = (1.0 + x) / (1.0 + xs);
        // (1+x)^p (1+x*)^λ0 written through u to keep the powers bounded.
        let pow = |p: f64| u.powf(p) * (1.0 + xs).powf(p + l0);
        nu * (pow(1.0 - l0) - (1.0 + xs)) / (l0 - 1.0) + (pow(-l0) - 1.0) + above(xs)
    }
}

/// Ruin probability of the second example under unbounded spending above `x*`.
pub fn closed_form_state_ex2(p: &StateExampleIIParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("wealth must be non-negative, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok((p.tail(x) / p.tail(0.0)).clamp(0.0, 1.0))
}

/// Ruin probability of the second example without spending. Needs `λ0 > 1`.
pub fn no_investment_state_ex2(p: &StateExampleIIParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("wealth must be non-negative, got {x}")));
    }
    let l0 = p.lambda0;
    if x == 0.0 && l0 > 1.0 {
        return Ok(1.0);
    }
    if l0 <= 1.0 {
        return Err(Error::NonIntegrable(format!(
            "without spending the ruin probability is 1 when lambda0 <= 1, got {l0}"
        )));
    }
    let y = 1.0 + x;
    Ok((p.nu * y.powf(1.0 - l0) + (l0 - 1.0) * y.powf(-l0)) / (l0 + p.nu - 1.0))
}
