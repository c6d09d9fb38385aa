//! Joint R&D spending and investment of a constant amount `A` in a
//! geometric-Brownian index `dS/S = μ dt + σ dW`.
//!
//! The index adds the term `-μ²/(2σ²β)` to every exponent equation and the
//! optimal exposure is `A* = μ/(σ²β)`.

use serde::Serialize;

use crate::distributions::JumpLaw;
use crate::error::{require_positive, Error, Result};
use crate::serde_ext::extended_opt_f64;
use crate::solver::{optimal_rate, solve_increasing, Investment, ModelParams, Residuals};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct MarketParams {
    pub mu: f64,
    pub sigma: f64,
}

impl MarketParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let m = Self { mu, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("mu", self.mu)?;
        require_positive("sigma", self.sigma)
    }

    /// `μ² / (2σ²)`.
    pub fn half_sharpe_sq(&self) -> f64 {
        self.mu * self.mu / (2.0 * self.sigma * self.sigma)
    }

    /// Optimal exposure for exponent `beta`.
    pub fn exposure(&self, beta: f64) -> f64 {
        self.mu / (self.sigma * self.sigma * beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MarketRegime {
    SubLinearMarket,
    SingularMarketNoInvest,
    SingularMarketMaxInvest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketRuinSolution {
    pub beta: f64,
    pub c_star: Investment,
    pub a_star: f64,
    pub regime: MarketRegime,
    /// Root of `ρ - λ g(β) - μ²/(2σ²β)`, linear case only.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "extended_opt_f64")]
    pub beta1: Option<f64>,
    /// Root of `1 - δ g(β)` (0 if `δE[Y] <= 1`), linear case only.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "extended_opt_f64")]
    pub beta2: Option<f64>,
    pub residuals: Residuals,
}

impl MarketRuinSolution {
    pub fn value_at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.beta * x).exp()
        }
    }
}

/// `H(β) = ρ - (1/γ - 1)(δγ g)^(1/(1-γ)) - λ g - μ²/(2σ²β)`.
pub fn h_function(law: &JumpLaw, p: &ModelParams, m: &MarketParams, beta: f64) -> f64 {
    let g = law.g(beta);
    p.rho - (1.0 / p.gamma - 1.0) * optimal_rate(p, g) - p.lambda * g - m.half_sharpe_sq() / beta
}

/// Sub-linear case. Always feasible: `H → -∞` as `β → 0⁺`.
pub fn solve_market_sublinear(
    law: &JumpLaw,
    p: &ModelParams,
    m: &MarketParams,
) -> Result<MarketRuinSolution> {
    p.validate()?;
    m.validate()?;
    if !(p.gamma > 0.0 && p.gamma < 1.0) {
        return Err(Error::WrongRegime(format!(
            "sub-linear market solver needs 0 < gamma < 1, got {}",
            p.gamma
        )));
    }
    let h = |b: f64| h_function(law, p, m, b);
    let beta = solve_increasing(h)?;
    let c = optimal_rate(p, law.g(beta));
    // With the index, the implicit equation holds with ρ replaced by ρ - μ²/(2σ²β).
    let rho_eff = p.rho - m.half_sharpe_sq() / beta;
    let implicit = p.lambda + (1.0 - p.gamma) * p.delta * c.powf(p.gamma)
        - rho_eff * p.delta * p.gamma * c.powf(p.gamma - 1.0);
    Ok(MarketRuinSolution {
        beta,
        c_star: Investment::Rate(c),
        a_star: m.exposure(beta),
        regime: MarketRegime::SubLinearMarket,
        beta1: None,
        beta2: None,
        residuals: Residuals {
            characteristic: h(beta),
            implicit: Some(implicit),
        },
    })
}

/// `F(β)/β = ρ - λ g(β) - μ²/(2σ²β)`.
pub fn f_over_beta(law: &JumpLaw, p: &ModelParams, m: &MarketParams, beta: f64) -> f64 {
    p.rho - p.lambda * law.g(beta) - m.half_sharpe_sq() / beta
}

/// Root of `ρ - λ g(β) - μ²/(2σ²β) = 0`; exists for every parameter set.
pub fn beta_one(law: &JumpLaw, p: &ModelParams, m: &MarketParams) -> Result<f64> {
    solve_increasing(|b| f_over_beta(law, p, m, b))
}

/// Root of `1 - δ g(β) = 0` when `δE[Y] > 1`, else 0.
pub fn beta_two(law: &JumpLaw, delta: f64) -> Result<f64> {
    if delta * law.mean() <= 1.0 {
        return Ok(0.0);
    }
    solve_increasing(|b| 1.0 - delta * law.g(b))
}

/// Linear case `γ = 1`: exponent `max(β₁, β₂)`.
pub fn solve_market_singular(
    law: &JumpLaw,
    p: &ModelParams,
    m: &MarketParams,
) -> Result<MarketRuinSolution> {
    p.validate()?;
    m.validate()?;
    if p.gamma != 1.0 {
        return Err(Error::WrongRegime(format!(
            "singular market solver needs gamma = 1, got {}",
            p.gamma
        )));
    }
    let b1 = beta_one(law, p, m)?;
    let b2 = beta_two(law, p.delta)?;
    let (beta, regime, c_star, characteristic) = if b1 > b2 {
        (b1, MarketRegime::SingularMarketNoInvest, Investment::Rate(0.0), f_over_beta(law, p, m, b1))
    } else {
        (b2, MarketRegime::SingularMarketMaxInvest, Investment::MaxInvest, 1.0 - p.delta * law.g(b2))
    };
    Ok(MarketRuinSolution {
        beta,
        c_star,
        a_star: m.exposure(beta),
        regime,
        beta1: Some(b1),
        beta2: Some(b2),
        residuals: Residuals {
            characteristic,
            implicit: None,
        },
    })
}

/// Exponent when spending a constant `c` with the index exposure optimised:
/// root of `(ρ + c) - (λ + δc) g(β) - μ²/(2σ²β) = 0`.
///
/// At `c = 0` this is β₁. As `c → ∞` it tends to β₂, increasing on the way
/// when β₁ < β₂ and decreasing when β₁ > β₂.
pub fn beta_of_capped_c(law: &JumpLaw, p: &ModelParams, m: &MarketParams, c: f64) -> Result<f64> {
    p.validate()?;
    m.validate()?;
    if p.gamma != 1.0 {
        return Err(Error::WrongRegime(format!(
            "capped exponent is defined for gamma = 1, got {}",
            p.gamma
        )));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "spending rate must be finite and non-negative, got {c}"
        )));
    }
    let k = m.half_sharpe_sq();
    solve_increasing(|b| (p.rho + c) - (p.lambda + p.delta * c) * law.g(b) - k / b)
}

/// Dispatches on the regime of `γ`; `γ > 1` has no finite-exponent solution.
pub fn solve_market(law: &JumpLaw, p: &ModelParams, m: &MarketParams) -> Result<MarketRuinSolution> {
    p.validate()?;
    if p.gamma < 1.0 {
        solve_market_sublinear(law, p, m)
    } else if p.gamma == 1.0 {
        solve_market_singular(law, p, m)
    } else {
        Err(Error::WrongRegime(format!(
            "market model with gamma = {} > 1 is degenerate (ruin probability zero)",
            p.gamma
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{alpha_no_investment, solve_singular, solve_sublinear};

    fn exp(nu: f64) -> JumpLaw {
        JumpLaw::exponential(nu).unwrap()
    }

    fn params(rho: f64, lambda: f64, delta: f64, gamma: f64) -> ModelParams {
        ModelParams::new(rho, lambda, delta, gamma).unwrap()
    }

    fn fig1_market() -> MarketParams {
        MarketParams::new(0.1, 0.2).unwrap()
    }

    #[test]
    fn figure_one_market_exponent() {
        let s = solve_market_sublinear(&exp(0.1), &params(0.1, 0.1, 1.0, 0.5), &fig1_market()).unwrap();
        assert!((s.beta - 2.998_523_174_128_932_3).abs() < 1e-12);
        assert!((s.a_star - 0.833_743_764_787_226_4).abs() < 1e-12);
        // βρ - βδ²/(4(ν+β)²) - λβ/(ν+β) - μ²/(2σ²) = 0.
        let b = s.beta;
        let r = b * 0.1 - b / (4.0 * (0.1 + b) * (0.1 + b)) - 0.1 * b / (0.1 + b) - 0.125;
        assert!(r.abs() < 1e-12);
        assert!(s.residuals.implicit.unwrap().abs() < 1e-9);
        assert!((s.a_star * 0.04 * s.beta / 0.1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vanishing_drift_recovers_no_market_exponent() {
        let law = exp(0.1);
        let p = params(0.1, 0.1, 1.0, 0.5);
        let s = solve_market_sublinear(&law, &p, &MarketParams::new(1e-6, 0.2).unwrap()).unwrap();
        let base = solve_sublinear(&law, &p).unwrap();
        assert!((s.beta - base.beta).abs() < 1e-4);
    }

    #[test]
    fn market_feasible_where_no_market_is_not() {
        let s = solve_market_sublinear(&exp(0.1), &params(100.0, 0.1, 1.0, 0.5), &fig1_market()).unwrap();
        assert!(s.beta > 0.0 && s.a_star > 0.0);
    }

    #[test]
    fn singular_market_branches() {
        let law = exp(0.1);
        let s = solve_market_singular(&law, &params(0.1, 0.1, 1.0, 1.0), &fig1_market()).unwrap();
        assert!((s.beta2.unwrap() - 0.9).abs() < 1e-12);

        let big = MarketParams::new(10.0, 0.1).unwrap();
        let s = solve_market_singular(&law, &params(0.1, 0.1, 1.0, 1.0), &big).unwrap();
        assert!(s.beta1.unwrap() > s.beta2.unwrap());
        assert_eq!(s.regime, MarketRegime::SingularMarketNoInvest);
        assert_eq!(s.c_star, Investment::Rate(0.0));

        // λE[Y] < ρ and δE[Y] > 1: the max-invest exponent wins as μ → 0.
        let p = params(2.0, 0.1, 1.0, 1.0);
        let s = solve_market_singular(&law, &p, &MarketParams::new(1e-6, 0.2).unwrap()).unwrap();
        let classical = solve_singular(&law, &p).unwrap();
        assert_eq!(s.regime, MarketRegime::SingularMarketMaxInvest);
        assert!((s.beta - classical.beta).abs() < 1e-8);
    }

    #[test]
    fn beta_two_zero_without_enough_leverage() {
        assert_eq!(beta_two(&exp(2.0), 1.0).unwrap(), 0.0);
        let s = solve_market_singular(&exp(2.0), &params(1.0, 1.0, 1.0, 1.0), &fig1_market()).unwrap();
        assert_eq!(s.regime, MarketRegime::SingularMarketNoInvest);
    }

    #[test]
    fn capped_exponent_limits() {
        let law = exp(0.1);
        let m = fig1_market();
        let p = params(1.0, 0.05, 1.0, 1.0);
        let b1 = beta_one(&law, &p, &m).unwrap();
        assert!((beta_of_capped_c(&law, &p, &m, 0.0).unwrap() - b1).abs() < 1e-13);
        let mut prev = b1;
        for k in 0..=6 {
            let b = beta_of_capped_c(&law, &p, &m, 10f64.powi(k)).unwrap();
            assert!(b > prev && b <= 0.9);
            prev = b;
        }
        assert!((prev - 0.9).abs() < 1e-3);
    }

    #[test]
    fn capped_exponent_decreases_when_beta_one_dominates() {
        let law = exp(0.1);
        let m = fig1_market();
        let p = params(0.1, 0.1, 1.0, 1.0);
        let b0 = beta_of_capped_c(&law, &p, &m, 0.0).unwrap();
        let b1 = beta_of_capped_c(&law, &p, &m, 10.0).unwrap();
        assert!(b0 > 0.9 && b1 < b0);
    }

    #[test]
    fn wrong_regime() {
        let law = exp(1.0);
        let m = fig1_market();
        assert!(solve_market(&law, &params(1.0, 1.0, 1.0, 1.5), &m).is_err());
        assert!(solve_market_sublinear(&law, &params(1.0, 1.0, 1.0, 1.0), &m).is_err());
        assert!(beta_of_capped_c(&law, &params(1.0, 1.0, 1.0, 0.5), &m, 1.0).is_err());
        assert!(MarketParams::new(0.0, 1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn market_dominates_and_orders_values(
                rho in 0.05f64..5.0,
                lambda in 0.05f64..5.0,
                delta in 0.05f64..5.0,
                gamma in 0.05f64..0.95,
                nu in 0.05f64..5.0,
                mu in 0.01f64..1.0,
                sigma in 0.05f64..2.0,
            ) {
                let law = exp(nu);
                let p = params(rho, lambda, delta, gamma);
                let m = MarketParams::new(mu, sigma).unwrap();
                let s = solve_market_sublinear(&law, &p, &m).unwrap();
                prop_assert!(s.a_star > 0.0);
                prop_assert!(s.residuals.characteristic.abs() <= 1e-9);
                let base = solve_sublinear(&law, &p).unwrap();
                if base.feasible {
                    prop_assert!(s.beta >= base.beta);
                    if let Some(a) = alpha_no_investment(&law, rho, lambda).unwrap() {
                        for x in [0.1, 1.0, 5.0] {
                            prop_assert!(s.value_at(x) <= base.value_at(x));
                            prop_assert!(base.value_at(x) <= (-a * x).exp());
                        }
                    }
                }
            }

            #[test]
            fn capped_exponent_bounded_by_beta_two(
                c in 0.0f64..1e4,
                lambda in 0.01f64..0.09,
            ) {
                let law = exp(0.1);
                let m = MarketParams::new(0.1, 0.2).unwrap();
                let p = params(1.0, lambda, 1.0, 1.0);
                let b = beta_of_capped_c(&law, &p, &m, c).unwrap();
                let b2 = beta_two(&law, 1.0).unwrap();
                let b1 = beta_one(&law, &p, &m).unwrap();
                prop_assert!(b1 < b2);
                prop_assert!(b >= b1 - 1e-12 && b <= b2 + 1e-12);
            }
        }
    }
}
