//! Exponents and optimal R&D rates for the constant-coefficient model
//! without market investment.
//!
//! Wealth follows `dX = -(ρ + C) dt + dJ`, with profit jumps arriving at
//! intensity `λ + δ C^γ`. Every optimal value function here is `exp(-β x)`.

mod asymptotics;

pub use asymptotics::{asymptotic_report, AsymptoticReport, AsymptoticRow, Knob};

use serde::{Serialize, Serializer};

use crate::distributions::JumpLaw;
use crate::error::{require_positive, Error, Result};
use crate::numerics::{expand_bracket, find_root, Bracket, NumericsError, Tolerance};
use crate::serde_ext::extended_f64;

/// Bracket seed for every exponent search.
pub const BRACKET_SEED: f64 = 1.0;

/// Root tolerance used by all exponent solves; tight enough that exponents
/// agree with closed forms to ~1e-13.
pub fn solver_tolerance() -> Tolerance {
    Tolerance {
        abs_x: 1e-14,
        abs_f: 1e-15,
        max_iter: 400,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub rho: f64,
    pub lambda: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(rho: f64, lambda: f64, delta: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            rho,
            lambda,
            delta,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("rho", self.rho)?;
        require_positive("lambda", self.lambda)?;
        require_positive("delta", self.delta)?;
        require_positive("gamma", self.gamma)
    }

    pub fn with_rho(self, rho: f64) -> Self {
        Self { rho, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    /// Profit-arrival intensity under a constant spending rate `c`.
    pub fn intensity(&self, c: f64) -> f64 {
        if c == 0.0 {
            self.lambda
        } else {
            self.lambda + self.delta * c.powf(self.gamma)
        }
    }
}

/// Constant R&D spending rate. `MaxInvest` is the unbounded-spending limit
/// of the linear case and never enters arithmetic as a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Investment {
    Rate(f64),
    MaxInvest,
}

impl Investment {
    pub fn rate(&self) -> Option<f64> {
        match self {
            Self::Rate(c) => Some(*c),
            Self::MaxInvest => None,
        }
    }

    /// Finite rate to simulate with, substituting `cap` for `MaxInvest`.
    pub fn capped(&self, cap: f64) -> f64 {
        match self {
            Self::Rate(c) => *c,
            Self::MaxInvest => cap,
        }
    }
}

impl Serialize for Investment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Rate(c) => extended_f64(c, s),
            Self::MaxInvest => s.serialize_str("max_invest"),
        }
    }
}

impl std::fmt::Display for Investment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Rate(c) => write!(f, "{c}"),
            Self::MaxInvest => f.write_str("max_invest"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    SubLinear,
    SingularNoInvest,
    SingularMaxInvest,
    SingularIndifferent,
    SuperLinearDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Residuals {
    /// Residual of the exponent's defining equation.
    pub characteristic: f64,
    /// `λ + (1-γ)δC^γ - ρδγC^(γ-1)` at the reported `C*`, sub-linear case only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub implicit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuinSolution {
    /// Whether a ruin probability strictly below one is attainable.
    pub feasible: bool,
    /// Decay exponent; 0 when infeasible, `+inf` for the super-linear case.
    #[serde(serialize_with = "extended_f64")]
    pub beta: f64,
    pub c_star: Investment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_star: Option<f64>,
    pub regime: Regime,
    pub residuals: Residuals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl RuinSolution {
    /// Minimal ruin probability from initial wealth `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        if x <= 0.0 || !self.feasible {
            1.0
        } else if self.beta.is_infinite() {
            0.0
        } else {
            (-self.beta * x).exp()
        }
    }
}

/// Classical exponent with no R&D: root of `ρ - λ g(α) = 0`.
///
/// Returns `None` when `λ E[Y] <= ρ`, in which case ruin is certain.
pub fn alpha_no_investment(law: &JumpLaw, rho: f64, lambda: f64) -> Result<Option<f64>> {
    require_positive("rho", rho)?;
    require_positive("lambda", lambda)?;
    if lambda * law.mean() <= rho {
        return Ok(None);
    }
    solve_increasing(|a| rho - lambda * law.g(a)).map(Some)
}

/// `(ρ - λE[Y]) - (δγ)^(1/(1-γ)) (1/γ - 1) E[Y]^(1/(1-γ))`; negative iff the
/// sub-linear model is feasible.
pub fn condition_one_lhs(law: &JumpLaw, p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if p.gamma >= 1.0 {
        return Err(Error::WrongRegime(format!(
            "feasibility condition needs gamma < 1, got {}",
            p.gamma
        )));
    }
    let e = law.mean();
    Ok((p.rho - p.lambda * e) - (1.0 / p.gamma - 1.0) * optimal_rate(p, e))
}

pub fn check_condition_one(law: &JumpLaw, p: &ModelParams) -> Result<bool> {
    // Equality is reported as infeasible.
    Ok(condition_one_lhs(law, p)? < 0.0)
}

/// `(δγ g)^(1/(1-γ))`, the optimal rate given `g(β)`.
pub(crate) fn optimal_rate(p: &ModelParams, g: f64) -> f64 {
    (p.delta * p.gamma * g).powf(1.0 / (1.0 - p.gamma))
}

/// `G(β) = ρ - (1/γ - 1)(δγ g)^(1/(1-γ)) - λ g`, increasing in β.
pub fn g_function(law: &JumpLaw, p: &ModelParams, beta: f64) -> f64 {
    let g = law.g(beta);
    p.rho - (1.0 / p.gamma - 1.0) * optimal_rate(p, g) - p.lambda * g
}

/// Residual of the implicit optimality equation for `C*`.
pub fn implicit_residual(rho: f64, lambda: f64, delta: f64, gamma: f64, c: f64) -> f64 {
    lambda + (1.0 - gamma) * delta * c.powf(gamma) - rho * delta * gamma * c.powf(gamma - 1.0)
}

/// Unique positive root of the implicit optimality equation
/// `λ + (1-γ)δC^γ = ρδγC^(γ-1)` for `0 < γ < 1`.
///
/// Multiplying through by `C^(1-γ)` gives the increasing function
/// `ψ(C) = λC^(1-γ) + δ(1-γ)C - ρδγ`, which is solved in `u = ln C` so that
/// rates far below machine epsilon (γ close to 1) stay representable.
pub fn implicit_c_star(rho: f64, lambda: f64, delta: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::WrongRegime(format!(
            "implicit equation needs 0 < gamma < 1, got {gamma}"
        )));
    }
    let psi = |u: f64| {
        lambda * ((1.0 - gamma) * u).exp() + delta * (1.0 - gamma) * u.exp() - rho * delta * gamma
    };
    let hi = (rho * gamma / (1.0 - gamma)).ln();
    if psi(hi) <= 0.0 {
        return Ok(hi.exp());
    }
    let mut lo = hi.min((rho * delta * gamma / lambda).ln() / (1.0 - gamma)) - 1.0;
    let mut tries = 0;
    while psi(lo) >= 0.0 {
        lo -= 1.0 + lo.abs();
        tries += 1;
        if tries > 60 || !lo.is_finite() {
            return Err(NumericsError::NoBracketFound {
                seed: hi,
                expansions: tries,
            }
            .into());
        }
    }
    let tol = Tolerance {
        abs_x: 1e-15,
        abs_f: 1e-16 * rho * delta * gamma,
        max_iter: 400,
    };
    let u = find_root(psi, Bracket::new(lo, hi)?, &tol)?;
    Ok(u.exp())
}

/// Sub-linear (`0 < γ < 1`) solution.
pub fn solve_sublinear(law: &JumpLaw, p: &ModelParams) -> Result<RuinSolution> {
    let lhs = condition_one_lhs(law, p)?;
    if lhs >= 0.0 {
        let c = implicit_c_star(p.rho, p.lambda, p.delta, p.gamma)?;
        return Ok(RuinSolution {
            feasible: false,
            beta: 0.0,
            c_star: Investment::Rate(c),
            a_star: None,
            regime: Regime::SubLinear,
            residuals: Residuals::default(),
            diagnostic: Some(format!(
                "feasibility condition fails: (rho - lambda E[Y]) - (delta gamma)^(1/(1-gamma)) (1/gamma - 1) E[Y]^(1/(1-gamma)) = {lhs} >= 0"
            )),
        });
    }
    let f = |b: f64| g_function(law, p, b);
    let beta = match solve_increasing(f) {
        Ok(b) => b,
        Err(Error::Numerics(e @ NumericsError::NoBracketFound { .. })) => {
            return Ok(RuinSolution {
                feasible: false,
                beta: 0.0,
                c_star: Investment::Rate(0.0),
                a_star: None,
                regime: Regime::SubLinear,
                residuals: Residuals::default(),
                diagnostic: Some(e.to_string()),
            });
        }
        Err(e) => return Err(e),
    };
    // C = 0 is admissible, so β ≥ α. When the gain from spending is below
    // rounding the two roots can come out in the wrong order.
    let beta = match alpha_no_investment(law, p.rho, p.lambda)? {
        Some(a) => beta.max(a),
        None => beta,
    };
    let c = optimal_rate(p, law.g(beta));
    Ok(RuinSolution {
        feasible: true,
        beta,
        c_star: Investment::Rate(c),
        a_star: None,
        regime: Regime::SubLinear,
        residuals: Residuals {
            characteristic: f(beta),
            implicit: Some(implicit_residual(p.rho, p.lambda, p.delta, p.gamma, c)),
        },
        diagnostic: None,
    })
}

/// Linear case `γ = 1`: the optimal control is bang-bang.
pub fn solve_singular(law: &JumpLaw, p: &ModelParams) -> Result<RuinSolution> {
    p.validate()?;
    if p.gamma != 1.0 {
        return Err(Error::WrongRegime(format!(
            "singular solver needs gamma = 1, got {}",
            p.gamma
        )));
    }
    let threshold = p.lambda / p.rho;
    let e = law.mean();
    let (regime, feasible, c_star) = if p.delta < threshold {
        (Regime::SingularNoInvest, p.lambda * e > p.rho, Investment::Rate(0.0))
    } else if p.delta > threshold {
        (Regime::SingularMaxInvest, p.delta * e > 1.0, Investment::MaxInvest)
    } else {
        (Regime::SingularIndifferent, p.lambda * e > p.rho, Investment::Rate(0.0))
    };
    if !feasible {
        return Ok(RuinSolution {
            feasible,
            beta: 0.0,
            c_star,
            a_star: None,
            regime,
            residuals: Residuals::default(),
            diagnostic: Some(match regime {
                Regime::SingularMaxInvest => format!("delta E[Y] = {} <= 1", p.delta * e),
                _ => format!("lambda E[Y] = {} <= rho = {}", p.lambda * e, p.rho),
            }),
        });
    }
    let (beta, characteristic) = match regime {
        Regime::SingularMaxInvest => {
            let f = |b: f64| 1.0 - p.delta * law.g(b);
            let b = solve_increasing(f)?;
            (b, f(b))
        }
        _ => {
            let f = |b: f64| p.rho - p.lambda * law.g(b);
            let b = solve_increasing(f)?;
            (b, f(b))
        }
    };
    Ok(RuinSolution {
        feasible,
        beta,
        c_star,
        a_star: None,
        regime,
        residuals: Residuals {
            characteristic,
            implicit: None,
        },
        diagnostic: None,
    })
}

/// Super-linear case `γ > 1`: ruin can be made arbitrarily unlikely by
/// spending more, so the minimal ruin probability is zero for `x > 0`.
pub fn classify_superlinear(law: &JumpLaw, p: &ModelParams) -> Result<RuinSolution> {
    p.validate()?;
    if p.gamma <= 1.0 {
        return Err(Error::WrongRegime(format!(
            "super-linear classification needs gamma > 1, got {}",
            p.gamma
        )));
    }
    let _ = law;
    Ok(RuinSolution {
        feasible: true,
        beta: f64::INFINITY,
        c_star: Investment::MaxInvest,
        a_star: None,
        regime: Regime::SuperLinearDegenerate,
        residuals: Residuals::default(),
        diagnostic: Some("exponent grows without bound in the spending rate".into()),
    })
}

/// Exponent under a fixed spending rate `c`: root of
/// `(ρ + c) - (λ + δc^γ) g(α) = 0`, or 0 if ruin is certain.
pub fn alpha_constant_c(law: &JumpLaw, p: &ModelParams, c: f64) -> Result<f64> {
    p.validate()?;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "spending rate must be finite and non-negative, got {c}"
        )));
    }
    Ok(alpha_no_investment(law, p.rho + c, p.intensity(c))?.unwrap_or(0.0))
}

/// Dispatches on the regime of `γ`.
pub fn solve(law: &JumpLaw, p: &ModelParams) -> Result<RuinSolution> {
    p.validate()?;
    if p.gamma < 1.0 {
        solve_sublinear(law, p)
    } else if p.gamma == 1.0 {
        solve_singular(law, p)
    } else {
        classify_superlinear(law, p)
    }
}

/// Root of an increasing function on `(0, ∞)` starting from [`BRACKET_SEED`].
pub(crate) fn solve_increasing<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let bracket = expand_bracket(&f, BRACKET_SEED)?;
    Ok(find_root(&f, bracket, &solver_tolerance())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(nu: f64) -> JumpLaw {
        JumpLaw::exponential(nu).unwrap()
    }

    fn params(rho: f64, lambda: f64, delta: f64, gamma: f64) -> ModelParams {
        ModelParams::new(rho, lambda, delta, gamma).unwrap()
    }

    fn closed_beta(rho: f64, lambda: f64, delta: f64, nu: f64) -> f64 {
        (lambda + (lambda * lambda + rho * delta * delta).sqrt()) / (2.0 * rho) - nu
    }

    fn closed_c(rho: f64, lambda: f64, delta: f64) -> f64 {
        let s = lambda + (lambda * lambda + rho * delta * delta).sqrt();
        delta * delta * rho * rho / (s * s)
    }

    #[test]
    fn alpha_examples() {
        let a = alpha_no_investment(&exp(0.1), 0.1, 0.1).unwrap().unwrap();
        assert!((a - 0.9).abs() < 1e-12);
        assert_eq!(alpha_no_investment(&exp(1.0), 2.0, 1.0).unwrap(), None);
        let law = JumpLaw::gamma(2.0, 1.0).unwrap();
        let a = alpha_no_investment(&law, 1.0, 1.0).unwrap().unwrap();
        assert!((1.0 - law.g(a)).abs() < 1e-12);
    }

    #[test]
    fn condition_examples() {
        assert!(check_condition_one(&exp(0.1), &params(0.1, 0.1, 1.0, 0.5)).unwrap());
        assert!(!check_condition_one(&exp(2.0), &params(2.0, 0.1, 1.0, 0.5)).unwrap());
        assert!(check_condition_one(&exp(0.5), &params(1.0, 1.0, 1e-6, 0.3)).unwrap());
        assert!(matches!(
            check_condition_one(&exp(1.0), &params(1.0, 1.0, 1.0, 1.0)),
            Err(Error::WrongRegime(_))
        ));
        // ρ - λ/ν - δ²/(4ν²) for exponential jumps and γ = 1/2.
        let lhs = condition_one_lhs(&exp(0.1), &params(0.1, 0.1, 1.0, 0.5)).unwrap();
        assert!((lhs - (0.1 - 1.0 - 25.0)).abs() < 1e-12);
    }

    #[test]
    fn figure_one_exponent() {
        let s = solve_sublinear(&exp(0.1), &params(0.1, 0.1, 1.0, 0.5)).unwrap();
        assert!(s.feasible);
        assert_eq!(s.regime, Regime::SubLinear);
        assert!((s.beta - 2.058_312_395_177_700).abs() < 1e-12);
        assert!((s.c_star.rate().unwrap() - 0.053_667_504_192_892_003).abs() < 1e-13);
        assert!(s.residuals.implicit.unwrap().abs() < 1e-9);
        assert!((s.value_at(1.0) - 0.127_669_243_426_27).abs() < 1e-12);
        assert_eq!(s.value_at(0.0), 1.0);
    }

    #[test]
    fn infeasible_sublinear() {
        let s = solve_sublinear(&exp(0.1), &params(100.0, 0.1, 1.0, 0.5)).unwrap();
        assert!(!s.feasible);
        assert_eq!(s.value_at(3.0), 1.0);
        assert!(s.diagnostic.is_some());
    }

    #[test]
    fn exact_boundary_is_infeasible() {
        // ρ = λ/ν + δ²/(4ν²) exactly with dyadic numbers.
        let s = solve_sublinear(&exp(1.0), &params(1.25, 1.0, 1.0, 0.5)).unwrap();
        assert!(!s.feasible);
    }

    #[test]
    fn delta_to_zero_recovers_alpha() {
        let law = exp(0.1);
        let s = solve_sublinear(&law, &params(0.1, 0.1, 1e-8, 0.5)).unwrap();
        let a = alpha_no_investment(&law, 0.1, 0.1).unwrap().unwrap();
        assert!((s.beta - a).abs() < 1e-5);
    }

    #[test]
    fn gamma_law_sublinear_residuals() {
        let law = JumpLaw::gamma(2.0, 1.5).unwrap();
        let p = params(0.7, 0.4, 1.3, 0.35);
        let s = solve_sublinear(&law, &p).unwrap();
        assert!(s.feasible);
        assert!(s.residuals.characteristic.abs() < 1e-12);
        assert!(s.residuals.implicit.unwrap().abs() < 1e-9);
        let c = implicit_c_star(p.rho, p.lambda, p.delta, p.gamma).unwrap();
        assert!((c - s.c_star.rate().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn singular_regimes() {
        let s = solve_singular(&exp(0.1), &params(0.1, 0.5, 1.0, 1.0)).unwrap();
        assert_eq!(s.regime, Regime::SingularNoInvest);
        assert!((s.beta - 4.9).abs() < 1e-10);
        assert_eq!(s.c_star, Investment::Rate(0.0));

        let s = solve_singular(&exp(0.1), &params(0.1, 0.05, 1.0, 1.0)).unwrap();
        assert_eq!(s.regime, Regime::SingularMaxInvest);
        assert!((s.beta - 0.9).abs() < 1e-10);
        assert_eq!(s.c_star, Investment::MaxInvest);

        let s = solve_singular(&exp(0.5), &params(0.5, 1.0, 2.0, 1.0)).unwrap();
        assert_eq!(s.regime, Regime::SingularIndifferent);
        let no = 1.0 / 0.5 - 0.5;
        let max = 2.0 - 0.5;
        assert!((s.beta - no).abs() < 1e-12 && (s.beta - max).abs() < 1e-12);
    }

    #[test]
    fn singular_infeasible() {
        let s = solve_singular(&exp(1.0), &params(2.0, 1.0, 0.1, 1.0)).unwrap();
        assert!(!s.feasible);
        let s = solve_singular(&exp(1.0), &params(2.0, 1.0, 0.9, 1.0)).unwrap();
        assert_eq!(s.regime, Regime::SingularMaxInvest);
        assert!(!s.feasible);
    }

    #[test]
    fn superlinear() {
        let law = exp(1.0);
        let p = params(1.0, 1.0, 1.0, 2.0);
        let s = solve(&law, &p).unwrap();
        assert_eq!(s.regime, Regime::SuperLinearDegenerate);
        assert!(s.feasible && s.beta.is_infinite());
        assert_eq!(s.value_at(0.1), 0.0);
        assert_eq!(serde_json::to_value(&s).unwrap()["beta"], "inf");

        let a: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&c| alpha_constant_c(&law, &p, c).unwrap())
            .collect();
        // At C = 1 the drift exactly balances the jumps, so α₁ = 0.
        assert_eq!(a[0], 0.0);
        assert!(a[0] < a[1] && a[1] < a[2]);
        assert!(a[2] > 10.0 * a[0]);
        let a0 = alpha_constant_c(&law, &params(1.0, 2.0, 1.0, 2.0), 0.0).unwrap();
        assert_eq!(Some(a0), alpha_no_investment(&law, 1.0, 2.0).unwrap());
        let q: Vec<f64> = [2.0, 10.0, 100.0]
            .iter()
            .map(|&c| alpha_constant_c(&law, &p, c).unwrap())
            .collect();
        assert!(q[0] > 0.0 && q[2] > 10.0 * q[0]);
    }

    #[test]
    fn wrong_regime_errors() {
        let law = exp(1.0);
        assert!(solve_sublinear(&law, &params(1.0, 1.0, 1.0, 1.0)).is_err());
        assert!(solve_singular(&law, &params(1.0, 1.0, 1.0, 0.5)).is_err());
        assert!(classify_superlinear(&law, &params(1.0, 1.0, 1.0, 1.0)).is_err());
        assert!(ModelParams::new(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn monotonicity_in_parameters() {
        let law = exp(1.0);
        let base = params(1.0, 1.0, 1.0, 0.5);
        // Every grid point is feasible: ρ - λ - δ²/4 < 0.
        let grid = |lo: f64| -> Vec<f64> { (0..10).map(|i| lo + 0.1 * i as f64).collect() };
        let betas = |lo: f64, f: &dyn Fn(f64) -> ModelParams| -> Vec<f64> {
            grid(lo)
                .iter()
                .map(|&v| {
                    let s = solve_sublinear(&law, &f(v)).unwrap();
                    assert!(s.feasible);
                    s.beta
                })
                .collect()
        };
        let b = betas(0.2, &|v| base.with_rho(v));
        assert!(b.windows(2).all(|w| w[1] < w[0]));
        let b = betas(0.2, &|v| base.with_delta(v));
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        let b = betas(1.0, &|v| base.with_lambda(v));
        assert!(b.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn closed_form_spot_checks() {
        for &(rho, lambda, delta, nu) in &[
            (0.05, 5.0, 0.05, 5.0),
            (5.0, 5.0, 5.0, 0.05),
            (0.05, 0.05, 0.05, 0.05),
            (1.0, 0.3, 2.0, 0.7),
        ] {
            let s = solve_sublinear(&exp(nu), &params(rho, lambda, delta, 0.5)).unwrap();
            if !s.feasible {
                continue;
            }
            assert!((s.beta - closed_beta(rho, lambda, delta, nu)).abs() < 1e-10);
            assert!((s.c_star.rate().unwrap() - closed_c(rho, lambda, delta)).abs() < 1e-10);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sublinear_invariants(
                rho in 0.05f64..5.0,
                lambda in 0.05f64..5.0,
                delta in 0.05f64..5.0,
                gamma in 0.05f64..0.95,
                nu in 0.05f64..5.0,
            ) {
                let law = exp(nu);
                let p = params(rho, lambda, delta, gamma);
                let s = solve_sublinear(&law, &p).unwrap();
                prop_assert_eq!(s.feasible, condition_one_lhs(&law, &p).unwrap() < 0.0);
                if s.feasible {
                    prop_assert!(s.beta > 0.0);
                    prop_assert!(s.residuals.characteristic.abs() <= 1e-9);
                    prop_assert!(s.residuals.implicit.unwrap().abs() <= 1e-9);
                    let c = s.c_star.rate().unwrap();
                    prop_assert!(c <= rho * gamma / (1.0 - gamma) * (1.0 + 1e-12));
                    if let Some(a) = alpha_no_investment(&law, rho, lambda).unwrap() {
                        prop_assert!(s.beta >= a);
                    }
                    prop_assert!(s.value_at(1.0) >= s.value_at(2.0));
                }
            }

            #[test]
            fn implicit_root_has_small_residual(
                rho in 0.01f64..10.0,
                lambda in 0.01f64..10.0,
                delta in 0.01f64..10.0,
                gamma in 0.01f64..0.99,
            ) {
                let c = implicit_c_star(rho, lambda, delta, gamma).unwrap();
                prop_assert!(c > 0.0 && c <= rho * gamma / (1.0 - gamma) * (1.0 + 1e-12));
                let r = implicit_residual(rho, lambda, delta, gamma, c);
                let scale = lambda + rho * delta * gamma * c.powf(gamma - 1.0);
                prop_assert!(r.abs() <= 1e-12 * scale, "residual {} scale {}", r, scale);
            }
        }
    }
}
