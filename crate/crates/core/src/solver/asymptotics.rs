//! Parameter sweeps comparing solved exponents and rates with their
//! limiting forms.

use serde::Serialize;

use super::{alpha_no_investment, condition_one_lhs, solve_increasing, solve_sublinear, ModelParams};
use crate::distributions::JumpLaw;
use crate::error::{Error, Result};
use crate::market::{beta_two, solve_market_sublinear, MarketParams};
use crate::serde_ext::extended_opt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    /// ρ → 0: β against λ/ρ.
    Rho0,
    /// δ → ∞: C* against ρ/(1/γ - 1).
    DeltaInf,
    /// δ → 0: β against the no-investment exponent.
    Delta0,
    /// λ → ∞: C* against (δγ)^(1/(1-γ)) (ρ/λ)^(1/(1-γ)).
    LambdaInf,
    /// Feasibility boundary approached from inside: β against its
    /// first-order expansion in the condition's margin.
    Boundary,
    /// γ → 0: C* against ρδγ/(λ+δ).
    Gamma0,
    /// γ → 1⁻: the limit depends on the sign of ρδ - λ.
    Gamma1,
}

impl Knob {
    pub const ALL: [Knob; 7] = [
        Knob::Rho0,
        Knob::DeltaInf,
        Knob::Delta0,
        Knob::LambdaInf,
        Knob::Boundary,
        Knob::Gamma0,
        Knob::Gamma1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Knob::Rho0 => "rho0",
            Knob::DeltaInf => "delta_inf",
            Knob::Delta0 => "delta0",
            Knob::LambdaInf => "lambda_inf",
            Knob::Boundary => "boundary",
            Knob::Gamma0 => "gamma0",
            Knob::Gamma1 => "gamma1",
        }
    }

    /// Name of the swept quantity.
    pub fn parameter(&self) -> &'static str {
        match self {
            Knob::Rho0 => "rho",
            Knob::DeltaInf | Knob::Delta0 => "delta",
            Knob::LambdaInf => "lambda",
            Knob::Boundary => "epsilon",
            Knob::Gamma0 | Knob::Gamma1 => "gamma",
        }
    }

    /// Geometric sweep `(start, end)` of the swept quantity; for `Gamma1` it
    /// is `1 - γ` that is swept.
    pub fn default_sweep(&self) -> (f64, f64, usize) {
        match self {
            Knob::Rho0 => (1.0, 1e-4, 9),
            Knob::DeltaInf => (1.0, 1e4, 9),
            Knob::Delta0 => (1.0, 1e-8, 9),
            Knob::LambdaInf => (1.0, 1e4, 9),
            Knob::Boundary => (1e-1, 1e-6, 6),
            Knob::Gamma0 => (1e-1, 1e-4, 7),
            Knob::Gamma1 => (1e-1, 1e-3, 5),
        }
    }
}

impl std::str::FromStr for Knob {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Knob::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown knob {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticRow {
    /// Value of the swept parameter (`γ` itself for the γ knobs).
    pub param: f64,
    #[serde(serialize_with = "extended_opt_f64")]
    pub beta: Option<f64>,
    #[serde(serialize_with = "extended_opt_f64")]
    pub c_star: Option<f64>,
    /// Computed quantity that is compared with `predicted`.
    #[serde(serialize_with = "extended_opt_f64")]
    pub computed: Option<f64>,
    #[serde(serialize_with = "extended_opt_f64")]
    pub predicted: Option<f64>,
    #[serde(serialize_with = "extended_opt_f64")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub knob: Knob,
    pub parameter: &'static str,
    /// What `computed` holds: `beta`, `c_star` or `(1-gamma)*c_star`.
    pub quantity: &'static str,
    pub rows: Vec<AsymptoticRow>,
}

impl AsymptoticReport {
    pub fn last_ratio(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.ratio)
    }
}

/// Geometric grid from `start` to `end` inclusive.
pub fn geometric_sweep(start: f64, end: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![end];
    }
    let (a, b) = (start.ln(), end.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                end
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Sweeps one parameter of `base` towards its limit and tabulates computed
/// against predicted values. Parameters other than the swept one are taken
/// from `base`. Infeasible points become rows with empty fields.
pub fn asymptotic_report(
    law: &JumpLaw,
    base: &ModelParams,
    knob: Knob,
    market: Option<&MarketParams>,
    sweep: Option<(f64, f64, usize)>,
) -> Result<AsymptoticReport> {
    base.validate()?;
    let (start, end, n) = sweep.unwrap_or_else(|| knob.default_sweep());
    if !(start > 0.0 && end > 0.0 && n >= 1) {
        return Err(Error::Config(format!(
            "sweep needs positive endpoints and at least one point, got {start}:{end}:{n}"
        )));
    }
    let points = geometric_sweep(start, end, n);
    let needs_sublinear = !matches!(knob, Knob::Gamma0 | Knob::Gamma1);
    if needs_sublinear && !(base.gamma > 0.0 && base.gamma < 1.0) {
        return Err(Error::WrongRegime(format!(
            "knob {} needs 0 < gamma < 1, got {}",
            knob.name(),
            base.gamma
        )));
    }
    if market.is_some() && knob == Knob::Boundary {
        return Err(Error::UnsupportedKnob(knob.name().into()));
    }

    let quantity = match knob {
        Knob::Rho0 | Knob::Delta0 | Knob::Boundary => "beta",
        Knob::Gamma1 if gamma1_scaled(base, law, market)? => "(1-gamma)*c_star",
        _ => "c_star",
    };

    let mut rows = Vec::with_capacity(points.len());
    for v in points {
        let (p, param) = match knob {
            Knob::Rho0 => (base.with_rho(v), v),
            Knob::DeltaInf | Knob::Delta0 => (base.with_delta(v), v),
            Knob::LambdaInf => (base.with_lambda(v), v),
            Knob::Boundary => {
                let rho = critical_rho(law, base) * (1.0 - v);
                (base.with_rho(rho), v)
            }
            Knob::Gamma0 => (base.with_gamma(v), v),
            Knob::Gamma1 => (base.with_gamma(1.0 - v), 1.0 - v),
        };
        if p.rho <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "boundary sweep produced rho = {}",
                p.rho
            )));
        }
        let (beta, c_star) = match market {
            None => {
                let s = solve_sublinear(law, &p)?;
                if s.feasible {
                    (Some(s.beta), s.c_star.rate())
                } else {
                    (None, None)
                }
            }
            Some(m) => {
                let s = solve_market_sublinear(law, &p, m)?;
                (Some(s.beta), s.c_star.rate())
            }
        };
        let predicted = predict(law, &p, knob, market, beta)?;
        let computed = match quantity {
            "beta" => beta,
            "(1-gamma)*c_star" => c_star.map(|c| (1.0 - p.gamma) * c),
            _ => c_star,
        };
        let ratio = match (computed, predicted) {
            (Some(c), Some(q)) if q != 0.0 => Some(c / q),
            _ => None,
        };
        rows.push(AsymptoticRow {
            param,
            beta,
            c_star,
            computed,
            predicted,
            ratio,
        });
    }
    Ok(AsymptoticReport {
        knob,
        parameter: knob.parameter(),
        quantity,
        rows,
    })
}

/// `ρ` at which the feasibility condition holds with equality.
fn critical_rho(law: &JumpLaw, p: &ModelParams) -> f64 {
    let lhs_at_zero = condition_one_lhs(law, &p.with_rho(f64::MIN_POSITIVE)).unwrap_or(0.0);
    f64::MIN_POSITIVE - lhs_at_zero
}

/// Whether the γ → 1 limit is of the `C* ~ η/(1-γ)` type.
fn gamma1_scaled(p: &ModelParams, law: &JumpLaw, market: Option<&MarketParams>) -> Result<bool> {
    Ok(gamma1_margin(p, law, market)? > 0.0)
}

/// `ρ - λ/δ` without the index; `ρ - λ/δ - μ²/(2σ²ι)` with it, where
/// `δ g(ι) = 1`.
fn gamma1_margin(p: &ModelParams, law: &JumpLaw, market: Option<&MarketParams>) -> Result<f64> {
    match market {
        None => Ok(p.rho - p.lambda / p.delta),
        Some(m) => {
            if p.delta * law.mean() <= 1.0 {
                return Err(Error::UnsupportedKnob(
                    "gamma1 with a market index needs delta E[Y] > 1".into(),
                ));
            }
            let iota = beta_two(law, p.delta)?;
            Ok(p.rho - p.lambda / p.delta - m.half_sharpe_sq() / iota)
        }
    }
}

fn predict(
    law: &JumpLaw,
    p: &ModelParams,
    knob: Knob,
    market: Option<&MarketParams>,
    beta: Option<f64>,
) -> Result<Option<f64>> {
    let k = market.map_or(0.0, |m| m.half_sharpe_sq());
    let power = |x: f64| x.powf(1.0 / (1.0 - p.gamma));
    Ok(match knob {
        Knob::Rho0 => Some((p.lambda + k) / p.rho),
        Knob::DeltaInf => Some(p.rho / (1.0 / p.gamma - 1.0)),
        Knob::Delta0 => match market {
            None => alpha_no_investment(law, p.rho, p.lambda)?,
            Some(m) => Some(solve_increasing(|b| {
                p.rho - p.lambda * law.g(b) - m.half_sharpe_sq() / b
            })?),
        },
        Knob::LambdaInf => Some(power(p.delta * p.gamma) * power(p.rho / p.lambda)),
        Knob::Boundary => {
            let e = law.mean();
            let e2 = law.second_moment();
            let lhs = condition_one_lhs(law, p)?;
            let slope = power(p.delta * p.gamma) * e.powf(p.gamma / (1.0 - p.gamma)) * e2
                / (2.0 * p.gamma)
                + p.lambda * e2 / 2.0;
            Some(-lhs / slope)
        }
        Knob::Gamma0 => {
            // ι solves ρ - (λ + δ) g(ι) - μ²/(2σ²ι) = 0 and C* ~ δγ g(ι);
            // without the index this is ρδγ/(λ + δ).
            match market {
                None => Some(p.rho * p.delta * p.gamma / (p.lambda + p.delta)),
                Some(m) => {
                    let iota = solve_increasing(|b| {
                        p.rho - (p.lambda + p.delta) * law.g(b) - m.half_sharpe_sq() / b
                    })?;
                    Some(p.delta * p.gamma * law.g(iota))
                }
            }
        }
        Knob::Gamma1 => {
            let margin = gamma1_margin(p, law, market)?;
            if margin > 0.0 {
                Some(margin)
            } else if margin < 0.0 {
                // C* ~ (δγ(ρ - μ²/(2σ²β))/λ)^(1/(1-γ)).
                let rho_eff = match (market, beta) {
                    (None, _) => p.rho,
                    (Some(m), Some(b)) => p.rho - m.half_sharpe_sq() / b,
                    (Some(_), None) => return Ok(None),
                };
                if rho_eff <= 0.0 {
                    return Ok(None);
                }
                Some(power(p.delta * p.gamma * rho_eff / p.lambda))
            } else {
                Some(gamma1_equality_limit(p.delta, p.lambda)?)
            }
        }
    })
}

/// Root on `(0, 1)` of `δx + λ(1 + ln x) = 0`.
pub fn gamma1_equality_limit(delta: f64, lambda: f64) -> Result<f64> {
    let f = |x: f64| delta * x + lambda * (1.0 + x.ln());
    // f is increasing, f(0⁺) = -∞ and f(1) = δ + λ > 0.
    let bracket = crate::numerics::Bracket::new(f64::MIN_POSITIVE, 1.0)?;
    Ok(crate::numerics::find_root(f, bracket, &super::solver_tolerance())?)
}
