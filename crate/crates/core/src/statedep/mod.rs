//! State-dependent model: `dX = -(ρ(X) + C) dt + dJ`, with jumps arriving at
//! intensity `λ(X) + δ(X) C^γ`.

mod examples;
mod quadrature;

pub use examples::{
    closed_form_state_ex1, closed_form_state_ex2, no_investment_state_ex2, StateExampleIParams,
    StateExampleIIParams,
};
pub use quadrature::{ruin_probability_quadrature, QuadratureEvaluator};

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::numerics::{find_root, Bracket, Tolerance};
use crate::solver::implicit_c_star;

/// Closed catalog of coefficient functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    Constant { value: f64 },
    /// `scale * (c1 x + c2)`.
    Affine { scale: f64, c1: f64, c2: f64 },
    /// `(nu + lambda0 / (1 + x)) * ρ(x)`; only valid for the intensity.
    Rational { nu: f64, lambda0: f64 },
}

impl Coefficient {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn affine(scale: f64, c1: f64, c2: f64) -> Self {
        Self::Affine { scale, c1, c2 }
    }

    pub fn rational(nu: f64, lambda0: f64) -> Self {
        Self::Rational { nu, lambda0 }
    }

    fn validate(&self, name: &str) -> Result<()> {
        match *self {
            Self::Constant { value } => require_positive(name, value),
            Self::Affine { scale, c1, c2 } => {
                require_positive(&format!("{name} scale"), scale)?;
                require_positive(&format!("{name} c2"), c2)?;
                if !(c1 >= 0.0 && c1.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} c1 must be finite and non-negative, got {c1}"
                    )));
                }
                Ok(())
            }
            Self::Rational { nu, lambda0 } => {
                require_positive(&format!("{name} nu"), nu)?;
                require_positive(&format!("{name} lambda0"), lambda0)
            }
        }
    }

    /// Value at `x`; `rho_x` is only read by `Rational`.
    pub fn eval(&self, x: f64, rho_x: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Affine { scale, c1, c2 } => scale * (c1 * x + c2),
            Self::Rational { nu, lambda0 } => (nu + lambda0 / (1.0 + x)) * rho_x,
        }
    }
}

impl std::fmt::Display for Coefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Self::Constant { value } => write!(f, "constant {value}"),
            Self::Affine { scale, c1, c2 } => write!(f, "affine {scale} {c1} {c2}"),
            Self::Rational { nu, lambda0 } => write!(f, "rational {nu} {lambda0}"),
        }
    }
}

impl std::str::FromStr for Coefficient {
    type Err = Error;

    /// `constant v`, `affine scale c1 c2` or `rational nu lambda0`; a bare
    /// number is shorthand for a constant.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>()
                .map_err(|_| Error::Config(format!("not a number: {t:?} in coefficient {s:?}")))
        };
        match parts.as_slice() {
            [v] => Ok(Self::constant(num(v)?)),
            ["constant", v] => Ok(Self::constant(num(v)?)),
            ["affine", a, b, c] => Ok(Self::affine(num(a)?, num(b)?, num(c)?)),
            ["rational", a, b] => Ok(Self::rational(num(a)?, num(b)?)),
            _ => Err(Error::Config(format!(
                "coefficient must be `constant v`, `affine scale c1 c2` or `rational nu lambda0`, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateModel {
    pub rho: Coefficient,
    pub lambda: Coefficient,
    pub delta: Coefficient,
    pub gamma: f64,
    /// Positive lower bound of `λ(·)` on `[0, ∞)`.
    pub lambda_floor: f64,
}

impl StateModel {
    pub fn new(rho: Coefficient, lambda: Coefficient, delta: Coefficient, gamma: f64) -> Result<Self> {
        rho.validate("rho")?;
        lambda.validate("lambda")?;
        delta.validate("delta")?;
        if matches!(rho, Coefficient::Rational { .. }) || matches!(delta, Coefficient::Rational { .. }) {
            return Err(Error::InvalidParameter(
                "the rational form is only available for lambda".into(),
            ));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "state-dependent model needs 0 < gamma <= 1, got {gamma}"
            )));
        }
        let lambda_floor = lambda_lower_bound(&rho, &lambda);
        require_positive("lambda floor", lambda_floor)?;
        Ok(Self {
            rho,
            lambda,
            delta,
            gamma,
            lambda_floor,
        })
    }

    /// Constant coefficients, the state-independent model.
    pub fn constant(rho: f64, lambda: f64, delta: f64, gamma: f64) -> Result<Self> {
        Self::new(
            Coefficient::constant(rho),
            Coefficient::constant(lambda),
            Coefficient::constant(delta),
            gamma,
        )
    }

    pub fn rho_at(&self, x: f64) -> f64 {
        self.rho.eval(x, 0.0)
    }

    pub fn lambda_at(&self, x: f64) -> f64 {
        self.lambda.eval(x, self.rho_at(x))
    }

    pub fn delta_at(&self, x: f64) -> f64 {
        self.delta.eval(x, 0.0)
    }

    /// Jump intensity at wealth `x` under spending rate `c`.
    pub fn intensity(&self, x: f64, c: f64) -> f64 {
        let base = self.lambda_at(x);
        if c == 0.0 {
            base
        } else {
            base + self.delta_at(x) * c.powf(self.gamma)
        }
    }

    /// `δ(x)ρ(x) - λ(x)`; the linear-case control is `Max` where positive.
    pub fn switch_function(&self, x: f64) -> f64 {
        self.delta_at(x) * self.rho_at(x) - self.lambda_at(x)
    }

    /// Points in `(0, upto)` where the linear-case control switches, found
    /// by scanning `cells` equal cells and refining each sign change.
    pub fn switch_points(&self, upto: f64, cells: usize) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        if !(upto > 0.0) || cells == 0 {
            return Ok(out);
        }
        let h = upto / cells as f64;
        let mut a = 0.0;
        let mut fa = self.switch_function(a);
        for i in 1..=cells {
            let b = if i == cells { upto } else { i as f64 * h };
            let fb = self.switch_function(b);
            if (fa <= 0.0) != (fb <= 0.0) {
                out.push(self.refine_switch(a, b)?);
            }
            a = b;
            fa = fb;
        }
        Ok(out)
    }

    pub(crate) fn refine_switch(&self, a: f64, b: f64) -> Result<f64> {
        let tol = Tolerance {
            abs_x: 1e-14,
            abs_f: 0.0,
            max_iter: 400,
        };
        Ok(find_root(|x| self.switch_function(x), Bracket::new(a, b)?, &tol)?)
    }
}

/// Lower bound of `λ(·)` on `[0, ∞)` for the catalog forms.
fn lambda_lower_bound(rho: &Coefficient, lambda: &Coefficient) -> f64 {
    match (*lambda, *rho) {
        (Coefficient::Constant { value }, _) => value,
        (Coefficient::Affine { scale, c2, .. }, _) => scale * c2,
        (Coefficient::Rational { nu, .. }, Coefficient::Constant { value }) => nu * value,
        (Coefficient::Rational { nu, lambda0 }, Coefficient::Affine { scale, c1, c2 }) => {
            // ρ(x) (ν + λ0/(1+x)) = scale (ν(c1 x + c2) + λ0 (c1 x + c2)/(1+x)),
            // and (c1 x + c2)/(1+x) lies between c1 and c2.
            let floor_ratio = if c1 > 0.0 { c1.min(c2) } else { 0.0 };
            scale * (nu * c2 + lambda0 * floor_ratio)
        }
        (Coefficient::Rational { .. }, Coefficient::Rational { .. }) => 0.0,
    }
}

/// Linear-case control region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BangBang {
    Zero,
    Max,
}

/// Spending rule as a function of wealth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    /// Same rate everywhere.
    Constant { rate: f64 },
    /// Pointwise optimum of the implicit equation (`γ < 1`).
    Optimal,
    /// Linear case: nothing where `δ ≤ λ/ρ`, `cap` (or unbounded when
    /// `None`) elsewhere.
    BangBang { cap: Option<f64> },
}

impl Policy {
    pub fn validate(&self, model: &StateModel) -> Result<()> {
        match *self {
            Policy::Constant { rate } => {
                if !(rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "constant spending rate must be finite and non-negative, got {rate}"
                    )));
                }
            }
            Policy::Optimal => {
                if model.gamma >= 1.0 {
                    return Err(Error::WrongRegime(
                        "pointwise optimum needs gamma < 1; use the bang-bang policy".into(),
                    ));
                }
            }
            Policy::BangBang { cap } => {
                if model.gamma != 1.0 {
                    return Err(Error::WrongRegime(format!(
                        "bang-bang policy needs gamma = 1, got {}",
                        model.gamma
                    )));
                }
                if let Some(m) = cap {
                    require_positive("cap", m)?;
                }
            }
        }
        Ok(())
    }

    /// Whether the control can jump as a function of wealth.
    pub fn has_switches(&self) -> bool {
        matches!(self, Policy::BangBang { .. })
    }
}

/// Pointwise optimal rate for `γ < 1`: root of
/// `λ(x) + δ(x)(1-γ)C^γ = ρ(x)δ(x)γC^(γ-1)`.
pub fn c_star_pointwise(model: &StateModel, x: f64) -> Result<f64> {
    if model.gamma >= 1.0 {
        return Err(Error::WrongRegime(
            "pointwise optimum needs gamma < 1; use c_star_bangbang".into(),
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("wealth must be non-negative, got {x}")));
    }
    implicit_c_star(model.rho_at(x), model.lambda_at(x), model.delta_at(x), model.gamma)
}

/// Linear-case control at wealth `x`; ties go to `Zero`.
pub fn c_star_bangbang(model: &StateModel, x: f64) -> Result<BangBang> {
    if model.gamma != 1.0 {
        return Err(Error::WrongRegime(format!(
            "bang-bang control needs gamma = 1, got {}",
            model.gamma
        )));
    }
    Ok(if model.delta_at(x) <= model.lambda_at(x) / model.rho_at(x) {
        BangBang::Zero
    } else {
        BangBang::Max
    })
}
