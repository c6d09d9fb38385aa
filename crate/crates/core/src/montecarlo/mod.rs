//! Path simulation of the controlled dual risk process.
//!
//! Every estimator splits its paths over [`STREAMS`] generators seeded
//! `base_seed + index`, so results do not depend on the number of threads.

mod constant;
mod market;
mod state;

pub use constant::{sample_first_jump_times, simulate_constant};
pub use market::simulate_market;
pub use state::{choose_barrier_from_curve, simulate_state};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::JumpLaw;
use crate::error::{require_positive, Error, Result};
use crate::market::MarketParams;
use crate::solver::{solve_increasing, ModelParams};

/// Number of independent generator streams per estimate.
pub const STREAMS: u64 = 64;
/// Share of paths re-run for the step-halving and cap diagnostics.
pub const DIAGNOSTIC_FRACTION: f64 = 0.1;
/// Seed offset for diagnostic re-runs, keeping them off the main streams.
const DIAGNOSTIC_SEED_OFFSET: u64 = 0x9E37_79B9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub base_seed: u64,
    /// Wealth level at which survival is declared.
    pub survival_barrier: f64,
    /// Bound on the ruin probability from the barrier, used for reporting.
    pub barrier_tail: f64,
    pub t_max: f64,
    pub euler_dt: f64,
    /// Spending rate standing in for unbounded spending.
    pub cap_m: f64,
}

impl SimConfig {
    pub fn new(n_paths: usize, base_seed: u64, survival_barrier: f64) -> Self {
        Self {
            n_paths,
            base_seed,
            survival_barrier,
            barrier_tail: 1e-4,
            t_max: 1e4,
            euler_dt: 1e-3,
            cap_m: 1e3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1000 {
            return Err(Error::Config(format!(
                "n_paths must be at least 1000, got {}",
                self.n_paths
            )));
        }
        require_positive("survival_barrier", self.survival_barrier)?;
        require_positive("t_max", self.t_max)?;
        require_positive("euler_dt", self.euler_dt)?;
        require_positive("cap_m", self.cap_m)?;
        if !(self.barrier_tail > 0.0 && self.barrier_tail < 0.1) {
            return Err(Error::Config(format!(
                "barrier_tail must lie in (0, 0.1), got {}",
                self.barrier_tail
            )));
        }
        Ok(())
    }

    fn check_start(&self, x0: f64) -> Result<()> {
        self.validate()?;
        require_positive("x0", x0)?;
        if self.survival_barrier <= x0 {
            return Err(Error::Config(format!(
                "survival_barrier {} must exceed the initial wealth {x0}",
                self.survival_barrier
            )));
        }
        Ok(())
    }

    fn diagnostic_paths(&self) -> usize {
        ((self.n_paths as f64 * DIAGNOSTIC_FRACTION).ceil() as usize).max(1)
    }
}

/// `B = ln(1/tail) / β`: with `V(x) = e^{-βx}`, a path reaching `B` is later
/// ruined with probability at most `tail`.
pub fn choose_barrier(beta_hint: f64, tail: f64) -> Result<f64> {
    require_positive("beta_hint", beta_hint)?;
    if !(tail > 0.0 && tail < 0.1) {
        return Err(Error::InvalidParameter(format!("tail must lie in (0, 0.1), got {tail}")));
    }
    Ok((1.0 / tail).ln() / beta_hint)
}

/// Decay exponent of the ruin probability under constant spending `c` and
/// constant index holding `a`: the root `κ` of
/// `d + s²κ/2 - Λ g(κ) = 0` with `d = ρ + c - aμ`, `s = aσ`, `Λ = λ + δc^γ`.
///
/// Returns 0 when ruin is certain and `+inf` when it is impossible.
pub fn adjustment_exponent(
    law: &JumpLaw,
    p: &ModelParams,
    c: f64,
    market: Option<(&MarketParams, f64)>,
) -> Result<f64> {
    p.validate()?;
    constant::check_rate(c)?;
    let (drift_gain, vol) = match market {
        Some((m, a)) => {
            m.validate()?;
            (a * m.mu, (a * m.sigma).abs())
        }
        None => (0.0, 0.0),
    };
    let d = p.rho + c - drift_gain;
    let big_lambda = p.intensity(c);
    if vol == 0.0 && d <= 0.0 {
        return Ok(f64::INFINITY);
    }
    if d >= big_lambda * law.mean() {
        return Ok(0.0);
    }
    solve_increasing(|k| d + 0.5 * vol * vol * k - big_lambda * law.g(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Ruined,
    Survived,
    Censored,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Counts {
    pub ruined: usize,
    pub survived: usize,
    pub censored: usize,
}

impl Counts {
    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Ruined => self.ruined += 1,
            Outcome::Survived => self.survived += 1,
            Outcome::Censored => self.censored += 1,
        }
    }

    fn merge(mut self, o: Counts) -> Counts {
        self.ruined += o.ruined;
        self.survived += o.survived;
        self.censored += o.censored;
        self
    }

    fn total(&self) -> usize {
        self.ruined + self.survived + self.censored
    }

    pub fn p_hat(&self) -> f64 {
        self.ruined as f64 / self.total().max(1) as f64
    }

    pub fn std_err(&self) -> f64 {
        let p = self.p_hat();
        (p * (1.0 - p) / self.total().max(1) as f64).sqrt()
    }
}

/// Runs `n_paths` paths over the fixed streams. `path` returns the main
/// outcome and, for coupled diagnostics, a second one.
pub(crate) fn run_paths<F>(n_paths: usize, base_seed: u64, path: F) -> Result<(Counts, Counts)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(Outcome, Option<Outcome>)> + Sync,
{
    let streams = STREAMS as usize;
    (0..streams)
        .into_par_iter()
        .map(|i| {
            let n = n_paths / streams + usize::from(i < n_paths % streams);
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(i as u64));
            let mut main = Counts::default();
            let mut second = Counts::default();
            for _ in 0..n {
                let (a, b) = path(&mut rng)?;
                main.add(a);
                if let Some(b) = b {
                    second.add(b);
                }
            }
            Ok((main, second))
        })
        .try_reduce(
            || (Counts::default(), Counts::default()),
            |a, b| Ok((a.0.merge(b.0), a.1.merge(b.1))),
        )
}

/// Coupled re-run at half the Euler step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepHalving {
    pub n_paths: usize,
    pub p_hat_dt: f64,
    pub p_hat_half_dt: f64,
    /// `|p_hat_dt - p_hat_half_dt|` on the same Brownian paths.
    pub drift: f64,
}

/// Re-run with the spending cap doubled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapSensitivity {
    pub n_paths: usize,
    pub cap: f64,
    pub p_hat: f64,
    pub std_err: f64,
    /// `p_hat` at the doubled cap minus the main estimate.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n_paths: usize,
    pub n_ruined: usize,
    pub n_survived: usize,
    pub n_censored: usize,
    /// Bias from declaring survival at the barrier.
    pub bias_bound: f64,
    pub survival_barrier: f64,
    /// How the barrier bound was obtained.
    pub barrier_basis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_halving: Option<StepHalving>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap_sensitivity: Option<CapSensitivity>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MCEstimate {
    pub(crate) fn from_counts(c: Counts, cfg: &SimConfig, basis: &str) -> Self {
        let mut warnings = Vec::new();
        let n = c.total();
        if c.censored as f64 > 0.01 * n as f64 {
            let msg = format!(
                "{} of {n} paths hit t_max = {} unresolved; raise t_max",
                c.censored, cfg.t_max
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        Self {
            p_hat: c.p_hat(),
            std_err: c.std_err(),
            n_paths: n,
            n_ruined: c.ruined,
            n_survived: c.survived,
            n_censored: c.censored,
            bias_bound: cfg.barrier_tail,
            survival_barrier: cfg.survival_barrier,
            barrier_basis: basis.to_string(),
            step_halving: None,
            cap_sensitivity: None,
            warnings,
        }
    }

    /// `(p_hat - target) / std_err`.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.p_hat - target;
        if self.std_err > 0.0 {
            d / self.std_err
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }

    /// 99% normal interval.
    pub fn ci99(&self) -> (f64, f64) {
        (self.p_hat - 2.58 * self.std_err, self.p_hat + 2.58 * self.std_err)
    }
}

/// Sum of the two standard errors in quadrature.
pub fn joint_std_err(a: &MCEstimate, b: &MCEstimate) -> f64 {
    a.std_err.hypot(b.std_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_examples() {
        assert!((choose_barrier(1.0, (-10.0f64).exp()).unwrap() - 10.0).abs() < 1e-12);
        assert!((choose_barrier(2.0583, 1e-4).unwrap() - 4.474_731_755_320_499).abs() < 1e-10);
        assert!((choose_barrier(0.9, 1e-4).unwrap() - 10.233_711_524_417_982).abs() < 1e-10);
        assert!(choose_barrier(0.0, 1e-4).is_err());
        assert!(choose_barrier(1.0, 0.5).is_err());
    }

    #[test]
    fn adjustment_exponent_cases() {
        let law = JumpLaw::exponential(0.1).unwrap();
        let p = ModelParams::new(0.1, 0.1, 1.0, 0.5).unwrap();
        assert!((adjustment_exponent(&law, &p, 0.0, None).unwrap() - 0.9).abs() < 1e-10);
        let c = 0.053_667_504_192_892_003;
        let k = adjustment_exponent(&law, &p, c, None).unwrap();
        assert!((k - 2.058_312_395_177_699_6).abs() < 1e-8);
        let m = MarketParams::new(0.1, 0.2).unwrap();
        let s = crate::market::solve_market_sublinear(&law, &p, &m).unwrap();
        let k = adjustment_exponent(&law, &p, s.c_star.rate().unwrap(), Some((&m, s.a_star))).unwrap();
        assert!((k - s.beta).abs() < 1e-8, "{k} {}", s.beta);
        let heavy = ModelParams::new(10.0, 0.1, 1.0, 0.5).unwrap();
        assert_eq!(adjustment_exponent(&law, &heavy, 0.0, None).unwrap(), 0.0);
        assert!(adjustment_exponent(&law, &p, 0.0, Some((&m, 100.0))).unwrap() > 0.0);
    }

    #[test]
    fn config_validation() {
        let cfg = SimConfig::new(1000, 1, 5.0);
        assert!(cfg.validate().is_ok());
        assert!(cfg.check_start(5.0).is_err());
        assert!(SimConfig::new(10, 1, 5.0).validate().is_err());
        let bad = SimConfig {
            barrier_tail: 0.5,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn counts_and_std_err() {
        let c = Counts {
            ruined: 25,
            survived: 70,
            censored: 5,
        };
        assert_eq!(c.p_hat(), 0.25);
        assert!((c.std_err() - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn streams_cover_all_paths() {
        let (c, d) = run_paths(1001, 3, |_| Ok((Outcome::Ruined, None))).unwrap();
        assert_eq!(c.ruined, 1001);
        assert_eq!(d.total(), 0);
    }
}
