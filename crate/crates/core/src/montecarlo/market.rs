//! Spending plus a constant amount `A` in the index: exact jump times,
//! Euler-Maruyama diffusion in between.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::constant::check_rate;
use super::{run_paths, MCEstimate, Outcome, SimConfig, StepHalving, DIAGNOSTIC_SEED_OFFSET};
use crate::distributions::{JumpLaw, JumpSampler};
use crate::error::{Error, Result};
use crate::market::MarketParams;
use crate::montecarlo::CapSensitivity;
use crate::solver::{Investment, ModelParams};

#[derive(Clone, Copy)]
struct Dynamics {
    /// `Aμ - (ρ + C)`.
    drift: f64,
    /// `Aσ`.
    vol: f64,
    intensity: f64,
    barrier: f64,
    t_max: f64,
    dt: f64,
}

#[derive(Default)]
struct Resolution {
    outcome: Option<Outcome>,
}

impl Resolution {
    fn check(&mut self, x: f64, barrier: f64) {
        if self.outcome.is_none() {
            if x <= 0.0 {
                self.outcome = Some(Outcome::Ruined);
            } else if x >= barrier {
                self.outcome = Some(Outcome::Survived);
            }
        }
    }
}

/// One path. With `coupled`, every Euler step is split in two halves drawn
/// separately; the coarse scheme checks ruin only at full steps and the fine
/// one at every half step, both on the same Brownian path.
fn path<R: Rng>(rng: &mut R, x0: f64, d: &Dynamics, jumps: &JumpSampler, coupled: bool) -> (Outcome, Option<Outcome>) {
    let mut x = x0;
    let mut t = 0.0;
    let mut coarse = Resolution::default();
    let mut fine = Resolution::default();
    let half = 0.5 * d.dt;
    let finish = |coarse: &Resolution, fine: &Resolution| {
        (
            coarse.outcome.unwrap_or(Outcome::Censored),
            coupled.then(|| fine.outcome.unwrap_or(Outcome::Censored)),
        )
    };
    loop {
        let tau: f64 = rng.sample::<f64, _>(Exp1) / d.intensity;
        if d.vol == 0.0 {
            // Linear between jumps: checking the pre-jump level is exact.
            x += d.drift * tau;
            t += tau;
            coarse.check(x, d.barrier);
            fine.check(x, d.barrier);
        } else {
            let mut s = 0.0;
            while s < tau {
                let h = d.dt.min(tau - s);
                if coupled && h > half {
                    let z1: f64 = rng.sample(StandardNormal);
                    x += d.drift * half + d.vol * half.sqrt() * z1;
                    fine.check(x, d.barrier);
                    let h2 = h - half;
                    let z2: f64 = rng.sample(StandardNormal);
                    x += d.drift * h2 + d.vol * h2.sqrt() * z2;
                } else {
                    let z: f64 = rng.sample(StandardNormal);
                    x += d.drift * h + d.vol * h.sqrt() * z;
                }
                fine.check(x, d.barrier);
                coarse.check(x, d.barrier);
                s += h;
                if coarse.outcome.is_some() && (!coupled || fine.outcome.is_some()) {
                    return finish(&coarse, &fine);
                }
                if t + s > d.t_max {
                    return finish(&coarse, &fine);
                }
            }
            t += tau;
        }
        if coarse.outcome.is_some() && (!coupled || fine.outcome.is_some()) {
            return finish(&coarse, &fine);
        }
        x += jumps.sample(rng);
        coarse.check(x, d.barrier);
        fine.check(x, d.barrier);
        if coarse.outcome.is_some() && (!coupled || fine.outcome.is_some()) {
            return finish(&coarse, &fine);
        }
        if t > d.t_max {
            return finish(&coarse, &fine);
        }
    }
}

/// Ruin probability with spending `c` (a rate, or the cap `cfg.cap_m` for
/// `MaxInvest`) and constant index holding `a`.
///
/// Ruin between Euler points is not detected; the coupled re-run of 10% of
/// the paths at `dt/2` reports how much that matters.
pub fn simulate_market(
    law: &JumpLaw,
    p: &ModelParams,
    m: &MarketParams,
    c: Investment,
    a: f64,
    x0: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    p.validate()?;
    m.validate()?;
    cfg.check_start(x0)?;
    if !a.is_finite() {
        return Err(Error::InvalidParameter(format!("index holding must be finite, got {a}")));
    }
    let rate = c.capped(cfg.cap_m);
    check_rate(rate)?;
    let jumps = law.sampler();
    let dynamics = |rate: f64, dt: f64| Dynamics {
        drift: a * m.mu - (p.rho + rate),
        vol: (a * m.sigma).abs(),
        intensity: p.intensity(rate),
        barrier: cfg.survival_barrier,
        t_max: cfg.t_max,
        dt,
    };
    let main = dynamics(rate, cfg.euler_dt);
    let (counts, _) = run_paths(cfg.n_paths, cfg.base_seed, |rng| {
        Ok(path(rng, x0, &main, &jumps, false))
    })?;
    let mut est = MCEstimate::from_counts(counts, cfg, "exponential value function");

    let n_diag = cfg.diagnostic_paths();
    let diag_seed = cfg.base_seed.wrapping_add(DIAGNOSTIC_SEED_OFFSET);
    if main.vol > 0.0 {
        let (coarse, fine) = run_paths(n_diag, diag_seed, |rng| Ok(path(rng, x0, &main, &jumps, true)))?;
        let drift = (coarse.p_hat() - fine.p_hat()).abs();
        est.step_halving = Some(StepHalving {
            n_paths: n_diag,
            p_hat_dt: coarse.p_hat(),
            p_hat_half_dt: fine.p_hat(),
            drift,
        });
        if drift > 2.0 * est.std_err {
            let msg = format!(
                "step-halving drift {drift:.3e} exceeds twice the standard error {:.3e}; reduce euler_dt",
                est.std_err
            );
            log::warn!("{msg}");
            est.warnings.push(msg);
        }
    }
    if c == Investment::MaxInvest {
        let doubled = dynamics(2.0 * cfg.cap_m, cfg.euler_dt);
        let (counts, _) = run_paths(n_diag, diag_seed, |rng| Ok(path(rng, x0, &doubled, &jumps, false)))?;
        est.cap_sensitivity = Some(CapSensitivity {
            n_paths: n_diag,
            cap: 2.0 * cfg.cap_m,
            p_hat: counts.p_hat(),
            std_err: counts.std_err(),
            shift: counts.p_hat() - est.p_hat,
        });
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::solve_market_sublinear;
    use crate::montecarlo::{choose_barrier, joint_std_err, simulate_constant};

    fn fig1() -> (JumpLaw, ModelParams, MarketParams) {
        (
            JumpLaw::exponential(0.1).unwrap(),
            ModelParams::new(0.1, 0.1, 1.0, 0.5).unwrap(),
            MarketParams::new(0.1, 0.2).unwrap(),
        )
    }

    #[test]
    fn zero_holding_reduces_to_constant() {
        let (law, p, m) = fig1();
        let c = 0.053_667_504_192_892_003;
        let cfg = SimConfig::new(50_000, 21, choose_barrier(2.058_312_395_177_699_6, 1e-4).unwrap());
        let a = simulate_market(&law, &p, &m, Investment::Rate(c), 0.0, 1.0, &cfg).unwrap();
        let b = simulate_constant(&law, &p, c, 1.0, &cfg).unwrap();
        assert!(a.step_halving.is_none());
        assert!((a.p_hat - b.p_hat).abs() <= 2.0 * joint_std_err(&a, &b), "{a:?} {b:?}");
    }

    #[test]
    fn optimal_holding_matches_exponent() {
        let (law, p, m) = fig1();
        let s = solve_market_sublinear(&law, &p, &m).unwrap();
        let cfg = SimConfig::new(20_000, 5, choose_barrier(s.beta, 1e-4).unwrap());
        let c = s.c_star.rate().unwrap();
        let e = simulate_market(&law, &p, &m, Investment::Rate(c), s.a_star, 1.0, &cfg).unwrap();
        let sh = e.step_halving.unwrap();
        let tol = (3.5 * e.std_err).max(3.0 * sh.drift);
        assert!((e.p_hat - (-s.beta).exp()).abs() <= tol, "{e:?}");
        assert_eq!(e.n_ruined + e.n_survived + e.n_censored, e.n_paths);
    }

    #[test]
    fn large_volatility_approaches_no_market() {
        let (law, p, _) = fig1();
        let m = MarketParams::new(0.1, 5.0).unwrap();
        let s = solve_market_sublinear(&law, &p, &m).unwrap();
        assert!(s.a_star < 2e-3);
        let cfg = SimConfig::new(20_000, 9, choose_barrier(s.beta, 1e-4).unwrap());
        let c = s.c_star.rate().unwrap();
        let e = simulate_market(&law, &p, &m, Investment::Rate(c), s.a_star, 1.0, &cfg).unwrap();
        let base = simulate_constant(&law, &p, c, 1.0, &cfg).unwrap();
        assert!((e.p_hat - base.p_hat).abs() <= 3.5 * joint_std_err(&e, &base));
    }

    #[test]
    fn max_invest_reports_cap_sensitivity() {
        let law = JumpLaw::exponential(0.1).unwrap();
        let p = ModelParams::new(1.0, 0.05, 1.0, 1.0).unwrap();
        let m = MarketParams::new(0.1, 0.2).unwrap();
        let cfg = SimConfig {
            cap_m: 20.0,
            ..SimConfig::new(2_000, 3, choose_barrier(0.5, 1e-4).unwrap())
        };
        let e = simulate_market(&law, &p, &m, Investment::MaxInvest, 0.5, 1.0, &cfg).unwrap();
        let cs = e.cap_sensitivity.unwrap();
        assert_eq!(cs.cap, 40.0);
        assert_eq!(cs.n_paths, 200);
    }
}
