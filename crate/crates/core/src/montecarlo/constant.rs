//! Constant spending rate: exact event-driven simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::{run_paths, MCEstimate, Outcome, SimConfig};
use crate::distributions::{JumpLaw, JumpSampler};
use crate::error::{Error, Result};
use crate::solver::ModelParams;

pub(crate) fn check_rate(c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "spending rate must be finite and non-negative, got {c}"
        )));
    }
    Ok(())
}

/// Between jumps wealth falls linearly at `drift`, so ruin before the next
/// jump happens exactly when `x <= drift * τ`.
fn path<R: Rng>(
    rng: &mut R,
    x0: f64,
    drift: f64,
    intensity: f64,
    jumps: &JumpSampler,
    barrier: f64,
    t_max: f64,
) -> Outcome {
    let mut x = x0;
    let mut t = 0.0;
    loop {
        let tau: f64 = rng.sample::<f64, _>(Exp1) / intensity;
        if x <= drift * tau {
            return Outcome::Ruined;
        }
        x += jumps.sample(rng) - drift * tau;
        t += tau;
        if x >= barrier {
            return Outcome::Survived;
        }
        if t > t_max {
            return Outcome::Censored;
        }
    }
}

/// Ruin probability under the constant rate `c`, starting from `x0`.
pub fn simulate_constant(law: &JumpLaw, p: &ModelParams, c: f64, x0: f64, cfg: &SimConfig) -> Result<MCEstimate> {
    p.validate()?;
    check_rate(c)?;
    cfg.check_start(x0)?;
    let intensity = p.intensity(c);
    let drift = p.rho + c;
    let jumps = law.sampler();
    let (counts, _) = run_paths(cfg.n_paths, cfg.base_seed, |rng| {
        Ok((
            path(rng, x0, drift, intensity, &jumps, cfg.survival_barrier, cfg.t_max),
            None,
        ))
    })?;
    Ok(MCEstimate::from_counts(counts, cfg, "exponential value function"))
}

/// First jump times of `n` paths under the constant rate `c`.
pub fn sample_first_jump_times(p: &ModelParams, c: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    p.validate()?;
    check_rate(c)?;
    let intensity = p.intensity(c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.sample::<f64, _>(Exp1) / intensity).collect())
}
