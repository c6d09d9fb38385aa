//! Ruin probability of the state-dependent model with `Exp(ν)` jumps as a
//! ratio of two tail integrals:
//!
//! `V(x) = ∫_x^∞ q / ∫_0^∞ q`, `q(y) = r(y) exp(νy - Φ(y))`,
//! `r = (λ + δC^γ)/(ρ + C)`, `Φ(y) = ∫_0^y r`.

use super::{c_star_bangbang, c_star_pointwise, BangBang, Policy, StateModel};
use crate::error::{require_positive, Error, Result};
use crate::numerics::integrate_semiinf;

/// Stop extending the grid once the estimated remaining mass is below this
/// fraction of the mass already covered.
const TAIL_FRACTION: f64 = 1e-16;
const MAX_Y: f64 = 1e8;
const MAX_KNOTS: usize = 1_000_000;
/// Absolute tolerance on the interpolated `Φ` (relaxed to rounding level
/// once `Φ` is large).
const KNOT_TOL: f64 = 1e-11;
/// Points probed inside each segment for a switch of the linear-case control.
const SWITCH_PROBES: usize = 8;
/// Largest exponent change allowed across one segment.
const MAX_SEGMENT_DROP: f64 = 2.0;
const TAIL_REL_TOL: f64 = 1e-10;

// 10-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_35,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        s += w * (f(m - h * x) + f(m + h * x));
    }
    s * h
}

#[derive(Debug, Clone, Copy)]
struct Knot {
    y: f64,
    phi: f64,
    /// One-sided values of `r` (they differ at policy switches).
    r_left: f64,
    r_right: f64,
}

/// Prebuilt evaluator; immutable and shareable once constructed.
#[derive(Debug, Clone)]
pub struct QuadratureEvaluator {
    model: StateModel,
    policy: Policy,
    nu: f64,
    knots: Vec<Knot>,
    /// `e_max` subtracted from every exponent before exponentiating.
    shift: f64,
    /// `tails[i] = ∫_{y_i}^∞ q`.
    tails: Vec<f64>,
}

impl QuadratureEvaluator {
    pub fn new(model: &StateModel, nu: f64, policy: Policy) -> Result<Self> {
        require_positive("nu", nu)?;
        policy.validate(model)?;
        let mut ev = Self {
            model: *model,
            policy,
            nu,
            knots: Vec::new(),
            shift: 0.0,
            tails: Vec::new(),
        };
        ev.build_grid()?;
        ev.build_tails()?;
        Ok(ev)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Last knot of the exponent grid.
    pub fn grid_end(&self) -> f64 {
        self.knots.last().map_or(0.0, |k| k.y)
    }

    pub fn knot_count(&self) -> usize {
        self.knots.len()
    }

    /// `r(y)`, with the region of a switching policy read at `side`.
    fn rate(&self, y: f64, side: f64) -> Result<f64> {
        let m = &self.model;
        let ratio = |c: f64| m.intensity(y, c) / (m.rho_at(y) + c);
        let r = match self.policy {
            Policy::Constant { rate } => ratio(rate),
            Policy::Optimal => ratio(c_star_pointwise(m, y)?),
            Policy::BangBang { cap } => match c_star_bangbang(m, side)? {
                BangBang::Zero => ratio(0.0),
                BangBang::Max => match cap {
                    Some(c) => ratio(c),
                    None => m.delta_at(y),
                },
            },
        };
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::NonIntegrable(format!("rate r({y}) = {r} is not positive and finite")));
        }
        Ok(r)
    }

    fn integrate_rate(&self, a: f64, b: f64) -> Result<f64> {
        let side = 0.5 * (a + b);
        let mut err = None;
        let v = gauss_legendre(
            |y| match self.rate(y, side) {
                Ok(r) => r,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    fn region(&self, y: f64) -> Result<Option<BangBang>> {
        if self.policy.has_switches() {
            Ok(Some(c_star_bangbang(&self.model, y)?))
        } else {
            Ok(None)
        }
    }

    /// First switch of the linear-case control in `(a, b]`, if any.
    fn find_switch(&self, a: f64, b: f64, region: Option<BangBang>) -> Result<Option<f64>> {
        let Some(reg) = region else { return Ok(None) };
        let mut lo = a;
        for j in 1..=SWITCH_PROBES {
            let hi = a + (b - a) * j as f64 / SWITCH_PROBES as f64;
            if self.region(hi)? != Some(reg) {
                let z = self.model.refine_switch(lo, hi)?;
                return Ok((z > a).then_some(z));
            }
            lo = hi;
        }
        Ok(None)
    }

    fn build_grid(&mut self) -> Result<()> {
        let r0 = self.rate(0.0, 0.0)?;
        self.knots.push(Knot {
            y: 0.0,
            phi: 0.0,
            r_left: r0,
            r_right: r0,
        });
        let mut e_max = 0.0_f64;
        // log of ∫_0^y q covered so far (trapezoid estimate, unshifted).
        let mut log_mass = f64::NEG_INFINITY;
        let mut h = 0.05_f64;
        // Region just to the right of the current knot.
        let mut region = self.region(1e-12)?;
        loop {
            let k = *self.knots.last().expect("grid starts with a knot");
            let a = k.y;
            let h_max = 4.0_f64.max(0.5 * a);
            h = h.min(h_max);
            let mut b = a + h;
            let switch = self.find_switch(a, b, region)?;
            if let Some(z) = switch {
                b = z;
            }
            let mid = 0.5 * (a + b);
            let inc = self.integrate_rate(a, b)?;
            let left = self.integrate_rate(a, mid)?;
            let inc_halves = left + self.integrate_rate(mid, b)?;
            let phi_b = k.phi + inc_halves;
            let tol = KNOT_TOL.max(64.0 * f64::EPSILON * phi_b.abs());
            let quad_err = (inc - inc_halves).abs();
            let r_b = self.rate(b, mid)?;
            let interp_err = (hermite(a, b, k.phi, phi_b, k.r_right, r_b, mid) - (k.phi + left)).abs();
            let e_a = self.nu * a - k.phi;
            let e = self.nu * b - phi_b;
            let drop = (e - e_a).abs();
            if quad_err > 0.1 * tol || interp_err > tol || drop > MAX_SEGMENT_DROP {
                h = 0.5 * (b - a);
                if h < 1e-10 * (1.0 + a) {
                    return Err(Error::NonIntegrable(format!(
                        "exponent grid step collapsed near y = {a}"
                    )));
                }
                continue;
            }
            let r_right = if switch.is_some() {
                let past = b + 1e-9 * (1.0 + b);
                region = self.region(past)?;
                self.rate(b, past)?
            } else {
                r_b
            };
            self.knots.push(Knot {
                y: b,
                phi: phi_b,
                r_left: r_b,
                r_right,
            });
            e_max = e_max.max(e);
            let seg = (0.5 * (b - a)).ln() + log_add(k.r_right.ln() + e_a, r_b.ln() + e);
            log_mass = log_add(log_mass, seg);
            if interp_err < 0.01 * tol && quad_err < 0.001 * tol && drop < 0.5 * MAX_SEGMENT_DROP {
                h = (b - a) * 1.6;
            } else {
                h = b - a;
            }
            // Remaining mass if the current decay rate persisted.
            if r_right > self.nu {
                let tail = e + (r_right / (r_right - self.nu)).ln();
                if tail < log_mass + TAIL_FRACTION.ln() {
                    break;
                }
            }
            if b > MAX_Y || self.knots.len() > MAX_KNOTS {
                return Err(Error::NonIntegrable(format!(
                    "integrand exp(nu y - Phi(y)) has not decayed by y = {b:.3e} \
                     (exponent {e:.3e}, peak {e_max:.3e}); the integrability hypothesis fails"
                )));
            }
        }
        self.shift = e_max;
        Ok(())
    }

    /// `Φ(y)` from the grid; linear extrapolation past the last knot.
    fn phi(&self, y: f64) -> f64 {
        let last = self.knots.last().expect("grid is built");
        if y >= last.y {
            return last.phi + last.r_left * (y - last.y);
        }
        let i = self.segment(y);
        let (k0, k1) = (&self.knots[i], &self.knots[i + 1]);
        hermite(k0.y, k1.y, k0.phi, k1.phi, k0.r_right, k1.r_left, y)
    }

    /// Index `i` with `y_i <= y < y_{i+1}`.
    fn segment(&self, y: f64) -> usize {
        let i = self.knots.partition_point(|k| k.y <= y);
        i.saturating_sub(1).min(self.knots.len() - 2)
    }

    fn q(&self, y: f64, side: f64) -> Result<f64> {
        Ok(self.rate(y, side)? * (self.nu * y - self.phi(y) - self.shift).exp())
    }

    fn segment_integral(&self, a: f64, b: f64) -> Result<f64> {
        let side = 0.5 * (a + b);
        let mut err = None;
        let v = gauss_legendre(
            |y| match self.q(y, side) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    fn tail_beyond(&self, a: f64) -> Result<f64> {
        // Rescale by the decay length at the end of the grid so the mapped
        // integrand is not squeezed against the far end.
        let last = self.knots.last().expect("grid is built");
        let len = if last.r_left > self.nu {
            1.0 / (last.r_left - self.nu)
        } else {
            1.0
        };
        let err = std::cell::RefCell::new(None);
        let v = integrate_semiinf(
            |s| match self.q(a + len * s, a + len * s) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            0.0,
            TAIL_REL_TOL,
        )?;
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(len * v),
        }
    }

    fn build_tails(&mut self) -> Result<()> {
        let n = self.knots.len();
        let mut tails = vec![0.0; n];
        tails[n - 1] = self.tail_beyond(self.knots[n - 1].y)?;
        for i in (0..n - 1).rev() {
            tails[i] = self.segment_integral(self.knots[i].y, self.knots[i + 1].y)? + tails[i + 1];
        }
        if !(tails[0] > 0.0 && tails[0].is_finite()) {
            return Err(Error::NonIntegrable(format!(
                "normalising integral is {}",
                tails[0]
            )));
        }
        self.tails = tails;
        Ok(())
    }

    /// `∫_x^∞ q` in the shifted scale.
    fn numerator(&self, x: f64) -> Result<f64> {
        if x >= self.grid_end() {
            return self.tail_beyond(x);
        }
        let i = self.segment(x);
        let next = self.knots[i + 1].y;
        Ok(self.segment_integral(x, next)? + self.tails[i + 1])
    }

    /// Ruin probability at initial wealth `x`.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::InvalidParameter(format!("wealth must be non-negative, got {x}")));
        }
        if x == 0.0 {
            return Ok(1.0);
        }
        let raw = self.numerator(x)? / self.tails[0];
        if !raw.is_finite() {
            return Err(Error::NonIntegrable(format!("ruin probability at x = {x} is {raw}")));
        }
        if raw < -1e-6 || raw > 1.0 + 1e-6 {
            log::warn!("quadrature ruin probability {raw} at x = {x} outside [0, 1]; clamping");
        }
        Ok(raw.clamp(0.0, 1.0))
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn hermite(a: f64, b: f64, fa: f64, fb: f64, da: f64, db: f64, y: f64) -> f64 {
    let h = b - a;
    let t = (y - a) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * fa
        + (t3 - 2.0 * t2 + t) * h * da
        + (-2.0 * t3 + 3.0 * t2) * fb
        + (t3 - t2) * h * db
}

/// One-shot wrapper around [`QuadratureEvaluator`].
pub fn ruin_probability_quadrature(model: &StateModel, nu: f64, policy: Policy, x: f64) -> Result<f64> {
    QuadratureEvaluator::new(model, nu, policy)?.value(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statedep::{
        closed_form_state_ex1, closed_form_state_ex2, Coefficient, StateExampleIIParams,
        StateExampleIParams,
    };

    #[test]
    fn constant_model_reduces_to_exponential() {
        let m = StateModel::constant(0.1, 0.1, 1.0, 0.5).unwrap();
        let ev = QuadratureEvaluator::new(&m, 0.1, Policy::Optimal).unwrap();
        assert_eq!(ev.value(0.0).unwrap(), 1.0);
        for x in [0.5, 1.0, 2.0] {
            let v = ev.value(x).unwrap();
            let e = (-2.058_312_395_177_699_6 * x).exp();
            assert!((v - e).abs() < 1e-6, "x = {x}: {v} vs {e}");
        }
    }

    #[test]
    fn example_one_matches_closed_form() {
        let p = StateExampleIParams::new(1.0, 0.1, 1.0, 1.0, 1.0, 0.1, 0.5).unwrap();
        let ev = QuadratureEvaluator::new(&p.model().unwrap(), p.nu, p.policy()).unwrap();
        for i in 0..20 {
            let x = i as f64 * 0.3;
            let a = ev.value(x).unwrap();
            let b = closed_form_state_ex1(&p, x).unwrap();
            assert!((a - b).abs() < 1e-8, "x = {x}: {a} vs {b}");
        }
        // Optimal policy recovers the constant C0.
        let opt = QuadratureEvaluator::new(&p.model().unwrap(), p.nu, Policy::Optimal).unwrap();
        assert!((opt.value(1.0).unwrap() - 0.466_886_680_252_730_5).abs() < 1e-9);
    }

    #[test]
    fn example_two_matches_closed_form() {
        let p = StateExampleIIParams::new(1.0, 1.0, 1.0, 1.2, 0.4, 0.1).unwrap();
        let ev = QuadratureEvaluator::new(&p.model().unwrap(), p.nu, Policy::BangBang { cap: None }).unwrap();
        for x in [0.5, 1.0, 2.9, 3.0, 3.1, 5.0, 12.0] {
            let a = ev.value(x).unwrap();
            let b = closed_form_state_ex2(&p, x).unwrap();
            assert!((a - b).abs() < 1e-8, "x = {x}: {a} vs {b}");
        }
        let mut prev = 1.0;
        for i in 0..200 {
            let v = ev.value(i as f64 * 0.2).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn finite_cap_approaches_uncapped() {
        let p = StateExampleIIParams::new(1.0, 1.0, 1.0, 1.2, 0.4, 0.1).unwrap();
        let m = p.model().unwrap();
        let exact = closed_form_state_ex2(&p, 5.0).unwrap();
        let mut prev_gap = f64::INFINITY;
        for cap in [10.0, 100.0, 1000.0] {
            let v = ruin_probability_quadrature(&m, p.nu, Policy::BangBang { cap: Some(cap) }, 5.0).unwrap();
            let gap = (v - exact).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 0.01);
    }

    #[test]
    fn optimal_beats_no_spending() {
        let p = StateExampleIParams::new(1.0, 0.1, 1.0, 1.0, 1.0, 0.1, 0.5).unwrap();
        let m = p.model().unwrap();
        let opt = QuadratureEvaluator::new(&m, p.nu, Policy::Optimal).unwrap();
        let none = QuadratureEvaluator::new(&m, p.nu, Policy::Constant { rate: 0.0 }).unwrap();
        for i in 0..=20 {
            let x = i as f64 * 0.25;
            assert!(opt.value(x).unwrap() <= none.value(x).unwrap() + 1e-12);
        }
    }

    #[test]
    fn non_integrable_detected() {
        // r = λ/ρ < ν everywhere: the integrand grows without bound.
        let m = StateModel::constant(1.0, 0.05, 1.0, 0.5).unwrap();
        let err = QuadratureEvaluator::new(&m, 0.1, Policy::Constant { rate: 0.0 }).unwrap_err();
        assert!(matches!(err, Error::NonIntegrable(_)), "{err:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = StateModel::new(
            Coefficient::constant(1.0),
            Coefficient::constant(1.0),
            Coefficient::constant(1.0),
            0.5,
        )
        .unwrap();
        assert!(QuadratureEvaluator::new(&m, 0.0, Policy::Optimal).is_err());
        assert!(QuadratureEvaluator::new(&m, 1.0, Policy::BangBang { cap: None }).is_err());
        let ev = QuadratureEvaluator::new(&m, 0.5, Policy::Optimal).unwrap();
        assert!(ev.value(-1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn values_in_unit_interval_and_nonincreasing(
                lambda0 in 0.1f64..2.0,
                delta0 in 0.1f64..2.0,
                c1 in 0.1f64..2.0,
                nu in 0.05f64..0.5,
            ) {
                let p = StateExampleIParams::new(1.0, lambda0, delta0, c1, 1.0, nu, 0.5).unwrap();
                let ev = QuadratureEvaluator::new(&p.model().unwrap(), nu, p.policy()).unwrap();
                let mut prev = 1.0;
                for i in 0..30 {
                    let v = ev.value(i as f64 * 0.4).unwrap();
                    prop_assert!((0.0..=1.0).contains(&v));
                    prop_assert!(v <= prev);
                    prev = v;
                }
            }
        }
    }
}
