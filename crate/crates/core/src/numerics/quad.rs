use super::NumericsError;

/// Evaluation budget shared by one call of [`integrate`] / [`integrate_semiinf`].
pub const MAX_EVALUATIONS: usize = 4_000_000;

const INITIAL_PANELS: usize = 64;
const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over the finite interval `[a, b]`.
///
/// The interval is split into 64 equal panels first; each is then refined
/// until the Richardson error estimate is below its share of
/// `rel_tol * |estimate|`.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    check_rel_tol(rel_tol)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::InvalidArgument(format!(
            "finite limits required, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, rel_tol).map(|v| -v);
    }
    Simpson::new(&f).run(a, b, rel_tol)
}

/// Integral of `f` over `[a, ∞)`.
///
/// Maps the half line onto `[0, 1)` with `y = a + t/(1-t)` and hands the
/// transformed integrand to the adaptive Simpson rule. The transformed
/// integrand is taken to vanish at `t = 1`, which holds for every absolutely
/// integrable `f` that decays faster than `1/y^2`.
pub fn integrate_semiinf<F>(f: F, a: f64, rel_tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    check_rel_tol(rel_tol)?;
    if !a.is_finite() {
        return Err(NumericsError::InvalidArgument(format!(
            "lower limit must be finite, got {a}"
        )));
    }
    let mapped = |t: f64| {
        let s = 1.0 - t;
        if s <= 0.0 {
            return 0.0;
        }
        let y = a + t / s;
        if !y.is_finite() {
            return 0.0;
        }
        f(y) / (s * s)
    };
    Simpson::new(&mapped).run(0.0, 1.0, rel_tol)
}

fn check_rel_tol(rel_tol: f64) -> Result<(), NumericsError> {
    if !(rel_tol > 1e-15 && rel_tol < 1e-1) {
        return Err(NumericsError::InvalidArgument(format!(
            "rel_tol must lie in (1e-15, 0.1), got {rel_tol}"
        )));
    }
    Ok(())
}

struct Simpson<'a, F> {
    f: &'a F,
    evaluations: std::cell::Cell<usize>,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

impl<'a, F: Fn(f64) -> f64> Simpson<'a, F> {
    fn new(f: &'a F) -> Self {
        Self {
            f,
            evaluations: std::cell::Cell::new(0),
        }
    }

    fn eval(&self, x: f64) -> Result<f64, NumericsError> {
        let n = self.evaluations.get() + 1;
        if n > MAX_EVALUATIONS {
            return Err(NumericsError::NonConvergent(format!(
                "evaluation budget of {MAX_EVALUATIONS} exhausted"
            )));
        }
        self.evaluations.set(n);
        let v = (self.f)(x);
        if v.is_nan() {
            return Err(NumericsError::NotANumber { x });
        }
        if v.is_infinite() {
            return Err(NumericsError::NonConvergent(format!(
                "integrand is infinite at {x}"
            )));
        }
        Ok(v)
    }

    fn run(&self, a: f64, b: f64, rel_tol: f64) -> Result<f64, NumericsError> {
        let h = (b - a) / INITIAL_PANELS as f64;
        let mut nodes = Vec::with_capacity(2 * INITIAL_PANELS + 1);
        for i in 0..=2 * INITIAL_PANELS {
            let x = if i == 2 * INITIAL_PANELS {
                b
            } else {
                a + 0.5 * h * i as f64
            };
            nodes.push((x, self.eval(x)?));
        }

        let mut panels = Vec::with_capacity(INITIAL_PANELS);
        let mut coarse = 0.0;
        let mut scale = 0.0;
        for i in 0..INITIAL_PANELS {
            let (pa, fa) = nodes[2 * i];
            let (_, fm) = nodes[2 * i + 1];
            let (pb, fb) = nodes[2 * i + 2];
            let whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
            coarse += whole;
            scale += (pb - pa) / 6.0 * (fa.abs() + 4.0 * fm.abs() + fb.abs());
            panels.push((pa, pb, fa, fm, fb, whole));
        }

        // The absolute target comes from the coarse estimate; `scale` guards
        // against integrands whose signed total nearly cancels.
        let target = rel_tol * coarse.abs().max(1e-3 * scale);
        if target == 0.0 {
            return Ok(0.0);
        }

        let mut total = 0.0;
        for (pa, pb, fa, fm, fb, whole) in panels {
            total += self.refine(Panel {
                a: pa,
                b: pb,
                fa,
                fm,
                fb,
                whole,
                tol: target * (pb - pa) / (b - a),
                depth: 0,
            })?;
        }
        Ok(total)
    }

    fn refine(&self, root: Panel) -> Result<f64, NumericsError> {
        let mut stack = vec![root];
        let mut total = 0.0;
        while let Some(p) = stack.pop() {
            let m = 0.5 * (p.a + p.b);
            let lm = 0.5 * (p.a + m);
            let rm = 0.5 * (m + p.b);
            let flm = self.eval(lm)?;
            let frm = self.eval(rm)?;
            let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
            let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
            let err = left + right - p.whole;
            if err.abs() <= 15.0 * p.tol || p.depth >= MAX_DEPTH || lm <= p.a || rm >= p.b {
                if p.depth >= MAX_DEPTH && err.abs() > 15.0 * p.tol {
                    return Err(NumericsError::NonConvergent(format!(
                        "maximum subdivision depth reached near {m}"
                    )));
                }
                total += left + right + err / 15.0;
                continue;
            }
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                tol: 0.5 * p.tol,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                tol: 0.5 * p.tol,
                depth: p.depth + 1,
            });
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_tail() {
        let v = integrate_semiinf(|y| (-y).exp(), 0.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn slow_exponential_density() {
        let nu = 0.1;
        let v = integrate_semiinf(|y| nu * (-nu * y).exp(), 0.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn shifted_lower_limit() {
        let v = integrate_semiinf(|y| (-2.0 * y).exp(), 3.0, 1e-12).unwrap();
        assert!((v - 0.5 * (-6.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gaussian_tail_against_erfc() {
        let v = integrate_semiinf(|y| (-y * y).exp(), 1.0, 1e-12).unwrap();
        let want = 0.5 * std::f64::consts::PI.sqrt() * super::super::erfc(1.0);
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn finite_interval() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        let w = integrate(|x| x.sin(), std::f64::consts::PI, 0.0, 1e-12).unwrap();
        assert!((w + 2.0).abs() < 1e-11);
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn budget_exhaustion_is_nonconvergent() {
        // Oscillation with growing amplitude never settles under the mapping.
        let err = integrate_semiinf(|y| y * (y * y).sin(), 0.0, 1e-12).unwrap_err();
        assert!(matches!(err, NumericsError::NonConvergent(_)), "{err:?}");
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(integrate_semiinf(|y| (-y).exp(), 0.0, 0.5).is_err());
        assert!(integrate_semiinf(|y| (-y).exp(), 0.0, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn linearity(k in 0.05f64..5.0, scale in -100.0f64..100.0, a in 0.0f64..3.0) {
                let tol = 1e-10;
                let f = |y: f64| (1.0 + y) * (-k * y).exp();
                let base = integrate_semiinf(f, a, tol).unwrap();
                let scaled = integrate_semiinf(|y| scale * f(y), a, tol).unwrap();
                prop_assert!((scaled - scale * base).abs() <= 2.0 * tol * (scale * base).abs() + 1e-300);
            }
        }
    }
}
