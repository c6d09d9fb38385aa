use super::NumericsError;

/// Upper bound on doublings/halvings performed by [`expand_bracket`].
pub const MAX_EXPANSIONS: usize = 200;

/// An interval `[lo, hi]` with `lo < hi`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self, NumericsError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(NumericsError::InvalidArgument(format!(
                "bracket requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Stopping rule for [`find_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Stop once the bracket is narrower than this.
    pub abs_x: f64,
    /// Stop once `|f(x)|` is at most this.
    pub abs_f: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_x: 1e-12,
            abs_f: 1e-12,
            max_iter: 200,
        }
    }
}

impl Tolerance {
    pub fn new(abs_x: f64, abs_f: f64, max_iter: usize) -> Result<Self, NumericsError> {
        if !(abs_x > 0.0 && abs_f > 0.0 && max_iter > 0) {
            return Err(NumericsError::InvalidArgument(format!(
                "tolerances must be strictly positive (abs_x={abs_x}, abs_f={abs_f}, max_iter={max_iter})"
            )));
        }
        Ok(Self {
            abs_x,
            abs_f,
            max_iter,
        })
    }
}

/// Finds the root of a continuous function with a sign change on `bracket`.
///
/// Regula falsi with the Illinois modification, falling back to a bisection
/// step whenever an iteration fails to halve the bracket. The bracket is kept
/// throughout, so convergence is guaranteed for any sign-changing continuous
/// function; monotone functions get the superlinear rate.
///
/// Infinite function values are allowed (they still carry a sign); NaN is an
/// error.
pub fn find_root<F>(f: F, bracket: Bracket, tol: &Tolerance) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = eval(&f, a)?;
    let mut fb = eval(&f, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }

    // +1 when the last update moved `b`, -1 when it moved `a`.
    let mut side = 0i8;
    let mut bisect_next = false;
    for _ in 0..tol.max_iter {
        let width = b - a;
        let mid = 0.5 * (a + b);
        if width <= tol.abs_x || mid <= a || mid >= b {
            return Ok(mid);
        }

        let mut x = mid;
        if !bisect_next && fa.is_finite() && fb.is_finite() {
            let secant = a - fa * (b - a) / (fb - fa);
            if secant > a && secant < b {
                x = secant;
            }
        }

        let fx = eval(&f, x)?;
        if fx.abs() <= tol.abs_f {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        bisect_next = (b - a) > 0.5 * width;
    }

    Err(NumericsError::MaxIterExceeded {
        iterations: tol.max_iter,
        width: b - a,
    })
}

/// Builds a sign-changing bracket for a monotone-increasing `f` on `(0, ∞)`
/// by doubling (if `f(seed) < 0`) or halving (if `f(seed) > 0`) from `seed`.
///
/// Exhausting [`MAX_EXPANSIONS`] steps returns `NoBracketFound`, which the
/// solvers read as "the characteristic equation has no positive root".
pub fn expand_bracket<F>(f: F, seed: f64) -> Result<Bracket, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !(seed > 0.0 && seed.is_finite()) {
        return Err(NumericsError::InvalidArgument(format!(
            "bracket seed must be positive and finite, got {seed}"
        )));
    }
    let f_seed = eval(&f, seed)?;
    if f_seed == 0.0 {
        return Bracket::new(0.5 * seed, 2.0 * seed);
    }

    let not_found = NumericsError::NoBracketFound {
        seed,
        expansions: MAX_EXPANSIONS,
    };
    if f_seed < 0.0 {
        let mut lo = seed;
        for _ in 0..MAX_EXPANSIONS {
            let hi = 2.0 * lo;
            if !hi.is_finite() {
                break;
            }
            if eval(&f, hi)? > 0.0 {
                return Bracket::new(lo, hi);
            }
            lo = hi;
        }
    } else {
        let mut hi = seed;
        for _ in 0..MAX_EXPANSIONS {
            let lo = 0.5 * hi;
            if lo <= 0.0 {
                break;
            }
            if eval(&f, lo)? < 0.0 {
                return Bracket::new(lo, hi);
            }
            hi = lo;
        }
    }
    Err(not_found)
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, NumericsError> {
    let v = f(x);
    if v.is_nan() {
        Err(NumericsError::NotANumber { x })
    } else {
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> Tolerance {
        Tolerance::new(1e-14, 1e-15, 200).unwrap()
    }

    #[test]
    fn linear_root() {
        let r = find_root(|x| x - 1.0, Bracket::new(0.0, 2.0).unwrap(), &Tolerance::default()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_two() {
        let r = find_root(|x| x * x - 2.0, Bracket::new(1.0, 2.0).unwrap(), &tight()).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn decreasing_functions_also_work() {
        let r = find_root(|x| 3.0 - x, Bracket::new(0.0, 10.0).unwrap(), &tight()).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_is_reported() {
        let err = find_root(|x| x * x + 1.0, Bracket::new(-1.0, 1.0).unwrap(), &tight()).unwrap_err();
        assert!(matches!(err, NumericsError::NoSignChange { .. }));
    }

    #[test]
    fn max_iter_is_reported() {
        let tol = Tolerance::new(1e-300, 1e-300, 3).unwrap();
        let err = find_root(|x| x.powi(3) - 0.3, Bracket::new(0.0, 1.0).unwrap(), &tol).unwrap_err();
        assert!(matches!(err, NumericsError::MaxIterExceeded { iterations: 3, .. }));
    }

    #[test]
    fn nan_is_an_error() {
        let err = find_root(
            |x| if x > 0.5 { f64::NAN } else { x - 0.7 },
            Bracket::new(0.0, 1.0).unwrap(),
            &tight(),
        )
        .unwrap_err();
        assert!(matches!(err, NumericsError::NotANumber { .. }));
    }

    #[test]
    fn infinite_endpoint_values_are_usable() {
        let f = |x: f64| if x < 1e-3 { f64::NEG_INFINITY } else { x.ln() };
        let r = find_root(f, Bracket::new(1e-6, 10.0).unwrap(), &tight()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expand_up_and_down() {
        let b = expand_bracket(|x| x - 3.0, 1.0).unwrap();
        assert!(b.contains(3.0));
        let b = expand_bracket(|x| x - 1e-5, 1.0).unwrap();
        assert!(b.contains(1e-5));
        let b = expand_bracket(|x| x - 1.0, 1.0).unwrap();
        assert!(b.contains(1.0) && b.lo() < 1.0 && b.hi() > 1.0);
    }

    #[test]
    fn expand_exhaustion() {
        let err = expand_bracket(|x| x + 1.0, 1.0).unwrap_err();
        assert!(matches!(err, NumericsError::NoBracketFound { .. }));
        let err = expand_bracket(|_| -1.0, 1.0).unwrap_err();
        assert!(matches!(err, NumericsError::NoBracketFound { .. }));
    }

    #[test]
    fn invalid_inputs() {
        assert!(Bracket::new(1.0, 1.0).is_err());
        assert!(Bracket::new(f64::NAN, 1.0).is_err());
        assert!(Tolerance::new(0.0, 1.0, 10).is_err());
        assert!(expand_bracket(|x| x, -1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn root_is_stable_under_bracket_enlargement(
                root in -50.0f64..50.0,
                slope in 0.01f64..100.0,
                pad_lo in 0.1f64..1e3,
                pad_hi in 0.1f64..1e3,
                extra in 1.0f64..1e3,
            ) {
                let f = |x: f64| (slope * (x - root)).atan() + 0.1 * (x - root);
                let tol = Tolerance::new(1e-12, 1e-15, 200).unwrap();
                let small = Bracket::new(root - pad_lo, root + pad_hi).unwrap();
                let large = Bracket::new(root - pad_lo - extra, root + pad_hi + extra).unwrap();
                let r1 = find_root(f, small, &tol).unwrap();
                let r2 = find_root(f, large, &tol).unwrap();
                prop_assert!(small.contains(r1));
                prop_assert!((r1 - r2).abs() <= 1e-11);
                prop_assert!((r1 - root).abs() <= 1e-11);
            }
        }
    }
}
