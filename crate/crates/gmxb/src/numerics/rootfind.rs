//! Bracketed scalar root finding: bisection refined by secant steps.

use crate::{cast, EngineError, Result, Scalar};

/// Converged root and iteration diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct RootResult<T> {
    pub root: T,
    pub iterations: usize,
    /// Function value at the returned abscissa.
    pub residual: T,
}

const MAX_ITERATIONS: usize = 200;

/// Finds a root of `f` inside `[lo, hi]`, which must bracket a sign change
/// (`f(lo)·f(hi) ≤ 0`). Secant steps are taken from the current bracket
/// endpoints when they land strictly inside it; otherwise the step falls back
/// to bisection, and every fourth iteration bisects unconditionally so the
/// bracket width provably shrinks. Terminates once the bracket is within
/// `tol`.
pub fn find_root<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    tol: T,
) -> Result<RootResult<T>> {
    if !(hi > lo) {
        return Err(EngineError::Parameter(format!(
            "root bracket [{lo}, {hi}] is empty"
        )));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(RootResult { root: a, iterations: 0, residual: fa });
    }
    if fb == T::zero() {
        return Ok(RootResult { root: b, iterations: 0, residual: fb });
    }
    if fa * fb > T::zero() {
        return Err(EngineError::NoSignChange {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
            f_lo: fa.to_f64().unwrap_or(f64::NAN),
            f_hi: fb.to_f64().unwrap_or(f64::NAN),
        });
    }

    let half = cast::<T>(0.5);
    let mut x = a;
    let mut fx = fa;
    // Which endpoint the last replacement hit, for the Illinois weight that
    // stops false position from stalling on one side of a convex function.
    let mut last_kept: i8 = 0;
    let mut fa_eff = fa;
    let mut fb_eff = fb;
    for iter in 1..=MAX_ITERATIONS {
        let width = b - a;
        if width <= tol {
            // Report the endpoint with the smaller residual.
            let (root, residual) = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
            return Ok(RootResult { root, iterations: iter - 1, residual });
        }

        let mut candidate = if iter % 6 == 0 {
            a + half * width
        } else {
            b - fb_eff * (b - a) / (fb_eff - fa_eff)
        };
        if !candidate.is_finite() || candidate <= a || candidate >= b {
            candidate = a + half * width;
        }

        x = candidate;
        fx = f(x);
        if fx == T::zero() {
            return Ok(RootResult { root: x, iterations: iter, residual: fx });
        }
        if fa * fx < T::zero() {
            b = x;
            fb = fx;
            fb_eff = fx;
            if last_kept == -1 {
                fa_eff = fa_eff * half;
            } else {
                fa_eff = fa;
            }
            last_kept = -1;
        } else {
            a = x;
            fa = fx;
            fa_eff = fx;
            if last_kept == 1 {
                fb_eff = fb_eff * half;
            } else {
                fb_eff = fb;
            }
            last_kept = 1;
        }
    }
    Ok(RootResult { root: x, iterations: MAX_ITERATIONS, residual: fx })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let r = find_root(|x: f64| x - 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r.root - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_two() {
        let r = find_root(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-10).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn no_sign_change_rejected() {
        let err = find_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, EngineError::NoSignChange { .. }));
    }

    #[test]
    fn endpoint_root_accepted() {
        let r = find_root(|x: f64| x, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(r.root, 0.0);
    }

    #[test]
    fn converges_within_iteration_budget_on_awkward_functions() {
        // Steep, flat, and kinked continuous functions with a sign change.
        let cases: Vec<(Box<dyn FnMut(f64) -> f64>, f64, f64, f64)> = vec![
            (Box::new(|x: f64| x.powi(9)), -1.0, 1.5, 0.0),
            (Box::new(|x: f64| (x - 0.3).atan()), -40.0, 7.0, 0.3),
            (Box::new(|x: f64| if x < 0.7 { x - 0.7 } else { 10.0 * (x - 0.7) }), -3.0, 5.0, 0.7),
            (Box::new(|x: f64| (x * 3.0).sin() - 0.2), 0.0, 0.5, 0.2013579207903308 / 3.0),
        ];
        for (f, lo, hi, root) in cases {
            let r = find_root(f, lo, hi, 1e-12).unwrap();
            assert!(r.iterations <= 200);
            assert!((r.root - root).abs() < 1e-10, "{} vs {root}", r.root);
        }
    }
}
