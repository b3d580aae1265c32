//! Branch-light natural logarithm for the interpolation hot path.
//!
//! The jump-condition optimiser maps millions of candidate states into
//! log-coordinates per event date; the libm call dominates that loop. The
//! atanh-series evaluation below is accurate to a few units in the last
//! place over the normal range, which is far below the lattice resolution.

use crate::Scalar;

const LN_2: f64 = core::f64::consts::LN_2;
const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Natural log of a positive, normal `f64`.
#[inline]
pub(crate) fn fast_ln_f64(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let mut exponent = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let mut mantissa = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | 0x3ff0_0000_0000_0000);
    if mantissa > SQRT_2 {
        mantissa *= 0.5;
        exponent += 1;
    }
    // ln m = 2·atanh(t) with t = (m−1)/(m+1), |t| ≤ √2−1 over [√½, √2].
    let t = (mantissa - 1.0) / (mantissa + 1.0);
    let t2 = t * t;
    let series = t2 * (1.0 / 3.0
        + t2 * (1.0 / 5.0
            + t2 * (1.0 / 7.0
                + t2 * (1.0 / 9.0
                    + t2 * (1.0 / 11.0
                        + t2 * (1.0 / 13.0 + t2 * (1.0 / 15.0 + t2 / 17.0)))))));
    exponent as f64 * LN_2 + 2.0 * (t + t * series)
}

/// Generic wrapper; the bit manipulation runs in `f64`, which loses nothing
/// for an `f32` input.
#[inline]
pub(crate) fn fast_ln<T: Scalar>(x: T) -> T {
    T::from_f64(fast_ln_f64(x.to_f64().unwrap_or(f64::MIN_POSITIVE)))
        .unwrap_or_else(T::nan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_libm_over_wide_range() {
        let mut worst = 0.0f64;
        let mut x = 1e-12f64;
        while x < 1e12 {
            let got = fast_ln_f64(x);
            let want = x.ln();
            let err = if want.abs() > 1e-12 {
                ((got - want) / want).abs()
            } else {
                (got - want).abs()
            };
            worst = worst.max(err);
            x *= 1.0173;
        }
        assert!(worst < 1e-13, "worst relative error {worst}");
    }

    #[test]
    fn handles_boundary_mantissas() {
        for &x in &[1.0f64, 2.0, 0.5, SQRT_2, SQRT_2 * (1.0 + 1e-16), 4.0, 1e-10] {
            assert!((fast_ln_f64(x) - x.ln()).abs() < 1e-14 * (1.0 + x.ln().abs()));
        }
    }
}
