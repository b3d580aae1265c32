//! Closed-form Black-Scholes values, used as independent oracles by the
//! validation suites and for sanity checks. The backward solvers never call
//! into this module.

use crate::{cast, Scalar};

/// Standard normal CDF via the complementary error function relation
/// `Φ(x) = erfc(−x/√2)/2`, with an Abramowitz–Stegun rational erfc accurate
/// to ~1e−15.
pub fn norm_cdf<T: Scalar>(x: T) -> T {
    let half = cast::<T>(0.5);
    half * erfc(-x / cast::<T>(std::f64::consts::SQRT_2))
}

fn erfc<T: Scalar>(x: T) -> T {
    // Numerical Recipes erfccheb-style expansion.
    let z = x.abs();
    let t = cast::<T>(2.0) / (cast::<T>(2.0) + z);
    let ty = cast::<T>(4.0) * t - cast::<T>(2.0);
    const COF: [f64; 28] = [
        -1.3026537197817094,
        6.4196979235649026e-1,
        1.9476473204185836e-2,
        -9.561514786808631e-3,
        -9.46595344482036e-4,
        3.66839497852761e-4,
        4.2523324806907e-5,
        -2.0278578112534e-5,
        -1.624290004647e-6,
        1.303655835580e-6,
        1.5626441722e-8,
        -8.5238095915e-8,
        6.529054439e-9,
        5.059343495e-9,
        -9.91364156e-10,
        -2.27365122e-10,
        9.6467911e-11,
        2.394038e-12,
        -6.886027e-12,
        8.94487e-13,
        3.13092e-13,
        -1.12708e-13,
        3.81e-16,
        7.106e-15,
        -1.523e-15,
        -9.4e-17,
        1.21e-16,
        -2.8e-17,
    ];
    let mut d = T::zero();
    let mut dd = T::zero();
    for &c in COF.iter().rev().take(COF.len() - 1) {
        let tmp = d;
        d = ty * d - dd + cast(c);
        dd = tmp;
    }
    let half = cast::<T>(0.5);
    let ans = t * (-z * z + half * (cast::<T>(COF[0]) + ty * d) - dd).exp();
    if x >= T::zero() {
        ans
    } else {
        cast::<T>(2.0) - ans
    }
}

/// `d₁` of the Black-Scholes formula with continuous dividend yield.
pub fn d1<T: Scalar>(spot: T, strike: T, rate: T, yield_: T, vol: T, expiry: T) -> T {
    let half = cast::<T>(0.5);
    ((spot / strike).ln() + (rate - yield_ + half * vol * vol) * expiry) / (vol * expiry.sqrt())
}

/// European put with continuous dividend yield `yield_` on the underlying.
pub fn put_price<T: Scalar>(spot: T, strike: T, rate: T, yield_: T, vol: T, expiry: T) -> T {
    if vol <= T::zero() || expiry <= T::zero() {
        let fwd = spot * ((rate - yield_) * expiry).exp();
        return (-rate * expiry).exp() * (strike - fwd).max(T::zero());
    }
    let d1 = d1(spot, strike, rate, yield_, vol, expiry);
    let d2 = d1 - vol * expiry.sqrt();
    strike * (-rate * expiry).exp() * norm_cdf(-d2)
        - spot * (-yield_ * expiry).exp() * norm_cdf(-d1)
}

/// ∂put/∂spot.
pub fn put_delta<T: Scalar>(spot: T, strike: T, rate: T, yield_: T, vol: T, expiry: T) -> T {
    let d1 = d1(spot, strike, rate, yield_, vol, expiry);
    -(-yield_ * expiry).exp() * norm_cdf(-d1)
}

/// ∂²put/∂spot² (same as the call gamma).
pub fn gamma<T: Scalar>(spot: T, strike: T, rate: T, yield_: T, vol: T, expiry: T) -> T {
    let d1 = d1(spot, strike, rate, yield_, vol, expiry);
    let pdf = (-d1 * d1 / cast::<T>(2.0)).exp() / cast::<T>((2.0 * std::f64::consts::PI).sqrt());
    (-yield_ * expiry).exp() * pdf / (spot * vol * expiry.sqrt())
}

/// ∂put/∂vol (same as the call vega).
pub fn vega<T: Scalar>(spot: T, strike: T, rate: T, yield_: T, vol: T, expiry: T) -> T {
    let d1 = d1(spot, strike, rate, yield_, vol, expiry);
    let pdf = (-d1 * d1 / cast::<T>(2.0)).exp() / cast::<T>((2.0 * std::f64::consts::PI).sqrt());
    spot * (-yield_ * expiry).exp() * pdf * expiry.sqrt()
}

/// ∂put/∂rate.
pub fn put_rho<T: Scalar>(spot: T, strike: T, rate: T, yield_: T, vol: T, expiry: T) -> T {
    let d2 = d1(spot, strike, rate, yield_, vol, expiry) - vol * expiry.sqrt();
    -strike * expiry * (-rate * expiry).exp() * norm_cdf(-d2)
}
