//! Fair-fee root search, hedging Greeks (likelihood method and
//! bump-and-reprice) and fee-structure conversions.
//!
//! The fair fee is the rate `α` making the contract value equal the upfront
//! premium, `Q₀(W(0), A(0)) = W(0)`. `Q₀` is continuous and strictly
//! decreasing in the fee wherever the guarantee can pay out, so a bracketed
//! root search over price evaluations is enough; evaluations are memoised
//! per rate because the bracket endpoints are revisited.

use std::collections::HashMap;

use rand_distr::{Distribution, StandardNormal};

use crate::model::FeeStructure;
use crate::numerics::{find_root, GaussHermite};
use crate::riders::Rider;
use crate::solver::ghqc::{self, GhqcConfig};
use crate::solver::mc::{price_mc, McConfig};
use crate::solver::pde::{price_pde, FdScheme};
use crate::solver::{MortalityTreatment, PricingProblem};
use crate::{cast, EngineError, Result, Scalar};

/// Bracket and tolerance settings for the fee search (all in basis points).
#[derive(Debug, Clone, Copy)]
pub struct FairFeeOptions {
    /// Lower end of the bracket; a warm start drops back to zero if the sign
    /// does not fit.
    pub bracket_lo_bp: f64,
    /// Initial upper bracket; expanded geometrically when too small.
    pub bracket_hi_bp: f64,
    /// Expansion ceiling before the search is declared infeasible.
    pub max_bracket_bp: f64,
    /// Fee tolerance.
    pub tol_bp: f64,
}

impl Default for FairFeeOptions {
    fn default() -> Self {
        Self { bracket_lo_bp: 0.0, bracket_hi_bp: 2000.0, max_bracket_bp: 5000.0, tol_bp: 0.01 }
    }
}

impl FairFeeOptions {
    /// Bracket warm-started around an expected fee.
    pub fn around_bp(hint_bp: f64) -> Self {
        Self {
            bracket_lo_bp: 0.6 * hint_bp,
            bracket_hi_bp: (1.5 * hint_bp).max(1.0),
            ..Self::default()
        }
    }
}

/// Result of a fair-fee search.
#[derive(Debug, Clone, Copy)]
pub struct FairFee<T> {
    /// Solved rate of the requested fee structure (`α`, or `α̃` for discrete
    /// fees), as an annualised fraction.
    pub rate: T,
    /// Continuously-compounded equivalent `α_d = −ln(1 − α̃·dt)/dt`; equals
    /// `rate` for a continuous fee.
    pub continuous_equivalent: T,
    pub iterations: usize,
    pub price_evaluations: usize,
    /// Contract value at the solved rate.
    pub price_at_fee: T,
}

const BP: f64 = 1e-4;

/// Solves `price_at(rate) = premium` for the fee rate. `first_dt` is the
/// first event interval, used for the discrete-to-continuous conversion.
pub fn fair_fee<T: Scalar>(
    premium: T,
    fee: FeeStructure<T>,
    first_dt: T,
    options: &FairFeeOptions,
    mut price_at: impl FnMut(T) -> Result<T>,
) -> Result<FairFee<T>> {
    let mut memo: HashMap<u64, T> = HashMap::new();
    let mut evaluations = 0usize;
    let mut gap = |rate: T| -> Result<T> {
        let key = rate.to_f64().unwrap().to_bits();
        if let Some(v) = memo.get(&key) {
            return Ok(*v);
        }
        evaluations += 1;
        let v = price_at(rate)? - premium;
        memo.insert(key, v);
        Ok(v)
    };

    // Warm-started lower bracket, falling back to zero if the value there
    // already sits below the premium.
    let mut lo_bp = options.bracket_lo_bp.max(0.0);
    if lo_bp > 0.0 && gap(cast(lo_bp * BP))? <= T::zero() {
        lo_bp = 0.0;
    }
    if lo_bp == 0.0 {
        let at_zero = gap(T::zero())?;
        let noise = premium * cast(1e-6);
        if at_zero <= noise {
            if at_zero < -noise {
                return Err(EngineError::FeeInfeasible {
                    lo_bp: 0.0,
                    hi_bp: 0.0,
                    detail: format!(
                        "contract value falls short of the premium by {at_zero} at zero fee"
                    ),
                });
            }
            // The guarantee is worthless: the premium is the fair price.
            return Ok(FairFee {
                rate: T::zero(),
                continuous_equivalent: T::zero(),
                iterations: 0,
                price_evaluations: evaluations,
                price_at_fee: at_zero + premium,
            });
        }
    }

    let mut hi_bp = options.bracket_hi_bp.max(lo_bp + 1.0);
    loop {
        let at_hi = gap(cast(hi_bp * BP))?;
        if at_hi <= T::zero() {
            break;
        }
        if hi_bp >= options.max_bracket_bp {
            return Err(EngineError::FeeInfeasible {
                lo_bp,
                hi_bp,
                detail: "guarantee value exceeds the premium over the whole bracket".into(),
            });
        }
        hi_bp = (hi_bp * 2.0).min(options.max_bracket_bp);
    }

    let mut failure: Option<EngineError> = None;
    let outcome = find_root(
        |rate| match gap(rate) {
            Ok(v) => v,
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e);
                }
                T::nan()
            }
        },
        cast(lo_bp * BP),
        cast(hi_bp * BP),
        cast(options.tol_bp * BP),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }

    let rate = outcome.root;
    let price_at_fee = gap(rate)? + premium;
    let continuous_equivalent = match fee {
        FeeStructure::Continuous { .. } => rate,
        _ => FeeStructure::continuous_equivalent(rate, first_dt),
    };
    Ok(FairFee {
        rate,
        continuous_equivalent,
        iterations: outcome.iterations,
        price_evaluations: evaluations,
        price_at_fee,
    })
}

/// Fair fee with GHQC price evaluations.
pub fn fair_fee_ghqc<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    config: &GhqcConfig,
    options: &FairFeeOptions,
) -> Result<FairFee<T>> {
    fair_fee(problem.w0, problem.fee, problem.model.dt(1), options, |rate| {
        let mut p = *problem;
        p.fee = problem.fee.with_rate(rate);
        Ok(ghqc::price(&p, config)?.price)
    })
}

/// Fair fee with Crank-Nicolson PDE price evaluations.
pub fn fair_fee_pde<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    scheme: &FdScheme,
    options: &FairFeeOptions,
) -> Result<FairFee<T>> {
    fair_fee(problem.w0, problem.fee, problem.model.dt(1), options, |rate| {
        let mut p = *problem;
        p.fee = problem.fee.with_rate(rate);
        Ok(price_pde(&p, scheme)?.price)
    })
}

/// Fair fee with Monte Carlo price evaluations. The same seed drives every
/// evaluation, so the price is a smooth, monotone function of the rate and
/// the root is well defined despite the sampling noise.
pub fn fair_fee_mc<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    config: &McConfig,
    options: &FairFeeOptions,
) -> Result<FairFee<T>>
where
    StandardNormal: Distribution<T>,
{
    fair_fee(problem.w0, problem.fee, problem.model.dt(1), options, |rate| {
        let mut p = *problem;
        p.fee = problem.fee.with_rate(rate);
        Ok(price_mc(&p, config)?.price)
    })
}

/// First- and second-order wealth sensitivities of the contract value `Q`.
/// The guarantee value `U = Q − W` has `ΔU = Δ − 1` and the same gamma.
#[derive(Debug, Clone, Copy)]
pub struct Greeks<T> {
    pub delta: T,
    pub gamma: T,
}

impl<T: Scalar> Greeks<T> {
    /// Greeks of the guarantee component `U = Q − W`.
    pub fn guarantee(&self) -> Greeks<T> {
        Greeks { delta: self.delta - T::one(), gamma: self.gamma }
    }
}

/// Delta and Gamma by the likelihood method: the first-period lognormal
/// transition density is differentiated inside the pricing expectation, so
/// the already-computed `t₁⁻` surface is integrated with the extra weights
///
/// `∂ln p̃/∂w₀ = z/(s·w₀)`,
/// `(∂ln p̃/∂w₀)² + ∂²ln p̃/∂w₀² = ((z² − 1)/s² − z/s)/w₀²`,
///
/// where `s = σ₁√dt₁` and `z` is the standard normal abscissa.
pub fn delta_gamma_likelihood<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    config: &GhqcConfig,
) -> Result<Greeks<T>> {
    if !(problem.model.vol(1) > T::zero()) {
        return Err(EngineError::Parameter(
            "likelihood Greeks need positive first-period volatility".into(),
        ));
    }
    let solution = ghqc::solve(problem, config, MortalityTreatment::Conditional)?;
    // Dispersion of the transition the solver actually differentiated (the
    // first sub-step when the interval is split).
    let s = solution.first_period_dispersion();
    // The time-zero integrals carry the likelihood weights, which amplify
    // the integrand's short-scale structure; a high-order rule over the
    // stored slice costs nothing relative to the solve.
    let quad = GaussHermite::new(GaussHermite::<T>::MAX_ORDER)?;
    let w0 = problem.w0;
    let delta = solution.time_zero_expectation_with(&quad, w0, |z| z / (s * w0));
    let one = T::one();
    let gamma = solution
        .time_zero_expectation_with(&quad, w0, |z| ((z * z - one) / (s * s) - z / s) / (w0 * w0));
    Ok(Greeks { delta, gamma })
}

/// Perturbation sizes for bump-and-reprice sensitivities.
#[derive(Debug, Clone, Copy)]
pub struct BumpSizes {
    /// Relative wealth bump for Delta/Gamma.
    pub wealth_relative: f64,
    /// Absolute parallel shift of the rates for Rho.
    pub rate_absolute: f64,
    /// Absolute parallel shift of the volatilities for Vega.
    pub vol_absolute: f64,
}

impl Default for BumpSizes {
    fn default() -> Self {
        Self { wealth_relative: 1e-3, rate_absolute: 1e-3, vol_absolute: 5e-3 }
    }
}

/// Bump-and-reprice sensitivities of the contract value `Q`.
#[derive(Debug, Clone, Copy)]
pub struct BumpGreeks<T> {
    pub delta: T,
    pub gamma: T,
    pub rho: T,
    pub vega: T,
}

/// Central-difference Greeks. Delta and Gamma reuse one backward solve — the
/// starting wealth only enters the final integration step — while Rho and
/// Vega re-solve under parallel-shifted rates and volatilities.
pub fn greeks_bump<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    config: &GhqcConfig,
    sizes: &BumpSizes,
) -> Result<BumpGreeks<T>> {
    let solution = ghqc::solve(problem, config, MortalityTreatment::Conditional)?;
    let quad = GaussHermite::new(GaussHermite::<T>::MAX_ORDER)?;
    let w0 = problem.w0;
    let h = cast::<T>(sizes.wealth_relative) * w0;
    let price_at = |w: T| solution.time_zero_expectation_with(&quad, w, |_| T::one());
    let up = price_at(w0 + h);
    let down = price_at(w0 - h);
    let mid = price_at(w0);
    let two = cast::<T>(2.0);
    let delta = (up - down) / (two * h);
    let gamma = (up - two * mid + down) / (h * h);

    let reprice = |rate_shift: f64, vol_shift: f64| -> Result<T> {
        let shifted = problem.model.shifted(cast(rate_shift), cast(vol_shift))?;
        let p = PricingProblem {
            rider: problem.rider,
            model: &shifted,
            fee: problem.fee,
            mortality: problem.mortality,
            strategy: problem.strategy,
            w0: problem.w0,
            a0: problem.a0,
        };
        Ok(ghqc::price(&p, config)?.price)
    };
    let dr = sizes.rate_absolute;
    let rho = (reprice(dr, 0.0)? - reprice(-dr, 0.0)?) / (two * cast(dr));
    let dv = sizes.vol_absolute;
    let vega = (reprice(0.0, dv)? - reprice(0.0, -dv)?) / (two * cast(dv));

    Ok(BumpGreeks { delta, gamma, rho, vega })
}

/// Units of the tradable asset held against the wealth-account exposure:
/// `Δ_S = (∂Q/∂W − 1)·W/S`.
pub fn hedge_units<T: Scalar>(contract_delta: T, wealth: T, asset: T) -> T {
    (contract_delta - T::one()) * wealth / asset
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::lattice::LatticeParams;
    use crate::model::{MarketModel, MortalityModel};
    use crate::riders::{Gmab, GmabAccount};
    use crate::solver::{StaticRule, Strategy};

    /// Monthly no-op event grid with a dense wealth mesh: the terminal-kink
    /// quadrature bias shrinks with the step size, and the closed-form
    /// comparisons here need it below a hundredth of a basis point.
    fn dense_config() -> GhqcConfig {
        GhqcConfig {
            lattice: LatticeParams {
                wealth_intervals: 3000,
                base_slices: 8,
                quantile_width: 7.0,
                ..Default::default()
            },
            quad_order: 33,
            ..Default::default()
        }
    }

    fn no_ratchet_problem<'a>(
        rider: &'a Gmab<f64>,
        model: &'a MarketModel<f64>,
        mortality: &'a MortalityModel<f64>,
        fee: f64,
        a0: f64,
    ) -> PricingProblem<'a, f64, Gmab<f64>> {
        PricingProblem {
            rider,
            model,
            fee: FeeStructure::Continuous { rate: fee },
            mortality,
            strategy: Strategy::Static(StaticRule::None),
            w0: 100.0,
            a0,
        }
    }

    /// Closed-form fair fee of the no-ratchet GMAB: the root of
    /// `W0·e^{−αT} + put(W0, A0, r, σ, T, yield α) − W0`.
    fn closed_form_fee(rate: f64, vol: f64, expiry: f64) -> f64 {
        find_root(
            |alpha: f64| {
                100.0 * (-alpha * expiry).exp()
                    + analytic::put_price(100.0, 100.0, rate, alpha, vol, expiry)
                    - 100.0
            },
            0.0,
            0.2,
            1e-12,
        )
        .unwrap()
        .root
    }

    #[test]
    fn fair_fee_matches_closed_form_oracle() {
        let (rate, vol, expiry) = (0.05, 0.2, 10.0);
        let model = MarketModel::uniform(expiry, 12, rate, vol, None).unwrap();
        let mortality = MortalityModel::none(120);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let problem = no_ratchet_problem(&rider, &model, &mortality, 0.0, 100.0);
        let got = fair_fee_ghqc(&problem, &dense_config(), &FairFeeOptions::default()).unwrap();
        let want = closed_form_fee(rate, vol, expiry);
        assert!(
            (got.rate - want).abs() < 0.1 * BP,
            "{} bp vs {} bp",
            got.rate / BP,
            want / BP
        );
        assert!((got.price_at_fee - 100.0).abs() < 0.02);
        assert!(got.continuous_equivalent == got.rate);
    }

    #[test]
    fn zero_volatility_means_zero_fee() {
        let model = MarketModel::uniform(10.0, 4, 0.05, 0.0, None).unwrap();
        let mortality = MortalityModel::none(40);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let problem = no_ratchet_problem(&rider, &model, &mortality, 0.0, 100.0);
        let config = GhqcConfig {
            lattice: LatticeParams { wealth_intervals: 6400, base_slices: 8, ..Default::default() },
            ..Default::default()
        };
        let fee = fair_fee_ghqc(&problem, &config, &FairFeeOptions::default()).unwrap();
        assert_eq!(fee.rate, 0.0);
    }

    #[test]
    fn no_guarantee_delta_is_one() {
        let model = MarketModel::uniform(10.0, 4, 0.05, 0.2, None).unwrap();
        let mortality = MortalityModel::none(40);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let problem = no_ratchet_problem(&rider, &model, &mortality, 0.0, 0.0);
        let greeks = delta_gamma_likelihood(&problem, &dense_config()).unwrap();
        assert!((greeks.delta - 1.0).abs() < 1e-4, "delta {}", greeks.delta);
        assert!(greeks.gamma.abs() < 1e-5, "gamma {}", greeks.gamma);
        assert_eq!(greeks.guarantee().delta, greeks.delta - 1.0);
    }

    #[test]
    fn likelihood_delta_matches_put_decomposition() {
        let (rate, vol, fee, expiry) = (0.05, 0.2, 0.01, 10.0);
        let model = MarketModel::uniform(expiry, 12, rate, vol, None).unwrap();
        let mortality = MortalityModel::none(120);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let problem = no_ratchet_problem(&rider, &model, &mortality, fee, 100.0);
        let greeks = delta_gamma_likelihood(&problem, &dense_config()).unwrap();
        let want_delta = (-fee * expiry as f64).exp()
            + analytic::put_delta(100.0, 100.0, rate, fee, vol, expiry);
        assert!(
            ((greeks.delta - want_delta) / want_delta).abs() < 1e-3,
            "{} vs {want_delta}",
            greeks.delta
        );
        let want_gamma = analytic::gamma(100.0, 100.0, rate, fee, vol, expiry);
        assert!(
            ((greeks.gamma - want_gamma) / want_gamma).abs() < 1e-2,
            "{} vs {want_gamma}",
            greeks.gamma
        );
    }

    #[test]
    fn bump_greeks_match_oracles_on_smooth_contract() {
        let (rate, vol, fee, expiry) = (0.05, 0.2, 0.01, 10.0);
        let model = MarketModel::uniform(expiry, 12, rate, vol, None).unwrap();
        let mortality = MortalityModel::none(120);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let problem = no_ratchet_problem(&rider, &model, &mortality, fee, 100.0);
        let bumped = greeks_bump(&problem, &dense_config(), &BumpSizes::default()).unwrap();
        // Vega of the contract equals the put vega (the wealth leg carries no
        // volatility exposure).
        let want_vega = analytic::vega(100.0, 100.0, rate, fee, vol, expiry);
        assert!(
            ((bumped.vega - want_vega) / want_vega).abs() < 1e-2,
            "{} vs {want_vega}",
            bumped.vega
        );
        // Rho of the guarantee U is negative: higher rates cheapen the put.
        let want_rho_sign = analytic::put_rho(100.0, 100.0, rate, fee, vol, expiry);
        assert!(bumped.rho < 0.0 && want_rho_sign < 0.0, "rho {}", bumped.rho);
        // Likelihood and bump agree on Delta/Gamma.
        let lik = delta_gamma_likelihood(&problem, &dense_config()).unwrap();
        assert!(((bumped.delta - lik.delta) / lik.delta).abs() < 5e-3);
        assert!(((bumped.gamma - lik.gamma) / lik.gamma).abs() < 5e-3);
    }

    #[test]
    fn hedge_units_identities() {
        assert_eq!(hedge_units(1.0f64, 123.0, 50.0), 0.0);
        assert!((hedge_units(1.2f64, 100.0, 100.0) - 0.2).abs() < 1e-15);
        // Δ_S·S = Δ_W·W with Δ_W = ∂U/∂W.
        let (dq, w, s) = (1.37f64, 80.0, 65.0);
        assert!((hedge_units(dq, w, s) * s - (dq - 1.0) * w).abs() < 1e-12);
    }
}
