//! Forward Monte Carlo pricer for static withdrawal strategies.
//!
//! Simulates the wealth account forward through the event schedule, applies
//! the rider's jump conditions path by path and averages the discounted
//! payoff. Mortality is handled by analytic survival weighting of the
//! cashflows (the averaged recursion) rather than by simulating death times,
//! which removes that source of variance at no bias.
//!
//! Optimal strategies cannot be priced this way: the withdrawal decision
//! controls the wealth path, so a plain forward simulation has no access to
//! the optimal control. Such requests are rejected.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::model::StatePoint;
use crate::riders::Rider;
use crate::solver::{
    event_context, static_gamma, Diagnostics, PricingProblem, PricingResult, StaticRule,
    Strategy,
};
use crate::{cast, EngineError, Result, Scalar};

/// Monte Carlo configuration. Paths are split into fixed-size batches, each
/// driven by its own generator seeded from `(seed, batch index)` through a
/// SplitMix64 mix, so results are reproducible for a given seed and batch
/// size regardless of thread scheduling.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub paths: u64,
    pub seed: u64,
    /// Simulate mirrored pairs `(z, −z)`; the pair average is one sample.
    pub antithetic: bool,
    pub batch_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 20_000_000,
            seed: 42,
            antithetic: false,
            batch_size: 1 << 16,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-period constants hoisted out of the path loop.
struct PeriodTables<T> {
    /// Lognormal growth: `exp(drift + scale·z)` per period.
    drift: Vec<T>,
    scale: Vec<T>,
    /// `B₀ₙ·pₙ` weighting the survival cashflow at each event.
    cash_weight: Vec<T>,
    /// `B₀ₙ·pₙ₋₁·qₙ` weighting the death benefit at each event.
    death_weight: Vec<T>,
}

fn period_tables<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
) -> Result<PeriodTables<T>> {
    let model = problem.model;
    let n = model.n_events();
    let half = cast::<T>(0.5);
    let mut tables = PeriodTables {
        drift: Vec::with_capacity(n),
        scale: Vec::with_capacity(n),
        cash_weight: Vec::with_capacity(n),
        death_weight: Vec::with_capacity(n),
    };
    for k in 1..=n {
        let dt = model.dt(k);
        let vol = model.vol(k);
        tables
            .drift
            .push((model.rate(k) - problem.fee.drift_rate() - half * vol * vol) * dt);
        tables.scale.push(vol * dt.sqrt());
        let disc = model.discount(0, k)?;
        tables.cash_weight.push(disc * problem.mortality.survival(k));
        tables.death_weight.push(
            disc * problem.mortality.survival(k - 1) * problem.mortality.death_prob(k),
        );
    }
    Ok(tables)
}

/// Prices a static-strategy contract by forward simulation. Returns the
/// estimate and its standard error.
pub fn price_mc<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    config: &McConfig,
) -> Result<PricingResult<T>>
where
    StandardNormal: Distribution<T>,
{
    let start = Instant::now();
    problem.validate()?;
    let rule = match &problem.strategy {
        Strategy::Static(rule) => *rule,
        other => {
            return Err(EngineError::UnsupportedStrategy(format!(
                "Monte Carlo requires a pre-determined withdrawal rule; {other:?} needs a \
                 backward solver"
            )))
        }
    };
    if config.paths == 0 || config.batch_size == 0 {
        return Err(EngineError::Parameter("path and batch counts must be positive".into()));
    }

    let tables = period_tables(problem)?;
    let samples = if config.antithetic { config.paths.div_ceil(2) } else { config.paths };
    let n_batches = samples.div_ceil(config.batch_size);

    // One (sum, sum of squares) pair per batch, combined in batch order so
    // the estimate does not depend on the thread schedule.
    let partials: Vec<(T, T)> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let batch_samples =
                config.batch_size.min(samples - b * config.batch_size) as usize;
            let mut rng = StdRng::seed_from_u64(splitmix64(config.seed ^ (b + 1)));
            let mut sum = T::zero();
            let mut sum_sq = T::zero();
            let mut zs: Vec<T> = vec![T::zero(); problem.model.n_events()];
            for _ in 0..batch_samples {
                for z in zs.iter_mut() {
                    *z = StandardNormal.sample(&mut rng);
                }
                let value = if config.antithetic {
                    let up = simulate_path(problem, &rule, &tables, &zs, false);
                    let down = simulate_path(problem, &rule, &tables, &zs, true);
                    cast::<T>(0.5) * (up + down)
                } else {
                    simulate_path(problem, &rule, &tables, &zs, false)
                };
                sum += value;
                sum_sq += value * value;
            }
            (sum, sum_sq)
        })
        .collect();

    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    for (s, s2) in partials {
        sum += s;
        sum_sq += s2;
    }
    let count: T = cast(samples as f64);
    let mean = sum / count;
    let variance = (sum_sq / count - mean * mean).max(T::zero());
    let std_error = (variance / count).sqrt();

    Ok(PricingResult {
        price: mean,
        std_error: Some(std_error),
        diagnostics: Diagnostics {
            solver: "mc",
            wealth_intervals: 0,
            base_slices: 0,
            quadrature_order: None,
            time_steps_per_interval: None,
            paths: Some(if config.antithetic { samples * 2 } else { samples }),
            runtime: start.elapsed(),
        },
    })
}

/// Discounted pathwise payoff in the survival-weighted form:
/// `Σₙ B₀ₙ(pₙ f̃ₙ + pₙ₋₁qₙ Dₙ) + B₀N(p_N P_T + p_{N−1}q_N D_N)`.
#[inline]
fn simulate_path<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    rule: &StaticRule<T>,
    tables: &PeriodTables<T>,
    zs: &[T],
    mirror: bool,
) -> T {
    let model = problem.model;
    let n_events = model.n_events();
    let mut wealth = problem.w0;
    let mut base = problem.a0;
    let mut payoff = T::zero();
    let mortal = !problem.mortality.is_zero();

    for n in 1..=n_events {
        let k = n - 1;
        let z = if mirror { -zs[k] } else { zs[k] };
        wealth = wealth * (tables.drift[k] + tables.scale[k] * z).exp();
        let ctx = event_context(model, n);
        let w_eff = problem.fee.apply_at_event(ctx.dt, wealth, base);
        let state = StatePoint::new(w_eff, base);
        if mortal && tables.death_weight[k] > T::zero() {
            payoff += tables.death_weight[k] * problem.rider.death_benefit(&ctx, state);
        }
        if n < n_events {
            let gamma = static_gamma(rule, problem.rider, &ctx, state);
            payoff += tables.cash_weight[k] * problem.rider.cashflow(&ctx, state, gamma);
            let post = problem.rider.jump(&ctx, state, gamma);
            wealth = post.wealth;
            base = post.base;
        } else {
            payoff += tables.cash_weight[k] * problem.rider.maturity_payoff(&ctx, state);
        }
    }
    payoff
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::model::{FeeStructure, MarketModel, MortalityModel};
    use crate::riders::{Gmab, GmabAccount};

    fn gmab_problem<'a>(
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

    #[test]
    fn zero_fee_wealth_contract_recovers_premium() {
        let model = MarketModel::uniform(10.0, 4, 0.05, 0.2, None).unwrap();
        let mortality = MortalityModel::none(40);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let problem = gmab_problem(&rider, &model, &mortality, 0.0, 0.0);
        let config = McConfig { paths: 400_000, seed: 11, ..Default::default() };
        let r = price_mc(&problem, &config).unwrap();
        let se = r.std_error.unwrap();
        assert!(
            (r.price - 100.0).abs() < 3.0 * se,
            "price {} se {se}",
            r.price
        );
    }

    #[test]
    fn matches_put_decomposition_oracle() {
        let (rate, vol, fee, expiry) = (0.04, 0.25, 0.008, 5.0);
        let model = MarketModel::uniform(expiry, 4, rate, vol, None).unwrap();
        let mortality = MortalityModel::none(20);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let problem = gmab_problem(&rider, &model, &mortality, fee, 100.0);
        let config = McConfig { paths: 1_000_000, seed: 5, ..Default::default() };
        let r = price_mc(&problem, &config).unwrap();
        let expected = 100.0 * (-fee * expiry as f64).exp()
            + analytic::put_price(100.0, 100.0, rate, fee, vol, expiry);
        assert!(
            (r.price - expected).abs() < 3.0 * r.std_error.unwrap(),
            "{} vs {expected}",
            r.price
        );
    }

    #[test]
    fn identical_seed_reproduces_bitwise() {
        let model = MarketModel::uniform(3.0, 4, 0.03, 0.2, Some(4)).unwrap();
        let mortality = MortalityModel::none(12);
        let rider = Gmab::new(GmabAccount::Pension, 0.15, 100.0).unwrap();
        let problem = gmab_problem(&rider, &model, &mortality, 0.01, 100.0);
        let config = McConfig { paths: 100_000, seed: 99, ..Default::default() };
        let a = price_mc(&problem, &config).unwrap();
        let b = price_mc(&problem, &config).unwrap();
        assert_eq!(a.price.to_bits(), b.price.to_bits());
        assert_eq!(a.std_error.unwrap().to_bits(), b.std_error.unwrap().to_bits());
    }

    #[test]
    fn antithetic_reduces_variance() {
        let model = MarketModel::uniform(10.0, 1, 0.05, 0.2, Some(1)).unwrap();
        let mortality = MortalityModel::none(10);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let problem = gmab_problem(&rider, &model, &mortality, 0.0271, 100.0);
        let plain = price_mc(
            &problem,
            &McConfig { paths: 400_000, seed: 3, antithetic: false, ..Default::default() },
        )
        .unwrap();
        let anti = price_mc(
            &problem,
            &McConfig { paths: 400_000, seed: 3, antithetic: true, ..Default::default() },
        )
        .unwrap();
        assert!(anti.std_error.unwrap() <= plain.std_error.unwrap());
    }

    #[test]
    fn optimal_strategy_rejected() {
        let model = MarketModel::uniform(1.0, 4, 0.05, 0.2, None).unwrap();
        let mortality = MortalityModel::none(4);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let mut problem = gmab_problem(&rider, &model, &mortality, 0.0, 100.0);
        problem.strategy = Strategy::Optimal;
        let err = price_mc(&problem, &McConfig::default()).unwrap_err();
        assert!(matches!(err, EngineError::UnsupportedStrategy(_)));
    }
}
