//! Backward-induction and Monte Carlo solvers for the guarantee pricing
//! problem, plus the withdrawal-strategy and result types they share.
//!
//! The Bellman recursion alternates two moves per event date `tₙ`, walking
//! from the maturity condition back to `t₀`:
//!
//! * a *continuation* step computing the discounted, mortality-weighted
//!   expectation of the next pre-event surface over the lognormal wealth
//!   transition — Gauss-Hermite quadrature in [`ghqc`], Crank-Nicolson
//!   finite differences in [`pde`];
//! * a *jump* step applying fee deduction, withdrawal, penalty and ratchet
//!   rules, maximising over admissible withdrawals when the strategy is
//!   optimal. The jump machinery lives here and is shared by both backward
//!   solvers.
//!
//! [`mc`] prices static strategies by forward simulation instead and serves
//! as an independent validator.

use std::time::Duration;

use rayon::prelude::*;

use crate::lattice::{Lattice, SurfaceInterpolant, SurfaceSide, ValueSurface};
use crate::model::{FeeStructure, MarketModel, MortalityModel, StatePoint};
use crate::riders::{EventContext, Rider};
use crate::{cast, EngineError, Result, Scalar};

pub mod ghqc;
pub mod mc;
pub mod pde;

/// Pre-determined withdrawal rule, evaluated per event from the post-fee
/// state without any optimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StaticRule<T> {
    /// Never withdraw.
    None,
    /// Withdraw an annualised fraction of the wealth account:
    /// `γₙ = rate·dtₙ·W(tₙ⁻)`.
    WealthFraction { annual_rate: T },
    /// Withdraw the contractual amount `Gₙ`.
    Contractual,
}

impl<T: Scalar> StaticRule<T> {
    fn gamma<R: Rider<T>>(&self, rider: &R, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        let max = rider.max_withdrawal(ctx, state);
        let raw = match *self {
            StaticRule::None => T::zero(),
            StaticRule::WealthFraction { annual_rate } => annual_rate * ctx.dt * state.wealth,
            StaticRule::Contractual => rider.contractual_amount(ctx, state),
        };
        raw.max(T::zero()).min(max)
    }
}

/// Policyholder withdrawal behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy<T> {
    /// Deterministic rule fixed at inception.
    Static(StaticRule<T>),
    /// Value-maximising withdrawal at every event date.
    Optimal,
    /// Withdraw the contractual amount unless the optimal choice adds more
    /// than `θ·Gₙ` of value; `θ = 0` reproduces the optimal strategy.
    Threshold { theta: T },
}

impl<T> Strategy<T> {
    pub fn is_static(&self) -> bool {
        matches!(self, Strategy::Static(_))
    }
}

/// How mortality enters the recursion. Both formulations price identically;
/// the averaged form folds survival weights into the cashflows, which lets a
/// forward Monte Carlo pricer skip simulating death times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MortalityTreatment {
    /// Condition on survival per period: the continuation mixes the survival
    /// and death branches with `qₙ₊₁`.
    Conditional,
    /// Average over the mortality process upfront: cashflows are weighted by
    /// `pₙ` (and death benefits by `pₙ₋₁qₙ`) inside the jump condition.
    Averaged,
}

/// The pricing problem handed to every solver.
pub struct PricingProblem<'a, T, R> {
    pub rider: &'a R,
    pub model: &'a MarketModel<T>,
    pub fee: FeeStructure<T>,
    pub mortality: &'a MortalityModel<T>,
    pub strategy: Strategy<T>,
    /// Upfront premium (initial wealth account).
    pub w0: T,
    /// Initial benefit base; equals `w0` at issue.
    pub a0: T,
}

impl<'a, T: Scalar, R> Clone for PricingProblem<'a, T, R> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<'a, T: Scalar, R> Copy for PricingProblem<'a, T, R> {}

impl<'a, T: Scalar, R: Rider<T>> PricingProblem<'a, T, R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.w0 > T::zero()) || self.a0 < T::zero() {
            return Err(EngineError::Parameter(
                "initial wealth must be positive and initial base non-negative".into(),
            ));
        }
        if self.mortality.n_events() != self.model.n_events() {
            return Err(EngineError::Parameter(format!(
                "mortality model covers {} events, market model has {}",
                self.mortality.n_events(),
                self.model.n_events()
            )));
        }
        Ok(())
    }
}

/// Solver run metadata reported alongside every price.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub solver: &'static str,
    pub wealth_intervals: usize,
    pub base_slices: usize,
    pub quadrature_order: Option<usize>,
    pub time_steps_per_interval: Option<usize>,
    pub paths: Option<u64>,
    pub runtime: Duration,
}

/// A computed contract price with solver diagnostics.
#[derive(Debug, Clone)]
pub struct PricingResult<T> {
    /// `Q₀(W(0), A(0))`.
    pub price: T,
    /// Monte Carlo standard error, when applicable.
    pub std_error: Option<T>,
    pub diagnostics: Diagnostics,
}

pub(crate) fn event_context<T: Scalar>(model: &MarketModel<T>, n: usize) -> EventContext<T> {
    EventContext {
        index: n,
        time: model.time(n),
        dt: model.dt(n),
        ratchet: model.is_ratchet(n),
    }
}

/// Terminal condition `Q_{t_N⁻}` (or its survival-weighted Ψ analogue) on the
/// lattice. Discrete fees are deducted before the payoff is read.
pub(crate) fn terminal_surface<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    lattice: &Lattice<T>,
    treatment: MortalityTreatment,
) -> ValueSurface<T> {
    let n = problem.model.n_events();
    let ctx = event_context(problem.model, n);
    let mut surface = ValueSurface::zeros(lattice, n, SurfaceSide::PreEvent);
    let (w_payoff, w_death) = match treatment {
        MortalityTreatment::Conditional => (T::one(), T::zero()),
        MortalityTreatment::Averaged => (
            problem.mortality.survival(n),
            problem.mortality.survival(n - 1) * problem.mortality.death_prob(n),
        ),
    };
    for j in 0..lattice.n_base() {
        let base = lattice.base(j);
        let row = surface.row_mut(j);
        for (m, slot) in row.iter_mut().enumerate() {
            let wealth = problem.fee.apply_at_event(ctx.dt, lattice.wealth(m), base);
            let state = StatePoint::new(wealth, base);
            let mut v = w_payoff * problem.rider.maturity_payoff(&ctx, state);
            if w_death > T::zero() {
                v += w_death * problem.rider.death_benefit(&ctx, state);
            }
            *slot = v;
        }
    }
    surface
}

/// Best withdrawal over an ascending candidate scan: `K` equally spaced
/// points on `[0, γ_max]` plus the contractual amount. Strict improvement is
/// required to move the argmax, so ties resolve to the smallest γ.
#[inline]
fn optimize_withdrawal<T: Scalar>(
    g_n: T,
    gamma_max: T,
    candidates: usize,
    mut value_of: impl FnMut(T) -> T,
) -> (T, T) {
    let mut best_value = value_of(T::zero());
    let mut best_gamma = T::zero();
    if gamma_max > T::zero() {
        let steps = candidates.max(2) - 1;
        let steps_t: T = cast(steps as f64);
        let mut pending_g = g_n > T::zero() && g_n < gamma_max;
        for i in 1..=steps {
            let gamma = gamma_max * cast::<T>(i as f64) / steps_t;
            if pending_g && g_n < gamma {
                let v = value_of(g_n);
                if v > best_value {
                    best_value = v;
                    best_gamma = g_n;
                }
                pending_g = false;
            }
            let v = value_of(gamma);
            if v > best_value {
                best_value = v;
                best_gamma = gamma;
            }
        }
    }
    (best_value, best_gamma)
}

/// Applies the jump condition at event `tₙ`, producing the pre-event surface
/// from the post-event one. Works for both backward solvers; rows are
/// independent and processed in parallel.
pub(crate) fn apply_jump<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    lattice: &Lattice<T>,
    withdrawal_candidates: usize,
    n: usize,
    post: &ValueSurface<T>,
    treatment: MortalityTreatment,
) -> Result<ValueSurface<T>> {
    let ctx = event_context(problem.model, n);
    let interp = SurfaceInterpolant::new(lattice, post)?;
    let (w_cash, w_death) = match treatment {
        MortalityTreatment::Conditional => (T::one(), T::zero()),
        MortalityTreatment::Averaged => (
            problem.mortality.survival(n),
            problem.mortality.survival(n - 1) * problem.mortality.death_prob(n),
        ),
    };

    let mut pre = ValueSurface::zeros(lattice, n, SurfaceSide::PreEvent);
    let n_w = lattice.n_wealth();
    let rider = problem.rider;
    let fee = &problem.fee;
    let strategy = &problem.strategy;

    pre.values_mut()
        .par_chunks_mut(n_w)
        .enumerate()
        .for_each(|(j, row)| {
            let base = lattice.base(j);
            for (m, slot) in row.iter_mut().enumerate() {
                let wealth = fee.apply_at_event(ctx.dt, lattice.wealth(m), base);
                let state = StatePoint::new(wealth, base);
                let value_of = |gamma: T| {
                    let jumped = rider.jump(&ctx, state, gamma);
                    w_cash * rider.cashflow(&ctx, state, gamma)
                        + interp.eval(jumped.wealth, jumped.base)
                };
                let value = match strategy {
                    Strategy::Static(rule) => value_of(rule.gamma(rider, &ctx, state)),
                    Strategy::Optimal => {
                        let g_n = rider.contractual_amount(&ctx, state);
                        let gamma_max = rider.max_withdrawal(&ctx, state);
                        optimize_withdrawal(g_n, gamma_max, withdrawal_candidates, value_of).0
                    }
                    Strategy::Threshold { theta } => {
                        let g_n = rider.contractual_amount(&ctx, state);
                        let gamma_max = rider.max_withdrawal(&ctx, state);
                        let mut value_of = value_of;
                        let default_gamma = g_n.max(T::zero()).min(gamma_max);
                        let default_value = value_of(default_gamma);
                        let (opt_value, _) =
                            optimize_withdrawal(g_n, gamma_max, withdrawal_candidates, &mut value_of);
                        if opt_value - default_value > *theta * g_n {
                            opt_value
                        } else {
                            default_value
                        }
                    }
                };
                let mut v = value;
                if w_death > T::zero() {
                    v += w_death * rider.death_benefit(&ctx, state);
                }
                *slot = v;
            }
        });

    pre.check_finite("jump condition")?;
    Ok(pre)
}

/// Withdrawal actually taken at a node, for strategy inspection and the
/// forward Monte Carlo pricer (static rules only).
pub(crate) fn static_gamma<T: Scalar, R: Rider<T>>(
    rule: &StaticRule<T>,
    rider: &R,
    ctx: &EventContext<T>,
    state: StatePoint<T>,
) -> T {
    rule.gamma(rider, ctx, state)
}
