//! Contract specifications for the guarantee riders, all behind the
//! [`Rider`] interface consumed by the solvers.
//!
//! A rider defines, per event date `tₙ`: the contractual amount `Gₙ`, the
//! admissible withdrawal interval `[0, γ_max]`, the jump map
//! `(W⁻, A⁻, γ) → (W⁺, A⁺)`, the cashflow `f̃ₙ` actually received (penalties
//! may make it smaller than `γ`), the maturity payout `P_T` and the death
//! benefit `Dₙ`. Discrete fee deductions are *not* part of the rider: the
//! solvers deduct the fee from the wealth account first and hand the rider
//! the post-fee state.

use crate::model::StatePoint;
use crate::{cast, EngineError, Result, Scalar};

/// Event-date context handed to every rider method.
#[derive(Debug, Clone, Copy)]
pub struct EventContext<T> {
    /// 1-based event index `n`.
    pub index: usize,
    /// Event time `tₙ` in years.
    pub time: T,
    /// Period length `tₙ − tₙ₋₁`.
    pub dt: T,
    /// Whether `tₙ` is a ratchet (step-up) date.
    pub ratchet: bool,
}

/// A guarantee rider: pure functions of the event context and state, safe to
/// share across solver threads.
pub trait Rider<T: Scalar>: Send + Sync {
    /// Contractual (penalty-free) amount `Gₙ`.
    fn contractual_amount(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T;

    /// Upper end of the admissible withdrawal interval `[0, γ_max]`.
    fn max_withdrawal(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T;

    /// Post-event state for an admissible withdrawal `γ`.
    fn jump(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> StatePoint<T>;

    /// Cashflow `f̃ₙ` received by the policyholder for withdrawal `γ`.
    fn cashflow(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> T;

    /// Payout at maturity when the policyholder is alive; `ctx` is the
    /// terminal event (`n = N`).
    fn maturity_payoff(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T;

    /// Payout to the beneficiary when death occurred during `(tₙ₋₁, tₙ]`.
    fn death_benefit(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T;
}

impl<T: Scalar, R: Rider<T> + ?Sized> Rider<T> for &R {
    fn contractual_amount(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        (**self).contractual_amount(ctx, state)
    }
    fn max_withdrawal(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        (**self).max_withdrawal(ctx, state)
    }
    fn jump(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> StatePoint<T> {
        (**self).jump(ctx, state, gamma)
    }
    fn cashflow(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> T {
        (**self).cashflow(ctx, state, gamma)
    }
    fn maturity_payoff(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        (**self).maturity_payoff(ctx, state)
    }
    fn death_benefit(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        (**self).death_benefit(ctx, state)
    }
}

fn check_admissible<T: Scalar>(gamma: T, max: T) -> Result<()> {
    if gamma < T::zero() || gamma > max {
        return Err(EngineError::InadmissibleWithdrawal {
            gamma: gamma.to_f64().unwrap_or(f64::NAN),
            max: max.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// GMDB death benefit types
// ---------------------------------------------------------------------------

/// Standard death benefit payouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmdbKind {
    /// Type 0: `max(A(tₙ⁻), W(tₙ⁻))`.
    BaseOrWealth,
    /// Type 1: the initial premium `W(0)`.
    InitialPremium,
    /// Type 2: `max(W(0), W(tₙ⁻))`.
    PremiumFloor,
    /// Type 3: the wealth account `W(tₙ⁻)`.
    Wealth,
}

impl GmdbKind {
    pub fn from_type(t: u8) -> Result<Self> {
        match t {
            0 => Ok(Self::BaseOrWealth),
            1 => Ok(Self::InitialPremium),
            2 => Ok(Self::PremiumFloor),
            3 => Ok(Self::Wealth),
            _ => Err(EngineError::Parameter(format!("unknown death benefit type {t}"))),
        }
    }
}

/// Death benefit payout for the given type; `premium` is `W(0)`.
pub fn gmdb_benefit<T: Scalar>(kind: GmdbKind, state: StatePoint<T>, premium: T) -> T {
    match kind {
        GmdbKind::BaseOrWealth => state.base.max(state.wealth),
        GmdbKind::InitialPremium => premium,
        GmdbKind::PremiumFloor => premium.max(state.wealth),
        GmdbKind::Wealth => state.wealth,
    }
}

// ---------------------------------------------------------------------------
// GMAB
// ---------------------------------------------------------------------------

/// Account type for the accumulation guarantee: a super account penalises any
/// withdrawal while wealth is below the protected capital; a pension account
/// penalises only withdrawals above the contractual amount `Gₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmabAccount {
    Super,
    Pension,
}

/// Benefit-base reduction `Cₙ(γ)` charged for a withdrawal; can exceed `γ`.
/// `g_n` is the penalty-free amount (pension accounts only).
pub fn gmab_penalty<T: Scalar>(
    account: GmabAccount,
    state: StatePoint<T>,
    gamma: T,
    g_n: T,
) -> Result<T> {
    check_admissible(gamma, state.wealth)?;
    Ok(gmab_penalty_unchecked(account, state, gamma, g_n))
}

#[inline]
fn gmab_penalty_unchecked<T: Scalar>(
    account: GmabAccount,
    state: StatePoint<T>,
    gamma: T,
    g_n: T,
) -> T {
    if gamma <= T::zero() {
        return T::zero();
    }
    let penalised = match account {
        GmabAccount::Super => state.wealth < state.base,
        GmabAccount::Pension => state.wealth < state.base && gamma > g_n,
    };
    if penalised {
        state.base * gamma / state.wealth
    } else {
        gamma
    }
}

/// GMAB jump: `W⁺ = W⁻ − γ` and the protected capital after penalty, with the
/// ratchet folded in on anniversary dates:
/// `A⁺ = max(A⁻, W⁻) − Cₙ(γ)` on ratchet dates, `max(A⁻ − Cₙ(γ), 0)` otherwise.
pub fn gmab_jump<T: Scalar>(
    account: GmabAccount,
    ratchet: bool,
    state: StatePoint<T>,
    gamma: T,
    g_n: T,
) -> Result<StatePoint<T>> {
    check_admissible(gamma, state.wealth)?;
    Ok(gmab_jump_unchecked(account, ratchet, state, gamma, g_n))
}

#[inline]
fn gmab_jump_unchecked<T: Scalar>(
    account: GmabAccount,
    ratchet: bool,
    state: StatePoint<T>,
    gamma: T,
    g_n: T,
) -> StatePoint<T> {
    let penalty = gmab_penalty_unchecked(account, state, gamma, g_n);
    let base = if ratchet { state.base.max(state.wealth) } else { state.base };
    StatePoint {
        wealth: (state.wealth - gamma).max(T::zero()),
        base: (base - penalty).max(T::zero()),
    }
}

/// Guaranteed minimum accumulation benefit: capital protection at maturity
/// (`P_T = max(W, A)`) with annual ratchets and penalty-free cash withdrawals
/// that reduce the protected capital, more than proportionally while the
/// wealth account is under water.
#[derive(Debug, Clone)]
pub struct Gmab<T> {
    pub account: GmabAccount,
    /// Annualised penalty-free withdrawal fraction of the wealth account `g`;
    /// the per-event threshold is `Gₙ = g·dtₙ·W(tₙ⁻)`. Only meaningful for
    /// pension accounts.
    pub free_withdrawal_rate: T,
    pub death_benefit: GmdbKind,
    /// Initial premium `W(0)`, referenced by premium-linked death benefits.
    pub premium: T,
}

impl<T: Scalar> Gmab<T> {
    pub fn new(account: GmabAccount, free_withdrawal_rate: T, premium: T) -> Result<Self> {
        if free_withdrawal_rate < T::zero() || free_withdrawal_rate > T::one() {
            return Err(EngineError::Parameter(
                "penalty-free withdrawal fraction must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            account,
            free_withdrawal_rate,
            death_benefit: GmdbKind::Wealth,
            premium,
        })
    }
}

impl<T: Scalar> Rider<T> for Gmab<T> {
    fn contractual_amount(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        match self.account {
            GmabAccount::Super => T::zero(),
            GmabAccount::Pension => self.free_withdrawal_rate * ctx.dt * state.wealth,
        }
    }

    fn max_withdrawal(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        state.wealth
    }

    fn jump(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> StatePoint<T> {
        let g_n = self.contractual_amount(ctx, state);
        gmab_jump_unchecked(self.account, ctx.ratchet, state, gamma, g_n)
    }

    fn cashflow(&self, _ctx: &EventContext<T>, _state: StatePoint<T>, gamma: T) -> T {
        gamma
    }

    fn maturity_payoff(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        state.wealth.max(state.base)
    }

    fn death_benefit(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        gmdb_benefit(self.death_benefit, state, self.premium)
    }
}

// ---------------------------------------------------------------------------
// GMWB (basic academic specification)
// ---------------------------------------------------------------------------

/// Basic withdrawal guarantee: the policyholder can draw down the benefit
/// base regardless of market performance; withdrawals above the contractual
/// amount `Gₙ = W(0)·dtₙ/T` are penalised at rate `β` on the excess.
#[derive(Debug, Clone)]
pub struct GmwbBasic<T> {
    pub premium: T,
    pub maturity: T,
    /// Excess-withdrawal penalty `β ∈ [0, 1]`.
    pub penalty: T,
    pub death_benefit: GmdbKind,
}

impl<T: Scalar> GmwbBasic<T> {
    pub fn new(premium: T, maturity: T, penalty: T) -> Result<Self> {
        if penalty < T::zero() || penalty > T::one() {
            return Err(EngineError::Parameter("penalty β must lie in [0, 1]".into()));
        }
        Ok(Self { premium, maturity, penalty, death_benefit: GmdbKind::Wealth })
    }

    fn g_n(&self, dt: T) -> T {
        self.premium * dt / self.maturity
    }

    fn penalised_cashflow(&self, gamma: T, g_n: T) -> T {
        if gamma <= g_n {
            gamma
        } else {
            g_n + (T::one() - self.penalty) * (gamma - g_n)
        }
    }
}

/// Basic GMWB event: returns `(W⁺, A⁺, cashflow)`.
pub fn gmwb_basic_jump<T: Scalar>(
    rider: &GmwbBasic<T>,
    state: StatePoint<T>,
    gamma: T,
    dt: T,
) -> Result<(StatePoint<T>, T)> {
    check_admissible(gamma, state.base)?;
    let post = StatePoint {
        wealth: (state.wealth - gamma).max(T::zero()),
        base: (state.base - gamma).max(T::zero()),
    };
    Ok((post, rider.penalised_cashflow(gamma, rider.g_n(dt))))
}

impl<T: Scalar> Rider<T> for GmwbBasic<T> {
    fn contractual_amount(&self, ctx: &EventContext<T>, _state: StatePoint<T>) -> T {
        self.g_n(ctx.dt)
    }

    fn max_withdrawal(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        state.base
    }

    fn jump(&self, _ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> StatePoint<T> {
        StatePoint {
            wealth: (state.wealth - gamma).max(T::zero()),
            base: (state.base - gamma).max(T::zero()),
        }
    }

    fn cashflow(&self, ctx: &EventContext<T>, _state: StatePoint<T>, gamma: T) -> T {
        self.penalised_cashflow(gamma, self.g_n(ctx.dt))
    }

    fn maturity_payoff(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        // The remaining base is taken as a final (penalised) withdrawal if
        // that beats the account value.
        state
            .wealth
            .max(self.penalised_cashflow(state.base, self.g_n(ctx.dt)))
    }

    fn death_benefit(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        gmdb_benefit(self.death_benefit, state, self.premium)
    }
}

// ---------------------------------------------------------------------------
// GMWB (industry specifications 1–3)
// ---------------------------------------------------------------------------

/// Benefit-base update rule after an excess withdrawal (`γ > Gₙ`); all three
/// share `A⁺ = max(A⁻ − γ, 0)` for withdrawals within the contractual amount.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmwbBaseUpdate {
    /// `A⁺ = max(min(A⁻ − γ, A⁻·W⁺/W⁻), 0)`
    Spec1,
    /// `A⁺ = max(min(A⁻ − γ, W⁺), 0)`
    Spec2,
    /// `A⁺ = max(A⁻ − Gₙ, 0)·W⁺/max(W⁻ − Gₙ, 0)`
    Spec3,
}

/// When the anniversary ratchet applies relative to the withdrawal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatchetTiming {
    BeforeWithdrawal,
    AfterWithdrawal,
}

/// Benefit base after an event under the chosen specification. `state` must
/// already carry any before-withdrawal ratchet adjustment.
pub fn gmwb_spec_jump<T: Scalar>(
    spec: GmwbBaseUpdate,
    state: StatePoint<T>,
    gamma: T,
    g_n: T,
) -> T {
    let w_plus = (state.wealth - gamma).max(T::zero());
    if gamma <= g_n {
        return (state.base - gamma).max(T::zero());
    }
    match spec {
        GmwbBaseUpdate::Spec1 => {
            if state.wealth <= T::zero() {
                return T::zero();
            }
            (state.base - gamma)
                .min(state.base * w_plus / state.wealth)
                .max(T::zero())
        }
        GmwbBaseUpdate::Spec2 => (state.base - gamma).min(w_plus).max(T::zero()),
        GmwbBaseUpdate::Spec3 => {
            let denom = (state.wealth - g_n).max(T::zero());
            if denom <= T::zero() {
                // The contractual amount exhausts the wealth account; the
                // formula's limit as W⁺ → 0 is a zero base.
                return T::zero();
            }
            (state.base - g_n).max(T::zero()) * w_plus / denom
        }
    }
}

/// Industry-style GMWB with separate excess- and early-withdrawal penalties
/// and a configurable benefit-base update.
#[derive(Debug, Clone)]
pub struct GmwbIndustry<T> {
    pub premium: T,
    pub maturity: T,
    pub base_update: GmwbBaseUpdate,
    /// Excess-withdrawal penalty `βᵉ ∈ [0, 1]`.
    pub excess_penalty: T,
    /// Early-withdrawal penalty `βᵍ ∈ [0, 1]`, applied while the policyholder
    /// is younger than the tax threshold age.
    pub early_penalty: T,
    /// Age at `t₀` in years.
    pub entry_age: T,
    /// Age below which the early-withdrawal penalty applies (59.5 in the US
    /// qualified-account rules).
    pub penalty_age: T,
    pub ratchet_timing: RatchetTiming,
    pub death_benefit: GmdbKind,
}

impl<T: Scalar> GmwbIndustry<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        premium: T,
        maturity: T,
        base_update: GmwbBaseUpdate,
        excess_penalty: T,
        early_penalty: T,
        entry_age: T,
        ratchet_timing: RatchetTiming,
    ) -> Result<Self> {
        for (name, p) in [("βᵉ", excess_penalty), ("βᵍ", early_penalty)] {
            if p < T::zero() || p > T::one() {
                return Err(EngineError::Parameter(format!("penalty {name} must lie in [0, 1]")));
            }
        }
        Ok(Self {
            premium,
            maturity,
            base_update,
            excess_penalty,
            early_penalty,
            entry_age,
            penalty_age: cast(59.5),
            ratchet_timing,
            death_benefit: GmdbKind::Wealth,
        })
    }

    fn g_n(&self, dt: T) -> T {
        self.premium * dt / self.maturity
    }

    fn ratchet_before(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> StatePoint<T> {
        if ctx.ratchet && self.ratchet_timing == RatchetTiming::BeforeWithdrawal {
            StatePoint { wealth: state.wealth, base: state.base.max(state.wealth) }
        } else {
            state
        }
    }

    fn net_cashflow(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T, g_n: T) -> T {
        let excess = self.excess_penalty * (gamma - state.base.min(g_n)).max(T::zero());
        let early = if self.entry_age + ctx.time < self.penalty_age {
            self.early_penalty * (gamma - excess)
        } else {
            T::zero()
        };
        // Penalties never drive the paid amount negative.
        (gamma - excess - early).max(T::zero())
    }
}

impl<T: Scalar> Rider<T> for GmwbIndustry<T> {
    fn contractual_amount(&self, ctx: &EventContext<T>, _state: StatePoint<T>) -> T {
        self.g_n(ctx.dt)
    }

    fn max_withdrawal(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        let state = self.ratchet_before(ctx, state);
        state.wealth.max(state.base.min(self.g_n(ctx.dt)))
    }

    fn jump(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> StatePoint<T> {
        let state = self.ratchet_before(ctx, state);
        let g_n = self.g_n(ctx.dt);
        let wealth = (state.wealth - gamma).max(T::zero());
        let mut base = gmwb_spec_jump(self.base_update, state, gamma, g_n);
        if ctx.ratchet && self.ratchet_timing == RatchetTiming::AfterWithdrawal {
            base = base.max(wealth);
        }
        StatePoint { wealth, base }
    }

    fn cashflow(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> T {
        let state = self.ratchet_before(ctx, state);
        self.net_cashflow(ctx, state, gamma, self.g_n(ctx.dt))
    }

    fn maturity_payoff(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        let g_n = self.g_n(ctx.dt);
        state.wealth.max(self.net_cashflow(ctx, state, state.base, g_n))
    }

    fn death_benefit(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        gmdb_benefit(self.death_benefit, state, self.premium)
    }
}

// ---------------------------------------------------------------------------
// GLWB
// ---------------------------------------------------------------------------

/// Lifelong withdrawal guarantee: `Gₙ = g·A(tₙ⁻)·dtₙ` may be withdrawn for
/// life; skipping a withdrawal earns a bonus (roll-up) on the benefit base,
/// and ratchet dates step the base up to the wealth account.
#[derive(Debug, Clone)]
pub struct Glwb<T> {
    /// Annualised guaranteed withdrawal rate `g`.
    pub guaranteed_rate: T,
    /// Bonus (roll-up) rates `bₙ`; a single entry is broadcast to all events
    /// and an empty vector means no bonus.
    pub bonus_rates: Vec<T>,
    /// Excess-withdrawal penalty `β ∈ [0, 1]`.
    pub penalty: T,
    pub death_benefit: GmdbKind,
    pub premium: T,
}

impl<T: Scalar> Glwb<T> {
    pub fn new(guaranteed_rate: T, bonus_rates: Vec<T>, penalty: T, premium: T) -> Result<Self> {
        if guaranteed_rate < T::zero() {
            return Err(EngineError::Parameter("guaranteed rate must be ≥ 0".into()));
        }
        if bonus_rates.iter().any(|b| *b < T::zero()) {
            return Err(EngineError::Parameter("bonus rates must be ≥ 0".into()));
        }
        if penalty < T::zero() || penalty > T::one() {
            return Err(EngineError::Parameter("penalty β must lie in [0, 1]".into()));
        }
        Ok(Self {
            guaranteed_rate,
            bonus_rates,
            penalty,
            death_benefit: GmdbKind::Wealth,
            premium,
        })
    }

    fn bonus(&self, n: usize) -> T {
        match self.bonus_rates.len() {
            0 => T::zero(),
            1 => self.bonus_rates[0],
            len => self.bonus_rates[(n - 1).min(len - 1)],
        }
    }
}

/// GLWB event under the three-branch benefit-base update; returns
/// `(W⁺, A⁺, cashflow)`.
pub fn glwb_jump<T: Scalar>(
    rider: &Glwb<T>,
    ctx: &EventContext<T>,
    state: StatePoint<T>,
    gamma: T,
) -> Result<(StatePoint<T>, T)> {
    let g_n = rider.contractual_amount(ctx, state);
    check_admissible(gamma, state.wealth.max(g_n))?;
    let post = rider.jump(ctx, state, gamma);
    Ok((post, rider.cashflow(ctx, state, gamma)))
}

impl<T: Scalar> Rider<T> for Glwb<T> {
    fn contractual_amount(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        self.guaranteed_rate * state.base * ctx.dt
    }

    fn max_withdrawal(&self, ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        state.wealth.max(self.contractual_amount(ctx, state))
    }

    fn jump(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> StatePoint<T> {
        let g_n = self.contractual_amount(ctx, state);
        let w = state.wealth;
        let a = state.base;
        let wealth = (w - gamma).max(T::zero());
        let ratchet_level = |x: T| if ctx.ratchet { x } else { T::zero() };
        let base = if gamma == T::zero() {
            (a * (T::one() + self.bonus(ctx.index))).max(ratchet_level(w))
        } else if gamma <= g_n {
            a.max(ratchet_level(wealth))
        } else {
            // Excess withdrawal: the base shrinks proportionally to the
            // wealth taken beyond the contractual amount.
            let scaled = if w > g_n { a * (w - gamma) / (w - g_n) } else { T::zero() };
            scaled.max(ratchet_level(w - gamma)).max(T::zero())
        };
        StatePoint { wealth, base }
    }

    fn cashflow(&self, ctx: &EventContext<T>, state: StatePoint<T>, gamma: T) -> T {
        let g_n = self.contractual_amount(ctx, state);
        if gamma <= g_n {
            gamma
        } else {
            g_n + (T::one() - self.penalty) * (gamma - g_n)
        }
    }

    fn maturity_payoff(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        // t_N is the maximum attainable age; the remaining account value is
        // returned.
        state.wealth
    }

    fn death_benefit(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        gmdb_benefit(self.death_benefit, state, self.premium)
    }
}

// ---------------------------------------------------------------------------
// GMIB
// ---------------------------------------------------------------------------

/// Income guarantee maturity payout: the better of the wealth account and the
/// benefit base annuitised at the guaranteed rate, `max(W, A·ä_T/ä_g)`.
pub fn gmib_payoff<T: Scalar>(annuity_ratio: T, state: StatePoint<T>) -> T {
    state.wealth.max(state.base * annuity_ratio)
}

/// Income guarantee: no withdrawals, optional ratchet of the benefit base,
/// and the annuitisation payoff at maturity. The annuity-rate ratio
/// `ä_T/ä_g` is an exogenous scalar.
#[derive(Debug, Clone)]
pub struct Gmib<T> {
    pub annuity_ratio: T,
    pub death_benefit: GmdbKind,
    pub premium: T,
}

impl<T: Scalar> Gmib<T> {
    pub fn new(annuity_ratio: T, premium: T) -> Result<Self> {
        if !(annuity_ratio > T::zero()) {
            return Err(EngineError::Parameter("annuity ratio must be positive".into()));
        }
        Ok(Self { annuity_ratio, death_benefit: GmdbKind::Wealth, premium })
    }
}

impl<T: Scalar> Rider<T> for Gmib<T> {
    fn contractual_amount(&self, _ctx: &EventContext<T>, _state: StatePoint<T>) -> T {
        T::zero()
    }

    fn max_withdrawal(&self, _ctx: &EventContext<T>, _state: StatePoint<T>) -> T {
        T::zero()
    }

    fn jump(&self, ctx: &EventContext<T>, state: StatePoint<T>, _gamma: T) -> StatePoint<T> {
        let base = if ctx.ratchet { state.base.max(state.wealth) } else { state.base };
        StatePoint { wealth: state.wealth, base }
    }

    fn cashflow(&self, _ctx: &EventContext<T>, _state: StatePoint<T>, gamma: T) -> T {
        gamma
    }

    fn maturity_payoff(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        gmib_payoff(self.annuity_ratio, state)
    }

    fn death_benefit(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        gmdb_benefit(self.death_benefit, state, self.premium)
    }
}

// ---------------------------------------------------------------------------
// GMDB (standalone)
// ---------------------------------------------------------------------------

/// Pure death-benefit rider: no withdrawals, the wealth account at maturity
/// if the policyholder survives, the configured benefit on death.
#[derive(Debug, Clone)]
pub struct Gmdb<T> {
    pub kind: GmdbKind,
    pub premium: T,
}

impl<T: Scalar> Gmdb<T> {
    pub fn new(kind: GmdbKind, premium: T) -> Self {
        Self { kind, premium }
    }
}

impl<T: Scalar> Rider<T> for Gmdb<T> {
    fn contractual_amount(&self, _ctx: &EventContext<T>, _state: StatePoint<T>) -> T {
        T::zero()
    }

    fn max_withdrawal(&self, _ctx: &EventContext<T>, _state: StatePoint<T>) -> T {
        T::zero()
    }

    fn jump(&self, ctx: &EventContext<T>, state: StatePoint<T>, _gamma: T) -> StatePoint<T> {
        let base = if ctx.ratchet { state.base.max(state.wealth) } else { state.base };
        StatePoint { wealth: state.wealth, base }
    }

    fn cashflow(&self, _ctx: &EventContext<T>, _state: StatePoint<T>, gamma: T) -> T {
        gamma
    }

    fn maturity_payoff(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        state.wealth
    }

    fn death_benefit(&self, _ctx: &EventContext<T>, state: StatePoint<T>) -> T {
        gmdb_benefit(self.kind, state, self.premium)
    }
}
