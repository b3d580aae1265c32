//! Market dynamics, fee structures, mortality and event schedules shared by
//! every solver.
//!
//! The risky asset follows geometric Brownian motion with piecewise-constant
//! risk-free rate `rₙ` and volatility `σₙ` on each period `(tₙ₋₁, tₙ]`. The
//! wealth account is the asset holding net of the guarantee fee, which is
//! either charged continuously (a drift adjustment) or deducted discretely at
//! event dates, proportional to the wealth account or to the benefit base.

use std::collections::BTreeMap;

use crate::{cast, EngineError, Result, Scalar};

/// A point in the contract state space: wealth account and benefit base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePoint<T> {
    pub wealth: T,
    pub base: T,
}

impl<T: Scalar> StatePoint<T> {
    pub fn new(wealth: T, base: T) -> Self {
        Self { wealth, base }
    }
}

/// How the guarantee fee is charged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeeStructure<T> {
    /// Annualised rate deducted continuously from the wealth drift.
    Continuous { rate: T },
    /// `W → W(1 − α̃·dtₙ)` at each event date, before all other events.
    DiscreteOnWealth { rate: T },
    /// `W → max(W − A·α̃·dtₙ, 0)` at each event date.
    DiscreteOnBase { rate: T },
}

impl<T: Scalar> FeeStructure<T> {
    pub fn rate(&self) -> T {
        match *self {
            FeeStructure::Continuous { rate }
            | FeeStructure::DiscreteOnWealth { rate }
            | FeeStructure::DiscreteOnBase { rate } => rate,
        }
    }

    pub fn with_rate(&self, rate: T) -> Self {
        match self {
            FeeStructure::Continuous { .. } => FeeStructure::Continuous { rate },
            FeeStructure::DiscreteOnWealth { .. } => FeeStructure::DiscreteOnWealth { rate },
            FeeStructure::DiscreteOnBase { .. } => FeeStructure::DiscreteOnBase { rate },
        }
    }

    /// Fee component of the wealth drift: the rate for a continuous fee,
    /// zero for discrete fees (those are deducted at event dates instead).
    pub fn drift_rate(&self) -> T {
        match *self {
            FeeStructure::Continuous { rate } => rate,
            _ => T::zero(),
        }
    }

    /// Wealth after the discrete fee deduction at an event date; identity for
    /// a continuous fee.
    pub fn apply_at_event(&self, dt: T, wealth: T, base: T) -> T {
        match *self {
            FeeStructure::Continuous { .. } => wealth,
            FeeStructure::DiscreteOnWealth { rate } => wealth * (T::one() - rate * dt),
            FeeStructure::DiscreteOnBase { rate } => (wealth - base * rate * dt).max(T::zero()),
        }
    }

    /// Continuously-compounded rate equivalent to a discretely charged rate
    /// over a period of length `dt`: `α_d = −ln(1 − α̃·dt)/dt`.
    pub fn continuous_equivalent(rate: T, dt: T) -> T {
        -(T::one() - rate * dt).ln() / dt
    }
}

/// Piecewise-constant risk-neutral market over the event schedule
/// `t₀ = 0 < t₁ < … < t_N = T`, with the subset of event dates on which the
/// benefit base may ratchet.
#[derive(Debug, Clone)]
pub struct MarketModel<T> {
    times: Vec<T>,
    rates: Vec<T>,
    vols: Vec<T>,
    ratchet: Vec<bool>,
    /// Cumulative ∫r dt up to each event time, for O(1) discount factors.
    cum_rate: Vec<T>,
}

impl<T: Scalar> MarketModel<T> {
    /// `rates[n]` and `vols[n]` apply on `(times[n], times[n+1]]`;
    /// `ratchet[n]` marks whether the event at `times[n+1]` is a ratchet date.
    pub fn new(times: Vec<T>, rates: Vec<T>, vols: Vec<T>, ratchet: Vec<bool>) -> Result<Self> {
        let n = times.len().saturating_sub(1);
        if n < 1 {
            return Err(EngineError::Parameter(
                "market model needs at least one period".into(),
            ));
        }
        if times[0] != T::zero() {
            return Err(EngineError::Parameter("event times must start at t₀ = 0".into()));
        }
        for i in 1..times.len() {
            if !(times[i] > times[i - 1]) {
                return Err(EngineError::Parameter(format!(
                    "event times must be strictly increasing (index {i})"
                )));
            }
        }
        if rates.len() != n || vols.len() != n || ratchet.len() != n {
            return Err(EngineError::Parameter(format!(
                "period arrays must have length {n}: rates={}, vols={}, ratchet={}",
                rates.len(),
                vols.len(),
                ratchet.len()
            )));
        }
        if vols.iter().any(|v| *v < T::zero()) {
            return Err(EngineError::Parameter("volatilities must be non-negative".into()));
        }
        let mut cum_rate = Vec::with_capacity(n + 1);
        cum_rate.push(T::zero());
        for i in 0..n {
            let dt = times[i + 1] - times[i];
            let prev = cum_rate[i];
            cum_rate.push(prev + rates[i] * dt);
        }
        Ok(Self { times, rates, vols, ratchet, cum_rate })
    }

    /// Equally spaced event schedule over `[0, maturity]` with flat rate and
    /// volatility; every `ratchet_every`-th event is a ratchet date.
    pub fn uniform(
        maturity: T,
        events_per_year: usize,
        rate: T,
        vol: T,
        ratchet_every: Option<usize>,
    ) -> Result<Self> {
        if !(maturity > T::zero()) || events_per_year == 0 {
            return Err(EngineError::Parameter(
                "maturity and event frequency must be positive".into(),
            ));
        }
        let years = maturity.to_f64().unwrap();
        let n = (years * events_per_year as f64).round() as usize;
        if n == 0 {
            return Err(EngineError::Parameter("schedule has no events".into()));
        }
        let times: Vec<T> = (0..=n)
            .map(|i| maturity * cast(i as f64) / cast(n as f64))
            .collect();
        let ratchet = (1..=n)
            .map(|i| ratchet_every.is_some_and(|k| k > 0 && i % k == 0))
            .collect();
        Self::new(times, vec![rate; n], vec![vol; n], ratchet)
    }

    /// Number of events N (events are `t₁ … t_N`; `t_N` is maturity).
    pub fn n_events(&self) -> usize {
        self.times.len() - 1
    }

    pub fn maturity(&self) -> T {
        *self.times.last().unwrap()
    }

    /// Event time `tₙ`, `n ∈ 0..=N`.
    pub fn time(&self, n: usize) -> T {
        self.times[n]
    }

    pub fn dt(&self, n: usize) -> T {
        self.times[n] - self.times[n - 1]
    }

    /// Rate on `(tₙ₋₁, tₙ]`, `n ∈ 1..=N`.
    pub fn rate(&self, n: usize) -> T {
        self.rates[n - 1]
    }

    /// Volatility on `(tₙ₋₁, tₙ]`, `n ∈ 1..=N`.
    pub fn vol(&self, n: usize) -> T {
        self.vols[n - 1]
    }

    /// Whether `tₙ` is a ratchet (step-up) date.
    pub fn is_ratchet(&self, n: usize) -> bool {
        n >= 1 && self.ratchet[n - 1]
    }

    /// Discount factor from `tⱼ` back to `tᵢ`: `exp(−Σ rₖ dtₖ)`.
    pub fn discount(&self, i: usize, j: usize) -> Result<T> {
        if i > j {
            return Err(EngineError::Parameter(format!(
                "discount requires i ≤ j, got i={i}, j={j}"
            )));
        }
        Ok((self.cum_rate[i] - self.cum_rate[j]).exp())
    }

    /// Copy of the model with all rates and volatilities shifted in
    /// parallel, for bump-and-reprice sensitivities.
    pub fn shifted(&self, rate_shift: T, vol_shift: T) -> Result<Self> {
        Self::new(
            self.times.clone(),
            self.rates.iter().map(|r| *r + rate_shift).collect(),
            self.vols.iter().map(|v| *v + vol_shift).collect(),
            self.ratchet.clone(),
        )
    }

    /// Mean of `ln S(T)/S(0)` for the fee-free asset.
    pub fn log_asset_mean(&self) -> T {
        let half = cast::<T>(0.5);
        (1..=self.n_events())
            .map(|n| (self.rate(n) - half * self.vol(n) * self.vol(n)) * self.dt(n))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Standard deviation of `ln S(T)/S(0)`.
    pub fn log_asset_stdev(&self) -> T {
        (1..=self.n_events())
            .map(|n| self.vol(n) * self.vol(n) * self.dt(n))
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }
}

/// Wealth at `tₙ⁻` from wealth at `tₙ₋₁⁺` and a standard normal draw `z`:
/// `W·exp((rₙ − α − σₙ²/2)dtₙ + σₙ√dtₙ·z)`, where `α` is the continuous fee
/// component (discrete fees are deducted at the event date instead).
pub fn wealth_step<T: Scalar>(
    model: &MarketModel<T>,
    fee: &FeeStructure<T>,
    n: usize,
    wealth_prev: T,
    z: T,
) -> T {
    let dt = model.dt(n);
    let vol = model.vol(n);
    let half = cast::<T>(0.5);
    let drift = (model.rate(n) - fee.drift_rate() - half * vol * vol) * dt;
    wealth_prev * (drift + vol * dt.sqrt() * z).exp()
}

/// Annual life table: one death probability per integer age.
#[derive(Debug, Clone)]
pub struct LifeTable {
    rows: BTreeMap<u32, f64>,
}

impl LifeTable {
    pub fn new(rows: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let rows: BTreeMap<u32, f64> = rows.into_iter().collect();
        for (age, q) in &rows {
            if !(0.0..=1.0).contains(q) {
                return Err(EngineError::LifeTable(format!(
                    "death probability {q} at age {age} outside [0, 1]"
                )));
            }
        }
        if rows.is_empty() {
            return Err(EngineError::LifeTable("table has no rows".into()));
        }
        Ok(Self { rows })
    }

    /// Parses the plain text format: one row per integer age, whitespace
    /// separated `age  annual_death_probability`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (age, q) = (fields.next(), fields.next());
            let parsed = age
                .and_then(|a| a.parse::<u32>().ok())
                .zip(q.and_then(|v| v.parse::<f64>().ok()));
            match parsed {
                Some(pair) if fields.next().is_none() => rows.push(pair),
                _ => {
                    return Err(EngineError::LifeTable(format!(
                        "line {}: expected `age q`, got `{raw}`",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(rows)
    }

    pub fn annual_death_prob(&self, age: u32) -> Result<f64> {
        self.rows
            .get(&age)
            .copied()
            .ok_or_else(|| EngineError::LifeTable(format!("missing age {age}")))
    }

    /// Survival probability from the first tabulated age to the (possibly
    /// fractional) `age`, with deaths spread uniformly within each year —
    /// the linear interpolation of the survival function.
    fn survival_to(&self, age: f64) -> Result<f64> {
        let first = *self.rows.keys().next().unwrap() as f64;
        if age < first - 1e-9 {
            return Err(EngineError::LifeTable(format!(
                "age {age} precedes first table row {first}"
            )));
        }
        let whole = age.floor().max(first) as u32;
        let frac = (age - whole as f64).max(0.0);
        let mut s = 1.0;
        for a in (first as u32)..whole {
            s *= 1.0 - self.annual_death_prob(a)?;
        }
        if frac > 0.0 {
            s *= 1.0 - frac * self.annual_death_prob(whole)?;
        }
        Ok(s)
    }
}

/// Per-event death probabilities `qₙ = Pr[death in (tₙ₋₁, tₙ] | alive at
/// tₙ₋₁]` and cumulative survival probabilities `pₙ = pₙ₋₁(1 − qₙ)`.
#[derive(Debug, Clone)]
pub struct MortalityModel<T> {
    /// `qs[n]` for `n ∈ 1..=N`; `qs[0]` is unused and zero.
    qs: Vec<T>,
    ps: Vec<T>,
}

impl<T: Scalar> MortalityModel<T> {
    /// No mortality: every `qₙ = 0`.
    pub fn none(n_events: usize) -> Self {
        Self::from_event_probs(vec![T::zero(); n_events]).unwrap()
    }

    /// Builds from per-event death probabilities (index 0 ↦ event 1).
    pub fn from_event_probs(qs: Vec<T>) -> Result<Self> {
        if qs.iter().any(|q| *q < T::zero() || *q > T::one()) {
            return Err(EngineError::Parameter(
                "death probabilities must lie in [0, 1]".into(),
            ));
        }
        let mut padded = Vec::with_capacity(qs.len() + 1);
        padded.push(T::zero());
        padded.extend(qs);
        let mut ps = vec![T::one(); padded.len()];
        for n in 1..padded.len() {
            ps[n] = ps[n - 1] * (T::one() - padded[n]);
        }
        Ok(Self { qs: padded, ps })
    }

    /// Event-interval death probabilities from an annual life table for a
    /// policyholder aged `entry_age` at `t₀`.
    pub fn from_life_table(
        table: &LifeTable,
        entry_age: f64,
        event_times: &[T],
    ) -> Result<Self> {
        let s0 = table.survival_to(entry_age)?;
        let mut qs = Vec::with_capacity(event_times.len().saturating_sub(1));
        let mut s_prev = s0;
        for t in &event_times[1..] {
            let s = table.survival_to(entry_age + t.to_f64().unwrap())?;
            let q = if s_prev > 0.0 { 1.0 - s / s_prev } else { 0.0 };
            qs.push(cast::<T>(q.clamp(0.0, 1.0)));
            s_prev = s;
        }
        Self::from_event_probs(qs)
    }

    pub fn n_events(&self) -> usize {
        self.qs.len() - 1
    }

    /// `qₙ`, `n ∈ 1..=N`.
    pub fn death_prob(&self, n: usize) -> T {
        self.qs[n]
    }

    /// `pₙ = Pr[alive at tₙ]`, `n ∈ 0..=N`.
    pub fn survival(&self, n: usize) -> T {
        self.ps[n]
    }

    pub fn is_zero(&self) -> bool {
        self.qs.iter().all(|q| *q == T::zero())
    }
}
