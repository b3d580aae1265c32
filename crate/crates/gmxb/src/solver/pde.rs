//! Crank-Nicolson finite-difference solver for the one-dimensional
//! Black-Scholes PDE between event dates:
//!
//! `∂Q/∂t + (σ²/2)W²·∂²Q/∂W² + (r − α)W·∂Q/∂W − rQ = 0`
//!
//! solved per benefit-base slice on the shared log-wealth grid (where the
//! coefficients are constant), with the same jump-condition machinery as the
//! quadrature solver at event dates. Each interval restarts with a couple of
//! fully implicit (Rannacher) steps to damp the oscillations Crank-Nicolson
//! develops on the non-smooth post-jump surfaces.

use std::time::Instant;

use rayon::prelude::*;

use crate::lattice::{Lattice, LatticeParams, SurfaceSide, ValueSurface};
use crate::model::StatePoint;
use crate::numerics::{local_cubic_uniform, tridiag};
use crate::riders::Rider;
use crate::solver::{
    apply_jump, event_context, terminal_surface, Diagnostics, MortalityTreatment,
    PricingProblem, PricingResult,
};
use crate::{cast, EngineError, Result, Scalar};

/// Finite-difference scheme configuration.
#[derive(Debug, Clone)]
pub struct FdScheme {
    pub lattice: LatticeParams,
    /// Time steps per event interval.
    pub time_steps_per_interval: usize,
    /// Implicitness weight: 0.5 is Crank-Nicolson, 1.0 fully implicit.
    pub theta: f64,
    /// Fully implicit startup steps after each jump condition.
    pub rannacher_steps: usize,
    pub withdrawal_candidates: usize,
}

impl Default for FdScheme {
    fn default() -> Self {
        Self {
            lattice: LatticeParams::default(),
            time_steps_per_interval: 40,
            theta: 0.5,
            rannacher_steps: 2,
            withdrawal_candidates: 101,
        }
    }
}

impl FdScheme {
    fn validate(&self) -> Result<()> {
        if self.time_steps_per_interval < 1 {
            return Err(EngineError::Parameter("need at least one time step per interval".into()));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(EngineError::Parameter(format!(
                "theta weight {} outside [0.5, 1]",
                self.theta
            )));
        }
        Ok(())
    }
}

/// θ-scheme system for one time step on the uniform log-wealth grid:
/// `(I − δt·θ·L)·V^k = (I + δt·(1−θ)·L)·V^{k+1}`, where `L` is the spatial
/// operator. Boundary rows: pure discounting of the `W → 0` state at the
/// bottom, zero second derivative in `W` (one-sided advection) at the top.
struct ThetaStep<T> {
    sub: Vec<T>,
    diag: Vec<T>,
    sup: Vec<T>,
    explicit_sub: Vec<T>,
    explicit_diag: Vec<T>,
    explicit_sup: Vec<T>,
}

impl<T: Scalar> ThetaStep<T> {
    fn new(n_nodes: usize, h: T, dt: T, rate: T, fee_drift: T, vol: T, theta: T) -> Self {
        let m = n_nodes - 1;
        let half = cast::<T>(0.5);
        let a = half * vol * vol / (h * h);
        let b = (rate - fee_drift - half * vol * vol) / (cast::<T>(2.0) * h);
        let lower = a - b;
        let upper = a + b;
        let center = -cast::<T>(2.0) * a - rate;

        let mut sys = Self {
            sub: vec![T::zero(); m],
            diag: vec![T::zero(); n_nodes],
            sup: vec![T::zero(); m],
            explicit_sub: vec![T::zero(); m],
            explicit_diag: vec![T::zero(); n_nodes],
            explicit_sup: vec![T::zero(); m],
        };
        let one = T::one();
        let implicit = dt * theta;
        let explicit = dt * (one - theta);

        // Bottom boundary: dQ/dt = rQ, handled exactly by the discount factor.
        sys.diag[0] = one;
        sys.explicit_diag[0] = (-rate * dt).exp();

        for i in 1..m {
            sys.sub[i - 1] = -implicit * lower;
            sys.diag[i] = one - implicit * center;
            sys.sup[i] = -implicit * upper;
            sys.explicit_sub[i - 1] = explicit * lower;
            sys.explicit_diag[i] = one + explicit * center;
            sys.explicit_sup[i] = explicit * upper;
        }

        // Top boundary: ∂²Q/∂W² = 0 reduces the operator to
        // (r − α)·∂Q/∂x − rQ with a one-sided first derivative.
        let adv = (rate - fee_drift) / h;
        sys.sub[m - 1] = implicit * adv;
        sys.diag[m] = one - implicit * (adv - rate);
        sys.explicit_sub[m - 1] = -explicit * adv;
        sys.explicit_diag[m] = one + explicit * (adv - rate);
        sys
    }

    fn advance(&self, values: &[T]) -> Result<Vec<T>> {
        let m = values.len() - 1;
        let mut rhs = vec![T::zero(); values.len()];
        rhs[0] = self.explicit_diag[0] * values[0];
        for i in 1..m {
            rhs[i] = self.explicit_sub[i - 1] * values[i - 1]
                + self.explicit_diag[i] * values[i]
                + self.explicit_sup[i] * values[i + 1];
        }
        rhs[m] = self.explicit_sub[m - 1] * values[m - 1] + self.explicit_diag[m] * values[m];
        tridiag::solve(&self.sub, &self.diag, &self.sup, &rhs)
    }
}

/// Solves the PDE backward over `(tₙ, tₙ₊₁)` per base slice, starting from
/// the mortality-weighted pre-event surface at `tₙ₊₁`, yielding `Q_{tₙ⁺}`.
pub(crate) fn pde_step_interval<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    lattice: &Lattice<T>,
    scheme: &FdScheme,
    n: usize,
    next_pre: &ValueSurface<T>,
    treatment: MortalityTreatment,
) -> Result<ValueSurface<T>> {
    let step = n + 1;
    let model = problem.model;
    let dt_interval = model.dt(step);
    let steps = scheme.time_steps_per_interval;
    let dt = dt_interval / cast(steps as f64);
    let h = lattice.log_wealth_nodes()[1] - lattice.log_wealth_nodes()[0];
    let n_nodes = lattice.n_wealth();

    let main = ThetaStep::new(
        n_nodes,
        h,
        dt,
        model.rate(step),
        problem.fee.drift_rate(),
        model.vol(step),
        cast(scheme.theta),
    );
    let rannacher = ThetaStep::new(
        n_nodes,
        h,
        dt,
        model.rate(step),
        problem.fee.drift_rate(),
        model.vol(step),
        T::one(),
    );

    let q = match treatment {
        MortalityTreatment::Conditional => problem.mortality.death_prob(step),
        MortalityTreatment::Averaged => T::zero(),
    };
    let ctx_next = event_context(model, step);

    let mut out = ValueSurface::zeros(lattice, n, SurfaceSide::PostEvent);
    let n_w = lattice.n_wealth();
    let error = std::sync::Mutex::new(None::<EngineError>);
    out.values_mut()
        .par_chunks_mut(n_w)
        .enumerate()
        .for_each(|(j, row)| {
            let base = lattice.base(j);
            // Terminal condition for the interval: mortality-weighted
            // pre-event values (no discount; the PDE carries the −rQ term).
            let mut values: Vec<T> = next_pre
                .row(j)
                .iter()
                .enumerate()
                .map(|(m, v)| {
                    if q == T::zero() {
                        *v
                    } else {
                        let wealth =
                            problem.fee.apply_at_event(ctx_next.dt, lattice.wealth(m), base);
                        let death = problem
                            .rider
                            .death_benefit(&ctx_next, StatePoint::new(wealth, base));
                        (T::one() - q) * *v + q * death
                    }
                })
                .collect();
            for k in 0..steps {
                let sys = if k < scheme.rannacher_steps { &rannacher } else { &main };
                match sys.advance(&values) {
                    Ok(next) => values = next,
                    Err(e) => {
                        *error.lock().unwrap() = Some(e);
                        return;
                    }
                }
            }
            row.copy_from_slice(&values);
        });
    if let Some(e) = error.into_inner().unwrap() {
        return Err(e);
    }
    out.check_finite("finite-difference interval")?;
    Ok(out)
}

/// Prices by backward induction with Crank-Nicolson continuation steps.
pub fn price_pde<T: Scalar, R: Rider<T>>(
    problem: &PricingProblem<'_, T, R>,
    scheme: &FdScheme,
) -> Result<PricingResult<T>> {
    let start = Instant::now();
    problem.validate()?;
    scheme.validate()?;
    let lattice = Lattice::new(problem.model, problem.w0, problem.a0, &scheme.lattice)?;
    let n_events = problem.model.n_events();
    let treatment = MortalityTreatment::Conditional;

    let mut surface = terminal_surface(problem, &lattice, treatment);
    for n in (1..n_events).rev() {
        let post = pde_step_interval(problem, &lattice, scheme, n, &surface, treatment)?;
        surface = apply_jump(
            problem,
            &lattice,
            scheme.withdrawal_candidates,
            n,
            &post,
            treatment,
        )?;
    }
    let t0 = pde_step_interval(problem, &lattice, scheme, 0, &surface, treatment)?;

    // Read the time-zero surface at the requested starting point.
    let j0 = lattice.a0_slice();
    let x0 = lattice.log_wealth_nodes()[0];
    let h = lattice.log_wealth_nodes()[1] - x0;
    let u = (problem.w0.ln() - x0) / h;
    let price = local_cubic_uniform(t0.row(j0), u);

    Ok(PricingResult {
        price,
        std_error: None,
        diagnostics: Diagnostics {
            solver: "pde",
            wealth_intervals: lattice.n_wealth() - 1,
            base_slices: lattice.n_base(),
            quadrature_order: None,
            time_steps_per_interval: Some(scheme.time_steps_per_interval),
            paths: None,
            runtime: start.elapsed(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::model::{FeeStructure, MarketModel, MortalityModel};
    use crate::riders::{EventContext, Gmab, GmabAccount};
    use crate::solver::{StaticRule, Strategy};

    struct PayoffRider<F>(F);

    impl<F: Fn(f64) -> f64 + Send + Sync> Rider<f64> for PayoffRider<F> {
        fn contractual_amount(&self, _: &EventContext<f64>, _: StatePoint<f64>) -> f64 {
            0.0
        }
        fn max_withdrawal(&self, _: &EventContext<f64>, _: StatePoint<f64>) -> f64 {
            0.0
        }
        fn jump(&self, _: &EventContext<f64>, s: StatePoint<f64>, _: f64) -> StatePoint<f64> {
            s
        }
        fn cashflow(&self, _: &EventContext<f64>, _: StatePoint<f64>, g: f64) -> f64 {
            g
        }
        fn maturity_payoff(&self, _: &EventContext<f64>, s: StatePoint<f64>) -> f64 {
            (self.0)(s.wealth)
        }
        fn death_benefit(&self, _: &EventContext<f64>, s: StatePoint<f64>) -> f64 {
            s.wealth
        }
    }

    fn problem<'a, R: Rider<f64>>(
        rider: &'a R,
        model: &'a MarketModel<f64>,
        mortality: &'a MortalityModel<f64>,
        fee: f64,
        a0: f64,
    ) -> PricingProblem<'a, f64, R> {
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
    fn constant_payoff_discounts() {
        let model = MarketModel::uniform(1.0, 1, 0.07, 0.2, None).unwrap();
        let mortality = MortalityModel::none(1);
        let rider = PayoffRider(|_| 1.0);
        let p = problem(&rider, &model, &mortality, 0.0, 100.0);
        // Pure Crank-Nicolson: the discrete discount factor matches exp(−rT)
        // to O((rδt)³) per step; Rannacher startup steps would degrade this
        // to O((rδt)²), so they are disabled here.
        let scheme = FdScheme {
            lattice: LatticeParams { wealth_intervals: 200, base_slices: 8, ..Default::default() },
            rannacher_steps: 0,
            ..Default::default()
        };
        let r = price_pde(&p, &scheme).unwrap();
        assert!((r.price - (-0.07f64).exp()).abs() < 1e-7, "{}", r.price);
    }

    #[test]
    fn european_put_matches_black_scholes_at_the_money() {
        let (rate, vol) = (0.05, 0.2);
        let strike = 100.0;
        let model = MarketModel::uniform(1.0, 1, rate, vol, None).unwrap();
        let mortality = MortalityModel::none(1);
        let rider = PayoffRider(move |w: f64| (strike - w).max(0.0));
        let p = problem(&rider, &model, &mortality, 0.0, strike);
        let scheme = FdScheme {
            lattice: LatticeParams {
                wealth_intervals: 4000,
                base_slices: 8,
                ..Default::default()
            },
            time_steps_per_interval: 200,
            ..Default::default()
        };
        let r = price_pde(&p, &scheme).unwrap();
        let exact = analytic::put_price(100.0, strike, rate, 0.0, vol, 1.0);
        assert!(
            ((r.price - exact) / exact).abs() < 1e-4,
            "{} vs {exact}",
            r.price
        );
    }

    #[test]
    fn zero_volatility_transports_and_discounts() {
        // σ = 0, payoff W: the PDE degenerates to advection plus discounting
        // and the contract is worth the premium.
        let model = MarketModel::uniform(2.0, 2, 0.05, 0.0, None).unwrap();
        let mortality = MortalityModel::none(4);
        let rider = PayoffRider(|w: f64| w);
        let p = problem(&rider, &model, &mortality, 0.0, 100.0);
        let scheme = FdScheme {
            lattice: LatticeParams {
                wealth_intervals: 2000,
                base_slices: 8,
                quantile_width: 40.0,
                ..Default::default()
            },
            time_steps_per_interval: 100,
            ..Default::default()
        };
        let r = price_pde(&p, &scheme).unwrap();
        assert!((r.price / 100.0 - 1.0).abs() < 1e-3, "{}", r.price);
    }

    #[test]
    fn crank_nicolson_is_second_order_in_time() {
        let (rate, vol) = (0.05, 0.2);
        let strike = 100.0;
        let model = MarketModel::uniform(1.0, 1, rate, vol, None).unwrap();
        let mortality = MortalityModel::none(1);
        let rider = PayoffRider(move |w: f64| (strike - w).max(0.0));
        let p = problem(&rider, &model, &mortality, 0.0, strike);
        let exact = analytic::put_price(100.0, strike, rate, 0.0, vol, 1.0);
        let err = |steps: usize| {
            let scheme = FdScheme {
                lattice: LatticeParams {
                    wealth_intervals: 6000,
                    base_slices: 8,
                    ..Default::default()
                },
                time_steps_per_interval: steps,
                ..Default::default()
            };
            (price_pde(&p, &scheme).unwrap().price - exact).abs()
        };
        let coarse = err(16);
        let fine = err(32);
        let ratio = coarse / fine;
        assert!(
            (2.5..6.0).contains(&ratio),
            "convergence ratio {ratio} (errors {coarse} / {fine})"
        );
    }

    #[test]
    fn martingale_with_events() {
        let model = MarketModel::uniform(5.0, 4, 0.04, 0.2, None).unwrap();
        let mortality = MortalityModel::none(20);
        let rider = Gmab::new(GmabAccount::Super, 0.0, 100.0).unwrap();
        let p = problem(&rider, &model, &mortality, 0.0, 0.0);
        let scheme = FdScheme {
            lattice: LatticeParams { wealth_intervals: 800, base_slices: 8, ..Default::default() },
            ..Default::default()
        };
        let r = price_pde(&p, &scheme).unwrap();
        assert!((r.price / 100.0 - 1.0).abs() < 5e-4, "{}", r.price);
    }
}
