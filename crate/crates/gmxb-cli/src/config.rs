//! Run configuration: a single TOML file with nested sections, strictly
//! validated (unknown keys are rejected), plus dotted-path overrides from
//! the command line.

use std::path::{Path, PathBuf};

use gmxb::lattice::LatticeParams;
use gmxb::model::{FeeStructure, LifeTable, MarketModel, MortalityModel};
use gmxb::riders::{
    Gmab, GmabAccount, Gmdb, GmdbKind, Gmib, Glwb, GmwbBasic, GmwbBaseUpdate, GmwbIndustry,
    RatchetTiming,
};
use gmxb::solver::ghqc::GhqcConfig;
use gmxb::solver::mc::McConfig;
use gmxb::solver::pde::FdScheme;
use gmxb::solver::{StaticRule, Strategy};
use gmxb::Real;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub contract: ContractBlock,
    pub rider: RiderBlock,
    pub market: MarketBlock,
    pub fee: FeeBlock,
    #[serde(default)]
    pub mortality: Option<MortalityBlock>,
    pub strategy: StrategyBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub search: SearchBlock,
    #[serde(default)]
    pub validate: ValidateBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractBlock {
    /// Upfront premium, the initial wealth account balance.
    pub premium: f64,
    /// Initial benefit base; defaults to the premium.
    #[serde(default)]
    pub initial_base: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiderBlock {
    /// gmab | gmwb | gmwb-industry | glwb | gmib | gmdb
    pub kind: String,
    /// GMAB account type: super | pension.
    #[serde(default)]
    pub account: Option<String>,
    /// GMAB pension: annualised penalty-free withdrawal fraction g.
    #[serde(default)]
    pub free_withdrawal_rate: Option<f64>,
    /// GMWB / GLWB excess-withdrawal penalty β.
    #[serde(default)]
    pub penalty: Option<f64>,
    /// GMWB industry base update: spec1 | spec2 | spec3.
    #[serde(default)]
    pub variant: Option<String>,
    /// GMWB industry excess penalty βᵉ.
    #[serde(default)]
    pub excess_penalty: Option<f64>,
    /// GMWB industry early-withdrawal penalty βᵍ.
    #[serde(default)]
    pub early_penalty: Option<f64>,
    /// GMWB industry ratchet timing: before-withdrawal | after-withdrawal.
    #[serde(default)]
    pub ratchet_timing: Option<String>,
    /// GLWB guaranteed annual withdrawal rate g.
    #[serde(default)]
    pub guaranteed_rate: Option<f64>,
    /// GLWB bonus (roll-up) rate applied when no withdrawal is taken.
    #[serde(default)]
    pub bonus_rate: Option<f64>,
    /// GMIB annuitisation-rate ratio ä_T/ä_g.
    #[serde(default)]
    pub annuity_ratio: Option<f64>,
    /// Death benefit type 0–3 (defaults to 3, the wealth account).
    #[serde(default)]
    pub death_benefit: Option<u8>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketBlock {
    pub maturity: f64,
    pub events_per_year: usize,
    /// Flat risk-free rate, or `rates` per period.
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    /// Flat volatility, or `vols` per period.
    #[serde(default)]
    pub volatility: Option<f64>,
    #[serde(default)]
    pub vols: Option<Vec<f64>>,
    /// Ratchet every k-th event; omit for no ratchets.
    #[serde(default)]
    pub ratchet_every_events: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeeBlock {
    /// continuous | on-wealth | on-base
    #[serde(default = "default_fee_kind")]
    pub kind: String,
    pub rate_bp: f64,
}

fn default_fee_kind() -> String {
    "continuous".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MortalityBlock {
    /// Path to the life table (rows of `age annual_death_probability`).
    pub life_table: PathBuf,
    /// Age at contract inception.
    pub entry_age: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyBlock {
    /// none | wealth-fraction | contractual | optimal | threshold
    pub kind: String,
    /// Annualised withdrawal fraction for `wealth-fraction`.
    #[serde(default)]
    pub annual_rate: Option<f64>,
    /// θ for the `threshold` strategy.
    #[serde(default)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    /// ghqc | pde | mc
    pub method: String,
    pub wealth_intervals: usize,
    pub base_slices: usize,
    pub quantile_width: f64,
    pub quad_order: usize,
    pub time_substeps: usize,
    pub withdrawal_candidates: usize,
    /// PDE: time steps per event interval.
    pub time_steps_per_interval: usize,
    /// PDE: fully implicit startup steps after each jump.
    pub rannacher_steps: usize,
    /// MC: simulation count.
    pub paths: u64,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self {
            method: "ghqc".into(),
            wealth_intervals: 400,
            base_slices: 200,
            quantile_width: 5.0,
            quad_order: 9,
            time_substeps: 1,
            withdrawal_candidates: 101,
            time_steps_per_interval: 40,
            rannacher_steps: 2,
            paths: 20_000_000,
            seed: 42,
            antithetic: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchBlock {
    pub bracket_hi_bp: f64,
    pub max_bracket_bp: f64,
    pub tol_bp: f64,
}

impl Default for SearchBlock {
    fn default() -> Self {
        Self { bracket_hi_bp: 2000.0, max_bracket_bp: 5000.0, tol_bp: 0.01 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateBlock {
    /// Allowed |relative difference| between GHQC and Monte Carlo prices (%).
    pub mc_threshold_pct: f64,
    /// Allowed |relative difference| between GHQC and PDE prices (%).
    pub pde_threshold_pct: f64,
}

impl Default for ValidateBlock {
    fn default() -> Self {
        Self { mc_threshold_pct: 1.0, pde_threshold_pct: 0.5 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    /// CSV destination; stdout when omitted.
    pub csv: Option<PathBuf>,
    /// Decimal places for prices in the CSV.
    pub precision: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { csv: None, precision: 4 }
    }
}

impl RunConfig {
    /// Loads a config file and applies `--set key=value` overrides (dotted
    /// paths into the TOML tree, values parsed as TOML literals).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        for spec in overrides {
            apply_override(&mut value, spec)?;
        }
        value
            .try_into()
            .map_err(|e| CliError::config(e.to_string()))
    }

    /// Canonical TOML rendering used for the provenance hash.
    pub fn canonical(&self) -> String {
        format!("{self:?}")
    }
}

fn apply_override(root: &mut toml::Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set expects key=value, got `{spec}`")))?;
    let parsed: toml::Value = toml::from_str(&format!("v = {raw}"))
        .map(|v: toml::Value| v["v"].clone())
        .or_else(|_| toml::from_str(&format!("v = \"{raw}\"")).map(|v: toml::Value| v["v"].clone()))
        .map_err(|e| CliError::config(format!("cannot parse override value `{raw}`: {e}")))?;
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("override path `{path}` crosses a non-table")))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    Ok(())
}

/// Everything the commands need, built and validated from a [`RunConfig`].
pub struct Assembled {
    pub rider: AnyRider,
    pub model: MarketModel<Real>,
    pub fee: FeeStructure<Real>,
    pub mortality: MortalityModel<Real>,
    pub strategy: Strategy<Real>,
    pub w0: Real,
    pub a0: Real,
    pub method: SolverMethod,
    pub ghqc: GhqcConfig,
    pub pde: FdScheme,
    pub mc: McConfig,
    pub search: gmxb::analysis::FairFeeOptions,
    pub validate: ValidateBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Ghqc,
    Pde,
    Mc,
}

/// Rider dispatch for config-driven construction.
pub enum AnyRider {
    Gmab(Gmab<Real>),
    GmwbBasic(GmwbBasic<Real>),
    GmwbIndustry(GmwbIndustry<Real>),
    Glwb(Glwb<Real>),
    Gmib(Gmib<Real>),
    Gmdb(Gmdb<Real>),
}

macro_rules! for_rider {
    ($any:expr, $r:ident => $body:expr) => {
        match $any {
            AnyRider::Gmab($r) => $body,
            AnyRider::GmwbBasic($r) => $body,
            AnyRider::GmwbIndustry($r) => $body,
            AnyRider::Glwb($r) => $body,
            AnyRider::Gmib($r) => $body,
            AnyRider::Gmdb($r) => $body,
        }
    };
}
pub(crate) use for_rider;

impl RunConfig {
    pub fn assemble(&self) -> Result<Assembled, CliError> {
        let w0 = self.contract.premium;
        if !(w0 > 0.0) {
            return Err(CliError::config("contract.premium must be positive"));
        }
        let a0 = self.contract.initial_base.unwrap_or(w0);

        let rider = self.build_rider(w0)?;
        let model = self.build_market()?;
        let n_events = model.n_events();

        let fee_rate = self.fee.rate_bp * 1e-4;
        let fee = match self.fee.kind.as_str() {
            "continuous" => FeeStructure::Continuous { rate: fee_rate },
            "on-wealth" => FeeStructure::DiscreteOnWealth { rate: fee_rate },
            "on-base" => FeeStructure::DiscreteOnBase { rate: fee_rate },
            other => return Err(CliError::config(format!("fee.kind: unknown kind `{other}`"))),
        };

        let mortality = match &self.mortality {
            None => MortalityModel::none(n_events),
            Some(block) => {
                let text = std::fs::read_to_string(&block.life_table).map_err(|e| {
                    CliError::config(format!(
                        "mortality.life_table {}: {e}",
                        block.life_table.display()
                    ))
                })?;
                let table = LifeTable::parse(&text).map_err(CliError::from_engine_config)?;
                let times: Vec<Real> = (0..=n_events).map(|n| model.time(n)).collect();
                MortalityModel::from_life_table(&table, block.entry_age, &times)
                    .map_err(CliError::from_engine_config)?
            }
        };

        let strategy = match self.strategy.kind.as_str() {
            "none" => Strategy::Static(StaticRule::None),
            "wealth-fraction" => {
                let rate = self.strategy.annual_rate.ok_or_else(|| {
                    CliError::config("strategy.annual_rate required for wealth-fraction")
                })?;
                Strategy::Static(StaticRule::WealthFraction { annual_rate: rate })
            }
            "contractual" => Strategy::Static(StaticRule::Contractual),
            "optimal" => Strategy::Optimal,
            "threshold" => Strategy::Threshold {
                theta: self
                    .strategy
                    .theta
                    .ok_or_else(|| CliError::config("strategy.theta required for threshold"))?,
            },
            other => {
                return Err(CliError::config(format!("strategy.kind: unknown kind `{other}`")))
            }
        };

        let method = match self.solver.method.as_str() {
            "ghqc" => SolverMethod::Ghqc,
            "pde" => SolverMethod::Pde,
            "mc" => SolverMethod::Mc,
            other => return Err(CliError::config(format!("solver.method: unknown `{other}`"))),
        };

        let lattice = LatticeParams {
            wealth_intervals: self.solver.wealth_intervals,
            base_slices: self.solver.base_slices,
            quantile_width: self.solver.quantile_width,
            ..Default::default()
        };
        let ghqc = GhqcConfig {
            lattice,
            quad_order: self.solver.quad_order,
            withdrawal_candidates: self.solver.withdrawal_candidates,
            time_substeps: self.solver.time_substeps,
        };
        let pde = FdScheme {
            lattice,
            time_steps_per_interval: self.solver.time_steps_per_interval,
            theta: 0.5,
            rannacher_steps: self.solver.rannacher_steps,
            withdrawal_candidates: self.solver.withdrawal_candidates,
        };
        let mc = McConfig {
            paths: self.solver.paths,
            seed: self.solver.seed,
            antithetic: self.solver.antithetic,
            ..Default::default()
        };
        let search = gmxb::analysis::FairFeeOptions {
            bracket_hi_bp: self.search.bracket_hi_bp,
            max_bracket_bp: self.search.max_bracket_bp,
            tol_bp: self.search.tol_bp,
        };

        Ok(Assembled {
            rider,
            model,
            fee,
            mortality,
            strategy,
            w0,
            a0,
            method,
            ghqc,
            pde,
            mc,
            search,
            validate: self.validate.clone(),
        })
    }

    fn build_rider(&self, premium: f64) -> Result<AnyRider, CliError> {
        let r = &self.rider;
        let death_benefit = match r.death_benefit {
            None => GmdbKind::Wealth,
            Some(t) => GmdbKind::from_type(t).map_err(CliError::from_engine_config)?,
        };
        let used: &[&str] = match r.kind.as_str() {
            "gmab" => &["account", "free_withdrawal_rate", "death_benefit"],
            "gmwb" => &["penalty", "death_benefit"],
            "gmwb-industry" => &[
                "variant",
                "excess_penalty",
                "early_penalty",
                "ratchet_timing",
                "death_benefit",
            ],
            "glwb" => &["guaranteed_rate", "bonus_rate", "penalty", "death_benefit"],
            "gmib" => &["annuity_ratio", "death_benefit"],
            "gmdb" => &["death_benefit"],
            other => return Err(CliError::config(format!("rider.kind: unknown kind `{other}`"))),
        };
        self.check_rider_fields(used)?;
        let maturity = self.market.maturity;

        let rider = match r.kind.as_str() {
            "gmab" => {
                let account = match r.account.as_deref() {
                    Some("super") | None => GmabAccount::Super,
                    Some("pension") => GmabAccount::Pension,
                    Some(other) => {
                        return Err(CliError::config(format!(
                            "rider.account: unknown account `{other}`"
                        )))
                    }
                };
                let mut g = Gmab::new(account, r.free_withdrawal_rate.unwrap_or(0.0), premium)
                    .map_err(CliError::from_engine_config)?;
                g.death_benefit = death_benefit;
                AnyRider::Gmab(g)
            }
            "gmwb" => {
                let mut g = GmwbBasic::new(premium, maturity, r.penalty.unwrap_or(0.0))
                    .map_err(CliError::from_engine_config)?;
                g.death_benefit = death_benefit;
                AnyRider::GmwbBasic(g)
            }
            "gmwb-industry" => {
                let base_update = match r.variant.as_deref() {
                    Some("spec1") => GmwbBaseUpdate::Spec1,
                    Some("spec2") | None => GmwbBaseUpdate::Spec2,
                    Some("spec3") => GmwbBaseUpdate::Spec3,
                    Some(other) => {
                        return Err(CliError::config(format!(
                            "rider.variant: unknown variant `{other}`"
                        )))
                    }
                };
                let timing = match r.ratchet_timing.as_deref() {
                    Some("before-withdrawal") | None => RatchetTiming::BeforeWithdrawal,
                    Some("after-withdrawal") => RatchetTiming::AfterWithdrawal,
                    Some(other) => {
                        return Err(CliError::config(format!(
                            "rider.ratchet_timing: unknown timing `{other}`"
                        )))
                    }
                };
                let entry_age = self.mortality.as_ref().map(|m| m.entry_age).unwrap_or(65.0);
                let mut g = GmwbIndustry::new(
                    premium,
                    maturity,
                    base_update,
                    r.excess_penalty.unwrap_or(0.0),
                    r.early_penalty.unwrap_or(0.0),
                    entry_age,
                    timing,
                )
                .map_err(CliError::from_engine_config)?;
                g.death_benefit = death_benefit;
                AnyRider::GmwbIndustry(g)
            }
            "glwb" => {
                let rate = r.guaranteed_rate.ok_or_else(|| {
                    CliError::config("rider.guaranteed_rate required for glwb")
                })?;
                let bonus = r.bonus_rate.map(|b| vec![b]).unwrap_or_default();
                let mut g = Glwb::new(rate, bonus, r.penalty.unwrap_or(0.0), premium)
                    .map_err(CliError::from_engine_config)?;
                g.death_benefit = death_benefit;
                AnyRider::Glwb(g)
            }
            "gmib" => {
                let ratio = r
                    .annuity_ratio
                    .ok_or_else(|| CliError::config("rider.annuity_ratio required for gmib"))?;
                let mut g = Gmib::new(ratio, premium).map_err(CliError::from_engine_config)?;
                g.death_benefit = death_benefit;
                AnyRider::Gmib(g)
            }
            "gmdb" => AnyRider::Gmdb(Gmdb::new(death_benefit, premium)),
            _ => unreachable!(),
        };
        Ok(rider)
    }

    fn check_rider_fields(&self, used: &[&str]) -> Result<(), CliError> {
        let r = &self.rider;
        let present: [(&str, bool); 10] = [
            ("account", r.account.is_some()),
            ("free_withdrawal_rate", r.free_withdrawal_rate.is_some()),
            ("penalty", r.penalty.is_some()),
            ("variant", r.variant.is_some()),
            ("excess_penalty", r.excess_penalty.is_some()),
            ("early_penalty", r.early_penalty.is_some()),
            ("ratchet_timing", r.ratchet_timing.is_some()),
            ("guaranteed_rate", r.guaranteed_rate.is_some()),
            ("bonus_rate", r.bonus_rate.is_some()),
            ("annuity_ratio", r.annuity_ratio.is_some()),
        ];
        for (name, is_set) in present {
            if is_set && !used.contains(&name) {
                return Err(CliError::config(format!(
                    "rider.{name} does not apply to rider kind `{}`",
                    self.rider.kind
                )));
            }
        }
        Ok(())
    }

    fn build_market(&self) -> Result<MarketModel<Real>, CliError> {
        let m = &self.market;
        let n = (m.maturity * m.events_per_year as f64).round() as usize;
        if n == 0 {
            return Err(CliError::config("market: schedule has no events"));
        }
        let times: Vec<Real> = (0..=n).map(|i| m.maturity * i as f64 / n as f64).collect();
        let rates = match (&m.rates, m.rate) {
            (Some(v), None) => v.clone(),
            (None, Some(r)) => vec![r; n],
            _ => {
                return Err(CliError::config(
                    "market: exactly one of `rate` or `rates` must be set",
                ))
            }
        };
        let vols = match (&m.vols, m.volatility) {
            (Some(v), None) => v.clone(),
            (None, Some(v)) => vec![v; n],
            _ => {
                return Err(CliError::config(
                    "market: exactly one of `volatility` or `vols` must be set",
                ))
            }
        };
        let ratchet: Vec<bool> = (1..=n)
            .map(|i| m.ratchet_every_events.is_some_and(|k| k > 0 && i % k == 0))
            .collect();
        MarketModel::new(times, rates, vols, ratchet).map_err(CliError::from_engine_config)
    }
}
