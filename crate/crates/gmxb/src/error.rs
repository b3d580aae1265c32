use thiserror::Error;

/// Errors produced by the pricing engine.
#[derive(Debug, Error)]
pub enum EngineError {
    /// A constructor or operation received an invalid argument.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Root bracketing failed: the function has the same sign at both ends.
    #[error("no sign change over [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// The tridiagonal solver hit a vanishing pivot.
    #[error("singular tridiagonal system: zero pivot at row {row}")]
    SingularSystem { row: usize },

    /// A withdrawal outside the contract's admissible set was requested.
    #[error("withdrawal {gamma} outside admissible set [0, {max}]")]
    InadmissibleWithdrawal { gamma: f64, max: f64 },

    /// A solver produced non-finite values; the message carries diagnostics.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Life-table input could not be parsed or does not cover the needed ages.
    #[error("life table: {0}")]
    LifeTable(String),

    /// The requested strategy cannot be handled by the chosen solver.
    #[error("unsupported strategy: {0}")]
    UnsupportedStrategy(String),

    /// The fair-fee search could not bracket the premium.
    #[error("fair fee infeasible over [{lo_bp} bp, {hi_bp} bp]: {detail}")]
    FeeInfeasible { lo_bp: f64, hi_bp: f64, detail: String },
}
