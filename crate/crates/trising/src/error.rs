//! Error type shared by the series, lattice and verification layers.

use thiserror::Error;

/// Errors produced by exact-series arithmetic and the verification pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Division by a series that is zero to its full precision window.
    #[error("zero divisor: series is zero to its precision window")]
    ZeroDivisor,

    /// An operation shrank the precision window until no coefficient is known.
    #[error("precision exhausted: window collapsed at exponent {0}/4")]
    PrecisionExhausted(i64),

    /// Logarithm of a series whose leading term is not 1 at exponent 0.
    #[error("unnormalized logarithm: leading term must be 1 at exponent 0")]
    UnnormalizedLog,

    /// Root or fractional power of a series whose leading coefficient is not
    /// a perfect power of the required order.
    #[error("non-normalized root: leading coefficient is not a perfect power")]
    NonNormalizedRoot,

    /// An exponent left the p^(1/4) grid.
    #[error("grid violation: exponent {0}/4 · {1} leaves the quarter-integer grid")]
    GridViolation(i64, String),

    /// Exponent pattern fitting failed for one residue class.
    #[error("no stable pattern: residue {residue} first mismatches at n = {n}")]
    NoStablePattern { residue: i64, n: i64 },

    /// A shape request was geometrically inadmissible.
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// The linear system for the free-energy split has too few independent rows.
    #[error("underdetermined extraction: {0}")]
    Underdetermined(String),

    /// The extraction system has unexpected rank (beyond the gauge freedom).
    #[error("extraction configuration error: {0}")]
    Configuration(String),

    /// A residual of the overdetermined extraction system failed to vanish.
    #[error("finite-size contamination or model error: first residual at order {0}/4")]
    ResidualMismatch(i64),

    /// Parameters outside a stated convergence or validity domain.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A numerical routine could not reach the requested tolerance.
    #[error("tolerance not reached: achieved {achieved:e}, requested {requested:e}")]
    ToleranceNotReached { achieved: f64, requested: f64 },

    /// Least-squares fit is too ill-conditioned to trust.
    #[error("ill-conditioned fit: condition estimate {0:e}")]
    IllConditionedFit(f64),

    /// A computation was refused because its cost estimate exceeds the budget.
    #[error("infeasible request: {0}")]
    Infeasible(String),

    /// An internal consistency assertion failed (e.g. imaginary part nonzero).
    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Serialization / parse failure for the series text format.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
