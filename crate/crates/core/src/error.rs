//! Error type shared by the whole toolkit.

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the toolkit.
///
/// Solver non-convergence is *not* an error: solve reports carry a status
/// instead. `Error` is reserved for contract violations (bad dimensions,
/// invalid parameters, probes outside the domain, ...) that make the
/// requested computation meaningless.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two quantities that must share a dimension do not.
    #[error("dimension mismatch: {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A computation produced a non-finite number where finiteness is required.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    /// An operation that needs probe points received none that are usable.
    #[error("no usable probe points: {reason}")]
    NoUsableProbes { reason: String },

    /// A point lies outside the domain of the convex term where a finite
    /// value is required.
    #[error("point outside the domain of phi in {context}")]
    OutsideDomain { context: &'static str },

    /// An operation restricted to indicator-type convex terms was called on a
    /// non-indicator kind.
    #[error("operation requires an indicator-type convex term, got {got}")]
    NotIndicator { got: &'static str },

    /// An affine operator failed its monotonicity validation at construction.
    #[error("affine operator is not monotone: min eigenvalue of symmetric part is {min_eig}")]
    NotMonotone { min_eig: f64 },

    /// A sampling region has zero volume or inverted bounds.
    #[error("degenerate sampling region: {reason}")]
    DegenerateRegion { reason: String },

    /// Not enough data for the requested estimate or scan.
    #[error("insufficient data for {context}: need {need}, got {got}")]
    InsufficientData {
        context: &'static str,
        need: usize,
        got: usize,
    },

    /// A diagnostic was fed a report produced by the wrong method.
    #[error("report method mismatch: {context} requires {required}, got {got}")]
    MethodMismatch {
        context: &'static str,
        required: &'static str,
        got: String,
    },

    /// A solver step was invoked with parameters the scheme is not defined for.
    #[error("unsupported configuration for {method}: {reason}")]
    UnsupportedConfig { method: &'static str, reason: String },

    /// The damped inner fixed-point iteration of an implicit step ran out of
    /// iterations; carries the last iterate and its remaining defect.
    #[error("inner fixed-point solve failed: defect {defect} after the iteration budget")]
    InnerSolveFailed { defect: f64, last: Vec<f64> },
}
