//! Error and diagnostic types shared across the crate.

use std::fmt;

use thiserror::Error;

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// A single rule violation found while validating a rating matrix.
///
/// Validation collects *every* violation instead of stopping at the first,
/// so ingest errors on real datasets can be fixed in one pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A rating symbol that is not part of the label space.
    UnknownLabel {
        item: String,
        position: usize,
        symbol: String,
    },
    /// An item with fewer than two ratings; held-out scoring needs at least
    /// one rating to predict from and one to score against.
    RowTooShort { item: String, len: usize },
    /// The same item id appeared more than once.
    DuplicateItemId { item: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownLabel {
                item,
                position,
                symbol,
            } => write!(
                f,
                "item {item:?}: unknown label {symbol:?} at rating position {position}"
            ),
            Violation::RowTooShort { item, len } => {
                write!(f, "item {item:?}: only {len} rating(s), need at least 2")
            }
            Violation::DuplicateItemId { item } => write!(f, "duplicate item id {item:?}"),
        }
    }
}

/// Errors produced by the library.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// One or more structural problems in a rating matrix; lists every
    /// violation found.
    #[error("invalid rating matrix: {}", format_violations(.0))]
    InvalidMatrix(Vec<Violation>),

    /// A label space was constructed with fewer than two labels or with
    /// duplicate names.
    #[error("invalid label space: {0}")]
    InvalidLabelSpace(String),

    /// A soft prediction whose components are outside [0, 1] or do not sum
    /// to 1 within tolerance.
    #[error("soft prediction does not form a distribution: {0}")]
    InvalidDistribution(String),

    /// An operation received no data to work on.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Hard predictions were supplied where soft were required, or vice
    /// versa.
    #[error("prediction kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    /// Log-loss scoring hit a realized label with probability zero.
    #[error(
        "cross entropy is undefined: zero probability assigned to the realized label ({context})"
    )]
    ZeroProbabilityLabel { context: String },

    /// A score that needs both classes (e.g. ranking) saw only one.
    #[error("degenerate reference labels: {0}")]
    DegenerateLabels(String),

    /// The label named as positive/reference is not in the label space.
    #[error("label {0:?} is not part of the label space")]
    UnknownLabel(String),

    /// Too few items qualified for a sequence-probability estimate.
    #[error("{0}")]
    TooFewItems(String),

    /// The combined-prediction denominator vanished: no other item can
    /// produce the observed rating sequence.
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    /// A combiner was asked to do something its label-space contract
    /// forbids (e.g. majority vote on a non-binary space).
    #[error("combiner misuse: {0}")]
    CombinerContract(String),

    /// A prediction set does not line up with the rating matrix it is
    /// scored against.
    #[error("prediction set mismatch: {0}")]
    PredictionMismatch(String),

    /// A power-curve evaluation failed; wraps the underlying error with
    /// the survey size and rater subset being evaluated.
    #[error("power curve evaluation failed at k={k}, subset {subset}: {source}")]
    CurveEvaluation {
        k: usize,
        subset: String,
        #[source]
        source: Box<Error>,
    },

    /// A structured file failed to parse; reported with 1-based line and
    /// column of the offending cell where known.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A synthetic-model configuration that is internally inconsistent.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Ground-truth scoring was requested for a model whose states do not
    /// correspond one-to-one with labels.
    #[error("states do not correspond one-to-one with labels: {0}")]
    NonUniformNoiseModel(String),

    /// Calibration saw a classifier output value that no rated item
    /// produced, so no empirical frequency exists for it.
    #[error("no rated items produced classifier output {0}")]
    EmptyBucket(String),

    /// Any configuration error not covered above (incompatible
    /// combiner/scorer pairing, out-of-range sizes, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Underlying CSV machinery failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),

    /// Underlying JSON failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    let rendered: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    rendered.join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_matrix_lists_every_violation() {
        let err = Error::InvalidMatrix(vec![
            Violation::RowTooShort {
                item: "a".into(),
                len: 1,
            },
            Violation::DuplicateItemId { item: "a".into() },
        ]);
        let msg = err.to_string();
        assert!(msg.contains("only 1 rating(s)"));
        assert!(msg.contains("duplicate item id"));
    }
}
