//! Error type shared by every module in the crate.

use std::error::Error;
use std::fmt;

/// Everything that can go wrong while parsing tables, evaluating measures,
/// running inference, or rendering output.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum MhError {
    /// Input contained no data rows.
    EmptyTable,
    /// Square tables need dimension at least 2.
    TooSmall { r: usize },
    /// Row `row` (1-based, after any header) has a field count different
    /// from the row count.
    NonSquare { rows: usize, row: usize, cols: usize },
    /// A cell failed to parse as the expected numeric type.
    BadCell { row: usize, col: usize, token: String },
    /// All counts are zero.
    ZeroTotal,
    /// The table total does not fit in a 64-bit count.
    TotalOverflow,
    /// A probability cell is negative or not finite.
    BadProbability { row: usize, col: usize, value: f64 },
    /// Probability cells must sum to 1 (tolerance 1e-6 before renormalizing).
    NotNormalized { sum: f64 },
    /// The Dirichlet smoothing parameter must be positive and finite.
    BadAlpha { alpha: f64 },
    /// The measure is undefined: no off-diagonal mass at the given level,
    /// or (with `level == None`) none anywhere.
    MeasureUndefined { level: Option<usize> },
    /// A conditional block probability sits on the boundary {0, 1}; the
    /// variance formula divides by sqrt(Gc) there. Smoothing removes this.
    BoundaryGc { level: usize },
    /// The table is numerically at marginal homogeneity at the given level;
    /// the measure has a kink there and the delta method does not apply.
    DegenerateAtMH { level: usize },
    /// The power-divergence order must satisfy lambda > -1.
    BadLambda { lambda: f64 },
    /// A confidence or coverage level must lie strictly between 0 and 1.
    BadLevel { level: f64 },
    /// The finite-difference step must be positive and not underflow.
    BadStep { h: f64 },
    /// The pair (gc1, gc2) must be a two-point distribution.
    NotTwoPoint { gc1: f64, gc2: f64 },
    /// A simulation parameter is out of range.
    BadScenario { reason: String },
    /// The sub-measure list does not match the summary's level count.
    LengthMismatch { expected: usize, found: usize },
    /// Canvas geometry must be positive and finite.
    ZeroCanvas,
}

impl fmt::Display for MhError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MhError::EmptyTable => write!(f, "input contains no data rows"),
            MhError::TooSmall { r } => {
                write!(f, "table dimension must be at least 2, got {r}")
            }
            MhError::NonSquare { rows, row, cols } => write!(
                f,
                "non-square input: {rows} rows, but row {row} has {cols} fields"
            ),
            MhError::BadCell { row, col, token } => write!(
                f,
                "cannot parse cell value {token:?} (row {row}, column {col})"
            ),
            MhError::ZeroTotal => write!(f, "all counts are zero"),
            MhError::TotalOverflow => write!(f, "table total overflows a 64-bit count"),
            MhError::BadProbability { row, col, value } => write!(
                f,
                "invalid probability {value} (row {row}, column {col}): \
                 cells must be finite and non-negative"
            ),
            MhError::NotNormalized { sum } => {
                write!(f, "cell probabilities sum to {sum}, expected 1")
            }
            MhError::BadAlpha { alpha } => {
                write!(f, "smoothing parameter must be positive and finite, got {alpha}")
            }
            MhError::MeasureUndefined { level: None } => {
                write!(f, "measure undefined: Δ = 0")
            }
            MhError::MeasureUndefined { level: Some(i) } => {
                write!(f, "measure undefined: G1({i}) + G2({i}) = 0")
            }
            MhError::BoundaryGc { level } => write!(
                f,
                "conditional probability at level {level} is 0 or 1; \
                 the asymptotic variance needs a smoothed table"
            ),
            MhError::DegenerateAtMH { level } => write!(
                f,
                "table is at marginal homogeneity at level {level}; \
                 the delta-method variance is undefined there"
            ),
            MhError::BadLambda { lambda } => {
                write!(f, "power-divergence order must satisfy lambda > -1, got {lambda}")
            }
            MhError::BadLevel { level } => {
                write!(f, "level must lie strictly between 0 and 1, got {level}")
            }
            MhError::BadStep { h } => {
                write!(f, "finite-difference step {h} is not usable")
            }
            MhError::NotTwoPoint { gc1, gc2 } => write!(
                f,
                "({gc1}, {gc2}) is not a two-point distribution"
            ),
            MhError::BadScenario { reason } => write!(f, "invalid scenario: {reason}"),
            MhError::LengthMismatch { expected, found } => write!(
                f,
                "sub-measure list has {found} entries, summary has {expected} levels"
            ),
            MhError::ZeroCanvas => write!(f, "canvas geometry must be positive and finite"),
        }
    }
}

impl Error for MhError {}
