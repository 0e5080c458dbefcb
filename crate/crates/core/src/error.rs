//! Error type shared by every module in the crate.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of parsing, validation, and metric computation.
///
/// Line numbers are 1-based and count the header line, so the first data row
/// of a score CSV is line 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A CSV row could not be read or has the wrong shape.
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    /// The header line is not exactly `score,label,group`.
    #[error("bad header: expected \"score,label,group\", found {found:?}")]
    BadHeader { found: String },

    /// A similarity score outside [0, 1]. Scores are never clamped: tail
    /// masses are exactly what the divergence metrics measure, and silent
    /// clamping would distort them.
    #[error("line {line}: score {value} is outside [0, 1]")]
    ScoreOutOfRange { line: u64, value: f64 },

    /// A score handed to a computation (not parsed from a file) was outside
    /// the [0, 1] domain every metric assumes.
    #[error("score {value} is outside [0, 1]")]
    ScoreOutOfDomain { value: f64 },

    /// The comparison label was neither `genuine` nor `impostor`.
    #[error("line {line}: unknown label {label:?} (expected \"genuine\" or \"impostor\")")]
    UnknownLabel { line: u64, label: String },

    /// The input contained a header but no data rows.
    #[error("no records")]
    NoRecords,

    /// Divergence normalizers use log2(K), so a single group is meaningless.
    #[error("dataset has {found} group(s); at least 2 are required")]
    TooFewGroups { found: usize },

    /// An operation that needs at least one score received none.
    #[error("empty score sequence")]
    EmptyScores,

    /// Histograms need at least two bins to carry any shape.
    #[error("bin count must be at least 2 (got {bins})")]
    BadBinCount { bins: usize },

    /// Two distributions were combined that do not share a bin grid.
    #[error("bin grids do not match")]
    GridMismatch,

    /// A percentile outside the supported range.
    #[error("percentile {value} must lie in (0, 100]")]
    BadPercentile { value: f64 },

    /// A tail weight outside [0, 1].
    #[error("tail weight {value} must lie in [0, 1]")]
    BadTailWeight { value: f64 },

    /// sigma-threshold selection on a zero-variance sample: the threshold
    /// would coincide with the mean and the tail is undefined.
    #[error("degenerate distribution: standard deviation is zero")]
    ZeroSigma,

    /// N in the sigma-threshold rule must be positive.
    #[error("n_sigma must be positive (got {value})")]
    BadNSigma { value: f64 },

    /// A target false match rate outside the open interval (0, 1) cannot be
    /// realized by any threshold.
    #[error("target FMR {value} must lie in (0, 1)")]
    BadTargetFmr { value: f64 },

    /// Splitting produced a side with no bins or no mass.
    #[error("degenerate split: {detail}")]
    DegenerateSplit { detail: String },

    /// The automated split found no scores beyond the sigma threshold.
    #[error("no tail mass at {n_sigma} sigma (split percentile is 100)")]
    NoTailMass { n_sigma: f64 },

    /// The fitted normal tail mass underflowed; the relative tail deviation
    /// would divide by (numerically) zero.
    #[error("threshold beyond numeric range of the normal tail")]
    TailUnderflow,

    /// Beta shape parameters must both be positive and finite.
    #[error("invalid Beta shape parameters alpha={alpha}, beta={beta}")]
    BadBetaShape { alpha: f64, beta: f64 },

    /// A Beta mixture with no components, a non-positive weight, or weights
    /// that do not sum to one.
    #[error("invalid Beta mixture: {detail}")]
    BadMixture { detail: String },

    /// Scenario construction with an out-of-range biased group index or too
    /// few groups/samples.
    #[error("invalid scenario: {detail}")]
    BadScenario { detail: String },

    /// Dataset failed the minimum-per-cell validation and the caller did not
    /// override it.
    #[error("{0}")]
    Validation(String),

    /// I/O failure while reading or writing score data.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
