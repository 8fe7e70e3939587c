//! The crate-wide error type.
//!
//! Every fallible operation in this crate returns [`BdError`]. Variants are
//! deliberately fine-grained so that callers (and the CLI) can distinguish
//! "your data is broken" from "this computation is undefined for your data":
//! a duplicate rate in a CSV is a different conversation with the user than a
//! pair of curves whose quality ranges do not overlap.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, BdError>;

/// Errors produced by curve validation, fitting, BD computation and IO.
#[derive(Debug, Error)]
pub enum BdError {
    // ---- curve validation -------------------------------------------------
    /// Fewer than the two points needed to describe a rate–distortion curve.
    #[error("curve '{label}': need at least 2 rate-distortion points, got {got}")]
    EmptyInput { label: String, got: usize },

    /// Rates must be finite and strictly positive (they live on a log axis).
    #[error("curve '{label}': rate must be finite and > 0, got {rate} at point {index}")]
    NonPositiveRate {
        label: String,
        index: usize,
        rate: f64,
    },

    /// Two points share the same rate; the curve would not be a function.
    #[error("curve '{label}': duplicate rate {rate} kbps at points {first} and {second}")]
    DuplicateRate {
        label: String,
        first: usize,
        second: usize,
        rate: f64,
    },

    /// Points were supplied out of rate order. Validation never reorders.
    #[error("curve '{label}': rates must be sorted ascending (point {index} breaks the order)")]
    UnsortedRates { label: String, index: usize },

    /// Quality is not finite.
    #[error("curve '{label}': quality must be finite, got {value} at point {index}")]
    NonFiniteQuality {
        label: String,
        index: usize,
        value: f64,
    },

    /// Quality decreased as rate increased and the caller did not opt in.
    #[error(
        "curve '{label}': quality decreases at point {index}; pass the permissive flag to \
         accept non-monotone data (the violation is then reported as a lint)"
    )]
    NonMonotoneQuality { label: String, index: usize },

    /// A quality value escapes the metric's defined range.
    #[error("curve '{label}': {metric} value {value} at point {index} outside [{lo}, {hi}]")]
    QualityOutOfMetricBounds {
        label: String,
        index: usize,
        metric: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    // ---- pairwise preconditions -------------------------------------------
    /// Curves measured under different metrics cannot be compared.
    #[error("metric mismatch: '{a}' vs '{b}'")]
    MetricMismatch { a: String, b: String },

    // ---- fitting ----------------------------------------------------------
    /// The chosen fit backend needs more samples than were provided.
    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// The least-squares normal equations are numerically singular.
    #[error("least-squares system is singular (abscissae nearly coincide)")]
    SingularSystem,

    /// An evaluation or integration bound fell outside the fitted domain.
    #[error("x = {x} outside fitted domain [{lo}, {hi}] (including any tails)")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    /// Integration bounds were supplied in the wrong order.
    #[error("inverted integration interval: [{lo}, {hi}]")]
    InvertedInterval { lo: f64, hi: f64 },

    /// A tail target must lie strictly outside the current domain.
    #[error("tail target {target} lies inside the fitted domain [{lo}, {hi}]")]
    TargetInsideDomain { target: f64, lo: f64, hi: f64 },

    // ---- BD computation ---------------------------------------------------
    /// The curves share no interval on the integration axis.
    #[error("curves do not overlap on the {axis} axis; see the extrapolation modes")]
    NoOverlap { axis: String },

    /// BD-Rate needs quality as an abscissa, so quality must strictly increase.
    #[error(
        "curve '{label}': quality is not strictly increasing (point {index}); \
         the rate-of-quality inverse is undefined"
    )]
    NonInvertibleCurve { label: String, index: usize },

    /// The rate pdf puts mass where at least one curve has no data.
    #[error(
        "pdf support [{support_lo}, {support_hi}] kbps exceeds the common curve range \
         [{curve_lo}, {curve_hi}] kbps"
    )]
    PdfOutsideCurveRange {
        support_lo: f64,
        support_hi: f64,
        curve_lo: f64,
        curve_hi: f64,
    },

    /// The pdf masses do not sum to one.
    #[error("pdf is not normalized (mass sum = {sum}); call normalize() or fix the input")]
    UnnormalizedPdf { sum: f64 },

    /// Aggregation over results of differing kind, method or mode.
    #[error("cannot aggregate mixed results: {detail}")]
    MixedKinds { detail: String },

    /// Aggregation over an empty slice.
    #[error("cannot aggregate zero results")]
    EmptyAggregate,

    // ---- IO ---------------------------------------------------------------
    /// Input is not valid UTF-8.
    #[error("input is not valid UTF-8")]
    NotUtf8,

    /// A CSV row that does not fit the wire format. `line` is 1-based.
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    /// The header row does not match the expected schema.
    #[error("unknown header '{found}', expected '{expected}'")]
    UnknownHeader { found: String, expected: String },

    /// A field that should be numeric is not. `line` is 1-based.
    #[error("line {line}: field '{field}' is not a finite number: '{value}'")]
    NonNumericField {
        line: usize,
        field: String,
        value: String,
    },

    /// Two pdf bins overlap.
    #[error("pdf bins [{a_lo}, {a_hi}] and [{b_lo}, {b_hi}] kbps overlap")]
    OverlappingBins {
        a_lo: f64,
        a_hi: f64,
        b_lo: f64,
        b_hi: f64,
    },

    /// A pdf bin carries negative mass.
    #[error("pdf bin [{lo}, {hi}] kbps has negative mass {mass}")]
    NegativeMass { lo: f64, hi: f64, mass: f64 },

    /// A pdf bin has non-finite, non-positive, or inverted bounds.
    #[error("pdf bin {index} is malformed: {detail}")]
    InvalidPdfBin { index: usize, detail: String },

    /// No usable pdf bins (none at all, or zero total mass).
    #[error("pdf is empty or carries zero total mass")]
    EmptyPdf,
}
