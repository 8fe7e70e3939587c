//! Rate–distortion domain types, validation and pairwise diagnostics.
//!
//! A measured operating point is a [`RdPoint`]; a validated, rate-ordered
//! sweep of points for one codec under one [`MetricKind`] is an [`RdCurve`].
//! Validation is strict by default (monotone quality, positive rates, metric
//! bounds) because every downstream quantity silently degrades when the
//! inputs are off; the permissive escape hatch records violations instead of
//! rejecting, so they surface later as lints.
//!
//! The diagnostics here exist because a single BD number hides most of the
//! ways a comparison can go wrong: curves that cross inside the integration
//! interval average out to a misleadingly small delta, short overlaps mean
//! the number describes a sliver of the operating range, and saturated
//! metrics (SSIM near 1.0) turn measurement noise into headline percentages.
//! [`run_lints`] makes those hazards explicit and machine-readable.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::error::{BdError, Result};
use crate::interp::{fit_pchip, FitMethod, FittedCurve, Orientation};

/// Quality metric a curve was measured under.
///
/// All supported metrics score upward (higher is better). Bounded metrics
/// get their values range-checked at validation time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetricKind {
    /// Peak signal-to-noise ratio, in dB. Unbounded.
    Psnr,
    /// Structural similarity, in [0, 1].
    Ssim,
    /// VMAF score, in [0, 100].
    Vmaf,
    /// Mean opinion score, in [1, 5].
    Mos,
    /// Anything else, identified by its label. Unbounded.
    Other(String),
}

impl MetricKind {
    /// Parse a metric name as it appears in CSV input (case-insensitive for
    /// the known metrics; anything else becomes [`MetricKind::Other`]).
    #[must_use]
    pub fn parse(name: &str) -> MetricKind {
        let trimmed = name.trim();
        match trimmed.to_ascii_uppercase().as_str() {
            "PSNR" => MetricKind::Psnr,
            "SSIM" => MetricKind::Ssim,
            "VMAF" => MetricKind::Vmaf,
            "MOS" => MetricKind::Mos,
            _ => MetricKind::Other(trimmed.to_string()),
        }
    }

    /// Canonical display name.
    #[must_use]
    pub fn name(&self) -> &str {
        match self {
            MetricKind::Psnr => "PSNR",
            MetricKind::Ssim => "SSIM",
            MetricKind::Vmaf => "VMAF",
            MetricKind::Mos => "MOS",
            MetricKind::Other(label) => label,
        }
    }

    /// Inclusive value range, where the metric defines one.
    #[must_use]
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self {
            MetricKind::Psnr | MetricKind::Other(_) => None,
            MetricKind::Ssim => Some((0.0, 1.0)),
            MetricKind::Vmaf => Some((0.0, 100.0)),
            MetricKind::Mos => Some((1.0, 5.0)),
        }
    }

    /// All supported metrics score upward.
    #[must_use]
    pub fn higher_is_better(&self) -> bool {
        true
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for MetricKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// One measured operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    /// Bitrate in kilobits per second. Finite and strictly positive.
    pub rate_kbps: f64,
    /// Quality in the units of the curve's metric.
    pub quality: f64,
}

/// A validated rate–distortion curve: one codec/configuration, one metric,
/// points ordered by ascending rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RdCurve {
    label: String,
    metric: MetricKind,
    points: Vec<RdPoint>,
    /// Indices where quality dropped below its predecessor (permissive mode).
    monotone_violations: Vec<usize>,
}

/// Validate raw points into an [`RdCurve`].
///
/// Checks, in order: at least two points; finite positive rates; finite
/// qualities; strictly ascending rates (points are never reordered here —
/// sorting raw input is the CSV layer's job, and silently "fixing" quality
/// order is exactly the data mangling this crate refuses to do); metric
/// bounds; monotone non-decreasing quality. With `allow_non_monotone` the
/// last check records violation indices on the curve instead of failing.
pub fn validate_curve(
    label: impl Into<String>,
    metric: MetricKind,
    points: Vec<RdPoint>,
    allow_non_monotone: bool,
) -> Result<RdCurve> {
    let label = label.into();
    if points.len() < 2 {
        return Err(BdError::EmptyInput {
            label,
            got: points.len(),
        });
    }
    for (i, p) in points.iter().enumerate() {
        if !p.rate_kbps.is_finite() || p.rate_kbps <= 0.0 {
            return Err(BdError::NonPositiveRate {
                label,
                index: i,
                rate: p.rate_kbps,
            });
        }
        if !p.quality.is_finite() {
            return Err(BdError::NonFiniteQuality {
                label,
                index: i,
                value: p.quality,
            });
        }
    }
    for i in 1..points.len() {
        if points[i].rate_kbps == points[i - 1].rate_kbps {
            return Err(BdError::DuplicateRate {
                label,
                first: i - 1,
                second: i,
                rate: points[i].rate_kbps,
            });
        }
        if points[i].rate_kbps < points[i - 1].rate_kbps {
            return Err(BdError::UnsortedRates { label, index: i });
        }
    }
    if let Some((lo, hi)) = metric.bounds() {
        for (i, p) in points.iter().enumerate() {
            if p.quality < lo || p.quality > hi {
                return Err(BdError::QualityOutOfMetricBounds {
                    label,
                    index: i,
                    metric: metric.name().to_string(),
                    value: p.quality,
                    lo,
                    hi,
                });
            }
        }
    }
    let mut violations = Vec::new();
    for i in 1..points.len() {
        if points[i].quality < points[i - 1].quality {
            if !allow_non_monotone {
                return Err(BdError::NonMonotoneQuality { label, index: i });
            }
            violations.push(i);
        }
    }
    Ok(RdCurve {
        label,
        metric,
        points,
        monotone_violations: violations,
    })
}

impl RdCurve {
    /// Codec / configuration name this curve belongs to.
    #[must_use]
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Metric the qualities are expressed in.
    #[must_use]
    pub fn metric(&self) -> &MetricKind {
        &self.metric
    }

    /// The validated points, ascending by rate.
    #[must_use]
    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }

    /// Number of operating points.
    #[must_use]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Curves always hold at least two points, but clippy insists.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices recorded by permissive validation where quality decreased.
    #[must_use]
    pub fn monotone_violations(&self) -> &[usize] {
        &self.monotone_violations
    }

    /// log10 of each rate, ascending.
    #[must_use]
    pub fn log_rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rate_kbps.log10()).collect()
    }

    /// Quality of each point, in measurement order.
    #[must_use]
    pub fn qualities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.quality).collect()
    }

    /// Linear rate span in kbps (min, max).
    #[must_use]
    pub fn rate_range(&self) -> (f64, f64) {
        (
            self.points[0].rate_kbps,
            self.points[self.points.len() - 1].rate_kbps,
        )
    }

    /// Quality span (min, max) over all points — robust to non-monotone data.
    #[must_use]
    pub fn quality_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.points {
            lo = lo.min(p.quality);
            hi = hi.max(p.quality);
        }
        (lo, hi)
    }

    /// First index at which quality fails to strictly increase, if any.
    #[must_use]
    pub fn first_non_strict_quality(&self) -> Option<usize> {
        (1..self.points.len()).find(|&i| self.points[i].quality <= self.points[i - 1].quality)
    }

    /// Fit this curve in the requested orientation.
    ///
    /// The inverse orientation (log-rate of quality) requires strictly
    /// increasing quality; otherwise the relation is not a function.
    pub fn fit(&self, method: FitMethod, orientation: Orientation) -> Result<FittedCurve> {
        match orientation {
            Orientation::QualityOfLogRate => {
                crate::interp::fit(method, &self.log_rates(), &self.qualities())
                    .map(|f| f.with_orientation(orientation))
            }
            Orientation::LogRateOfQuality => {
                if let Some(index) = self.first_non_strict_quality() {
                    return Err(BdError::NonInvertibleCurve {
                        label: self.label.clone(),
                        index,
                    });
                }
                crate::interp::fit(method, &self.qualities(), &self.log_rates())
                    .map(|f| f.with_orientation(orientation))
            }
        }
    }
}

/// Which axis an interval lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    /// log10 of the bitrate in kbps.
    #[serde(rename = "rate")]
    Rate,
    /// Quality in metric units.
    #[serde(rename = "quality")]
    Quality,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Rate => "rate",
            Axis::Quality => "quality",
        })
    }
}

/// The common interval of two curves on one axis.
///
/// `lo` is the larger of the two minima and `hi` the smaller of the two
/// maxima, so disjoint ranges naturally come out inverted (`lo > hi`); that
/// inverted pair *is* the empty-overlap marker. Rate-axis intervals are in
/// log10(kbps), matching the BD integration domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapInterval {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
}

impl OverlapInterval {
    /// True when the ranges do not intersect at all.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    /// True when there is an interval of positive length to integrate over.
    /// A single touching point (`lo == hi`) is not enough.
    #[must_use]
    pub fn has_positive_length(&self) -> bool {
        self.lo < self.hi
    }

    /// Interval length, zero when empty.
    #[must_use]
    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

/// Compute the overlap of two same-metric curves on the given axis.
pub fn compute_overlap(a: &RdCurve, b: &RdCurve, axis: Axis) -> Result<OverlapInterval> {
    ensure_same_metric(a, b)?;
    let ((a_lo, a_hi), (b_lo, b_hi)) = axis_ranges(a, b, axis);
    Ok(OverlapInterval {
        axis,
        lo: a_lo.max(b_lo),
        hi: a_hi.min(b_hi),
    })
}

/// Overlap length divided by union length on the given axis, in [0, 1].
///
/// Disjoint ranges give 0; identical ranges give 1. A degenerate union
/// (both curves constant on the axis at the same value) counts as full
/// overlap.
pub fn overlap_fraction(a: &RdCurve, b: &RdCurve, axis: Axis) -> Result<f64> {
    ensure_same_metric(a, b)?;
    let ((a_lo, a_hi), (b_lo, b_hi)) = axis_ranges(a, b, axis);
    let overlap = (a_hi.min(b_hi) - a_lo.max(b_lo)).max(0.0);
    let union = a_hi.max(b_hi) - a_lo.min(b_lo);
    if union <= 0.0 {
        return Ok(1.0);
    }
    Ok((overlap / union).clamp(0.0, 1.0))
}

fn axis_ranges(a: &RdCurve, b: &RdCurve, axis: Axis) -> ((f64, f64), (f64, f64)) {
    match axis {
        Axis::Rate => {
            let (a_lo, a_hi) = a.rate_range();
            let (b_lo, b_hi) = b.rate_range();
            (
                (a_lo.log10(), a_hi.log10()),
                (b_lo.log10(), b_hi.log10()),
            )
        }
        Axis::Quality => (a.quality_range(), b.quality_range()),
    }
}

fn ensure_same_metric(a: &RdCurve, b: &RdCurve) -> Result<()> {
    if a.metric != b.metric {
        return Err(BdError::MetricMismatch {
            a: a.metric.name().to_string(),
            b: b.metric.name().to_string(),
        });
    }
    Ok(())
}

/// Number of samples used to bracket crossovers and tangencies.
const CROSSOVER_GRID: usize = 1000;
/// Bisection stops when the bracket shrinks to this fraction of the interval.
const CROSSOVER_TOL: f64 = 1e-9;
/// |Δ| at a refined local minimum must be below this fraction of the grid
/// maximum to count as a tangential touch rather than a near miss.
const TANGENT_REL_TOL: f64 = 1e-7;

/// Positions inside `interval` where the two fitted curves cross.
///
/// The difference Δ(x) = fa(x) − fb(x) is sampled on a 1000-point uniform
/// grid; each strict sign change is refined by bisection to 1e−9 of the
/// interval width. Touching without a sign change (a tangential contact) is
/// deliberately *not* a crossover — see [`find_tangential_touches`].
///
/// Both fits must cover the interval; that is the caller's contract.
#[must_use]
pub fn find_crossovers(fa: &FittedCurve, fb: &FittedCurve, interval: &OverlapInterval) -> Vec<f64> {
    let Some((xs, d)) = sample_difference(fa, fb, interval) else {
        return Vec::new();
    };
    let width = interval.hi - interval.lo;
    let delta = |x: f64| {
        fa.evaluate(x).expect("fit covers the overlap interval")
            - fb.evaluate(x).expect("fit covers the overlap interval")
    };

    let mut roots = Vec::new();
    for i in 0..d.len() - 1 {
        if d[i] == 0.0 {
            // Grid sample exactly on the curve intersection: classify by the
            // nearest nonzero neighbours; interior sign change only.
            if i > 0 && d[i - 1] * d[i + 1] < 0.0 {
                roots.push(xs[i]);
            }
            continue;
        }
        if d[i + 1] == 0.0 {
            continue; // handled when the scan reaches it
        }
        if d[i] * d[i + 1] < 0.0 {
            roots.push(bisect(&delta, xs[i], xs[i + 1], d[i], CROSSOVER_TOL * width));
        }
    }
    roots
}

/// Positions inside `interval` where the curves touch without crossing.
///
/// Local minima of |Δ| on the sample grid are refined by ternary search; a
/// refined minimum that reaches (numerical) zero while the sign stays the
/// same on both flanks is a tangency. Identical curves (Δ ≈ 0 everywhere)
/// produce none.
#[must_use]
pub fn find_tangential_touches(
    fa: &FittedCurve,
    fb: &FittedCurve,
    interval: &OverlapInterval,
) -> Vec<f64> {
    let Some((xs, d)) = sample_difference(fa, fb, interval) else {
        return Vec::new();
    };
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = TANGENT_REL_TOL * scale;
    let delta = |x: f64| {
        fa.evaluate(x).expect("fit covers the overlap interval")
            - fb.evaluate(x).expect("fit covers the overlap interval")
    };

    let mut touches = Vec::new();
    for i in 1..d.len() - 1 {
        let same_side = d[i - 1] * d[i + 1] > 0.0;
        if d[i] == 0.0 {
            if same_side {
                touches.push(xs[i]);
            }
            continue;
        }
        if !same_side || d[i] * d[i - 1] < 0.0 {
            continue; // a sign change nearby: that is a crossover's business
        }
        if d[i].abs() <= d[i - 1].abs() && d[i].abs() < d[i + 1].abs() {
            let sign = d[i].signum();
            let x_star = ternary_min(|x| sign * delta(x), xs[i - 1], xs[i + 1]);
            if delta(x_star).abs() <= tol {
                touches.push(x_star);
            }
        }
    }
    touches
}

/// Sample Δ over the interval; `None` when the interval is empty or the
/// curves are numerically identical (no crossings worth reporting).
fn sample_difference(
    fa: &FittedCurve,
    fb: &FittedCurve,
    interval: &OverlapInterval,
) -> Option<(Vec<f64>, Vec<f64>)> {
    if !interval.has_positive_length() {
        return None;
    }
    let n = CROSSOVER_GRID;
    let step = (interval.hi - interval.lo) / (n - 1) as f64;
    let mut xs = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    let mut value_scale = 0.0f64;
    let mut diff_scale = 0.0f64;
    for i in 0..n {
        let x = if i == n - 1 {
            interval.hi
        } else {
            interval.lo + step * i as f64
        };
        let ya = fa.evaluate(x).expect("fit covers the overlap interval");
        let yb = fb.evaluate(x).expect("fit covers the overlap interval");
        value_scale = value_scale.max(ya.abs()).max(yb.abs());
        diff_scale = diff_scale.max((ya - yb).abs());
        xs.push(x);
        d.push(ya - yb);
    }
    if diff_scale <= 1e-12 * (1.0 + value_scale) {
        return None;
    }
    Some((xs, d))
}

fn bisect(delta: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut da: f64, tol: f64) -> f64 {
    for _ in 0..80 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let dm = delta(mid);
        if da * dm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            da = dm;
        }
    }
    0.5 * (a + b)
}

fn ternary_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    0.5 * (a + b)
}

/// Stable identifiers for the hazards the linter recognises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum LintCode {
    /// The curves cross inside the integration interval (signed gaps cancel).
    #[serde(rename = "CROSSOVER")]
    Crossover,
    /// The curves touch without crossing inside the interval.
    #[serde(rename = "TANGENT")]
    Tangent,
    /// The overlap covers less than the configured fraction of the union.
    #[serde(rename = "LOW_OVERLAP")]
    LowOverlap,
    /// Integration ranges under different metrics disagree badly.
    #[serde(rename = "METRIC_RANGE_DIVERGENCE")]
    MetricRangeDivergence,
    /// Quality decreased with rate somewhere (recorded in permissive mode).
    #[serde(rename = "NON_MONOTONE")]
    NonMonotone,
    /// An SSIM curve spans so little that deltas are mostly noise.
    #[serde(rename = "SSIM_SATURATION")]
    SsimSaturation,
    /// Too few points for the fits to be trustworthy.
    #[serde(rename = "FEW_POINTS")]
    FewPoints,
}

impl std::fmt::Display for LintCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LintCode::Crossover => "CROSSOVER",
            LintCode::Tangent => "TANGENT",
            LintCode::LowOverlap => "LOW_OVERLAP",
            LintCode::MetricRangeDivergence => "METRIC_RANGE_DIVERGENCE",
            LintCode::NonMonotone => "NON_MONOTONE",
            LintCode::SsimSaturation => "SSIM_SATURATION",
            LintCode::FewPoints => "FEW_POINTS",
        })
    }
}

/// How loudly a lint should be reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Severity {
    #[serde(rename = "info")]
    Info,
    #[serde(rename = "warn")]
    Warn,
    #[serde(rename = "error")]
    Error,
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warn => "warn",
            Severity::Error => "error",
        })
    }
}

/// One diagnostic finding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lint {
    pub code: LintCode,
    pub severity: Severity,
    pub message: String,
}

/// Thresholds for the linter. The defaults encode the usual reporting
/// hygiene; loosen or tighten them per project taste.
#[derive(Debug, Clone, Copy)]
pub struct LintConfig {
    /// LOW_OVERLAP fires below this overlap fraction (default 0.5).
    pub low_overlap_threshold: f64,
    /// METRIC_RANGE_DIVERGENCE fires when per-metric integration ranges
    /// differ by more than this fraction of their union (default 0.25).
    pub range_divergence_threshold: f64,
    /// SSIM_SATURATION fires when an SSIM curve spans less than this
    /// (default 0.01).
    pub ssim_saturation_span: f64,
    /// FEW_POINTS fires below this point count (default 4).
    pub few_points_min: usize,
}

impl Default for LintConfig {
    fn default() -> Self {
        LintConfig {
            low_overlap_threshold: 0.5,
            range_divergence_threshold: 0.25,
            ssim_saturation_span: 0.01,
            few_points_min: 4,
        }
    }
}

/// Everything the linter found for one comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct DiagnosticsReport {
    /// Crossover positions on the log10-rate axis, ascending.
    pub crossovers: Vec<f64>,
    /// Rate-axis overlap fraction in [0, 1].
    pub overlap_fraction: f64,
    /// Quality-axis overlap fraction in [0, 1].
    pub quality_overlap_fraction: f64,
    /// (curve label, point index) pairs where quality decreased.
    pub monotone_violations: Vec<(String, usize)>,
    /// Rate-axis integration range per metric (log10 kbps).
    pub per_metric_ranges: BTreeMap<MetricKind, OverlapInterval>,
    /// The findings, ascending by code then message.
    pub lints: Vec<Lint>,
}

impl DiagnosticsReport {
    /// Highest severity present, if any lint fired.
    #[must_use]
    pub fn max_severity(&self) -> Option<Severity> {
        self.lints.iter().map(|l| l.severity).max()
    }

    /// Merge per-metric reports into one, re-checking cross-metric range
    /// divergence on the combined table.
    #[must_use]
    pub fn merge(reports: &[DiagnosticsReport], cfg: &LintConfig) -> DiagnosticsReport {
        let mut out = DiagnosticsReport {
            overlap_fraction: 1.0,
            quality_overlap_fraction: 1.0,
            ..DiagnosticsReport::default()
        };
        if reports.is_empty() {
            return out;
        }
        for r in reports {
            out.crossovers.extend_from_slice(&r.crossovers);
            out.overlap_fraction = out.overlap_fraction.min(r.overlap_fraction);
            out.quality_overlap_fraction = out
                .quality_overlap_fraction
                .min(r.quality_overlap_fraction);
            out.monotone_violations
                .extend(r.monotone_violations.iter().cloned());
            for (k, v) in &r.per_metric_ranges {
                out.per_metric_ranges.insert(k.clone(), *v);
            }
            out.lints.extend(r.lints.iter().cloned());
        }
        out.crossovers.sort_by(f64::total_cmp);
        out.crossovers.dedup();
        out.monotone_violations.sort();
        out.monotone_violations.dedup();
        if let Some(lint) =
            metric_range_divergence(&out.per_metric_ranges, cfg.range_divergence_threshold)
        {
            out.lints.push(lint);
        }
        out.lints.sort_by(|a, b| {
            a.code
                .cmp(&b.code)
                .then_with(|| a.message.cmp(&b.message))
        });
        out.lints.dedup();
        out
    }
}

/// Cross-metric range check: fires when two metrics integrate over rate
/// ranges whose Jaccard distance exceeds the threshold.
#[must_use]
pub fn metric_range_divergence(
    ranges: &BTreeMap<MetricKind, OverlapInterval>,
    threshold: f64,
) -> Option<Lint> {
    let entries: Vec<(&MetricKind, &OverlapInterval)> = ranges.iter().collect();
    let mut worst: Option<(f64, &MetricKind, &MetricKind)> = None;
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let (ka, ia) = entries[i];
            let (kb, ib) = entries[j];
            let (la, lb) = (ia.length(), ib.length());
            if la <= 0.0 && lb <= 0.0 {
                continue;
            }
            let inter = (ia.hi.min(ib.hi) - ia.lo.max(ib.lo)).max(0.0);
            let union = la + lb - inter;
            let distance = 1.0 - inter / union;
            if distance > threshold && worst.is_none_or(|(w, _, _)| distance > w) {
                worst = Some((distance, ka, kb));
            }
        }
    }
    worst.map(|(distance, ka, kb)| Lint {
        code: LintCode::MetricRangeDivergence,
        severity: Severity::Warn,
        message: format!(
            "integration ranges diverge across metrics: {ka} vs {kb} share only \
             {:.1}% of their union rate range",
            (1.0 - distance) * 100.0
        ),
    })
}

/// Build the diagnostics for one curve pair.
///
/// `fits` are the quality-of-log-rate fits to scan for crossovers; when the
/// caller has none handy, monotone piecewise fits are built internally (they
/// exist for any two valid curves).
pub(crate) fn pair_diagnostics(
    a: &RdCurve,
    b: &RdCurve,
    fits: Option<(&FittedCurve, &FittedCurve)>,
    cfg: &LintConfig,
) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport {
        overlap_fraction: overlap_fraction(a, b, Axis::Rate)?,
        quality_overlap_fraction: overlap_fraction(a, b, Axis::Quality)?,
        ..DiagnosticsReport::default()
    };
    let rate_overlap = compute_overlap(a, b, Axis::Rate)?;
    report
        .per_metric_ranges
        .insert(a.metric().clone(), rate_overlap);

    let owned;
    let (fa, fb) = match fits {
        Some(pair) => pair,
        None => {
            owned = (
                fit_pchip(&a.log_rates(), &a.qualities())?,
                fit_pchip(&b.log_rates(), &b.qualities())?,
            );
            (&owned.0, &owned.1)
        }
    };
    report.crossovers = find_crossovers(fa, fb, &rate_overlap);
    let tangents = find_tangential_touches(fa, fb, &rate_overlap);

    let mut lints = Vec::new();
    if !report.crossovers.is_empty() {
        let kbps: Vec<String> = report
            .crossovers
            .iter()
            .map(|x| format!("{:.3}", 10f64.powf(*x)))
            .collect();
        lints.push(Lint {
            code: LintCode::Crossover,
            severity: Severity::Warn,
            message: format!(
                "curves cross inside the integration range at {} kbps; the BD value \
                 averages regions of opposite sign",
                kbps.join(", ")
            ),
        });
    }
    for x in &tangents {
        lints.push(Lint {
            code: LintCode::Tangent,
            severity: Severity::Info,
            message: format!(
                "curves touch without crossing near {:.3} kbps",
                10f64.powf(*x)
            ),
        });
    }
    if report.overlap_fraction < cfg.low_overlap_threshold {
        lints.push(Lint {
            code: LintCode::LowOverlap,
            severity: Severity::Warn,
            message: format!(
                "rate ranges share only {:.1}% of their union (threshold {:.0}%)",
                report.overlap_fraction * 100.0,
                cfg.low_overlap_threshold * 100.0
            ),
        });
    } else if report.quality_overlap_fraction < cfg.low_overlap_threshold {
        lints.push(Lint {
            code: LintCode::LowOverlap,
            severity: Severity::Warn,
            message: format!(
                "quality ranges share only {:.1}% of their union (threshold {:.0}%)",
                report.quality_overlap_fraction * 100.0,
                cfg.low_overlap_threshold * 100.0
            ),
        });
    }
    for curve in [a, b] {
        for &i in curve.monotone_violations() {
            report
                .monotone_violations
                .push((curve.label().to_string(), i));
        }
        if !curve.monotone_violations().is_empty() {
            lints.push(Lint {
                code: LintCode::NonMonotone,
                severity: Severity::Warn,
                message: format!(
                    "curve '{}' has non-monotone quality at point(s) {:?}; treat BD \
                     values with caution",
                    curve.label(),
                    curve.monotone_violations()
                ),
            });
        }
        if *curve.metric() == MetricKind::Ssim {
            let (qlo, qhi) = curve.quality_range();
            if qhi - qlo < cfg.ssim_saturation_span {
                lints.push(Lint {
                    code: LintCode::SsimSaturation,
                    severity: Severity::Warn,
                    message: format!(
                        "curve '{}' spans only {:.4} SSIM; the metric is saturated and \
                         deltas are mostly noise",
                        curve.label(),
                        qhi - qlo
                    ),
                });
            }
        }
        if curve.len() < cfg.few_points_min {
            lints.push(Lint {
                code: LintCode::FewPoints,
                severity: Severity::Info,
                message: format!(
                    "curve '{}' has only {} points (fewer than {}); fits are weakly \
                     determined",
                    curve.label(),
                    curve.len(),
                    cfg.few_points_min
                ),
            });
        }
    }
    lints.sort_by(|x, y| x.code.cmp(&y.code).then_with(|| x.message.cmp(&y.message)));
    report.lints = lints;
    Ok(report)
}

/// Run every lint over a curve pair, folding in diagnostics already attached
/// to computed results (so crossovers found with the caller's fit method are
/// not re-derived with a different one).
pub fn run_lints(
    a: &RdCurve,
    b: &RdCurve,
    results: &[crate::engine::BdResult],
) -> Result<DiagnosticsReport> {
    run_lints_with(a, b, results, &LintConfig::default())
}

/// [`run_lints`] with explicit thresholds.
pub fn run_lints_with(
    a: &RdCurve,
    b: &RdCurve,
    results: &[crate::engine::BdResult],
    cfg: &LintConfig,
) -> Result<DiagnosticsReport> {
    let own = pair_diagnostics(a, b, None, cfg)?;
    if results.is_empty() {
        return Ok(own);
    }
    let mut all = vec![own];
    all.extend(results.iter().map(|r| r.diagnostics.clone()));
    Ok(DiagnosticsReport::merge(&all, cfg))
}
