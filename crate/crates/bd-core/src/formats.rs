//! Wire formats: measurement CSV in, pdf CSV in, reports and plot data out.
//!
//! The measurement format is one operating point per row,
//! `sequence,codec,metric,rate_kbps,quality`, with `#` comment lines and a
//! mandatory header. Rows may arrive in any order; curves are sorted by rate
//! when extracted. The pdf format is one histogram bin per row,
//! `rate_lo_kbps,rate_hi_kbps,mass`.
//!
//! Report emission is byte-deterministic: the same document always renders
//! to the same bytes, so reports can be diffed and checked into golden
//! files. Floats are written with Rust's shortest-round-trip formatting,
//! which re-parses to the identical value.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::engine::{AggregateSummary, BdKind, BdMode, BdResult, PdfBin, RatePdf};
use crate::error::{BdError, Result};
use crate::interp::{FitMethod, Orientation};
use crate::model::{
    compute_overlap, find_crossovers, Axis, DiagnosticsReport, MetricKind, RdCurve, RdPoint,
    validate_curve,
};

/// Expected measurement CSV header.
pub const MEASUREMENT_HEADER: &str = "sequence,codec,metric,rate_kbps,quality";
/// Expected pdf CSV header.
pub const PDF_HEADER: &str = "rate_lo_kbps,rate_hi_kbps,mass";

/// All measurements of a session, keyed sequence → codec → metric.
///
/// `BTreeMap`s keep every iteration order deterministic, which the report
/// emitters rely on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementTable {
    points: BTreeMap<String, BTreeMap<String, BTreeMap<MetricKind, Vec<RdPoint>>>>,
}

impl MeasurementTable {
    /// Add one operating point (rows arrive unsorted; sorting happens in
    /// [`MeasurementTable::curve`]).
    pub fn insert(&mut self, sequence: &str, codec: &str, metric: MetricKind, point: RdPoint) {
        self.points
            .entry(sequence.to_string())
            .or_default()
            .entry(codec.to_string())
            .or_default()
            .entry(metric)
            .or_default()
            .push(point);
    }

    /// Sequence names, sorted.
    pub fn sequences(&self) -> impl Iterator<Item = &str> {
        self.points.keys().map(String::as_str)
    }

    /// Codec names present for a sequence, sorted.
    #[must_use]
    pub fn codecs(&self, sequence: &str) -> Vec<&str> {
        self.points
            .get(sequence)
            .map(|c| c.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// Metrics measured for a sequence/codec, sorted.
    #[must_use]
    pub fn metrics(&self, sequence: &str, codec: &str) -> Vec<MetricKind> {
        self.points
            .get(sequence)
            .and_then(|c| c.get(codec))
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default()
    }

    /// Raw points for one curve, in row order.
    #[must_use]
    pub fn raw_points(&self, sequence: &str, codec: &str, metric: &MetricKind) -> Option<&[RdPoint]> {
        self.points
            .get(sequence)?
            .get(codec)?
            .get(metric)
            .map(Vec::as_slice)
    }

    /// Build the validated curve for a sequence/codec/metric. Points are
    /// sorted by rate first; `permissive` tolerates non-monotone quality
    /// (recorded as violations instead of an error).
    pub fn curve(
        &self,
        sequence: &str,
        codec: &str,
        metric: &MetricKind,
        permissive: bool,
    ) -> Result<RdCurve> {
        let label = format!("{sequence}/{codec}");
        let mut pts = self
            .raw_points(sequence, codec, metric)
            .ok_or_else(|| BdError::EmptyInput {
                label: format!("{label}/{metric}"),
                got: 0,
            })?
            .to_vec();
        pts.sort_by(|a, b| a.rate_kbps.total_cmp(&b.rate_kbps));
        validate_curve(label, metric.clone(), pts, permissive)
    }

    /// Total number of stored points.
    #[must_use]
    pub fn len(&self) -> usize {
        self.points
            .values()
            .flat_map(|c| c.values())
            .flat_map(|m| m.values())
            .map(Vec::len)
            .sum()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Split a CSV line, trimming each field. No quoting: the format never
/// needs embedded commas.
fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

/// Lines that carry data: skips blanks and `#` comments, keeps 1-based line
/// numbers for error messages.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn check_header(line: &str, expected: &str) -> Result<()> {
    let found = split_fields(line);
    let want = split_fields(expected);
    if found.len() != want.len()
        || found
            .iter()
            .zip(&want)
            .any(|(f, w)| !f.eq_ignore_ascii_case(w))
    {
        return Err(BdError::UnknownHeader {
            found: line.to_string(),
            expected: expected.to_string(),
        });
    }
    Ok(())
}

fn parse_float(line: usize, field: &str, value: &str) -> Result<f64> {
    let parsed: f64 = value.parse().map_err(|_| BdError::NonNumericField {
        line,
        field: field.to_string(),
        value: value.to_string(),
    })?;
    if !parsed.is_finite() {
        return Err(BdError::NonNumericField {
            line,
            field: field.to_string(),
            value: value.to_string(),
        });
    }
    Ok(parsed)
}

/// Parse measurement CSV. Duplicate `(sequence, codec, metric, rate)` rows
/// are rejected with both line numbers; everything else about ordering is
/// forgiven.
pub fn parse_csv(text: &str) -> Result<MeasurementTable> {
    let mut lines = data_lines(text);
    let (header_line, header) = lines.next().ok_or(BdError::EmptyInput {
        label: "(measurement csv)".to_string(),
        got: 0,
    })?;
    let _ = header_line;
    check_header(header, MEASUREMENT_HEADER)?;

    let mut table = MeasurementTable::default();
    let mut seen: BTreeMap<(String, String, String, u64), usize> = BTreeMap::new();
    for (line_no, line) in lines {
        let fields = split_fields(line);
        if fields.len() != 5 {
            return Err(BdError::MalformedRow {
                line: line_no,
                reason: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let (sequence, codec, metric_name) = (fields[0], fields[1], fields[2]);
        if sequence.is_empty() || codec.is_empty() || metric_name.is_empty() {
            return Err(BdError::MalformedRow {
                line: line_no,
                reason: "empty sequence, codec, or metric field".to_string(),
            });
        }
        let metric = MetricKind::parse(metric_name);
        let rate_kbps = parse_float(line_no, "rate_kbps", fields[3])?;
        let quality = parse_float(line_no, "quality", fields[4])?;

        let key = (
            sequence.to_string(),
            codec.to_string(),
            metric.name().to_string(),
            rate_kbps.to_bits(),
        );
        if let Some(first) = seen.insert(key, line_no) {
            return Err(BdError::MalformedRow {
                line: line_no,
                reason: format!(
                    "duplicate rate {rate_kbps} kbps for {sequence}/{codec}/{metric} \
                     (first at line {first})"
                ),
            });
        }
        table.insert(sequence, codec, metric, RdPoint { rate_kbps, quality });
    }
    if table.is_empty() {
        return Err(BdError::EmptyInput {
            label: "(measurement csv)".to_string(),
            got: 0,
        });
    }
    Ok(table)
}

/// [`parse_csv`] from raw bytes, rejecting non-UTF-8 input.
pub fn parse_csv_bytes(bytes: &[u8]) -> Result<MeasurementTable> {
    parse_csv(std::str::from_utf8(bytes).map_err(|_| BdError::NotUtf8)?)
}

/// Render the table back to CSV: sorted keys, points sorted by rate,
/// shortest-round-trip floats. `parse_csv(to_csv(t)) == t` up to point
/// ordering.
#[must_use]
pub fn to_csv(table: &MeasurementTable) -> String {
    let mut out = String::from(MEASUREMENT_HEADER);
    out.push('\n');
    for (sequence, codecs) in &table.points {
        for (codec, metrics) in codecs {
            for (metric, points) in metrics {
                let mut sorted = points.clone();
                sorted.sort_by(|a, b| a.rate_kbps.total_cmp(&b.rate_kbps));
                for p in sorted {
                    let _ = writeln!(
                        out,
                        "{sequence},{codec},{},{},{}",
                        metric.name(),
                        p.rate_kbps,
                        p.quality
                    );
                }
            }
        }
    }
    out
}

/// Parse a bitrate histogram. The masses are kept as loaded — callers
/// decide whether to [`RatePdf::normalize`] or to treat an off-unit sum as
/// an input error.
pub fn parse_pdf_csv(text: &str) -> Result<RatePdf> {
    let mut lines = data_lines(text);
    let (_, header) = lines.next().ok_or(BdError::EmptyPdf)?;
    check_header(header, PDF_HEADER)?;

    let mut bins = Vec::new();
    for (line_no, line) in lines {
        let fields = split_fields(line);
        if fields.len() != 3 {
            return Err(BdError::MalformedRow {
                line: line_no,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        bins.push(PdfBin {
            lo_kbps: parse_float(line_no, "rate_lo_kbps", fields[0])?,
            hi_kbps: parse_float(line_no, "rate_hi_kbps", fields[1])?,
            mass: parse_float(line_no, "mass", fields[2])?,
        });
    }
    RatePdf::new(bins)
}

/// [`parse_pdf_csv`] from raw bytes, rejecting non-UTF-8 input.
pub fn parse_pdf_csv_bytes(bytes: &[u8]) -> Result<RatePdf> {
    parse_pdf_csv(std::str::from_utf8(bytes).map_err(|_| BdError::NotUtf8)?)
}

/// Rounded human-readable value: tenths of a percent for BD-Rate,
/// hundredths of a unit for BD-Quality.
#[must_use]
pub fn display_value(kind: BdKind, value: f64) -> String {
    match kind {
        BdKind::Rate => format!("{value:.1}%"),
        BdKind::Quality => format!("{value:.2}"),
    }
}

/// One comparison in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEntry {
    pub sequence: String,
    pub anchor: String,
    pub test: String,
    pub metric: MetricKind,
    /// Rounded presentation of `result.value`.
    pub display: String,
    /// Name of the weighting pdf, when one was applied.
    pub weighted_pdf: Option<String>,
    pub result: BdResult,
}

/// A cross-sequence average of comparable entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateEntry {
    pub anchor: String,
    pub test: String,
    pub metric: MetricKind,
    pub kind: BdKind,
    pub method: FitMethod,
    pub mode: BdMode,
    pub summary: AggregateSummary,
}

/// The toplevel report document, serialized as-is for JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ReportDocument {
    pub bd_report_version: u32,
    pub results: Vec<ReportEntry>,
    pub aggregates: Vec<AggregateEntry>,
}

impl ReportDocument {
    /// Current wire version.
    pub const VERSION: u32 = 1;

    #[must_use]
    pub fn new() -> Self {
        ReportDocument {
            bd_report_version: Self::VERSION,
            results: Vec::new(),
            aggregates: Vec::new(),
        }
    }
}

/// Output flavour for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Markdown,
    Csv,
}

impl ReportFormat {
    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "json" => Some(ReportFormat::Json),
            "md" | "markdown" => Some(ReportFormat::Markdown),
            "csv" => Some(ReportFormat::Csv),
            _ => None,
        }
    }
}

/// Render a report. Same document, same bytes.
#[must_use]
pub fn emit_report(doc: &ReportDocument, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => emit_csv(doc),
        ReportFormat::Markdown => emit_markdown(doc),
    }
}

fn emit_csv(doc: &ReportDocument) -> String {
    let mut out = String::from(
        "sequence,anchor,test,metric,kind,method,mode,extrapolated,value,display,weighted_pdf\n",
    );
    for e in &doc.results {
        let extrapolated = match e.result.extrapolated {
            crate::engine::Extrapolated::None => "none",
            crate::engine::Extrapolated::Low => "low",
            crate::engine::Extrapolated::High => "high",
            crate::engine::Extrapolated::Both => "both",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            e.sequence,
            e.anchor,
            e.test,
            e.metric.name(),
            e.result.kind,
            e.result.method,
            e.result.mode,
            extrapolated,
            e.result.value,
            e.display,
            e.weighted_pdf.as_deref().unwrap_or("")
        );
    }
    out
}

/// Row identity within a markdown table: everything but the sequence.
type RowKey<'a> = (
    &'a str,
    &'a str,
    BdKind,
    FitMethod,
    BdMode,
    Option<&'a str>,
);

fn emit_markdown(doc: &ReportDocument) -> String {
    let mut out = String::from("# Bjøntegaard Delta report\n");

    // Group entries per metric, then per row key; columns are sequences.
    let mut metrics: Vec<&MetricKind> = doc.results.iter().map(|e| &e.metric).collect();
    metrics.sort();
    metrics.dedup();

    for metric in metrics {
        let entries: Vec<&ReportEntry> =
            doc.results.iter().filter(|e| &e.metric == metric).collect();
        let mut sequences: Vec<&str> = entries.iter().map(|e| e.sequence.as_str()).collect();
        sequences.sort_unstable();
        sequences.dedup();
        let mut rows: Vec<RowKey> = entries
            .iter()
            .map(|e| {
                (
                    e.anchor.as_str(),
                    e.test.as_str(),
                    e.result.kind,
                    e.result.method,
                    e.result.mode,
                    e.weighted_pdf.as_deref(),
                )
            })
            .collect();
        rows.sort_unstable();
        rows.dedup();

        let _ = write!(out, "\n## {}\n\n", metric.name());
        let _ = write!(out, "| comparison | quantity | method | mode |");
        for s in &sequences {
            let _ = write!(out, " {s} |");
        }
        out.push_str(" mean |\n");
        let _ = write!(out, "|---|---|---|---|");
        for _ in &sequences {
            out.push_str("---|");
        }
        out.push_str("---|\n");

        for (anchor, test, kind, method, mode, pdf) in rows {
            let quantity = match (kind, pdf) {
                (BdKind::Rate, _) => "BD-Rate".to_string(),
                (BdKind::Quality, None) => "BD-Quality".to_string(),
                (BdKind::Quality, Some(p)) => format!("BD-Quality ({p}-weighted)"),
            };
            let _ = write!(
                out,
                "| {test} vs {anchor} | {quantity} | {method} | {mode} |"
            );
            let mut values = Vec::new();
            for s in &sequences {
                let cell = entries.iter().find(|e| {
                    e.sequence == *s
                        && e.anchor == anchor
                        && e.test == test
                        && e.result.kind == kind
                        && e.result.method == method
                        && e.result.mode == mode
                        && e.weighted_pdf.as_deref() == pdf
                });
                match cell {
                    Some(e) => {
                        values.push(e.result.value);
                        let _ = write!(out, " {} |", e.display);
                    }
                    None => {
                        let _ = write!(out, " - |");
                    }
                }
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let _ = writeln!(out, " {} |", display_value(kind, mean));
        }
    }

    if !doc.aggregates.is_empty() {
        out.push_str("\n## Aggregates\n\n");
        out.push_str("| comparison | metric | quantity | method | mode | mean | min | max | n |\n");
        out.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for a in &doc.aggregates {
            let quantity = match a.kind {
                BdKind::Rate => "BD-Rate",
                BdKind::Quality => "BD-Quality",
            };
            let _ = writeln!(
                out,
                "| {} vs {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                a.test,
                a.anchor,
                a.metric.name(),
                quantity,
                a.method,
                a.mode,
                display_value(a.kind, a.summary.mean),
                display_value(a.kind, a.summary.min),
                display_value(a.kind, a.summary.max),
                a.summary.count
            );
        }
    }
    out
}

/// Fitted-curve samples for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotPoint {
    /// log10 of rate in kbps.
    pub x: f64,
    /// Anchor fit value, when `x` is inside its domain.
    pub anchor: Option<f64>,
    /// Test fit value, likewise.
    pub test: Option<f64>,
}

/// Everything a plotting frontend needs for one comparison: dense fit
/// samples, original knots, the overlap window and any crossovers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSeries {
    pub metric: MetricKind,
    pub method: FitMethod,
    /// Abscissa meaning, always log10 of rate in kbps.
    pub axis: &'static str,
    pub samples: Vec<PlotPoint>,
    /// Measured anchor points as (log10 rate, quality).
    pub anchor_knots: Vec<(f64, f64)>,
    /// Measured test points, when a test curve was given.
    pub test_knots: Vec<(f64, f64)>,
    /// Common log-rate window, when it has positive length.
    pub overlap: Option<(f64, f64)>,
    /// Rate-axis crossover positions inside the overlap.
    pub crossovers: Vec<f64>,
}

/// Sample fitted curves on a uniform log-rate grid spanning the union of
/// their domains. `samples` is clamped to at least 2.
pub fn plot_series(
    anchor: &RdCurve,
    test: Option<&RdCurve>,
    method: FitMethod,
    samples: usize,
) -> Result<PlotSeries> {
    let fa = anchor.fit(method, Orientation::QualityOfLogRate)?;
    let ft = test
        .map(|t| t.fit(method, Orientation::QualityOfLogRate))
        .transpose()?;

    let (mut lo, mut hi) = fa.domain();
    if let Some(ft) = &ft {
        let (tlo, thi) = ft.domain();
        lo = lo.min(tlo);
        hi = hi.max(thi);
    }

    let n = samples.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let grid = (0..n).map(|k| if k == n - 1 { hi } else { lo + k as f64 * step });
    let samples: Vec<PlotPoint> = grid
        .map(|x| PlotPoint {
            x,
            anchor: fa.evaluate(x).ok(),
            test: ft.as_ref().and_then(|f| f.evaluate(x).ok()),
        })
        .collect();

    let knots = |c: &RdCurve| {
        c.points()
            .iter()
            .map(|p| (p.rate_kbps.log10(), p.quality))
            .collect::<Vec<_>>()
    };

    let (overlap, crossovers) = match test {
        Some(t) => {
            let interval = compute_overlap(anchor, t, Axis::Rate)?;
            let ft = ft.as_ref().expect("fitted together with test");
            let crossings = find_crossovers(&fa, ft, &interval);
            let window = interval
                .has_positive_length()
                .then_some((interval.lo, interval.hi));
            (window, crossings)
        }
        None => (None, Vec::new()),
    };

    Ok(PlotSeries {
        metric: anchor.metric().clone(),
        method,
        axis: "log10_rate_kbps",
        samples,
        anchor_knots: knots(anchor),
        test_knots: test.map(knots).unwrap_or_default(),
        overlap,
        crossovers,
    })
}

/// Diagnostics rendered for humans (the CLI's stderr channel), one line per
/// item, deterministic order.
#[must_use]
pub fn render_diagnostics(report: &DiagnosticsReport) -> String {
    let mut out = String::new();
    for lint in &report.lints {
        let _ = writeln!(out, "{}: {}: {}", lint.severity, lint.code, lint.message);
    }
    out
}
