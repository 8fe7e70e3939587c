//! `bd-delta`: Bjøntegaard Delta computation from measurement CSV files.
//!
//! Four workflows:
//!
//! * `compute`  — BD-Rate and BD-Quality for one anchor/test pair.
//! * `diagnose` — curve and pair diagnostics only, no delta values.
//! * `batch`    — every sequence in the file, plus cross-sequence averages.
//! * `plotdata` — dense fitted-curve samples for external plotting.
//!
//! The report goes to stdout, diagnostics go to stderr, and exit codes are
//! part of the contract: 0 success, 1 hard error, 2 diagnostics at error
//! severity (warnings are promoted when `--strict` is given), 64 usage
//! error. `BD_DELTA_NO_COLOR=1` (or a non-terminal stderr) disables ANSI
//! colors.

use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bd_core::{
    aggregate, bd_quality, bd_quality_weighted, bd_rate_with_mode, diagnose_pair, display_value,
    emit_report, parse_csv_bytes, parse_pdf_csv_bytes, plot_series, run_lints_with,
    AggregateEntry, BdError, BdMode, DiagnosticsReport, FitMethod, LintConfig, MeasurementTable,
    MetricKind, RatePdf, RdCurve, ReportDocument, ReportEntry, ReportFormat, Severity,
};

#[derive(Parser)]
#[command(
    name = "bd-delta",
    version,
    about = "Bjøntegaard Delta (BD-Rate / BD-Quality) between rate-distortion curves",
    after_help = "Measurement CSV columns: sequence,codec,metric,rate_kbps,quality\n\
                  Pdf CSV columns:         rate_lo_kbps,rate_hi_kbps,mass\n\
                  Exit codes: 0 ok, 1 error, 2 strict diagnostics, 64 usage."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BD-Rate and BD-Quality for one anchor/test pair.
    Compute(ComputeArgs),
    /// Curve and pair diagnostics without computing deltas.
    Diagnose(DiagnoseArgs),
    /// All sequences in the input, with cross-sequence averages.
    Batch(BatchArgs),
    /// Fitted-curve samples for external plotting (JSON only).
    Plotdata(PlotArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Measurement CSV file.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Codec label of the anchor (reference) curve.
    #[arg(long)]
    anchor: String,
    /// Codec label of the test curve.
    #[arg(long)]
    test: String,
    /// Metric to process; repeatable. Default: every metric measured for
    /// both codecs.
    #[arg(long)]
    metric: Vec<String>,
    /// Curve fitting method.
    #[arg(long, value_enum, default_value_t = MethodArg::Pchip)]
    method: MethodArg,
    /// Tolerate non-monotone quality: record violations as diagnostics
    /// instead of refusing the curve.
    #[arg(long)]
    permissive: bool,
    /// Exit 2 when any warning-or-worse diagnostic fires.
    #[arg(long)]
    strict: bool,
    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// LOW_OVERLAP fires below this overlap fraction.
    #[arg(long, value_name = "FRACTION", default_value_t = 0.5)]
    lint_overlap_threshold: f64,
    /// METRIC_RANGE_DIVERGENCE fires above this range distance.
    #[arg(long, value_name = "FRACTION", default_value_t = 0.25)]
    lint_divergence_threshold: f64,
    /// SSIM_SATURATION fires when an SSIM curve spans less than this.
    #[arg(long, value_name = "SPAN", default_value_t = 0.01)]
    lint_saturation_span: f64,
    /// FEW_POINTS fires below this point count.
    #[arg(long, value_name = "N", default_value_t = 4)]
    lint_min_points: usize,
}

impl CommonArgs {
    fn lint_config(&self) -> LintConfig {
        LintConfig {
            low_overlap_threshold: self.lint_overlap_threshold,
            range_divergence_threshold: self.lint_divergence_threshold,
            ssim_saturation_span: self.lint_saturation_span,
            few_points_min: self.lint_min_points,
        }
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sequence to compare (default: the only sequence in the file).
    #[arg(long)]
    sequence: Option<String>,
    /// Overlap-failure policy for BD-Rate.
    #[arg(long, value_enum, default_value_t = ModeArg::None)]
    mode: ModeArg,
    /// Bitrate histogram CSV; adds a pdf-weighted BD-Quality per metric.
    #[arg(long, value_name = "FILE")]
    pdf: Option<PathBuf>,
    /// Emit BD-Rate only. By default both deltas are reported together so
    /// a rate saving is never quoted without its quality context.
    #[arg(long, conflicts_with = "quality_only")]
    rate_only: bool,
    /// Emit BD-Quality only.
    #[arg(long)]
    quality_only: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sequence to diagnose (default: the only sequence in the file).
    #[arg(long)]
    sequence: Option<String>,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Overlap-failure policy for BD-Rate.
    #[arg(long, value_enum, default_value_t = ModeArg::None)]
    mode: ModeArg,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sequence to sample (default: the only sequence in the file).
    #[arg(long)]
    sequence: Option<String>,
    /// Number of samples across the union of the fitted domains.
    #[arg(long, default_value_t = 256)]
    samples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Third-order polynomial least squares in log-rate.
    Cubic,
    /// Monotone piecewise cubic (PCHIP).
    Pchip,
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cubic => FitMethod::CubicFit,
            MethodArg::Pchip => FitMethod::PiecewiseCubic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    None,
    Low,
    High,
    Both,
    LowAlways,
    HighAlways,
    BothAlways,
}

impl From<ModeArg> for BdMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::None => BdMode::None,
            ModeArg::Low => BdMode::Low,
            ModeArg::High => BdMode::High,
            ModeArg::Both => BdMode::Both,
            ModeArg::LowAlways => BdMode::LowAlways,
            ModeArg::HighAlways => BdMode::HighAlways,
            ModeArg::BothAlways => BdMode::BothAlways,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    #[value(alias = "markdown")]
    Md,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Md => ReportFormat::Markdown,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

const EXIT_USAGE: u8 = 64;
const EXIT_LINTS: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            let stderr = StderrStyle::detect();
            eprintln!("{}error{}: {err:#}", stderr.error, stderr.reset);
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// ANSI styling for the diagnostics stream, honoring `BD_DELTA_NO_COLOR`
/// and non-terminal stderr.
#[derive(Clone, Copy)]
struct StderrStyle {
    error: &'static str,
    warn: &'static str,
    info: &'static str,
    reset: &'static str,
}

impl StderrStyle {
    fn detect() -> Self {
        let colored = std::env::var_os("BD_DELTA_NO_COLOR").is_none()
            && std::io::stderr().is_terminal();
        if colored {
            StderrStyle {
                error: "\x1b[31m",
                warn: "\x1b[33m",
                info: "\x1b[36m",
                reset: "\x1b[0m",
            }
        } else {
            StderrStyle {
                error: "",
                warn: "",
                info: "",
                reset: "",
            }
        }
    }

    fn for_severity(&self, severity: Severity) -> &'static str {
        match severity {
            Severity::Error => self.error,
            Severity::Warn => self.warn,
            Severity::Info => self.info,
        }
    }
}

/// Print every lint of a merged diagnostics report to stderr and fold its
/// worst severity into the exit decision.
fn emit_diagnostics(
    label: &str,
    report: &DiagnosticsReport,
    style: StderrStyle,
    worst: &mut Option<Severity>,
) {
    for lint in &report.lints {
        let color = style.for_severity(lint.severity);
        eprintln!(
            "{color}{}{}: {label}: {}: {}",
            lint.severity, style.reset, lint.code, lint.message
        );
    }
    *worst = (*worst).max(report.max_severity());
}

fn exit_for(worst: Option<Severity>, strict: bool) -> ExitCode {
    match worst {
        Some(Severity::Error) => ExitCode::from(EXIT_LINTS),
        Some(Severity::Warn) if strict => ExitCode::from(EXIT_LINTS),
        _ => ExitCode::SUCCESS,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Compute(args) => compute(args),
        Command::Diagnose(args) => diagnose(args),
        Command::Batch(args) => batch(args),
        Command::Plotdata(args) => plotdata(args),
    }
}

fn load_table(path: &Path) -> Result<MeasurementTable> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_csv_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn load_pdf(path: &Path, style: StderrStyle) -> Result<RatePdf> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let pdf =
        parse_pdf_csv_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    if pdf.is_normalized() {
        Ok(pdf)
    } else {
        eprintln!(
            "{}info{}: pdf masses in {} sum to {}; normalizing",
            style.info,
            style.reset,
            path.display(),
            pdf.raw_mass_sum()
        );
        Ok(pdf.normalize())
    }
}

/// CLI-level usage validation shared by every subcommand.
fn check_labels(common: &CommonArgs) -> Result<()> {
    if common.anchor == common.test {
        // A usage error, not a computation error; main maps it to 64 below.
        bail!(UsageError(format!(
            "--anchor and --test must name different codecs (both were {:?})",
            common.anchor
        )));
    }
    Ok(())
}

/// Marker for errors that should exit with the usage code.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Resolve the working sequence: the flag if given, otherwise the single
/// sequence present in the file.
fn pick_sequence(table: &MeasurementTable, flag: Option<String>) -> Result<String> {
    match flag {
        Some(s) => Ok(s),
        None => {
            let all: Vec<&str> = table.sequences().collect();
            if let [only] = all[..] {
                Ok(only.to_string())
            } else {
                Err(anyhow!(UsageError(format!(
                    "input has {} sequences ({}); pick one with --sequence",
                    all.len(),
                    all.join(", ")
                ))))
            }
        }
    }
}

/// Metrics to process: the explicit flags, or every metric measured for
/// both codecs of the sequence.
fn pick_metrics(
    table: &MeasurementTable,
    sequence: &str,
    common: &CommonArgs,
) -> Result<Vec<MetricKind>> {
    if !common.metric.is_empty() {
        return Ok(common.metric.iter().map(|m| MetricKind::parse(m)).collect());
    }
    let anchor = table.metrics(sequence, &common.anchor);
    let test = table.metrics(sequence, &common.test);
    let shared: Vec<MetricKind> = anchor.into_iter().filter(|m| test.contains(m)).collect();
    if shared.is_empty() {
        bail!(
            "no metric is measured for both {:?} and {:?} in sequence {sequence:?}",
            common.anchor,
            common.test
        );
    }
    Ok(shared)
}

fn curve_pair(
    table: &MeasurementTable,
    sequence: &str,
    common: &CommonArgs,
    metric: &MetricKind,
) -> Result<(RdCurve, RdCurve)> {
    let anchor = table
        .curve(sequence, &common.anchor, metric, common.permissive)
        .with_context(|| format!("anchor curve {sequence}/{}", common.anchor))?;
    let test = table
        .curve(sequence, &common.test, metric, common.permissive)
        .with_context(|| format!("test curve {sequence}/{}", common.test))?;
    Ok((anchor, test))
}

/// Compute the deltas for one pair, append report entries, and surface the
/// merged diagnostics. Returns the entries added.
#[allow(clippy::too_many_arguments)]
fn pair_entries(
    sequence: &str,
    common: &CommonArgs,
    anchor: &RdCurve,
    test: &RdCurve,
    metric: &MetricKind,
    mode: BdMode,
    pdf: Option<(&str, &RatePdf)>,
    rate_only: bool,
    quality_only: bool,
    style: StderrStyle,
    worst: &mut Option<Severity>,
) -> Result<Vec<ReportEntry>> {
    let method: FitMethod = common.method.into();
    let mut results = Vec::new();
    let mut pdf_names = Vec::new();

    if !quality_only {
        match bd_rate_with_mode(anchor, test, method, mode) {
            Ok(r) => {
                results.push(r);
                pdf_names.push(None);
            }
            // With --permissive a non-invertible curve downgrades BD-Rate
            // to a warning so BD-Quality can still be reported.
            Err(BdError::NonInvertibleCurve { label, index }) if common.permissive && !rate_only => {
                eprintln!(
                    "{}warn{}: {sequence}/{}: skipping BD-Rate: quality is not strictly \
                     increasing on {label} (point {index})",
                    style.warn, style.reset, metric
                );
            }
            Err(e) => return Err(e).context("BD-Rate"),
        }
    }
    if !rate_only {
        let q = bd_quality(anchor, test, method).context("BD-Quality")?;
        results.push(q);
        pdf_names.push(None);
        if let Some((name, pdf)) = pdf {
            let w = bd_quality_weighted(anchor, test, method, pdf)
                .context("pdf-weighted BD-Quality")?;
            results.push(w);
            pdf_names.push(Some(name.to_string()));
        }
    }

    let merged = run_lints_with(anchor, test, &results, &common.lint_config())?;
    emit_diagnostics(&format!("{sequence}/{metric}"), &merged, style, worst);

    Ok(results
        .into_iter()
        .zip(pdf_names)
        .map(|(result, weighted_pdf)| ReportEntry {
            sequence: sequence.to_string(),
            anchor: common.anchor.clone(),
            test: common.test.clone(),
            metric: metric.clone(),
            display: display_value(result.kind, result.value),
            weighted_pdf,
            result,
        })
        .collect())
}

fn compute(args: ComputeArgs) -> Result<ExitCode> {
    let style = StderrStyle::detect();
    check_labels(&args.common)?;
    let table = load_table(&args.common.input)?;
    let sequence = pick_sequence(&table, args.sequence)?;
    let metrics = pick_metrics(&table, &sequence, &args.common)?;
    let pdf = args
        .pdf
        .as_deref()
        .map(|p| -> Result<(String, RatePdf)> {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            Ok((name, load_pdf(p, style)?))
        })
        .transpose()?;

    let mut doc = ReportDocument::new();
    let mut worst = None;
    for metric in &metrics {
        let (anchor, test) = curve_pair(&table, &sequence, &args.common, metric)?;
        doc.results.extend(pair_entries(
            &sequence,
            &args.common,
            &anchor,
            &test,
            metric,
            args.mode.into(),
            pdf.as_ref().map(|(n, p)| (n.as_str(), p)),
            args.rate_only,
            args.quality_only,
            style,
            &mut worst,
        )?);
    }

    print!("{}", emit_report(&doc, args.common.format.into()));
    Ok(exit_for(worst, args.common.strict))
}

fn batch(args: BatchArgs) -> Result<ExitCode> {
    let style = StderrStyle::detect();
    check_labels(&args.common)?;
    let table = load_table(&args.common.input)?;

    let mut doc = ReportDocument::new();
    let mut worst = None;
    let sequences: Vec<String> = table.sequences().map(str::to_string).collect();
    for sequence in &sequences {
        let metrics = match pick_metrics(&table, sequence, &args.common) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("{}warn{}: {sequence}: skipped: {e:#}", style.warn, style.reset);
                worst = worst.max(Some(Severity::Warn));
                continue;
            }
        };
        for metric in &metrics {
            let outcome = curve_pair(&table, sequence, &args.common, metric).and_then(|(a, t)| {
                pair_entries(
                    sequence,
                    &args.common,
                    &a,
                    &t,
                    metric,
                    args.mode.into(),
                    None,
                    false,
                    false,
                    style,
                    &mut worst,
                )
            });
            match outcome {
                Ok(entries) => doc.results.extend(entries),
                // One bad pair should not sink the whole batch.
                Err(e) => {
                    eprintln!(
                        "{}warn{}: {sequence}/{metric}: skipped: {e:#}",
                        style.warn, style.reset
                    );
                    worst = worst.max(Some(Severity::Warn));
                }
            }
        }
    }
    if doc.results.is_empty() {
        bail!("no computable pairs in {}", args.common.input.display());
    }

    // Cross-sequence averages per (metric, kind), in report order.
    let mut groups: Vec<(MetricKind, bd_core::BdKind)> = doc
        .results
        .iter()
        .map(|e| (e.metric.clone(), e.result.kind))
        .collect();
    groups.sort();
    groups.dedup();
    for (metric, kind) in groups {
        let values: Vec<bd_core::BdResult> = doc
            .results
            .iter()
            .filter(|e| e.metric == metric && e.result.kind == kind && e.weighted_pdf.is_none())
            .map(|e| e.result.clone())
            .collect();
        if values.is_empty() {
            continue;
        }
        let summary = aggregate(&values).context("aggregating batch results")?;
        doc.aggregates.push(AggregateEntry {
            anchor: args.common.anchor.clone(),
            test: args.common.test.clone(),
            metric,
            kind,
            method: args.common.method.into(),
            mode: args.mode.into(),
            summary,
        });
    }

    print!("{}", emit_report(&doc, args.common.format.into()));
    Ok(exit_for(worst, args.common.strict))
}

/// Diagnostics-only document, one entry per metric.
#[derive(serde::Serialize)]
struct DiagnosticsDocument {
    bd_report_version: u32,
    sequence: String,
    anchor: String,
    test: String,
    diagnostics: Vec<DiagnosticsEntry>,
}

#[derive(serde::Serialize)]
struct DiagnosticsEntry {
    metric: MetricKind,
    report: DiagnosticsReport,
}

fn diagnose(args: DiagnoseArgs) -> Result<ExitCode> {
    let style = StderrStyle::detect();
    check_labels(&args.common)?;
    let table = load_table(&args.common.input)?;
    let sequence = pick_sequence(&table, args.sequence)?;
    let metrics = pick_metrics(&table, &sequence, &args.common)?;
    let cfg = args.common.lint_config();

    let mut entries = Vec::new();
    let mut worst = None;
    for metric in &metrics {
        // Diagnosis never refuses non-monotone input; that is one of the
        // things it exists to report.
        let anchor = table
            .curve(&sequence, &args.common.anchor, metric, true)
            .with_context(|| format!("anchor curve {sequence}/{}", args.common.anchor))?;
        let test = table
            .curve(&sequence, &args.common.test, metric, true)
            .with_context(|| format!("test curve {sequence}/{}", args.common.test))?;
        let report = diagnose_pair(&anchor, &test, args.common.method.into(), &cfg)?;
        emit_diagnostics(&format!("{sequence}/{metric}"), &report, style, &mut worst);
        entries.push(DiagnosticsEntry {
            metric: metric.clone(),
            report,
        });
    }

    let doc = DiagnosticsDocument {
        bd_report_version: ReportDocument::VERSION,
        sequence,
        anchor: args.common.anchor.clone(),
        test: args.common.test.clone(),
        diagnostics: entries,
    };
    match args.common.format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(&doc).expect("diagnostics serialize");
            s.push('\n');
            print!("{s}");
        }
        FormatArg::Md => print!("{}", diagnostics_markdown(&doc)),
        FormatArg::Csv => print!("{}", diagnostics_csv(&doc)),
    }
    Ok(exit_for(worst, args.common.strict))
}

fn diagnostics_markdown(doc: &DiagnosticsDocument) -> String {
    use std::fmt::Write as _;
    let mut out = format!(
        "# Diagnostics: {} vs {} ({})\n\n| metric | severity | code | message |\n|---|---|---|---|\n",
        doc.test, doc.anchor, doc.sequence
    );
    for e in &doc.diagnostics {
        for lint in &e.report.lints {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                e.metric, lint.severity, lint.code, lint.message
            );
        }
    }
    out
}

fn diagnostics_csv(doc: &DiagnosticsDocument) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("sequence,anchor,test,metric,severity,code,message\n");
    for e in &doc.diagnostics {
        for lint in &e.report.lints {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                doc.sequence,
                doc.anchor,
                doc.test,
                e.metric,
                lint.severity,
                lint.code,
                lint.message.replace(',', ";")
            );
        }
    }
    out
}

fn plotdata(args: PlotArgs) -> Result<ExitCode> {
    check_labels(&args.common)?;
    if !matches!(args.common.format, FormatArg::Json) {
        bail!(UsageError("plotdata only emits JSON".to_string()));
    }
    let table = load_table(&args.common.input)?;
    let sequence = pick_sequence(&table, args.sequence)?;
    let metrics = pick_metrics(&table, &sequence, &args.common)?;

    #[derive(serde::Serialize)]
    struct PlotDocument {
        bd_report_version: u32,
        sequence: String,
        anchor: String,
        test: String,
        series: Vec<bd_core::PlotSeries>,
    }

    let mut series = Vec::new();
    for metric in &metrics {
        let (anchor, test) = curve_pair(&table, &sequence, &args.common, metric)?;
        series.push(plot_series(
            &anchor,
            Some(&test),
            args.common.method.into(),
            args.samples,
        )?);
    }
    let doc = PlotDocument {
        bd_report_version: ReportDocument::VERSION,
        sequence,
        anchor: args.common.anchor.clone(),
        test: args.common.test.clone(),
        series,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plot data serializes");
    s.push('\n');
    print!("{s}");
    Ok(ExitCode::SUCCESS)
}
