//! Bjøntegaard Delta computation for codec comparisons.
//!
//! Given two rate–distortion curves — bitrate/quality operating points for
//! an anchor and a test encoder — this crate fits each curve, integrates the
//! gap between the fits, and reports:
//!
//! * **BD-Rate**: the average bitrate change at equal quality, in percent.
//!   `-30%` means the test encoder needs 30% less rate for the same scores.
//! * **BD-Quality**: the average metric gain at equal bitrate (BD-PSNR when
//!   the metric is PSNR, and likewise for SSIM, VMAF, MOS).
//!
//! Two fit backends are provided: the classic third-order polynomial in
//! log-rate (the VCEG-M33 procedure) and the monotone piecewise cubic
//! (PCHIP) used by the JVET reporting tools, which cannot oscillate between
//! knots. Both are integrated in closed form. On top of the headline
//! numbers sit overlap handling (sentinels and linear extrapolation modes),
//! a pdf-weighted quality average for modelling real viewer populations,
//! cross-curve diagnostics (crossovers, saturation, poor overlap), and
//! deterministic report emission.
//!
//! ```
//! use bd_core::{bd_rate, parse_csv, FitMethod, MetricKind};
//!
//! let table = parse_csv(
//!     "sequence,codec,metric,rate_kbps,quality\n\
//!      clip,anchor,PSNR,100,30.0\nclip,anchor,PSNR,200,33.0\n\
//!      clip,anchor,PSNR,400,35.0\nclip,anchor,PSNR,800,36.0\n\
//!      clip,test,PSNR,90,30.5\nclip,test,PSNR,190,33.6\n\
//!      clip,test,PSNR,380,35.4\nclip,test,PSNR,760,36.6\n",
//! )?;
//! let anchor = table.curve("clip", "anchor", &MetricKind::Psnr, false)?;
//! let test = table.curve("clip", "test", &MetricKind::Psnr, false)?;
//! let result = bd_rate(&anchor, &test, FitMethod::PiecewiseCubic)?;
//! assert!(result.value < 0.0); // test curve is cheaper
//! # Ok::<(), bd_core::BdError>(())
//! ```

pub mod engine;
pub mod error;
pub mod formats;
pub mod interp;
pub mod model;

pub use engine::{
    aggregate, bd_quality, bd_quality_weighted, bd_quality_weighted_extended, bd_rate,
    bd_rate_with_mode, diagnose_pair, AggregateSummary, BdKind, BdMode, BdResult, Extrapolated,
    PdfBin, RatePdf,
};
pub use error::{BdError, Result};
pub use interp::{
    attach_linear_tails, fit, fit_cubic, fit_pchip, FitMethod, FittedCurve, Knot, Orientation,
};
pub use formats::{
    display_value, emit_report, parse_csv, parse_csv_bytes, parse_pdf_csv, parse_pdf_csv_bytes,
    plot_series, render_diagnostics, to_csv, AggregateEntry, MeasurementTable, PlotPoint,
    PlotSeries, ReportDocument, ReportEntry, ReportFormat, MEASUREMENT_HEADER, PDF_HEADER,
};
pub use model::{
    compute_overlap, find_crossovers, find_tangential_touches, metric_range_divergence,
    overlap_fraction, run_lints, run_lints_with, validate_curve, Axis, DiagnosticsReport, Lint,
    LintCode, LintConfig, MetricKind, OverlapInterval, RdCurve, RdPoint, Severity,
};
