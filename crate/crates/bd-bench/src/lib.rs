//! Benchmark-only crate: shared input builders for the criterion benches.

use bd_core::{validate_curve, MetricKind, RdCurve, RdPoint};

/// A smooth, strictly monotone synthetic rate–quality curve with `n` points
/// log-spaced between 100 kbps and 20 Mbps. `lift` shifts quality up and
/// `discount` scales the rate axis, so two calls give a plausible
/// anchor/test pair.
#[must_use]
pub fn synthetic_curve(label: &str, n: usize, lift: f64, discount: f64) -> RdCurve {
    let points = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let log_rate = 2.0 + t * (4.3 - 2.0);
            // Saturating logistic-ish quality response in log-rate.
            let quality = 30.0 + lift + 10.0 * (1.0 - (-1.4 * (log_rate - 1.8)).exp());
            RdPoint {
                rate_kbps: discount * 10f64.powf(log_rate),
                quality,
            }
        })
        .collect();
    validate_curve(label, MetricKind::Psnr, points, false).expect("synthetic curve is valid")
}
