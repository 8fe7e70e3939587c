//! Curve fitting, evaluation and closed-form integration.
//!
//! Bjøntegaard-style comparisons hinge on turning a handful of measured
//! rate–distortion points into a continuous function that can be integrated
//! over an interval. Two fit backends are provided:
//!
//! * [`FitMethod::CubicFit`] — a single least-squares cubic polynomial over
//!   the whole support, the construction used by the classic VCEG-M33
//!   spreadsheets. With exactly four points it interpolates; with more it
//!   smooths. Prone to oscillation on wiggly data, kept for comparability.
//! * [`FitMethod::PiecewiseCubic`] — a monotonicity-preserving piecewise
//!   cubic Hermite interpolant (PCHIP, Fritsch–Carlson slopes), the
//!   construction adopted by the JVET reporting tools. Interpolates every
//!   knot and never overshoots monotone data.
//!
//! Fitted curves integrate in closed form: the bodies are polynomials per
//! segment, so each segment contributes an exact antiderivative difference.
//! Optional linear tails extend a fit beyond its support for the
//! extrapolation modes; they continue the one-sided endpoint derivative, so
//! the extended curve stays C¹ at the junction.

use serde::Serialize;

use crate::error::{BdError, Result};

/// Which fit backend produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FitMethod {
    /// Least-squares cubic polynomial over the whole support ("cubic").
    #[serde(rename = "cubic")]
    CubicFit,
    /// Monotone piecewise cubic Hermite interpolant ("pchip").
    #[serde(rename = "pchip")]
    PiecewiseCubic,
}

impl FitMethod {
    /// Short lowercase name used by the CLI and reports.
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            FitMethod::CubicFit => "cubic",
            FitMethod::PiecewiseCubic => "pchip",
        }
    }
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which way round the rate–distortion relation was fitted.
///
/// BD-Quality integrates quality as a function of log-rate; BD-Rate needs the
/// inverse, log-rate as a function of quality. The orientation tags a fitted
/// curve with the meaning of its axes; the numerics below are agnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// x = log10(rate in kbps), y = quality in metric units.
    #[serde(rename = "quality-of-log-rate")]
    QualityOfLogRate,
    /// x = quality in metric units, y = log10(rate in kbps).
    #[serde(rename = "log-rate-of-quality")]
    LogRateOfQuality,
}

/// One PCHIP knot: abscissa, ordinate and the chosen tangent slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub x: f64,
    pub y: f64,
    pub slope: f64,
}

/// A linear continuation beyond one end of the fitted body.
///
/// Anchored at the body endpoint; `x_outer` is how far the tail reaches.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LinearTail {
    slope: f64,
    x_outer: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum CurveBody {
    /// `y = c0 + c1 x + c2 x² + c3 x³` on the original abscissa.
    Cubic { coeffs: [f64; 4] },
    /// Hermite segments between consecutive knots.
    Pchip { knots: Vec<Knot> },
}

/// A fitted rate–distortion relation with optional linear tails.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedCurve {
    method: FitMethod,
    orientation: Orientation,
    x_lo: f64,
    x_hi: f64,
    body: CurveBody,
    tail_lo: Option<LinearTail>,
    tail_hi: Option<LinearTail>,
}

/// Fit with the requested backend. See [`fit_cubic`] and [`fit_pchip`].
pub fn fit(method: FitMethod, xs: &[f64], ys: &[f64]) -> Result<FittedCurve> {
    match method {
        FitMethod::CubicFit => fit_cubic(xs, ys),
        FitMethod::PiecewiseCubic => fit_pchip(xs, ys),
    }
}

/// Least-squares cubic fit through `(xs, ys)`.
///
/// Needs at least four points; with exactly four the polynomial interpolates.
/// The normal equations are formed on abscissae shifted by their mean and
/// scaled by their half-range, which keeps the 4×4 system well conditioned
/// even for tightly clustered log-rates; the solved coefficients are then
/// mapped back to the original axis.
pub fn fit_cubic(xs: &[f64], ys: &[f64]) -> Result<FittedCurve> {
    check_abscissae(xs, ys, 4)?;
    let n = xs.len();

    let mean = xs.iter().sum::<f64>() / n as f64;
    let half_range = (xs[n - 1] - xs[0]) / 2.0;
    let u: Vec<f64> = xs.iter().map(|&x| (x - mean) / half_range).collect();

    // Normal equations G a = r for the scaled Vandermonde basis [1, u, u², u³].
    let mut g = [[0.0f64; 4]; 4];
    let mut r = [0.0f64; 4];
    for (ui, &yi) in u.iter().zip(ys) {
        let pow = [1.0, *ui, ui * ui, ui * ui * ui];
        for j in 0..4 {
            r[j] += pow[j] * yi;
            for k in 0..4 {
                g[j][k] += pow[j] * pow[k];
            }
        }
    }
    let a = solve4(&mut g, &mut r)?;

    // Expand  Σ aₖ ((x − m)/s)ᵏ  back into plain powers of x.
    let (b1, b2, b3) = (
        a[1] / half_range,
        a[2] / (half_range * half_range),
        a[3] / (half_range * half_range * half_range),
    );
    let coeffs = [
        a[0] - b1 * mean + b2 * mean * mean - b3 * mean * mean * mean,
        b1 - 2.0 * b2 * mean + 3.0 * b3 * mean * mean,
        b2 - 3.0 * b3 * mean,
        b3,
    ];

    Ok(FittedCurve {
        method: FitMethod::CubicFit,
        orientation: Orientation::QualityOfLogRate,
        x_lo: xs[0],
        x_hi: xs[n - 1],
        body: CurveBody::Cubic { coeffs },
        tail_lo: None,
        tail_hi: None,
    })
}

/// Gaussian elimination with partial pivoting on a 4×4 system.
fn solve4(g: &mut [[f64; 4]; 4], r: &mut [f64; 4]) -> Result<[f64; 4]> {
    let scale = g
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..4 {
        let pivot_row = (col..4)
            .max_by(|&i, &j| g[i][col].abs().total_cmp(&g[j][col].abs()))
            .unwrap();
        if g[pivot_row][col].abs() < 1e-12 * scale.max(1.0) {
            return Err(BdError::SingularSystem);
        }
        g.swap(col, pivot_row);
        r.swap(col, pivot_row);
        let lead = g[col];
        for row in col + 1..4 {
            let f = g[row][col] / lead[col];
            for (dst, src) in g[row][col..].iter_mut().zip(&lead[col..]) {
                *dst -= f * src;
            }
            r[row] -= f * r[col];
        }
    }
    let mut a = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut acc = r[row];
        for k in row + 1..4 {
            acc -= g[row][k] * a[k];
        }
        a[row] = acc / g[row][row];
    }
    Ok(a)
}

/// Monotone piecewise cubic Hermite fit through `(xs, ys)` (PCHIP).
///
/// Knot slopes follow Fritsch–Carlson: interior slopes are a weighted
/// harmonic mean of the adjacent secants (zero where the secants change
/// sign, so local extrema stay extrema), endpoints use a one-sided
/// three-point formula clamped to preserve local monotonicity. Two points
/// degrade gracefully to the straight line through them.
pub fn fit_pchip(xs: &[f64], ys: &[f64]) -> Result<FittedCurve> {
    check_abscissae(xs, ys, 2)?;
    let n = xs.len();

    let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

    let mut slopes = vec![0.0f64; n];
    if n == 2 {
        slopes[0] = delta[0];
        slopes[1] = delta[0];
    } else {
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                slopes[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        slopes[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
        slopes[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    let knots = xs
        .iter()
        .zip(ys)
        .zip(&slopes)
        .map(|((&x, &y), &slope)| Knot { x, y, slope })
        .collect();

    Ok(FittedCurve {
        method: FitMethod::PiecewiseCubic,
        orientation: Orientation::QualityOfLogRate,
        x_lo: xs[0],
        x_hi: xs[n - 1],
        body: CurveBody::Pchip { knots },
        tail_lo: None,
        tail_hi: None,
    })
}

/// One-sided three-point endpoint slope with the Fritsch–Carlson clamps.
///
/// `h0`/`delta0` belong to the boundary interval, `h1`/`delta1` to its
/// neighbour.
fn edge_slope(h0: f64, h1: f64, delta0: f64, delta1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * delta0 - h0 * delta1) / (h0 + h1);
    if d * delta0 <= 0.0 {
        // Pointing against the boundary secant would manufacture an extremum.
        0.0
    } else if delta0 * delta1 < 0.0 && d.abs() > 3.0 * delta0.abs() {
        3.0 * delta0
    } else {
        d
    }
}

fn check_abscissae(xs: &[f64], ys: &[f64], needed: usize) -> Result<()> {
    if xs.len() < needed || ys.len() < needed {
        return Err(BdError::TooFewPoints {
            needed,
            got: xs.len().min(ys.len()),
        });
    }
    assert_eq!(
        xs.len(),
        ys.len(),
        "abscissae and ordinates must pair up: {} vs {}",
        xs.len(),
        ys.len()
    );
    for i in 1..xs.len() {
        if xs[i] <= xs[i - 1] {
            return Err(BdError::UnsortedRates {
                label: String::from("(fit input)"),
                index: i,
            });
        }
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(BdError::NonFiniteQuality {
            label: String::from("(fit input)"),
            index: 0,
            value: f64::NAN,
        });
    }
    Ok(())
}

// Hermite basis antiderivatives on the unit parameter; H(1) − H(0) gives the
// familiar (1/2, 1/12, 1/2, −1/12) segment weights.
fn hermite_value(t: f64, y0: f64, y1: f64, hm0: f64, hm1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * hm0 + h01 * y1 + h11 * hm1
}

fn hermite_antiderivative(t: f64, y0: f64, y1: f64, hm0: f64, hm1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let cap_h00 = 0.5 * t4 - t3 + t;
    let cap_h10 = 0.25 * t4 - 2.0 / 3.0 * t3 + 0.5 * t2;
    let cap_h01 = -0.5 * t4 + t3;
    let cap_h11 = 0.25 * t4 - t3 / 3.0;
    cap_h00 * y0 + cap_h10 * hm0 + cap_h01 * y1 + cap_h11 * hm1
}

impl FittedCurve {
    /// The backend that produced this curve.
    #[must_use]
    pub fn method(&self) -> FitMethod {
        self.method
    }

    /// What the axes mean. Defaults to quality-of-log-rate after fitting.
    #[must_use]
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Same curve, relabelled. The numbers do not change.
    #[must_use]
    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// Support of the fitted body, excluding tails.
    #[must_use]
    pub fn body_domain(&self) -> (f64, f64) {
        (self.x_lo, self.x_hi)
    }

    /// Full evaluable interval, including any attached tails.
    #[must_use]
    pub fn domain(&self) -> (f64, f64) {
        (
            self.tail_lo.map_or(self.x_lo, |t| t.x_outer),
            self.tail_hi.map_or(self.x_hi, |t| t.x_outer),
        )
    }

    /// PCHIP knots, if this is a piecewise fit (used for plot markers).
    #[must_use]
    pub fn knots(&self) -> Option<&[Knot]> {
        match &self.body {
            CurveBody::Pchip { knots } => Some(knots),
            CurveBody::Cubic { .. } => None,
        }
    }

    /// Polynomial coefficients `[c0, c1, c2, c3]`, if this is a cubic fit.
    #[must_use]
    pub fn coefficients(&self) -> Option<[f64; 4]> {
        match &self.body {
            CurveBody::Cubic { coeffs } => Some(*coeffs),
            CurveBody::Pchip { .. } => None,
        }
    }

    /// Evaluate the curve (body or tail) at `x`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(BdError::OutOfDomain { x, lo, hi });
        }
        if x < self.x_lo {
            let tail = self.tail_lo.expect("x below body implies a low tail");
            return Ok(self.body_value_at(self.x_lo) + tail.slope * (x - self.x_lo));
        }
        if x > self.x_hi {
            let tail = self.tail_hi.expect("x above body implies a high tail");
            return Ok(self.body_value_at(self.x_hi) + tail.slope * (x - self.x_hi));
        }
        Ok(self.body_value_at(x))
    }

    fn body_value_at(&self, x: f64) -> f64 {
        match &self.body {
            CurveBody::Cubic { coeffs: c } => ((c[3] * x + c[2]) * x + c[1]) * x + c[0],
            CurveBody::Pchip { knots } => {
                let i = self.segment_index(knots, x);
                let (k0, k1) = (&knots[i], &knots[i + 1]);
                let h = k1.x - k0.x;
                let t = (x - k0.x) / h;
                hermite_value(t, k0.y, k1.y, h * k0.slope, h * k1.slope)
            }
        }
    }

    /// Index of the segment containing `x` (clamped to valid segments).
    fn segment_index(&self, knots: &[Knot], x: f64) -> usize {
        let n = knots.len();
        knots[..n - 1].partition_point(|k| k.x <= x).saturating_sub(1)
    }

    /// One-sided derivative of the body at its endpoints.
    fn body_derivative_at_end(&self, high_end: bool) -> f64 {
        match &self.body {
            CurveBody::Cubic { coeffs: c } => {
                let x = if high_end { self.x_hi } else { self.x_lo };
                (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1]
            }
            CurveBody::Pchip { knots } => {
                if high_end {
                    knots[knots.len() - 1].slope
                } else {
                    knots[0].slope
                }
            }
        }
    }

    /// Integrate the curve over `[lo, hi]` in closed form.
    ///
    /// The interval may span tails and body; each piece contributes an exact
    /// antiderivative difference (quartic for cubic segments, quadratic for
    /// the linear tails), so the only error is floating-point rounding.
    pub fn integrate(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo > hi {
            return Err(BdError::InvertedInterval { lo, hi });
        }
        let (dom_lo, dom_hi) = self.domain();
        if lo < dom_lo || hi > dom_hi {
            let x = if lo < dom_lo { lo } else { hi };
            return Err(BdError::OutOfDomain {
                x,
                lo: dom_lo,
                hi: dom_hi,
            });
        }

        let mut total = 0.0;
        if lo < self.x_lo {
            let tail = self.tail_lo.expect("bound below body implies a low tail");
            let y_end = self.body_value_at(self.x_lo);
            total += linear_integral(self.x_lo, y_end, tail.slope, lo, hi.min(self.x_lo));
        }
        let (body_lo, body_hi) = (lo.max(self.x_lo), hi.min(self.x_hi));
        if body_lo < body_hi {
            total += self.body_integral(body_lo, body_hi);
        }
        if hi > self.x_hi {
            let tail = self.tail_hi.expect("bound above body implies a high tail");
            let y_end = self.body_value_at(self.x_hi);
            total += linear_integral(self.x_hi, y_end, tail.slope, lo.max(self.x_hi), hi);
        }
        Ok(total)
    }

    fn body_integral(&self, lo: f64, hi: f64) -> f64 {
        match &self.body {
            CurveBody::Cubic { coeffs: c } => {
                let f = |x: f64| (((c[3] / 4.0 * x + c[2] / 3.0) * x + c[1] / 2.0) * x + c[0]) * x;
                f(hi) - f(lo)
            }
            CurveBody::Pchip { knots } => {
                let mut acc = 0.0;
                let first = self.segment_index(knots, lo);
                for i in first..knots.len() - 1 {
                    let (k0, k1) = (&knots[i], &knots[i + 1]);
                    if k0.x >= hi {
                        break;
                    }
                    let h = k1.x - k0.x;
                    let a = lo.max(k0.x);
                    let b = hi.min(k1.x);
                    if b <= a {
                        continue;
                    }
                    let (t0, t1) = ((a - k0.x) / h, (b - k0.x) / h);
                    let (hm0, hm1) = (h * k0.slope, h * k1.slope);
                    acc += h
                        * (hermite_antiderivative(t1, k0.y, k1.y, hm0, hm1)
                            - hermite_antiderivative(t0, k0.y, k1.y, hm0, hm1));
                }
                acc
            }
        }
    }

    /// Extend the curve with linear tails towards the given targets.
    ///
    /// Each tail continues the one-sided endpoint derivative of the *body*,
    /// so the junction is C¹. Targets must lie strictly outside the current
    /// domain (tails included); extending an existing tail further is fine.
    pub fn attach_linear_tails(
        &self,
        extend_lo: Option<f64>,
        extend_hi: Option<f64>,
    ) -> Result<FittedCurve> {
        let mut out = self.clone();
        let (dom_lo, dom_hi) = self.domain();
        if let Some(target) = extend_lo {
            if target >= dom_lo {
                return Err(BdError::TargetInsideDomain {
                    target,
                    lo: dom_lo,
                    hi: dom_hi,
                });
            }
            out.tail_lo = Some(LinearTail {
                slope: self.body_derivative_at_end(false),
                x_outer: target,
            });
        }
        if let Some(target) = extend_hi {
            if target <= dom_hi {
                return Err(BdError::TargetInsideDomain {
                    target,
                    lo: dom_lo,
                    hi: dom_hi,
                });
            }
            out.tail_hi = Some(LinearTail {
                slope: self.body_derivative_at_end(true),
                x_outer: target,
            });
        }
        Ok(out)
    }

    /// Whether any tail is attached (used by reporting).
    #[must_use]
    pub fn has_tails(&self) -> (bool, bool) {
        (self.tail_lo.is_some(), self.tail_hi.is_some())
    }
}

/// Exact integral of the tail line anchored at `(x_end, y_end)` over `[a, b]`.
fn linear_integral(x_end: f64, y_end: f64, slope: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let f = |x: f64| y_end * x + slope * (x - x_end) * (x - x_end) / 2.0;
    f(b) - f(a)
}

/// Helper for attaching tails by target interval (used by the BD modes).
pub fn attach_linear_tails(
    curve: &FittedCurve,
    extend_lo: Option<f64>,
    extend_hi: Option<f64>,
) -> Result<FittedCurve> {
    curve.attach_linear_tails(extend_lo, extend_hi)
}
