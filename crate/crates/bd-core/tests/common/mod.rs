//! Shared helpers for the integration suites: independent numeric oracles
//! and seeded random curve generators.
//!
//! The oracles deliberately avoid the code paths under test: quadrature by
//! brute-force composite Simpson instead of closed-form antiderivatives,
//! and least-squares by coordinate descent instead of the normal equations.

#![allow(dead_code)] // each test target compiles its own copy and uses a subset

use bd_core::{validate_curve, MetricKind, RdCurve, RdPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for reproducible failures.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n+1` uniformly spaced samples of `[lo, hi]` with exact endpoints (the
/// naive `lo + k·h` form can overshoot `hi` by an ulp and fall outside a
/// fitted curve's domain).
pub fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| {
        if k == n {
            hi
        } else {
            lo + (hi - lo) * k as f64 / n as f64
        }
    })
}

/// Plain composite Simpson over `panels` equal panels (2·panels+1 samples).
pub fn composite_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Residual 2-norm of the best cubic least-squares fit, found by exact
/// coordinate descent on a shifted/scaled basis. The objective is a convex
/// quadratic, so this converges to the same minimum as any correct solver.
pub fn cubic_residual_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    let mid = 0.5 * (xs[0] + xs[xs.len() - 1]);
    let span = xs
        .iter()
        .map(|x| (x - mid).abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let us: Vec<f64> = xs.iter().map(|x| (x - mid) / span).collect();

    let mut c = [ys.iter().sum::<f64>() / ys.len() as f64, 0.0, 0.0, 0.0];
    let pow = |u: f64, k: usize| u.powi(k as i32);
    for _ in 0..20_000 {
        let mut moved = 0.0f64;
        for k in 0..4 {
            let mut num = 0.0;
            let mut den = 0.0;
            for (&u, &y) in us.iter().zip(ys) {
                let others: f64 = (0..4).filter(|&j| j != k).map(|j| c[j] * pow(u, j)).sum();
                num += pow(u, k) * (y - others);
                den += pow(u, 2 * k);
            }
            let next = num / den;
            moved = moved.max((next - c[k]).abs());
            c[k] = next;
        }
        if moved < 1e-15 {
            break;
        }
    }
    us.iter()
        .zip(ys)
        .map(|(&u, &y)| {
            let p = c[0] + u * (c[1] + u * (c[2] + u * c[3]));
            (p - y) * (p - y)
        })
        .sum::<f64>()
        .sqrt()
}

/// Strictly increasing (rate, quality) operating points: log-spaced rates
/// with jitter, positive quality increments. Invertible by construction.
pub fn random_monotone_points(rng: &mut impl Rng, n: usize) -> Vec<RdPoint> {
    let mut log_rate = rng.gen_range(1.5..2.5);
    let mut quality = rng.gen_range(28.0..32.0);
    (0..n)
        .map(|i| {
            if i > 0 {
                log_rate += rng.gen_range(0.15..0.6);
                quality += rng.gen_range(0.2..2.0);
            }
            RdPoint {
                rate_kbps: 10f64.powf(log_rate),
                quality,
            }
        })
        .collect()
}

/// A validated PSNR curve from [`random_monotone_points`].
pub fn random_curve(rng: &mut impl Rng, label: &str, n: usize) -> RdCurve {
    validate_curve(label, MetricKind::Psnr, random_monotone_points(rng, n), false)
        .expect("generated points are valid")
}

/// A jittered companion to `base`: every rate scaled by a factor near
/// `rate_factor`, every quality shifted by about `dq`. Keeps the ranges
/// overlapping for factors near one.
pub fn companion_curve(
    rng: &mut impl Rng,
    base: &RdCurve,
    label: &str,
    rate_factor: f64,
    dq: f64,
) -> RdCurve {
    let points = base
        .points()
        .iter()
        .map(|p| RdPoint {
            rate_kbps: p.rate_kbps * rate_factor * rng.gen_range(0.97..1.03),
            quality: p.quality + dq + rng.gen_range(-0.1..0.1),
        })
        .collect();
    validate_curve(label, MetricKind::Psnr, points, false).expect("companion points are valid")
}

/// Exactly affine quality in log-rate: `q = intercept + slope·log10(rate)`,
/// sampled at the given log-rates. Both fit methods must agree on these.
pub fn affine_curve(label: &str, log_rates: &[f64], intercept: f64, slope: f64) -> RdCurve {
    let points = log_rates
        .iter()
        .map(|&l| RdPoint {
            rate_kbps: 10f64.powf(l),
            quality: intercept + slope * l,
        })
        .collect();
    validate_curve(label, MetricKind::Psnr, points, false).expect("affine points are valid")
}
