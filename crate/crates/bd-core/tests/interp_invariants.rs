//! Numeric invariants of the fitting and integration layer, checked against
//! independent oracles (brute-force Simpson quadrature, coordinate-descent
//! least squares) over seeded random inputs.

mod common;

use bd_core::{fit, fit_cubic, fit_pchip, FitMethod, Orientation};
use common::{composite_simpson, cubic_residual_oracle, grid, random_curve, rng};
use proptest::prelude::*;
use rand::Rng;

const SIMPSON_PANELS: usize = 10_000;

#[test]
fn pchip_passes_through_every_knot() {
    let mut rng = rng(0x9d1b);
    for n in [2usize, 3, 5, 9, 17] {
        for _ in 0..20 {
            let curve = random_curve(&mut rng, "knots", n);
            let f = curve
                .fit(FitMethod::PiecewiseCubic, Orientation::QualityOfLogRate)
                .unwrap();
            for p in curve.points() {
                let got = f.evaluate(p.rate_kbps.log10()).unwrap();
                assert!(
                    (got - p.quality).abs() <= 1e-12 * p.quality.abs().max(1.0),
                    "knot miss at {} kbps: {got} vs {}",
                    p.rate_kbps,
                    p.quality
                );
            }
        }
    }
}

#[test]
fn pchip_never_undoes_monotone_data() {
    let mut rng = rng(0xc0ffee);
    for _ in 0..50 {
        let curve = random_curve(&mut rng, "monotone", 7);
        let f = curve
            .fit(FitMethod::PiecewiseCubic, Orientation::QualityOfLogRate)
            .unwrap();
        let (lo, hi) = f.domain();
        let mut prev = f64::NEG_INFINITY;
        for x in grid(lo, hi, 10_000) {
            let y = f.evaluate(x).unwrap();
            assert!(
                y >= prev - 1e-12,
                "fit decreases at x={x}: {y} after {prev}"
            );
            prev = y;
        }
    }
}

#[test]
fn both_methods_reproduce_straight_lines() {
    let mut rng = rng(0x11ea);
    for _ in 0..30 {
        let n = rng.gen_range(4..9);
        let curve = random_curve(&mut rng, "affine-src", n);
        // Re-map qualities onto an exact line in log-rate.
        let xs = curve.log_rates();
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 + 7.5 * x).collect();
        for method in [FitMethod::CubicFit, FitMethod::PiecewiseCubic] {
            let f = fit(method, &xs, &ys).unwrap();
            let (lo, hi) = f.domain();
            for x in grid(lo, hi, 200) {
                let want = 3.0 + 7.5 * x;
                let got = f.evaluate(x).unwrap();
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "{method} off the line at {x}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn closed_form_integrals_match_brute_force_simpson() {
    let mut rng = rng(0x5150);
    for n in [4usize, 6, 11] {
        for _ in 0..10 {
            let curve = random_curve(&mut rng, "quad", n);
            for method in [FitMethod::CubicFit, FitMethod::PiecewiseCubic] {
                let f = curve
                    .fit(method, Orientation::QualityOfLogRate)
                    .unwrap();
                let (lo, hi) = f.domain();
                // Interior interval with awkward endpoints.
                let a = lo + 0.137 * (hi - lo);
                let b = lo + 0.911 * (hi - lo);
                let exact = f.integrate(a, b).unwrap();
                let brute =
                    composite_simpson(&|x| f.evaluate(x).unwrap(), a, b, SIMPSON_PANELS);
                assert!(
                    (exact - brute).abs() <= 1e-8 * brute.abs().max(1.0),
                    "{method}: {exact} vs simpson {brute}"
                );
            }
        }
    }
}

#[test]
fn integrals_with_linear_tails_match_simpson_too() {
    let mut rng = rng(0x7a11);
    for _ in 0..10 {
        let curve = random_curve(&mut rng, "tails", 6);
        let f = curve
            .fit(FitMethod::PiecewiseCubic, Orientation::QualityOfLogRate)
            .unwrap();
        let (lo, hi) = f.domain();
        let f = f
            .attach_linear_tails(Some(lo - 0.8), Some(hi + 0.5))
            .unwrap();
        let exact = f.integrate(lo - 0.8, hi + 0.5).unwrap();
        let brute = composite_simpson(
            &|x| f.evaluate(x).unwrap(),
            lo - 0.8,
            hi + 0.5,
            SIMPSON_PANELS,
        );
        assert!(
            (exact - brute).abs() <= 1e-8 * brute.abs().max(1.0),
            "{exact} vs simpson {brute}"
        );
    }
}

#[test]
fn integration_is_additive_over_random_splits() {
    let mut rng = rng(0xadd);
    for _ in 0..20 {
        let curve = random_curve(&mut rng, "split", 8);
        for method in [FitMethod::CubicFit, FitMethod::PiecewiseCubic] {
            let f = curve.fit(method, Orientation::QualityOfLogRate).unwrap();
            let (lo, hi) = f.domain();
            let m = rng.gen_range(lo..hi);
            let whole = f.integrate(lo, hi).unwrap();
            let parts = f.integrate(lo, m).unwrap() + f.integrate(m, hi).unwrap();
            assert!(
                (whole - parts).abs() <= 1e-12 * whole.abs().max(1.0),
                "{method}: {whole} vs {parts}"
            );
        }
    }
}

#[test]
fn four_point_cubic_fit_interpolates() {
    let mut rng = rng(0x4075);
    for _ in 0..30 {
        let curve = random_curve(&mut rng, "exact4", 4);
        let xs = curve.log_rates();
        let ys = curve.qualities();
        let f = fit_cubic(&xs, &ys).unwrap();
        for (&x, &y) in xs.iter().zip(&ys) {
            let got = f.evaluate(x).unwrap();
            assert!(
                (got - y).abs() <= 1e-8 * y.abs().max(1.0),
                "4-point fit misses ({x}, {y}): {got}"
            );
        }
    }
}

#[test]
fn least_squares_residual_matches_coordinate_descent_oracle() {
    let mut rng = rng(0x0ac1e);
    for n in [5usize, 7, 12] {
        for _ in 0..10 {
            let curve = random_curve(&mut rng, "ls", n);
            let xs = curve.log_rates();
            let ys = curve.qualities();
            let f = fit_cubic(&xs, &ys).unwrap();
            let engine: f64 = xs
                .iter()
                .zip(&ys)
                .map(|(&x, &y)| {
                    let e = f.evaluate(x).unwrap() - y;
                    e * e
                })
                .sum::<f64>()
                .sqrt();
            let oracle = cubic_residual_oracle(&xs, &ys);
            // The solver must be at least as good as the iterative oracle
            // and cannot beat the true minimum the oracle converges to.
            assert!(
                engine <= oracle + 1e-8 * (1.0 + oracle),
                "n={n}: engine residual {engine} worse than oracle {oracle}"
            );
            assert!(
                oracle <= engine + 1e-6 * (1.0 + engine),
                "n={n}: oracle {oracle} beat the closed-form solver {engine}"
            );
        }
    }
}

proptest! {
    /// Any strictly monotone data set yields a monotone, knot-exact fit.
    #[test]
    fn pchip_monotone_and_exact_on_arbitrary_data(
        x0 in -2.0f64..2.0,
        y0 in -50.0f64..50.0,
        dxs in proptest::collection::vec(0.05f64..1.5, 1..9),
        dys in proptest::collection::vec(0.0f64..4.0, 9),
    ) {
        let mut xs = vec![x0];
        let mut ys = vec![y0];
        for (i, dx) in dxs.iter().enumerate() {
            xs.push(xs[i] + dx);
            ys.push(ys[i] + dys[i]);
        }
        let f = fit_pchip(&xs, &ys).unwrap();
        for (&x, &y) in xs.iter().zip(&ys) {
            prop_assert!((f.evaluate(x).unwrap() - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
        let (lo, hi) = f.domain();
        let mut prev = f64::NEG_INFINITY;
        for x in common::grid(lo, hi, 500) {
            let v = f.evaluate(x).unwrap();
            prop_assert!(v >= prev - 1e-9);
            prev = v;
        }
    }
}
