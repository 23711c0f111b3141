mod common;

use std::sync::Arc;

use common::*;
use nalgebra::{DMatrix, DVector};
use pfp_core::arma::ArModel;
use pfp_core::bootstrap::{interval_score, quantile_sorted, regression_bands, BandTarget, BootstrapConfig};
use pfp_core::ffr::fit_ffr;
use pfp_core::fpca::fpca;
use pfp_core::funkdata::{smooth, split_basis, BasisSystem, FunctionalSeries, Grid};
use pfp_core::pfp::recombine;
use pfp_core::simlab::pmse_values;
use proptest::prelude::*;

fn increasing_grid() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 3..30).prop_map(|gaps| {
        let total: f64 = gaps.iter().sum();
        let mut acc = 0.0;
        let mut pts = vec![0.0];
        for g in &gaps[..gaps.len() - 1] {
            acc += g / total;
            pts.push(acc);
        }
        pts.push(1.0);
        pts
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trapezoid_integrates_lines_exactly(pts in increasing_grid(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let g = Grid::from_points(pts).unwrap();
        let f: Vec<f64> = g.points().iter().map(|t| a * t + b).collect();
        prop_assert!((g.integrate(&f).unwrap() - (a / 2.0 + b)).abs() < 1e-12);
        prop_assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smoothing_is_idempotent(seed in 0u64..500, dim in 4usize..12) {
        let basis = bspline(40, dim);
        let s = random_series(&basis, 6, &[1.0], seed);
        let (again, resid) = smooth(&s.to_sample().unwrap(), &basis).unwrap();
        prop_assert!((again.coeffs() - s.coeffs()).abs().max() < 1e-9);
        prop_assert!(resid.values().abs().max() < 1e-9);
    }

    #[test]
    fn fpca_spectrum_is_ordered_and_accounts_for_variance(seed in 0u64..500, n in 3usize..40) {
        let basis = fourier(32, 7);
        let s = random_series(&basis, n, &[1.0, 0.7, 0.5, 0.4, 0.3, 0.2, 0.1], seed);
        let es = fpca(&s).unwrap();
        let ev = es.eigenvalues();
        prop_assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(ev.iter().all(|&v| v >= 0.0));
        let mu = es.mean().values();
        let mut total = 0.0;
        for k in 0..n {
            let d: Vec<f64> = (s.curve(k).values() - &mu).iter().copied().collect();
            total += basis.grid().inner_product(&d, &d).unwrap();
        }
        prop_assert!((total / n as f64 - es.total_variance()).abs() < 1e-8 * total.max(1.0));
    }

    #[test]
    fn full_reconstruction_is_exact(seed in 0u64..500) {
        let basis = fourier(32, 5);
        let s = random_series(&basis, 25, &[1.0, 0.6, 0.4, 0.3, 0.2], seed);
        let es = fpca(&s).unwrap();
        for k in [0, 12, 24] {
            let scores: Vec<f64> = es.scores().row(k).iter().copied().collect();
            let rec = es.reconstruct_coeffs(&scores, 5).unwrap();
            prop_assert!((rec - s.coeffs().row(k).transpose()).abs().max() < 1e-8);
        }
    }

    #[test]
    fn regression_residuals_are_orthogonal_to_predictor_scores(seed in 0u64..500, dx in 1usize..5, dy in 1usize..5) {
        let basis = fourier(40, 7);
        let s = random_series(&basis, 50, &[1.0, 0.8, 0.6, 0.5, 0.4, 0.3, 0.2], seed);
        let (left, right) = split_basis(&basis, 0.4).unwrap();
        let m = fit_ffr(&s.with_basis(&left).unwrap(), &s.with_basis(&right).unwrap(), dx, dy).unwrap();
        let x = m.predictor().scores().columns(0, dx).into_owned();
        let y = m.response().scores().columns(0, dy).into_owned();
        let z = &y - &x * m.coefficients().transpose();
        prop_assert!((x.transpose() * z).abs().max() < 1e-9);
        prop_assert!(m.ffpe() >= 0.0);
    }

    #[test]
    fn interval_score_dominates_width(l in -3.0f64..3.0, w in 0.0f64..3.0, y in -6.0f64..6.0, alpha in 0.01f64..0.5) {
        let u = l + w;
        let s = interval_score(u, l, y, alpha).unwrap();
        prop_assert!(s >= w - 1e-15);
        if y >= l && y <= u {
            prop_assert!((s - w).abs() < 1e-15);
        }
    }

    #[test]
    fn quantiles_are_monotone_and_bounded(mut xs in prop::collection::vec(-10.0f64..10.0, 1..60), p in 0.0f64..1.0, q in 0.0f64..1.0) {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        let a = quantile_sorted(&xs, lo);
        let b = quantile_sorted(&xs, hi);
        prop_assert!(a <= b + 1e-12);
        prop_assert!(a >= xs[0] - 1e-12 && b <= xs[xs.len() - 1] + 1e-12);
    }

    #[test]
    fn ar_forecast_from_the_mean_stays_there(phi in -0.95f64..0.95, mean in -3.0f64..3.0, h in 1usize..20) {
        let m = ArModel::new(vec![phi], mean, 1.0).unwrap();
        let f = m.forecast(&[mean, mean], h).unwrap();
        prop_assert!(f.iter().all(|v| (v - mean).abs() < 1e-12));
    }

    #[test]
    fn recombination_takes_each_block_from_the_right_curve(seed in 0u64..500, tau in 0.05f64..0.95) {
        let basis = fourier(20, 5);
        let s = random_series(&basis, 5, &[1.0], seed);
        let rec = recombine(&s, tau, None).unwrap();
        let orig = s.evaluate();
        let vals = rec.evaluate();
        for m in 0..4 {
            for (j, &t) in basis.grid().points().iter().enumerate() {
                let src = if t <= tau { orig[(m + 1, j)] } else { orig[(m, j)] };
                prop_assert!((vals[(m, j)] - src).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pmse_is_a_symmetric_nonnegative_distance(a in prop::collection::vec(-5.0f64..5.0, 10), b in prop::collection::vec(-5.0f64..5.0, 10)) {
        let g = Grid::uniform(10).unwrap();
        let ab = pmse_values(&g, &a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - pmse_values(&g, &b, &a).unwrap()).abs() < 1e-14);
        prop_assert_eq!(pmse_values(&g, &a, &a).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn bootstrap_bands_are_ordered_and_nested(seed in 0u64..100) {
        let basis = fourier(24, 5);
        let train = random_series(&basis, 60, &[1.0, 0.5, 0.3, 0.2, 0.1], seed);
        let target = BandTarget { offset: DVector::zeros(5), input: train.coeffs().row(0).transpose() };
        let mut cfg = BootstrapConfig::new(200, 0.1, seed);
        cfg.keep_replicates = true;
        let bands = regression_bands(&train, 0.5, 2, 2, &[target], &cfg).unwrap().remove(0);
        prop_assert!(bands.lower().iter().zip(bands.upper()).all(|(l, u)| l <= u));
        let wide = bands.with_alpha(0.02).unwrap();
        for j in 0..bands.points().len() {
            prop_assert!(wide.lower()[j] <= bands.lower()[j] + 1e-12);
            prop_assert!(wide.upper()[j] >= bands.upper()[j] - 1e-12);
        }
    }
}

#[test]
fn single_precision_agrees_with_double() {
    let b64 = fourier(32, 5);
    let s64 = random_series(&b64, 40, &[1.0, 0.6, 0.4, 0.3, 0.2], 9);
    let b32 = Arc::new(BasisSystem::<f32>::fourier(Grid::uniform(32).unwrap(), 5).unwrap());
    let c32 = DMatrix::from_fn(40, 5, |i, j| s64.coeffs()[(i, j)] as f32);
    let s32 = FunctionalSeries::new(b32, c32).unwrap();
    let e64 = fpca(&s64).unwrap();
    let e32 = fpca(&s32).unwrap();
    for (a, b) in e64.eigenvalues().iter().zip(e32.eigenvalues()) {
        assert!((a - *b as f64).abs() < 1e-4 * a.max(1.0));
    }
}
