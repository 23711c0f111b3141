//! Independent reference computations for the estimators.

mod common;

use std::sync::Arc;

use common::*;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use pfp_core::arma::ArModel;
use pfp_core::bootstrap::interval_score;
use pfp_core::far::{fit_far, sliding_residuals, sliding_residuals_many, FarSpec};
use pfp_core::ffr::{fit_ffr, FfrPair};
use pfp_core::fpca::fpca;
use pfp_core::funkdata::{smooth, split_basis, Curve, DiscreteSample, FunctionalSeries, Grid};
use pfp_core::pfp::{pfp_fit, pfp_predict, PfpConfig};
use pfp_core::simlab::pmse;
use rand::Rng;

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

#[test]
fn fpca_eigenvalues_match_coefficient_covariance() {
    let basis = fourier(48, 3);
    let gram = basis.gram();
    assert!((gram - DMatrix::identity(3, 3)).abs().max() < 1e-12);
    let s = random_series(&basis, 20, &[1.0, 0.6, 0.3], 11);
    let es = fpca(&s).unwrap();
    let c = s.coeffs();
    let mean = c.row_mean();
    let centered = DMatrix::from_fn(20, 3, |i, j| c[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / 20.0;
    let oracle = sorted_desc(SymmetricEigen::new(cov).eigenvalues.iter().copied().collect());
    assert!(max_abs_diff(es.eigenvalues(), &oracle) < 1e-10);
}

#[test]
fn fpca_matches_discretized_covariance_operator() {
    // non-orthonormal basis: compare against the operator on grid values
    let basis = bspline(48, 8);
    let s = random_series(&basis, 60, &[1.0], 12);
    let es = fpca(&s).unwrap();
    let x = s.evaluate();
    let n = x.nrows();
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, 48, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let w = DVector::from_column_slice(basis.grid().weights()).map(f64::sqrt);
    let op = DMatrix::from_diagonal(&w) * cov * DMatrix::from_diagonal(&w);
    let oracle = sorted_desc(SymmetricEigen::new(op).eigenvalues.iter().copied().collect());
    let scale = oracle[0];
    for j in 0..8 {
        assert!((es.eigenvalues()[j] - oracle[j]).abs() < 1e-10 * scale.max(1.0), "component {j}");
    }
    assert!(oracle[8..].iter().all(|v| v.abs() < 1e-10 * scale.max(1.0)));
}

#[test]
fn parseval_identity_and_truncation_error() {
    let basis = fourier(48, 7);
    let s = random_series(&basis, 40, &[1.0, 0.8, 0.6, 0.5, 0.4, 0.3, 0.2], 13);
    let es = fpca(&s).unwrap();
    let grid = basis.grid();
    let mu = es.mean().values();
    let mut total_err = 0.0;
    for k in 0..s.len() {
        let y = s.curve(k).values();
        let diff: Vec<f64> = (&y - &mu).iter().copied().collect();
        let norm2 = grid.inner_product(&diff, &diff).unwrap();
        let scores: Vec<f64> = es.scores().row(k).iter().copied().collect();
        let sum2: f64 = scores.iter().map(|v| v * v).sum();
        assert!((norm2 - sum2).abs() < 1e-8, "curve {k}: {norm2} vs {sum2}");

        let rec = es.reconstruct(&scores, 1).unwrap().values();
        let e: Vec<f64> = (&y - rec).iter().copied().collect();
        let err2 = grid.inner_product(&e, &e).unwrap();
        assert!((err2 - (norm2 - scores[0] * scores[0])).abs() < 1e-8);
    }
    for d in 1..7 {
        total_err = 0.0;
        for k in 0..s.len() {
            let scores: Vec<f64> = es.scores().row(k).iter().copied().collect();
            let e: Vec<f64> = (s.curve(k).values() - es.reconstruct(&scores, d).unwrap().values()).iter().copied().collect();
            total_err += grid.inner_product(&e, &e).unwrap();
        }
        let expected = es.tail_variance(d) * s.len() as f64;
        assert!((total_err - expected).abs() <= 1e-6 * expected.max(1e-12), "d={d}");
    }
    assert!(total_err > 0.0);
}

#[test]
fn smoothing_matches_qr_least_squares() {
    let basis = bspline(48, 10);
    let mut r = rng(14);
    let raw = DMatrix::from_fn(30, 48, |_, _| r.sample::<f64, _>(rand_distr::StandardNormal));
    let sample = DiscreteSample::new(basis.grid().clone(), raw.clone()).unwrap();
    let (series, resid) = smooth(&sample, &basis).unwrap();

    let w = DVector::from_column_slice(basis.grid().weights()).map(f64::sqrt);
    let a = DMatrix::from_diagonal(&w) * basis.eval();
    let qr = a.clone().qr();
    let (q, rr) = (qr.q(), qr.r());
    let mut mse_lib = 0.0;
    let mut mse_ref = 0.0;
    for k in 0..30 {
        let y = raw.row(k).transpose();
        let b = q.transpose() * y.component_mul(&w);
        let coef = rr.clone().solve_upper_triangular(&b).unwrap();
        let fit = basis.eval() * &coef;
        assert!((series.coeffs().row(k).transpose() - &coef).abs().max() < 1e-10);
        mse_ref += (&y - fit).norm_squared();
        mse_lib += resid.values().row(k).norm_squared();
    }
    assert!((mse_lib - mse_ref).abs() / 30.0 / 48.0 < 1e-10);
}

#[test]
fn ffr_scalar_case_is_ols_slope() {
    let basis = fourier(48, 5);
    let s = random_series(&basis, 80, &[1.0, 0.7, 0.5, 0.3, 0.2], 15);
    let (left, right) = split_basis(&basis, 0.5).unwrap();
    let x = s.with_basis(&left).unwrap();
    let y = s.with_basis(&right).unwrap();
    let pair = FfrPair::new(&x, &y).unwrap();
    let model = pair.fit(1, 1).unwrap();
    let xs = pair.predictor().scores().column(0);
    let ys = pair.response().scores().column(0);
    let slope = xs.dot(&ys) / xs.dot(&xs);
    let b = model.coefficients()[(0, 0)];
    assert!((b - slope).abs() <= 1e-12 * slope.abs().max(1.0), "{b} vs {slope}");
}

#[test]
fn ffr_recovers_exact_linear_model() {
    let basis = fourier(48, 5);
    let (left, right) = split_basis(&basis, 0.5).unwrap();
    let mut r = rng(16);
    let m = DMatrix::from_fn(5, 5, |_, _| r.sample::<f64, _>(rand_distr::StandardNormal));
    let xs = random_series(&basis, 60, &[1.0, 0.8, 0.6, 0.4, 0.3], 17);
    let ycoef = xs.coeffs() * m.transpose();
    let x = xs.with_basis(&left).unwrap();
    let y = FunctionalSeries::new(Arc::clone(&right), ycoef).unwrap();
    let model = fit_ffr(&x, &y, 5, 5).unwrap();

    // B₀ = Ψᵀ W_R M Φ in score coordinates
    let phi = model.predictor().eigenfunction_coeffs();
    let psi = model.response().eigenfunction_coeffs();
    let b0 = psi.transpose() * right.gram() * &m * phi;
    assert!((model.coefficients() - &b0).abs().max() < 1e-8);

    let fresh = random_series(&basis, 3, &[1.0, 0.8, 0.6, 0.4, 0.3], 18);
    for k in 0..3 {
        let c = fresh.coeffs().row(k).transpose();
        let pred = model.predict(&Curve::new(Arc::clone(&left), c.clone()).unwrap()).unwrap();
        let truth = right.evaluate(&(&m * &c));
        assert!((pred.values() - truth).abs().max() < 1e-6);
    }
}

#[test]
fn ffpe_r_matches_direct_formula() {
    let basis = fourier(48, 7);
    let s = random_series(&basis, 100, &[1.0, 0.5, 0.25, 0.12, 0.06, 0.03, 0.015], 19);
    let (left, right) = split_basis(&basis, 0.5).unwrap();
    let other = random_series(&basis, 100, &[1.0, 0.5, 0.25, 0.12, 0.06, 0.03, 0.015], 20);
    let pair = FfrPair::new(&s.with_basis(&left).unwrap(), &other.with_basis(&right).unwrap()).unwrap();
    for (dx, dy) in [(1, 1), (1, 3), (2, 4)] {
        let model = pair.fit(dx, dy).unwrap();
        let n = 100.0;
        let x = pair.predictor().scores().columns(0, dx).into_owned();
        let y = pair.response().scores().columns(0, dy).into_owned();
        let b = (x.transpose() * &x).try_inverse().unwrap() * x.transpose() * &y;
        let z = &y - &x * b;
        let tr = (z.transpose() * &z).trace() / n;
        let tail: f64 = pair.response().eigenvalues()[dy..].iter().sum();
        let expected = (n + dx as f64) / (n - dx as f64) * tr + tail;
        assert!((model.ffpe() - expected).abs() < 1e-12 * expected, "({dx},{dy})");
    }
}

#[test]
fn far_matches_normal_equations_var() {
    let basis = fourier(48, 5);
    let s_diag = [1.0, 0.5, 1.0 / 3.0, 0.25, 0.2];
    let a = DMatrix::from_fn(5, 5, |i, j| if i == j { 0.8 } else { 0.05 * (i as f64 - j as f64) });
    let s = var1(&basis, &a, &s_diag, 200, 21);
    let model = fit_far(&s, 1, 3).unwrap();
    let scores = model.eigen().scores().columns(0, 3).into_owned();
    let n = scores.nrows();
    let x = DMatrix::from_fn(n - 1, 4, |r, c| if c == 0 { 1.0 } else { scores[(r, c - 1)] });
    let y = scores.rows(1, n - 1).into_owned();
    let xtx = x.transpose() * &x;
    let coef = xtx.cholesky().unwrap().solve(&(x.transpose() * &y));
    let last = scores.row(n - 1);
    let oracle: Vec<f64> = (0..3).map(|j| coef[(0, j)] + (1..4).map(|i| last[i - 1] * coef[(i, j)]).sum::<f64>()).collect();
    let pred = model.predict_scores(&s, 1).unwrap();
    assert!(max_abs_diff(pred.as_slice(), &oracle) < 1e-8);
}

#[test]
fn sliding_many_agrees_with_single_calls() {
    let basis = fourier(24, 5);
    let a = DMatrix::identity(5, 5) * 0.5;
    let s = var1(&basis, &a, &[1.0, 0.5, 0.3, 0.2, 0.1], 90, 22);
    let specs = [FarSpec::new(1, 2), FarSpec::new(2, 3), FarSpec::new(0, 1)];
    let many = sliding_residuals_many(&s, &specs, 60, 60..90).unwrap();
    for (spec, set) in specs.iter().zip(many) {
        let one = sliding_residuals(&s, *spec, 60, 60..90).unwrap();
        let set = set.unwrap();
        assert!((set.residuals().coeffs() - one.residuals().coeffs()).abs().max() < 1e-12);
    }
}

#[test]
fn pfp_residual_fit_is_manual_recomposition() {
    let basis = fourier(48, 7);
    let a = DMatrix::identity(7, 7) * 0.6;
    let s = var1(&basis, &a, &[1.0, 0.5, 0.33, 0.25, 0.2, 0.17, 0.14], 160, 23);
    let cfg = PfpConfig { tau: 0.5, spec: FarSpec::new(1, 3), dx: 3, dy: 4, window: 100, n_train: Some(50) };
    let model = pfp_fit(&s, cfg).unwrap();
    let set = sliding_residuals(&s, FarSpec::new(1, 3), 100, 100..160).unwrap();
    let train = set.residuals().window(0..50).unwrap();
    let (left, right) = split_basis(&basis, 0.5).unwrap();
    let manual = fit_ffr(&train.with_basis(&left).unwrap(), &train.with_basis(&right).unwrap(), 3, 4).unwrap();
    assert!((manual.coefficients() - model.residual_ffr().coefficients()).abs().max() < 1e-12);
    assert!((manual.ffpe() - model.ffpe()).abs() < 1e-12);
}

#[test]
fn pfp_recovers_truth_under_exact_linear_residuals() {
    // curves confined to a 4-dimensional coefficient subspace on which the
    // [0, τ] restriction is injective, so every residual's (τ, 1] block is
    // a fixed linear function of its [0, τ] block
    let basis = fourier(48, 7);
    let mut r = rng(24);
    let span = DMatrix::from_fn(7, 4, |_, _| r.sample::<f64, _>(rand_distr::StandardNormal));
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.7, -0.4, 0.5, 0.2]));
    let low = FunctionalSeries::new(fourier(48, 4), DMatrix::zeros(1, 4)).unwrap();
    let z = var1(low.basis(), &a, &[1.0, 0.8, 0.6, 0.4], 161, 25);
    let coeffs = z.coeffs() * span.transpose();
    let s = FunctionalSeries::new(Arc::clone(&basis), coeffs).unwrap();
    let hist = s.window(0..160).unwrap();
    let cfg = PfpConfig { tau: 0.5, spec: FarSpec::new(1, 2), dx: 4, dy: 4, window: 100, n_train: None };
    let model = pfp_fit(&hist, cfg).unwrap();
    let target = s.curve(160);
    let partial = target.restrict_to(model.left_basis()).unwrap();
    let pred = pfp_predict(&model, &hist, &partial).unwrap();
    let truth = model.right_basis().evaluate(target.coeffs());
    assert!((pred.combined_values() - truth).abs().max() < 1e-6);
}

#[test]
fn interval_score_formula() {
    let mut r = rng(26);
    for _ in 0..1000 {
        let l: f64 = r.random_range(-2.0..1.0);
        let u = l + r.random_range(0.0..2.0);
        let y: f64 = r.random_range(-3.0..3.0);
        let alpha: f64 = r.random_range(0.01..0.5);
        let below = if y < l { l - y } else { 0.0 };
        let above = if y > u { y - u } else { 0.0 };
        let expected = (u - l) + 2.0 / alpha * below + 2.0 / alpha * above;
        let got = interval_score(u, l, y, alpha).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }
}

#[test]
fn ar1_forecast_closed_form() {
    let (phi, mean) = (0.6_f64, 1.5_f64);
    let model = ArModel::new(vec![phi], mean, 0.3).unwrap();
    let history = [0.4, 2.0, 0.7];
    let last = 0.7;
    let f = model.forecast(&history, 6).unwrap();
    let c = mean * (1.0 - phi);
    for h in 1..=6 {
        let geometric: f64 = (0..h).map(|i| phi.powi(i as i32)).sum();
        let via_intercept = c * geometric + phi.powi(h as i32) * last;
        let via_mean = mean + phi.powi(h as i32) * (last - mean);
        assert!((f[h - 1] - via_intercept).abs() < 1e-12);
        assert!((f[h - 1] - via_mean).abs() < 1e-12);
    }
}

#[test]
fn pmse_of_constant_offset() {
    let basis = fourier(48, 5);
    let (_, right) = split_basis(&basis, 0.5).unwrap();
    let truth = Curve::new(Arc::clone(&basis), DVector::from_vec(vec![0.3, -1.0, 0.2, 0.5, 0.1])).unwrap();
    for c in [0.5, -1.3, 2.0] {
        let mut shifted = truth.coeffs().clone();
        shifted[0] += c;
        let pred = Curve::new(Arc::clone(&basis), shifted).unwrap();
        let v = pmse(&truth, &pred, 0.5).unwrap();
        let exact = c * c * 0.5;
        let step = 1.0 / 47.0;
        assert!((v - exact).abs() <= c * c * step, "{v} vs {exact}");
        let span = right.grid().points().last().unwrap() - right.grid().points()[0];
        assert!((v - c * c * span).abs() < 1e-12);
    }
    assert_eq!(pmse(&truth, &truth, 0.5).unwrap(), 0.0);
}

#[test]
fn trapezoid_on_irregular_grid() {
    let g = Grid::from_points(vec![0.0, 0.1, 0.35, 0.8, 1.0]).unwrap();
    let f: Vec<f64> = g.points().iter().map(|t| 3.0 * t - 1.0).collect();
    assert!((g.integrate(&f).unwrap() - 0.5).abs() < 1e-12);
}
