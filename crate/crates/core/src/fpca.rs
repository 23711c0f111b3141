//! Functional principal component analysis in basis coordinates.
//!
//! With coefficient covariance `Σ_c` (divisor `n`) and Gram matrix `W`, the
//! covariance operator restricted to the basis span has the symmetric form
//! `W^{1/2} Σ_c W^{1/2}`. Its eigenvectors `u_j` map back to eigenfunction
//! coefficients `b_j = W^{-1/2} u_j`, which are orthonormal under the
//! (possibly restricted) quadrature inner product.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, shape, Result};
use crate::funkdata::{mean_coeffs, BasisSystem, Curve, FunctionalSeries};
use crate::linalg;
use crate::scalar::Scalar;

/// Mean, eigenvalues, eigenfunctions and scores of a curve sample.
#[derive(Debug, Clone)]
pub struct EigenSystem<T: Scalar> {
    basis: Arc<BasisSystem<T>>,
    mean: DVector<T>,
    eigenvalues: Vec<T>,
    /// `D × K`, one eigenfunction per column.
    eigenfunctions: DMatrix<T>,
    /// `W · eigenfunctions`, so that scores are a single product.
    score_map: DMatrix<T>,
    scores: DMatrix<T>,
}

/// Runs FPCA on `series` over its own domain.
///
/// Eigenvalues come out descending and nonnegative. Each eigenfunction is
/// signed so that its largest-magnitude coefficient is positive; under
/// repeated eigenvalues the component identities are not unique.
pub fn fpca<T: Scalar>(series: &FunctionalSeries<T>) -> Result<EigenSystem<T>> {
    let n = series.len();
    if n < 2 {
        return Err(invalid!("FPCA needs at least 2 curves, got {n}"));
    }
    let basis = Arc::clone(series.basis());
    let mean = mean_coeffs(series.coeffs());
    let mut centered = series.coeffs().clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.transpose() * &centered / T::from_usize_lossy(n);
    let gram = basis.gram();
    let (w_half, w_inv_half) = linalg::psd_sqrt_pair(gram)?;
    let operator = &w_half * &cov * &w_half;
    let (raw_values, u) = linalg::sym_eig_desc(&operator)?;

    let (gram_vals, _) = linalg::sym_eig_desc(gram)?;
    let gram_ok = gram_vals
        .last()
        .zip(gram_vals.first())
        .is_some_and(|(&lo, &hi)| lo > hi * T::lit(1e-8));

    let top = raw_values.first().copied().unwrap_or_else(T::zero).max(T::zero());
    let k = raw_values.len();
    let mut eigenfunctions = DMatrix::zeros(gram.nrows(), k);
    let mut eigenvalues = Vec::with_capacity(k);
    let cov_w_half = &cov * &w_half;
    for j in 0..k {
        let lambda = raw_values[j].max(T::zero());
        let uj = u.column(j);
        let mut b = if gram_ok || lambda <= top * T::lit(1e-9) {
            &w_inv_half * uj
        } else {
            // exact for eigenvectors in the range of the covariance, avoids W^{-1/2}
            &cov_w_half * uj / lambda
        };
        let norm = (b.transpose() * gram * &b)[(0, 0)];
        if norm > T::zero() {
            b /= norm.sqrt();
        }
        orient(&mut b);
        eigenfunctions.set_column(j, &b);
        eigenvalues.push(lambda);
    }
    let score_map = gram * &eigenfunctions;
    let scores = &centered * &score_map;
    Ok(EigenSystem { basis, mean, eigenvalues, eigenfunctions, score_map, scores })
}

fn orient<T: Scalar>(b: &mut DVector<T>) {
    let mut best = T::zero();
    let mut sign = T::one();
    for &v in b.iter() {
        if v.abs() > best {
            best = v.abs();
            sign = if v < T::zero() { -T::one() } else { T::one() };
        }
    }
    *b *= sign;
}

impl<T: Scalar> EigenSystem<T> {
    pub fn basis(&self) -> &Arc<BasisSystem<T>> {
        &self.basis
    }

    /// Number of curves the system was estimated from.
    pub fn n(&self) -> usize {
        self.scores.nrows()
    }

    /// Number of components (the basis dimension).
    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn mean(&self) -> Curve<T> {
        Curve::new(Arc::clone(&self.basis), self.mean.clone()).expect("mean matches basis")
    }

    pub fn mean_coeffs(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenfunction_coeffs(&self) -> &DMatrix<T> {
        &self.eigenfunctions
    }

    pub fn eigenfunction(&self, j: usize) -> Curve<T> {
        Curve::new(Arc::clone(&self.basis), self.eigenfunctions.column(j).into_owned())
            .expect("eigenfunction matches basis")
    }

    /// `n × K` matrix of fPC scores of the estimation sample.
    pub fn scores(&self) -> &DMatrix<T> {
        &self.scores
    }

    /// First `d` fPC scores `⟨x − μ̂, v̂_j⟩` of a curve given by its coefficients.
    pub fn project_coeffs(&self, coeffs: &DVector<T>, d: usize) -> Result<DVector<T>> {
        if coeffs.len() != self.mean.len() {
            return Err(shape!("{} coefficients for a {}-dimensional basis", coeffs.len(), self.mean.len()));
        }
        if d > self.n_components() {
            return Err(invalid!("requested {d} scores from {} components", self.n_components()));
        }
        let centered = coeffs - &self.mean;
        Ok(self.score_map.columns(0, d).tr_mul(&centered))
    }

    pub fn project(&self, curve: &Curve<T>, d: usize) -> Result<DVector<T>> {
        if !curve.basis().compatible(&self.basis) {
            return Err(shape!("curve domain {} does not match FPCA domain {}", curve.domain(), self.basis.domain()));
        }
        self.project_coeffs(curve.coeffs(), d)
    }

    /// Scores of every curve in `coeffs` (rows), first `d` components.
    pub fn project_rows(&self, coeffs: &DMatrix<T>, d: usize) -> Result<DMatrix<T>> {
        if coeffs.ncols() != self.mean.len() || d > self.n_components() {
            return Err(shape!("cannot project {}-column coefficients onto {d} components", coeffs.ncols()));
        }
        let mut centered = coeffs.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
        }
        Ok(centered * self.score_map.columns(0, d))
    }

    /// Coefficients of `μ̂ + Σ_{j<d} scores_j v̂_j`.
    pub fn reconstruct_coeffs(&self, scores: &[T], d: usize) -> Result<DVector<T>> {
        if d == 0 || d > self.n_components() {
            return Err(invalid!("truncation level {d} outside 1..={}", self.n_components()));
        }
        if scores.len() < d {
            return Err(shape!("{} scores supplied for truncation level {d}", scores.len()));
        }
        let s = DVector::from_column_slice(&scores[..d]);
        Ok(&self.mean + self.eigenfunctions.columns(0, d) * s)
    }

    /// Truncated Karhunen–Loève reconstruction.
    pub fn reconstruct(&self, scores: &[T], d: usize) -> Result<Curve<T>> {
        Curve::new(Arc::clone(&self.basis), self.reconstruct_coeffs(scores, d)?)
    }

    pub fn total_variance(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |a, &b| a + b)
    }

    /// Cumulative explained-variance ratios.
    pub fn explained_variance(&self) -> Vec<T> {
        let total = self.total_variance();
        let mut acc = T::zero();
        self.eigenvalues
            .iter()
            .map(|&l| {
                acc += l;
                if total > T::zero() {
                    acc / total
                } else {
                    T::one()
                }
            })
            .collect()
    }

    /// Smallest number of components whose explained variance reaches `threshold`.
    pub fn components_for(&self, threshold: T) -> usize {
        let ev = self.explained_variance();
        ev.iter()
            .position(|&r| r >= threshold - T::lit(1e-12))
            .map(|i| i + 1)
            .unwrap_or(ev.len())
            .max(1)
    }

    /// `Σ_{l ≥ d} λ̂_l` (zero-based `d`), the variance left after `d` components.
    pub fn tail_variance(&self, d: usize) -> T {
        self.eigenvalues.iter().skip(d).fold(T::zero(), |a, &b| a + b)
    }
}
