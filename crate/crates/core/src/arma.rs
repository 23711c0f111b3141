//! Scalar autoregressive models for pre-smoothing residual sequences.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::linalg;
use crate::scalar::{self, Scalar};

/// Fitted AR(q) model `x_t = c + Σ φ_i x_{t-i} + e_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel<T: Scalar> {
    coefs: Vec<T>,
    mean: T,
    intercept: T,
    sigma2: T,
    aic: T,
    n: usize,
}

impl<T: Scalar> ArModel<T> {
    /// Builds a model from known parameters; `mean` is the process mean.
    pub fn new(coefs: Vec<T>, mean: T, sigma2: T) -> Result<Self> {
        if sigma2 < T::zero() || !sigma2.is_finite() {
            return Err(invalid!("noise variance must be finite and nonnegative"));
        }
        let sum = coefs.iter().fold(T::zero(), |a, &b| a + b);
        Ok(Self { intercept: mean * (T::one() - sum), coefs, mean, sigma2, aic: T::zero(), n: 0 })
    }

    pub fn order(&self) -> usize {
        self.coefs.len()
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefs
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn intercept(&self) -> T {
        self.intercept
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    /// AIC of the selected order (zero for hand-built models).
    pub fn aic(&self) -> T {
        self.aic
    }

    /// Length of the fitted sequence.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spectral_radius(&self) -> T {
        if self.coefs.is_empty() {
            return T::zero();
        }
        let blocks: Vec<DMatrix<T>> = self.coefs.iter().map(|&c| DMatrix::from_element(1, 1, c)).collect();
        linalg::spectral_radius(&linalg::companion(&blocks))
    }

    /// Iterated conditional-mean forecasts `h` steps past the end of `history`.
    pub fn forecast(&self, history: &[T], h: usize) -> Result<Vec<T>> {
        if h == 0 {
            return Err(invalid!("forecast horizon must be at least 1"));
        }
        let q = self.order();
        if history.len() < q {
            return Err(invalid!("history of {} values is shorter than the order {q}", history.len()));
        }
        if q > 0 && self.spectral_radius() >= T::one() {
            log::warn!("forecasting with a non-stationary AR({q}) model");
        }
        let mut buf: Vec<T> = history[history.len() - q..].to_vec();
        let mut out = Vec::with_capacity(h);
        for _ in 0..h {
            let len = buf.len();
            let next = self
                .coefs
                .iter()
                .enumerate()
                .fold(self.intercept, |acc, (i, &phi)| acc + phi * buf[len - 1 - i]);
            buf.push(next);
            out.push(next);
        }
        Ok(out)
    }
}

/// Sample autocovariances `γ̂_0..=γ̂_max_lag` with divisor `n`.
pub fn autocovariance<T: Scalar>(x: &[T], max_lag: usize) -> Vec<T> {
    let n = x.len();
    let mean = scalar::mean(x);
    let centered: Vec<T> = x.iter().map(|&v| v - mean).collect();
    let nt = T::from_usize_lossy(n.max(1));
    (0..=max_lag)
        .map(|lag| {
            if lag >= n {
                return T::zero();
            }
            let prods: Vec<T> = (lag..n).map(|t| centered[t] * centered[t - lag]).collect();
            scalar::pairwise_sum(&prods) / nt
        })
        .collect()
}

/// Yule–Walker coefficients and innovation variances for every order up to
/// `q_max` via the Levinson–Durbin recursion.
pub fn levinson_durbin<T: Scalar>(gamma: &[T], q_max: usize) -> Vec<(Vec<T>, T)> {
    let mut out = Vec::with_capacity(q_max + 1);
    let mut phi: Vec<T> = Vec::new();
    let mut v = gamma[0];
    out.push((phi.clone(), v));
    for k in 1..=q_max {
        if v <= T::zero() {
            break;
        }
        let acc = (0..k - 1).fold(gamma[k], |a, j| a - phi[j] * gamma[k - 1 - j]);
        let kappa = acc / v;
        let mut next = vec![T::zero(); k];
        for j in 0..k - 1 {
            next[j] = phi[j] - kappa * phi[k - 2 - j];
        }
        next[k - 1] = kappa;
        phi = next;
        v *= T::one() - kappa * kappa;
        out.push((phi.clone(), v.max(T::zero())));
    }
    out
}

/// Yule–Walker AR fit with the order chosen by `AIC = n ln σ̂²_q + 2q` over `0..=q_max`.
///
/// A constant sequence yields order 0 with zero noise variance.
pub fn fit_ar<T: Scalar>(series: &[T], q_max: usize) -> Result<ArModel<T>> {
    let n = series.len();
    if n <= 10 * q_max || n < 2 {
        return Err(invalid!("sequence of length {n} is too short for orders up to {q_max}"));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(invalid!("sequence contains non-finite values"));
    }
    let mean = scalar::mean(series);
    let gamma = autocovariance(series, q_max);
    if gamma[0] <= T::zero() {
        return Ok(ArModel { coefs: Vec::new(), mean, intercept: mean, sigma2: T::zero(), aic: T::zero(), n });
    }
    let nt = T::from_usize_lossy(n);
    let mut best: Option<(Vec<T>, T, T)> = None;
    for (q, (phi, v)) in levinson_durbin(&gamma, q_max).into_iter().enumerate() {
        if v <= T::zero() {
            break;
        }
        let aic = nt * v.ln() + T::lit(2.0) * T::from_usize_lossy(q);
        if best.as_ref().is_none_or(|b| aic < b.2) {
            best = Some((phi, v, aic));
        }
    }
    let (coefs, sigma2, aic) = best.expect("order 0 always has positive variance");
    let sum = coefs.iter().fold(T::zero(), |a, &b| a + b);
    Ok(ArModel { intercept: mean * (T::one() - sum), coefs, mean, sigma2, aic, n })
}

/// Iterated forecasts; see [`ArModel::forecast`].
pub fn forecast_ar<T: Scalar>(model: &ArModel<T>, history: &[T], h: usize) -> Result<Vec<T>> {
    model.forecast(history, h)
}
