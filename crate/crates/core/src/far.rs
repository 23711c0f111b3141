//! FAR(p) prediction through a VAR(p) on functional principal component scores.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, numerical, shape, Result};
use crate::fpca::{fpca, EigenSystem};
use crate::funkdata::{Curve, FunctionalSeries};
use crate::linalg;
use crate::scalar::Scalar;

/// Order and dimension of a FAR model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FarSpec {
    pub p: usize,
    pub d: usize,
}

impl FarSpec {
    pub fn new(p: usize, d: usize) -> Self {
        Self { p, d }
    }
}

/// Fitted FAR(p) model in `d` score coordinates.
#[derive(Debug, Clone)]
pub struct FarModel<T: Scalar> {
    spec: FarSpec,
    n: usize,
    es: Arc<EigenSystem<T>>,
    intercept: DVector<T>,
    coefs: Vec<DMatrix<T>>,
    innov_cov: DMatrix<T>,
}

/// Fits a FAR(p) model with `d` principal components to `series`.
///
/// The VAR(p) is fitted by multivariate least squares with an intercept and
/// the innovation covariance uses divisor `n - p - p·d`.
pub fn fit_far<T: Scalar>(series: &FunctionalSeries<T>, p: usize, d: usize) -> Result<FarModel<T>> {
    check_sample(series.len(), series.basis().dim(), p, d)?;
    let es = Arc::new(fpca(series)?);
    FarModel::from_eigen(es, p, d)
}

fn check_sample(n: usize, dim: usize, p: usize, d: usize) -> Result<()> {
    if d == 0 || d > dim {
        return Err(invalid!("dimension d={d} outside 1..={dim}"));
    }
    if n <= p * d + p.max(1) {
        return Err(invalid!("{n} curves are too few for a FAR({p}) model in {d} dimensions"));
    }
    Ok(())
}

impl<T: Scalar> FarModel<T> {
    /// Fits the score VAR on a precomputed eigen system, so that several
    /// `(p, d)` candidates can share one FPCA.
    pub fn from_eigen(es: Arc<EigenSystem<T>>, p: usize, d: usize) -> Result<Self> {
        let n = es.n();
        check_sample(n, es.n_components(), p, d)?;
        let scores = es.scores().columns(0, d).into_owned();
        let (intercept, coefs, innov_cov) = if p == 0 {
            let cov = scores.transpose() * &scores / T::from_usize_lossy(n);
            (DVector::zeros(d), Vec::new(), cov)
        } else {
            fit_var(&scores, p)?
        };
        let model = Self { spec: FarSpec { p, d }, n, es, intercept, coefs, innov_cov };
        if p > 0 {
            let radius = model.spectral_radius();
            if radius >= T::one() {
                log::warn!("fitted VAR({p}) is not stationary: companion spectral radius {radius}");
            }
        }
        Ok(model)
    }

    pub fn spec(&self) -> FarSpec {
        self.spec
    }

    pub fn p(&self) -> usize {
        self.spec.p
    }

    pub fn d(&self) -> usize {
        self.spec.d
    }

    pub fn eigen(&self) -> &Arc<EigenSystem<T>> {
        &self.es
    }

    pub fn intercept(&self) -> &DVector<T> {
        &self.intercept
    }

    pub fn coefficients(&self) -> &[DMatrix<T>] {
        &self.coefs
    }

    pub fn innovation_cov(&self) -> &DMatrix<T> {
        &self.innov_cov
    }

    /// Spectral radius of the VAR companion matrix (zero for `p = 0`).
    pub fn spectral_radius(&self) -> T {
        linalg::spectral_radius(&linalg::companion(&self.coefs))
    }

    /// `(n + p·d)/n · tr(Σ̂_e) + Σ_{l>d} λ̂_l`.
    pub fn ffpe(&self) -> T {
        let n = T::from_usize_lossy(self.n);
        let pd = T::from_usize_lossy(self.spec.p * self.spec.d);
        (n + pd) / n * self.innov_cov.trace() + self.es.tail_variance(self.spec.d)
    }

    /// Iterated `h`-step score forecast from the last `p` score vectors of `history`.
    pub fn predict_scores(&self, history: &FunctionalSeries<T>, h: usize) -> Result<DVector<T>> {
        if h == 0 {
            return Err(invalid!("forecast horizon must be at least 1"));
        }
        let FarSpec { p, d } = self.spec;
        if p == 0 {
            return Ok(self.intercept.clone());
        }
        if history.len() < p {
            return Err(invalid!("history of {} curves is shorter than the order {p}", history.len()));
        }
        if !history.basis().compatible(self.es.basis()) {
            return Err(shape!("history basis does not match the fitted model"));
        }
        let tail = history.coeffs().rows(history.len() - p, p).into_owned();
        let lagged = self.es.project_rows(&tail, d)?;
        // most recent first
        let mut state: Vec<DVector<T>> = (0..p).map(|l| lagged.row(p - 1 - l).transpose()).collect();
        let mut next = self.intercept.clone();
        for _ in 0..h {
            next = self.intercept.clone();
            for (phi, y) in self.coefs.iter().zip(&state) {
                next += phi * y;
            }
            state.rotate_right(1);
            state[0] = next.clone();
        }
        Ok(next)
    }

    /// `μ̂ + Σ_{j≤d} ŷ_{n+h,j} v̂_j`.
    pub fn predict_curve(&self, history: &FunctionalSeries<T>, h: usize) -> Result<Curve<T>> {
        let scores = self.predict_scores(history, h)?;
        self.es.reconstruct(scores.as_slice(), self.spec.d)
    }
}

fn fit_var<T: Scalar>(scores: &DMatrix<T>, p: usize) -> Result<(DVector<T>, Vec<DMatrix<T>>, DMatrix<T>)> {
    let (n, d) = scores.shape();
    let m = n - p;
    let mut x = DMatrix::zeros(m, 1 + p * d);
    for r in 0..m {
        x[(r, 0)] = T::one();
        for l in 0..p {
            for j in 0..d {
                x[(r, 1 + l * d + j)] = scores[(p + r - l - 1, j)];
            }
        }
    }
    let y = scores.rows(p, m).into_owned();
    let a = linalg::least_squares(&x, &y)?;
    let resid = &y - &x * &a;
    let divisor = T::from_usize_lossy(n - p - p * d);
    let mut cov = resid.transpose() * &resid / divisor;
    cov = (&cov + cov.transpose()) * T::lit(0.5);
    let intercept = a.row(0).transpose();
    let coefs = (0..p).map(|l| a.rows(1 + l * d, d).transpose()).collect();
    Ok((intercept, coefs, cov))
}

/// Functional final prediction error of a FAR(p) fit with `d` components.
pub fn ffpe_ts<T: Scalar>(series: &FunctionalSeries<T>, p: usize, d: usize) -> Result<T> {
    Ok(fit_far(series, p, d)?.ffpe())
}

/// Minimizes [`ffpe_ts`] over `p ∈ orders` and `d ∈ dims`; ties go to the
/// smaller order, then the smaller dimension. Infeasible cells are skipped.
pub fn select_far<T: Scalar>(
    series: &FunctionalSeries<T>,
    orders: Range<usize>,
    dims: Range<usize>,
) -> Result<(FarSpec, T)> {
    let es = Arc::new(fpca(series)?);
    let mut best: Option<(FarSpec, T)> = None;
    for p in orders {
        for d in dims.clone() {
            let Ok(model) = FarModel::from_eigen(Arc::clone(&es), p, d) else { continue };
            let value = model.ffpe();
            if best.as_ref().is_none_or(|(_, b)| value < *b) {
                best = Some((FarSpec { p, d }, value));
            }
        }
    }
    best.ok_or_else(|| invalid!("no feasible (p, d) in the candidate ranges"))
}

/// One-step prediction residuals of a sliding FAR window.
#[derive(Debug, Clone)]
pub struct ResidualSet<T: Scalar> {
    residuals: FunctionalSeries<T>,
    predictions: FunctionalSeries<T>,
    window: usize,
    targets: Range<usize>,
    spec: FarSpec,
}

impl<T: Scalar> ResidualSet<T> {
    /// `ε̂_k = Y_k − Ŷ_k`, one row per target.
    pub fn residuals(&self) -> &FunctionalSeries<T> {
        &self.residuals
    }

    /// One-step FAR predictions `Ŷ_k`, one row per target.
    pub fn predictions(&self) -> &FunctionalSeries<T> {
        &self.predictions
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn targets(&self) -> Range<usize> {
        self.targets.clone()
    }

    pub fn spec(&self) -> FarSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    /// Row of target index `k` (an index into the original series).
    pub fn position(&self, k: usize) -> Option<usize> {
        self.targets.contains(&k).then(|| k - self.targets.start)
    }
}

/// Fits FAR on curves `k-n₁..k` for each target `k` and records the
/// one-step residual of curve `k`. Targets are independent and run in parallel.
pub fn sliding_residuals<T: Scalar>(
    series: &FunctionalSeries<T>,
    spec: FarSpec,
    window: usize,
    targets: Range<usize>,
) -> Result<ResidualSet<T>> {
    if targets.is_empty() {
        return Err(invalid!("empty target range"));
    }
    if targets.start < window || targets.end > series.len() {
        return Err(invalid!(
            "targets {targets:?} need a {window}-curve history inside a series of {}",
            series.len()
        ));
    }
    let preds: Vec<DVector<T>> = targets
        .clone()
        .into_par_iter()
        .map(|k| {
            let hist = series.window(k - window..k)?;
            let model = fit_far(&hist, spec.p, spec.d)?;
            Ok(model.predict_curve(&hist, 1)?.coeffs().clone())
        })
        .collect::<Result<_>>()?;
    let basis = Arc::clone(series.basis());
    let predictions = FunctionalSeries::from_curves(Arc::clone(&basis), &preds)?;
    let observed = series.coeffs().rows(targets.start, targets.len());
    let residuals = FunctionalSeries::new(basis, observed - predictions.coeffs())?;
    Ok(ResidualSet { residuals, predictions, window, targets, spec })
}

/// [`sliding_residuals`] for several specifications at once; each window's
/// FPCA is computed once and shared. Entries fail independently.
pub fn sliding_residuals_many<T: Scalar>(
    series: &FunctionalSeries<T>,
    specs: &[FarSpec],
    window: usize,
    targets: Range<usize>,
) -> Result<Vec<Result<ResidualSet<T>>>> {
    if targets.is_empty() {
        return Err(invalid!("empty target range"));
    }
    if targets.start < window || targets.end > series.len() {
        return Err(invalid!(
            "targets {targets:?} need a {window}-curve history inside a series of {}",
            series.len()
        ));
    }
    let per_target: Vec<Vec<Result<DVector<T>>>> = targets
        .clone()
        .into_par_iter()
        .map(|k| {
            let hist = series.window(k - window..k)?;
            let es = Arc::new(fpca(&hist)?);
            Ok(specs
                .iter()
                .map(|s| {
                    let model = FarModel::from_eigen(Arc::clone(&es), s.p, s.d)?;
                    Ok(model.predict_curve(&hist, 1)?.coeffs().clone())
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let basis = Arc::clone(series.basis());
    let observed = series.coeffs().rows(targets.start, targets.len()).into_owned();
    Ok(specs
        .iter()
        .enumerate()
        .map(|(j, &spec)| {
            let preds: Vec<DVector<T>> = per_target
                .iter()
                .map(|row| match &row[j] {
                    Ok(v) => Ok(v.clone()),
                    Err(e) => Err(numerical!("{e}")),
                })
                .collect::<Result<_>>()?;
            let predictions = FunctionalSeries::from_curves(Arc::clone(&basis), &preds)?;
            let residuals = FunctionalSeries::new(Arc::clone(&basis), &observed - predictions.coeffs())?;
            Ok(ResidualSet { residuals, predictions, window, targets: targets.clone(), spec })
        })
        .collect())
}
