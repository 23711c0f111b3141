//! Residual bootstrap prediction bands for intraday updates, and the
//! interval-score summaries used to compare them.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, shape, Result};
use crate::ffr::FfrPair;
use crate::fpca::fpca;
use crate::funkdata::{split_basis, BasisSystem, Curve, FunctionalSeries};
use crate::pfp::PfpModel;
use crate::scalar::{self, Scalar};

/// Bootstrap settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig<T> {
    /// Replicate count `B`.
    pub replicates: usize,
    pub alpha: T,
    /// Explained-variance threshold fixing `d_e`.
    pub var_threshold: T,
    pub seed: u64,
    /// Add a resampled in-sample regression residual to each replicate, so
    /// the bands cover the curve rather than only its conditional mean.
    pub include_noise: bool,
    /// Keep every replicate prediction in the result.
    pub keep_replicates: bool,
}

impl<T: Scalar> BootstrapConfig<T> {
    pub fn new(replicates: usize, alpha: T, seed: u64) -> Self {
        Self { replicates, alpha, var_threshold: T::lit(0.8), seed, include_noise: true, keep_replicates: false }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates < 100 {
            return Err(invalid!("at least 100 bootstrap replicates are required, got {}", self.replicates));
        }
        check_alpha(self.alpha)?;
        if !(self.var_threshold > T::zero() && self.var_threshold <= T::one()) {
            return Err(invalid!("variance threshold must lie in (0, 1]"));
        }
        Ok(())
    }
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(invalid!("alpha must lie in (0, 1)"));
    }
    Ok(())
}

/// Pointwise `100(1−α)%` bands on the `(τ, 1]` grid points.
#[derive(Debug, Clone)]
pub struct BootstrapBands<T: Scalar> {
    alpha: T,
    points: Vec<T>,
    center: Vec<T>,
    lower: Vec<T>,
    upper: Vec<T>,
    replicates: usize,
    d_e: usize,
    /// `B × m` replicate predictions.
    draws: Option<DMatrix<T>>,
}

impl<T: Scalar> BootstrapBands<T> {
    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// Point prediction the replicates are centred on.
    pub fn center(&self) -> &[T] {
        &self.center
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    /// Number of residual components resampled as scores.
    pub fn d_e(&self) -> usize {
        self.d_e
    }

    pub fn draws(&self) -> Option<&DMatrix<T>> {
        self.draws.as_ref()
    }

    /// Mean of `upper − lower` over the grid points.
    pub fn mean_width(&self) -> T {
        let w: Vec<T> = self.upper.iter().zip(&self.lower).map(|(&u, &l)| u - l).collect();
        scalar::mean(&w)
    }

    /// Fraction of grid points where `truth` lies in `[lower, upper]`.
    pub fn coverage(&self, truth: &[T]) -> Result<T> {
        self.check_len(truth)?;
        let hits = truth
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .filter(|(&y, (&l, &u))| l <= y && y <= u)
            .count();
        Ok(T::from_usize_lossy(hits) / T::from_usize_lossy(truth.len()))
    }

    /// Bands at another level from the retained replicates.
    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        check_alpha(alpha)?;
        let draws = self
            .draws
            .as_ref()
            .ok_or_else(|| crate::error::PfpError::State("replicate predictions were not retained".into()))?;
        let (lower, upper) = quantile_bands(draws, alpha);
        Ok(Self { alpha, lower, upper, ..self.clone() })
    }

    fn check_len(&self, v: &[T]) -> Result<()> {
        if v.len() != self.points.len() {
            return Err(shape!("{} values for {} band points", v.len(), self.points.len()));
        }
        Ok(())
    }
}

/// Type-7 empirical quantile of sorted data.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], p: T) -> T {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = T::from_usize_lossy(n - 1) * p;
    let lo = h.floor().to_usize().unwrap_or(0).min(n - 1);
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - T::from_usize_lossy(lo);
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

fn quantile_bands<T: Scalar>(draws: &DMatrix<T>, alpha: T) -> (Vec<T>, Vec<T>) {
    let half = alpha / T::lit(2.0);
    (0..draws.ncols())
        .map(|j| {
            let mut col: Vec<T> = draws.column(j).iter().copied().collect();
            col.sort_by(|a, b| a.partial_cmp(b).expect("finite replicate predictions"));
            (quantile_sorted(&col, half), quantile_sorted(&col, T::one() - half))
        })
        .unzip()
}

/// One prediction target of a regression bootstrap: the replicate
/// prediction is `offset + β̂ᵇ(input)` on `(τ, 1]`.
#[derive(Debug, Clone)]
pub struct BandTarget<T: Scalar> {
    /// Full-domain coefficients added to every replicate.
    pub offset: DVector<T>,
    /// Left-block coefficients fed to the regression.
    pub input: DVector<T>,
}

/// Bootstrap bands for a regression of the `(τ, 1]` block on the `[0, τ]`
/// block of `train`, one set of bands per target.
///
/// The training curves are decomposed as `μ + Σ_{j≤d_e} ξ_j φ_j + ε`; each
/// replicate resamples score vectors and remainders independently, refits
/// the regression with `(dx, dy)` components and predicts every target.
pub fn regression_bands<T: Scalar>(
    train: &FunctionalSeries<T>,
    tau: T,
    dx: usize,
    dy: usize,
    targets: &[BandTarget<T>],
    config: &BootstrapConfig<T>,
) -> Result<Vec<BootstrapBands<T>>> {
    config.validate()?;
    let full = train.basis();
    let (left, right) = split_basis(full, tau)?;
    let points = right.grid().points().to_vec();
    let eval_r = right.eval();
    for t in targets {
        if t.offset.len() != full.dim() || t.input.len() != full.dim() {
            return Err(shape!("band target coefficients do not match the basis dimension {}", full.dim()));
        }
    }
    let es = fpca(train)?;
    let base = FfrPair::new(&train.with_basis(&left)?, &train.with_basis(&right)?)?.fit(dx, dy)?;
    let centers: Vec<DVector<T>> = targets
        .iter()
        .map(|t| Ok(eval_r * (&t.offset + base.predict_coeffs(&t.input)?)))
        .collect::<Result<_>>()?;

    if es.total_variance() <= T::eps() * T::lit(1e3) * T::one().max(train.coeffs().abs().max()) {
        log::warn!("residual curves are degenerate; bootstrap bands have zero width");
        let mean = train.coeffs().row(0).transpose();
        return Ok(targets
            .iter()
            .map(|t| {
                let v: Vec<T> = (eval_r * (&t.offset + &mean)).iter().copied().collect();
                BootstrapBands {
                    alpha: config.alpha,
                    points: points.clone(),
                    center: v.clone(),
                    lower: v.clone(),
                    upper: v,
                    replicates: config.replicates,
                    d_e: 0,
                    draws: None,
                }
            })
            .collect());
    }

    let n = train.len();
    let d_e = es.components_for(config.var_threshold);
    let scores = es.scores().columns(0, d_e).into_owned();
    let phi = es.eigenfunction_coeffs().columns(0, d_e).into_owned();
    let mean = es.mean_coeffs().clone();
    let mut remainders = train.coeffs().clone();
    for i in 0..n {
        let fitted = &mean + &phi * scores.row(i).transpose();
        let r = remainders.row(i).transpose() - fitted;
        remainders.set_row(i, &r.transpose());
    }
    let noise: Option<DMatrix<T>> = if config.include_noise {
        let mut z = DMatrix::zeros(n, full.dim());
        for i in 0..n {
            let x = train.coeffs().row(i).transpose();
            let r = &x - base.predict_coeffs(&x)?;
            z.set_row(i, &r.transpose());
        }
        Some(z)
    } else {
        None
    };

    let replicate = |b: usize| -> Result<Vec<DVector<T>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(b as u64);
        let mut coeffs = DMatrix::zeros(n, full.dim());
        for i in 0..n {
            let s = rng.random_range(0..n);
            let r = rng.random_range(0..n);
            let c = &mean + &phi * scores.row(s).transpose() + remainders.row(r).transpose();
            coeffs.set_row(i, &c.transpose());
        }
        let series = FunctionalSeries::new(Arc::clone(full), coeffs)?;
        let fit = FfrPair::new(&series.with_basis(&left)?, &series.with_basis(&right)?)?.fit(dx, dy)?;
        targets
            .iter()
            .map(|t| {
                let mut c = &t.offset + fit.predict_coeffs(&t.input)?;
                if let Some(z) = &noise {
                    c += z.row(rng.random_range(0..n)).transpose();
                }
                Ok(eval_r * c)
            })
            .collect()
    };
    let reps: Vec<Vec<DVector<T>>> = (0..config.replicates).into_par_iter().map(replicate).collect::<Result<_>>()?;

    Ok(targets
        .iter()
        .enumerate()
        .map(|(k, _)| {
            let draws = DMatrix::from_fn(config.replicates, points.len(), |b, j| reps[b][k][j]);
            let (lower, upper) = quantile_bands(&draws, config.alpha);
            BootstrapBands {
                alpha: config.alpha,
                points: points.clone(),
                center: centers[k].iter().copied().collect(),
                lower,
                upper,
                replicates: config.replicates,
                d_e,
                draws: config.keep_replicates.then_some(draws),
            }
        })
        .collect())
}

/// Bands for PFP updates: the regression is trained on the model's training
/// residual curves and each target pairs a FAR forecast with a partial curve.
pub fn pfp_bands<T: Scalar>(
    model: &PfpModel<T>,
    targets: &[(Curve<T>, Curve<T>)],
    config: &BootstrapConfig<T>,
) -> Result<Vec<BootstrapBands<T>>> {
    let train = model.residual_set().residuals().window(0..model.n_train())?;
    let mut prepared = Vec::with_capacity(targets.len());
    for (forecast, partial) in targets {
        if !forecast.basis().compatible(model.full_basis()) || !partial.basis().compatible(model.left_basis()) {
            return Err(shape!("band target curves do not match the model bases"));
        }
        prepared.push(BandTarget { offset: forecast.coeffs().clone(), input: partial.coeffs() - forecast.coeffs() });
    }
    let ffr = model.residual_ffr();
    regression_bands(&train, model.tau(), ffr.dx(), ffr.dy(), &prepared, config)
}

/// Bands for a single PFP update.
pub fn bootstrap_bands<T: Scalar>(
    model: &PfpModel<T>,
    forecast: &Curve<T>,
    partial: &Curve<T>,
    config: &BootstrapConfig<T>,
) -> Result<BootstrapBands<T>> {
    let mut out = pfp_bands(model, &[(forecast.clone(), partial.clone())], config)?;
    Ok(out.remove(0))
}

/// Bands for the plain intraday regression of curves on their own
/// `[0, τ]` blocks.
pub fn ffr_bands<T: Scalar>(
    curves: &FunctionalSeries<T>,
    tau: T,
    dx: usize,
    dy: usize,
    partials: &[Curve<T>],
    config: &BootstrapConfig<T>,
) -> Result<Vec<BootstrapBands<T>>> {
    let basis: &Arc<BasisSystem<T>> = curves.basis();
    let zero = DVector::zeros(basis.dim());
    let targets: Vec<BandTarget<T>> =
        partials.iter().map(|p| BandTarget { offset: zero.clone(), input: p.coeffs().clone() }).collect();
    regression_bands(curves, tau, dx, dy, &targets, config)
}

/// `(u − l) + (2/α)(y − u)·1{y > u} + (2/α)(l − y)·1{l > y}`.
pub fn interval_score<T: Scalar>(u: T, l: T, y: T, alpha: T) -> Result<T> {
    if u < l {
        return Err(invalid!("upper bound below lower bound"));
    }
    check_alpha(alpha)?;
    let k = T::lit(2.0) / alpha;
    let mut s = u - l;
    if y > u {
        s += k * (y - u);
    }
    if l > y {
        s += k * (l - y);
    }
    Ok(s)
}

/// Interval score averaged over every grid point of every target.
pub fn averaged_score<T: Scalar>(bands: &[BootstrapBands<T>], truths: &[Vec<T>]) -> Result<T> {
    if bands.len() != truths.len() || bands.is_empty() {
        return Err(shape!("{} band sets for {} truths", bands.len(), truths.len()));
    }
    let mut scores = Vec::new();
    for (b, y) in bands.iter().zip(truths) {
        b.check_len(y)?;
        for ((&u, &l), &v) in b.upper.iter().zip(&b.lower).zip(y) {
            scores.push(interval_score(u, l, v, b.alpha)?);
        }
    }
    Ok(scalar::mean(&scores))
}

/// Band width averaged over every grid point of every target.
pub fn mean_width<T: Scalar>(bands: &[BootstrapBands<T>]) -> T {
    let w: Vec<T> = bands
        .iter()
        .flat_map(|b| b.upper.iter().zip(&b.lower).map(|(&u, &l)| u - l))
        .collect();
    scalar::mean(&w)
}

/// Pointwise coverage of `truths` pooled over targets.
pub fn pooled_coverage<T: Scalar>(bands: &[BootstrapBands<T>], truths: &[Vec<T>]) -> Result<T> {
    if bands.len() != truths.len() || bands.is_empty() {
        return Err(shape!("{} band sets for {} truths", bands.len(), truths.len()));
    }
    let mut hits = Vec::new();
    for (b, y) in bands.iter().zip(truths) {
        let c = b.coverage(y)?;
        hits.push(c);
    }
    Ok(scalar::mean(&hits))
}
