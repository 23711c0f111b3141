//! Fully functional linear regression between a predictor block `[0, τ]`
//! and a response block `(τ, 1]`, estimated in principal component scores.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, shape, Result};
use crate::far::{sliding_residuals, sliding_residuals_many, FarSpec};
use crate::fpca::{fpca, EigenSystem};
use crate::funkdata::{split_basis, Curve, FunctionalSeries, Grid};
use crate::linalg;
use crate::scalar::Scalar;

/// Eigen systems of a paired predictor/response sample, shared by every
/// `(dx, dy)` candidate.
#[derive(Debug, Clone)]
pub struct FfrPair<T: Scalar> {
    pred: Arc<EigenSystem<T>>,
    resp: Arc<EigenSystem<T>>,
}

impl<T: Scalar> FfrPair<T> {
    pub fn new(x: &FunctionalSeries<T>, y: &FunctionalSeries<T>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(shape!("{} predictor curves paired with {} responses", x.len(), y.len()));
        }
        Ok(Self { pred: Arc::new(fpca(x)?), resp: Arc::new(fpca(y)?) })
    }

    pub fn n(&self) -> usize {
        self.pred.n()
    }

    pub fn predictor(&self) -> &Arc<EigenSystem<T>> {
        &self.pred
    }

    pub fn response(&self) -> &Arc<EigenSystem<T>> {
        &self.resp
    }

    /// Least-squares fit of the first `dy` response scores on the first `dx`
    /// predictor scores, one regression per response score, no intercept.
    pub fn fit(&self, dx: usize, dy: usize) -> Result<FfrModel<T>> {
        let n = self.n();
        if dx == 0 || dx > self.pred.n_components() {
            return Err(invalid!("predictor dimension {dx} outside 1..={}", self.pred.n_components()));
        }
        if dy == 0 || dy > self.resp.n_components() {
            return Err(invalid!("response dimension {dy} outside 1..={}", self.resp.n_components()));
        }
        if n <= dx {
            return Err(invalid!("{n} curve pairs cannot support {dx} predictor components"));
        }
        let x = self.pred.scores().columns(0, dx).into_owned();
        let y = self.resp.scores().columns(0, dy).into_owned();
        let b = linalg::least_squares(&x, &y)?.transpose();
        let z = &y - &x * b.transpose();
        let rss = z.transpose() * &z;
        let rss = (&rss + rss.transpose()) * T::lit(0.5);
        Ok(FfrModel {
            dx,
            dy,
            n,
            pred: Arc::clone(&self.pred),
            resp: Arc::clone(&self.resp),
            b,
            resid_cov: &rss / T::from_usize_lossy(n - dx),
        })
    }
}

/// Fitted functional regression `Y(t) = ∫ β(s,t) X(s) ds + ε(t)` in scores.
#[derive(Debug, Clone)]
pub struct FfrModel<T: Scalar> {
    dx: usize,
    dy: usize,
    n: usize,
    pred: Arc<EigenSystem<T>>,
    resp: Arc<EigenSystem<T>>,
    b: DMatrix<T>,
    resid_cov: DMatrix<T>,
}

/// Fits a functional regression of `y` on `x` with `dx` predictor and `dy`
/// response components.
pub fn fit_ffr<T: Scalar>(
    x: &FunctionalSeries<T>,
    y: &FunctionalSeries<T>,
    dx: usize,
    dy: usize,
) -> Result<FfrModel<T>> {
    FfrPair::new(x, y)?.fit(dx, dy)
}

impl<T: Scalar> FfrModel<T> {
    pub fn dx(&self) -> usize {
        self.dx
    }

    pub fn dy(&self) -> usize {
        self.dy
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Split point: the upper end of the predictor domain.
    pub fn tau(&self) -> T {
        self.pred.basis().domain().hi
    }

    pub fn predictor(&self) -> &Arc<EigenSystem<T>> {
        &self.pred
    }

    pub fn response(&self) -> &Arc<EigenSystem<T>> {
        &self.resp
    }

    /// `dy × dx` score coefficient matrix `B̂`.
    pub fn coefficients(&self) -> &DMatrix<T> {
        &self.b
    }

    /// Residual score covariance `Σ̂_z` with divisor `n − dx`.
    pub fn residual_cov(&self) -> &DMatrix<T> {
        &self.resid_cov
    }

    /// Response-side sample mean.
    pub fn response_mean(&self) -> Curve<T> {
        self.resp.mean()
    }

    /// `(n + dx)/(n − dx) · tr(ẐẐ'/n) + Σ_{l>dy} λ̂^Y_l`.
    pub fn ffpe(&self) -> T {
        let n = T::from_usize_lossy(self.n);
        let dx = T::from_usize_lossy(self.dx);
        // resid_cov carries divisor n - dx, so (n + dx)/(n - dx) · tr(ẐẐ'/n) = (n + dx)/n · tr(resid_cov)
        (n + dx) / n * self.resid_cov.trace() + self.resp.tail_variance(self.dy)
    }

    /// Predicted response scores for predictor coefficients on the predictor basis.
    pub fn predict_scores(&self, x_coeffs: &DVector<T>) -> Result<DVector<T>> {
        let xi = self.pred.project_coeffs(x_coeffs, self.dx)?;
        Ok(&self.b * xi)
    }

    /// Response coefficients `μ̂_Y + Σ_j ζ̂_j ψ̂_j` for predictor coefficients.
    pub fn predict_coeffs(&self, x_coeffs: &DVector<T>) -> Result<DVector<T>> {
        let zeta = self.predict_scores(x_coeffs)?;
        self.resp.reconstruct_coeffs(zeta.as_slice(), self.dy)
    }

    /// Predicted response curve on the response domain.
    pub fn predict(&self, x_partial: &Curve<T>) -> Result<Curve<T>> {
        if !x_partial.basis().compatible(self.pred.basis()) {
            return Err(shape!(
                "partial curve on {} does not match the predictor domain {}",
                x_partial.domain(),
                self.pred.basis().domain()
            ));
        }
        Curve::new(Arc::clone(self.resp.basis()), self.predict_coeffs(x_partial.coeffs())?)
    }

    /// `β̂(s,t) = Σ_ij B̂_ji φ̂_i(s) ψ̂_j(t)` on the predictor × response grids.
    pub fn kernel_surface(&self) -> KernelSurface<T> {
        let phi = self.pred.basis().eval() * self.pred.eigenfunction_coeffs().columns(0, self.dx);
        let psi = self.resp.basis().eval() * self.resp.eigenfunction_coeffs().columns(0, self.dy);
        KernelSurface {
            s: self.pred.basis().grid().clone(),
            t: self.resp.basis().grid().clone(),
            values: phi * self.b.transpose() * psi.transpose(),
        }
    }
}

/// Regression kernel evaluated on a grid pair; rows follow `s`, columns `t`.
#[derive(Debug, Clone)]
pub struct KernelSurface<T: Scalar> {
    pub s: Grid<T>,
    pub t: Grid<T>,
    pub values: DMatrix<T>,
}

/// Functional final prediction error of the regression with `(dx, dy)`.
pub fn ffpe_r<T: Scalar>(x: &FunctionalSeries<T>, y: &FunctionalSeries<T>, dx: usize, dy: usize) -> Result<T> {
    Ok(fit_ffr(x, y, dx, dy)?.ffpe())
}

/// Grid-search minimizer of [`ffpe_r`] over `1..=dx_max × 1..=dy_max`.
/// Ties go to the smaller `dx`, then the smaller `dy`; cells with too few
/// curves are skipped.
pub fn select_dims<T: Scalar>(
    x: &FunctionalSeries<T>,
    y: &FunctionalSeries<T>,
    dx_max: usize,
    dy_max: usize,
) -> Result<(usize, usize, T)> {
    if dx_max == 0 || dy_max == 0 {
        return Err(invalid!("dimension bounds must be at least 1"));
    }
    select_dims_in(&FfrPair::new(x, y)?, dx_max, dy_max)
}

pub(crate) fn select_dims_in<T: Scalar>(pair: &FfrPair<T>, dx_max: usize, dy_max: usize) -> Result<(usize, usize, T)> {
    let dx_max = dx_max.min(pair.predictor().n_components());
    let dy_max = dy_max.min(pair.response().n_components());
    let mut best: Option<(usize, usize, T)> = None;
    for dx in 1..=dx_max {
        for dy in 1..=dy_max {
            let Ok(model) = pair.fit(dx, dy) else { continue };
            let value = model.ffpe();
            if best.as_ref().is_none_or(|b| value < b.2) {
                best = Some((dx, dy, value));
            }
        }
    }
    best.ok_or_else(|| invalid!("no feasible (dx, dy) within the bounds"))
}

/// Candidate ranges of the joint `(p, d, dx, dy)` search.
#[derive(Debug, Clone)]
pub struct JointGrid {
    pub orders: Range<usize>,
    pub dims: Range<usize>,
    pub dx: Range<usize>,
    pub dy: Range<usize>,
}

/// One evaluated cell of the joint search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCell<T> {
    pub spec: FarSpec,
    pub dx: usize,
    pub dy: usize,
    pub value: T,
}

/// Result of the joint search: the minimizer and every feasible cell.
#[derive(Debug, Clone)]
pub struct JointSelection<T> {
    pub best: JointCell<T>,
    pub cells: Vec<JointCell<T>>,
}

/// Residual-curve regression for one `(p, d)`: the sliding residuals of
/// `targets`, split at `τ`, with the first `n_train` rows as training pairs.
pub fn residual_pair<T: Scalar>(
    series: &FunctionalSeries<T>,
    tau: T,
    spec: FarSpec,
    window: usize,
    targets: Range<usize>,
    n_train: usize,
) -> Result<FfrPair<T>> {
    if n_train == 0 || n_train > targets.len() {
        return Err(invalid!("training size {n_train} outside 1..={}", targets.len()));
    }
    let set = sliding_residuals(series, spec, window, targets)?;
    let train = set.residuals().window(0..n_train)?;
    let (left, right) = split_basis(series.basis(), tau)?;
    FfrPair::new(&train.with_basis(&left)?, &train.with_basis(&right)?)
}

/// Jointly selects `(p, d, dx, dy)` by minimizing
/// `(n + dx)/(n − dx) · tr(Σ̂_δ(p, d)) + Σ_{l>dy} λ̂_l^{ε,(τ,1]}(p, d)`,
/// where both terms come from the regression of the `(τ, 1]` blocks of the
/// sliding prediction residuals on their `[0, τ]` blocks.
pub fn ffpe_joint<T: Scalar>(
    series: &FunctionalSeries<T>,
    tau: T,
    grid: &JointGrid,
    window: usize,
    targets: Range<usize>,
    n_train: usize,
) -> Result<JointSelection<T>> {
    let specs: Vec<FarSpec> = grid
        .orders
        .clone()
        .flat_map(|p| grid.dims.clone().map(move |d| FarSpec { p, d }))
        .collect();
    if n_train == 0 || n_train > targets.len() {
        return Err(invalid!("training size {n_train} outside 1..={}", targets.len()));
    }
    let (left, right) = split_basis(series.basis(), tau)?;
    let sets = sliding_residuals_many(series, &specs, window, targets)?;
    let per_spec: Vec<Vec<JointCell<T>>> = specs
        .par_iter()
        .zip(sets.par_iter())
        .map(|(&spec, set)| {
            let pair = set.as_ref().map_err(|e| invalid!("{e}")).and_then(|set| {
                let train = set.residuals().window(0..n_train)?;
                FfrPair::new(&train.with_basis(&left)?, &train.with_basis(&right)?)
            });
            let Ok(pair) = pair else {
                return Vec::new();
            };
            let mut cells = Vec::new();
            for dx in grid.dx.clone() {
                for dy in grid.dy.clone() {
                    if let Ok(m) = pair.fit(dx, dy) {
                        cells.push(JointCell { spec, dx, dy, value: m.ffpe() });
                    }
                }
            }
            cells
        })
        .collect();
    let cells: Vec<JointCell<T>> = per_spec.into_iter().flatten().collect();
    let best = cells
        .iter()
        .copied()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .ok_or_else(|| invalid!("no feasible cell in the joint grid"))?;
    Ok(JointSelection { best, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funkdata::{BasisSystem, Domain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn halves(n: usize, seed: u64, link: f64) -> (FunctionalSeries<f64>, FunctionalSeries<f64>) {
        let full = Arc::new(BasisSystem::fourier(Grid::uniform(41).unwrap(), 7).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<_> = (0..n)
            .map(|_| DVector::from_fn(7, |j, _| link * rng.sample::<f64, _>(StandardNormal) / (j + 1) as f64))
            .collect();
        let s = FunctionalSeries::from_curves(Arc::clone(&full), &rows).unwrap();
        let (l, r) = split_basis(&full, 0.5).unwrap();
        (s.with_basis(&l).unwrap(), s.with_basis(&r).unwrap())
    }

    #[test]
    fn zero_response_gives_zero_fit() {
        let (x, y) = halves(30, 1, 1.0);
        let zero = FunctionalSeries::new(Arc::clone(y.basis()), DMatrix::zeros(30, 7)).unwrap();
        let m = fit_ffr(&x, &zero, 2, 1).unwrap();
        assert!(m.coefficients().abs().max() < 1e-14);
        assert!(m.residual_cov().abs().max() < 1e-14);
    }

    #[test]
    fn dimension_bounds() {
        let (x, y) = halves(5, 2, 1.0);
        assert!(matches!(fit_ffr(&x, &y, 5, 1), Err(crate::PfpError::InvalidArgument(_))));
        assert!(fit_ffr(&x, &y, 0, 1).is_err());
        let (dx, dy, _) = select_dims(&x, &y, 1, 1).unwrap();
        assert_eq!((dx, dy), (1, 1));
    }

    #[test]
    fn mean_predictor_maps_to_response_mean() {
        let (x, y) = halves(40, 3, 1.0);
        let m = fit_ffr(&x, &y, 3, 2).unwrap();
        let pred = m.predict(&m.predictor().mean()).unwrap();
        assert!((pred.coeffs() - m.response_mean().coeffs()).abs().max() < 1e-12);
        assert!(m.predict(&y.curve(0)).is_err());
    }

    #[test]
    fn fitted_scores_are_orthogonal_to_residuals() {
        let (x, y) = halves(60, 4, 1.0);
        let m = fit_ffr(&x, &y, 4, 3).unwrap();
        let xs = m.predictor().scores().columns(0, 4).into_owned();
        let ys = m.response().scores().columns(0, 3).into_owned();
        let z = &ys - &xs * m.coefficients().transpose();
        assert!((z.transpose() * xs).abs().max() < 1e-8);
    }

    #[test]
    fn ffpe_full_dims_has_no_tail() {
        let (x, y) = halves(50, 5, 1.0);
        let m = fit_ffr(&x, &y, 7, 7).unwrap();
        let want = (50.0 + 7.0) / 50.0 * m.residual_cov().trace();
        assert!((m.ffpe() - want).abs() < 1e-12);
    }

    #[test]
    fn kernel_surface_reproduces_coefficients() {
        let (x, y) = halves(50, 6, 1.0);
        let m = fit_ffr(&x, &y, 3, 2).unwrap();
        let k = m.kernel_surface();
        let phi = m.predictor().basis().eval() * m.predictor().eigenfunction_coeffs().columns(0, 3);
        let psi = m.response().basis().eval() * m.response().eigenfunction_coeffs().columns(0, 2);
        let ws = DMatrix::from_diagonal(&DVector::from_column_slice(k.s.weights()));
        let wt = DMatrix::from_diagonal(&DVector::from_column_slice(k.t.weights()));
        let back = psi.transpose() * wt * k.values.transpose() * ws * phi;
        assert!((back - m.coefficients()).abs().max() < 1e-4);
        assert_eq!(*m.predictor().basis().domain(), Domain::closed(0.0, 0.5).unwrap());
    }
}
