//! Grids, quadrature, basis systems and basis-represented curve samples.
//!
//! Every inner product in the crate is the trapezoidal rule on the
//! observation grid, so projections, FPCA scores and prediction errors are
//! mutually consistent. Curves are stored as coefficient vectors against a
//! [`BasisSystem`]; restricting a basis to a sub-interval keeps the
//! coefficients and only drops grid rows, so full-domain and sub-domain
//! objects share one coefficient space.
//!
//! Sub-domain convention: a grid point lying exactly on the split point `τ`
//! belongs to the left block `[0, τ]`; the right block is `(τ, 1]`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, numerical, shape, PfpError, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Placement of equally spaced grid points on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridLayout {
    /// `(j - 1) / (J - 1)`, both endpoints included.
    #[default]
    Closed,
    /// `j / J` for `j = 1..J`.
    RightEndpoints,
    /// `(j - 0.5) / J`.
    Midpoints,
}

/// Ordered evaluation points with trapezoidal quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T: Scalar> {
    points: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    /// `J` equally spaced points covering `[0, 1]` including both endpoints.
    pub fn uniform(j: usize) -> Result<Self> {
        Self::with_layout(j, GridLayout::Closed)
    }

    pub fn with_layout(j: usize, layout: GridLayout) -> Result<Self> {
        if j < 2 {
            return Err(invalid!("a grid needs at least 2 points, got {j}"));
        }
        let jj = T::from_usize_lossy(j);
        let points = (0..j)
            .map(|i| {
                let i = T::from_usize_lossy(i);
                match layout {
                    GridLayout::Closed => i / T::from_usize_lossy(j - 1),
                    GridLayout::RightEndpoints => (i + T::one()) / jj,
                    GridLayout::Midpoints => (i + T::lit(0.5)) / jj,
                }
            })
            .collect();
        Self::from_points(points)
    }

    /// Builds a grid from explicit points, which must be strictly increasing
    /// and lie in `[0, 1]`.
    pub fn from_points(points: Vec<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid!("a grid needs at least 2 points, got {}", points.len()));
        }
        if points.iter().any(|p| !p.is_finite() || *p < T::zero() || *p > T::one()) {
            return Err(invalid!("grid points must lie in [0, 1]"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid!("grid points must be strictly increasing"));
        }
        let weights = trapezoid_weights(&points);
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Length of the interval spanned by the grid.
    pub fn span(&self) -> T {
        self.points[self.points.len() - 1] - self.points[0]
    }

    pub fn integrate(&self, f: &[T]) -> Result<T> {
        if f.len() != self.len() {
            return Err(shape!("function has {} values on a {}-point grid", f.len(), self.len()));
        }
        Ok(self.weights.iter().zip(f).fold(T::zero(), |acc, (&w, &v)| acc + w * v))
    }

    /// `⟨f, g⟩ = Σ_j w_j f(t_j) g(t_j)`.
    pub fn inner_product(&self, f: &[T], g: &[T]) -> Result<T> {
        if f.len() != self.len() || g.len() != self.len() {
            return Err(shape!(
                "inner product of {}- and {}-point curves on a {}-point grid",
                f.len(),
                g.len(),
                self.len()
            ));
        }
        Ok(self
            .weights
            .iter()
            .zip(f.iter().zip(g))
            .fold(T::zero(), |acc, (&w, (&a, &b))| acc + w * a * b))
    }

    /// Indices of the grid points that fall inside `domain`.
    pub fn indices_in(&self, domain: &Domain<T>) -> Vec<usize> {
        (0..self.len()).filter(|&i| domain.contains(self.points[i])).collect()
    }

    /// Sub-grid on `domain`, with weights recomputed by the trapezoid rule.
    pub fn restrict(&self, domain: &Domain<T>) -> Result<(Self, Vec<usize>)> {
        let idx = self.indices_in(domain);
        if idx.len() < 2 {
            return Err(invalid!(
                "sub-domain {domain} contains {} grid point(s); at least 2 are required",
                idx.len()
            ));
        }
        let points = idx.iter().map(|&i| self.points[i]).collect();
        Ok((Self::from_points(points)?, idx))
    }
}

fn trapezoid_weights<T: Scalar>(points: &[T]) -> Vec<T> {
    let n = points.len();
    let half = T::lit(0.5);
    (0..n)
        .map(|i| {
            let left = if i > 0 { points[i] - points[i - 1] } else { T::zero() };
            let right = if i + 1 < n { points[i + 1] - points[i] } else { T::zero() };
            half * (left + right)
        })
        .collect()
}

/// Sub-interval of `[0, 1]`, optionally open on the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain<T: Scalar> {
    pub lo: T,
    pub hi: T,
    pub lo_open: bool,
}

impl<T: Scalar> Domain<T> {
    pub fn full() -> Self {
        Self { lo: T::zero(), hi: T::one(), lo_open: false }
    }

    pub fn closed(lo: T, hi: T) -> Result<Self> {
        Self::checked(lo, hi, false)
    }

    /// `(lo, hi]`.
    pub fn left_open(lo: T, hi: T) -> Result<Self> {
        Self::checked(lo, hi, true)
    }

    fn checked(lo: T, hi: T, lo_open: bool) -> Result<Self> {
        if !(lo >= T::zero() && lo < hi && hi <= T::one()) {
            return Err(invalid!("domain bounds must satisfy 0 <= lo < hi <= 1, got [{lo}, {hi}]"));
        }
        Ok(Self { lo, hi, lo_open })
    }

    /// `[0, τ]` and `(τ, 1]`.
    pub fn split(tau: T) -> Result<(Self, Self)> {
        if !(tau > T::zero() && tau < T::one()) {
            return Err(invalid!("split point must lie in (0, 1), got {tau}"));
        }
        Ok((Self::closed(T::zero(), tau)?, Self::left_open(tau, T::one())?))
    }

    pub fn contains(&self, t: T) -> bool {
        let above = if self.lo_open { t > self.lo } else { t >= self.lo };
        above && t <= self.hi
    }

    pub fn is_full(&self) -> bool {
        self.lo == T::zero() && self.hi == T::one() && !self.lo_open
    }

    pub fn length(&self) -> T {
        self.hi - self.lo
    }
}

impl<T: Scalar> std::fmt::Display for Domain<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let open = if self.lo_open { "(" } else { "[" };
        write!(f, "{open}{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Fourier,
    CubicBSpline,
    /// Arbitrary functions given by their grid values.
    Tabulated,
}

impl std::str::FromStr for BasisKind {
    type Err = PfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fourier" => Ok(Self::Fourier),
            "bspline" | "b-spline" | "cubic-bspline" => Ok(Self::CubicBSpline),
            other => Err(invalid!("unknown basis kind `{other}`")),
        }
    }
}

/// Basis functions tabulated on a grid, together with their Gram matrix.
#[derive(Debug, Clone)]
pub struct BasisSystem<T: Scalar> {
    kind: BasisKind,
    grid: Grid<T>,
    domain: Domain<T>,
    eval: DMatrix<T>,
    gram: DMatrix<T>,
    /// `gram⁻¹ evalᵀ Q`, the quadrature-weighted least-squares projector.
    projector: DMatrix<T>,
}

impl<T: Scalar> BasisSystem<T> {
    pub fn new(kind: BasisKind, grid: Grid<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid!("basis dimension must be positive"));
        }
        let eval = match kind {
            BasisKind::Fourier => fourier_eval(grid.points(), dim),
            BasisKind::CubicBSpline => bspline_eval(grid.points(), dim)?,
            BasisKind::Tabulated => return Err(invalid!("tabulated bases are built from their values")),
        };
        Self::from_parts(kind, grid, Domain::full(), eval)
    }

    pub fn fourier(grid: Grid<T>, dim: usize) -> Result<Self> {
        Self::new(BasisKind::Fourier, grid, dim)
    }

    pub fn bspline(grid: Grid<T>, dim: usize) -> Result<Self> {
        Self::new(BasisKind::CubicBSpline, grid, dim)
    }

    /// Basis whose `j`-th function takes the values in column `j` of `eval`.
    pub fn tabulated(grid: Grid<T>, eval: DMatrix<T>) -> Result<Self> {
        if eval.nrows() != grid.len() || eval.ncols() == 0 {
            return Err(shape!("{}×{} table for a {}-point grid", eval.nrows(), eval.ncols(), grid.len()));
        }
        Self::from_parts(BasisKind::Tabulated, grid, Domain::full(), eval)
    }

    fn from_parts(kind: BasisKind, grid: Grid<T>, domain: Domain<T>, eval: DMatrix<T>) -> Result<Self> {
        let dim = eval.ncols();
        if dim > grid.len() {
            return Err(invalid!("basis dimension {dim} exceeds the {} grid points", grid.len()));
        }
        let q = DMatrix::from_diagonal(&DVector::from_column_slice(grid.weights()));
        let eq = eval.transpose() * &q;
        let gram = &eq * &eval;
        let projector = linalg::solve_spd(&gram, &eq)
            .map_err(|e| numerical!("rank-deficient basis evaluation matrix: {e}"))?;
        Ok(Self { kind, grid, domain, eval, gram, projector })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.eval.ncols()
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    /// `J × D` matrix of basis values at the grid points.
    pub fn eval(&self) -> &DMatrix<T> {
        &self.eval
    }

    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    /// Basis restricted to a sub-domain; the Gram matrix is recomputed there.
    pub fn restrict(&self, domain: &Domain<T>) -> Result<Self> {
        if !(domain.lo >= self.domain.lo && domain.hi <= self.domain.hi) {
            return Err(invalid!("{domain} is not inside the basis domain {}", self.domain));
        }
        let (grid, idx) = self.grid.restrict(domain)?;
        let eval = self.eval.select_rows(idx.iter());
        Self::from_parts(self.kind, grid, *domain, eval)
    }

    /// Values of the curve with coefficients `coeffs` at the grid points.
    pub fn evaluate(&self, coeffs: &DVector<T>) -> DVector<T> {
        &self.eval * coeffs
    }

    /// Least-squares coefficients of grid values under the quadrature inner product.
    pub fn project(&self, values: &[T]) -> Result<DVector<T>> {
        if values.len() != self.grid.len() {
            return Err(shape!("{} values on a {}-point basis grid", values.len(), self.grid.len()));
        }
        Ok(&self.projector * DVector::from_column_slice(values))
    }

    /// Same kind, grid and domain.
    pub fn compatible(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.dim() == other.dim()
            && self.domain == other.domain
            && self.grid.points() == other.grid.points()
    }
}

fn fourier_eval<T: Scalar>(points: &[T], dim: usize) -> DMatrix<T> {
    let root2 = T::lit(2.0).sqrt();
    let two_pi = T::two_pi();
    DMatrix::from_fn(points.len(), dim, |r, c| {
        let t = points[r];
        if c == 0 {
            return T::one();
        }
        let m = T::from_usize_lossy(c.div_ceil(2));
        if c % 2 == 1 {
            root2 * (two_pi * m * t).sin()
        } else {
            root2 * (two_pi * m * t).cos()
        }
    })
}

/// Cubic B-splines on `[0, 1]` with `dim - 4` equally spaced interior knots.
fn bspline_eval<T: Scalar>(points: &[T], dim: usize) -> Result<DMatrix<T>> {
    const ORDER: usize = 4;
    if dim < ORDER {
        return Err(invalid!("a cubic B-spline basis needs at least 4 functions, got {dim}"));
    }
    let interior = dim - ORDER;
    let mut knots = vec![T::zero(); ORDER];
    for i in 1..=interior {
        knots.push(T::from_usize_lossy(i) / T::from_usize_lossy(interior + 1));
    }
    knots.extend(std::iter::repeat_n(T::one(), ORDER));

    let mut out = DMatrix::zeros(points.len(), dim);
    for (r, &t) in points.iter().enumerate() {
        // index of the knot span holding t; t = 1 belongs to the last span
        let span = if t >= T::one() {
            dim - 1
        } else {
            (ORDER - 1..dim).rfind(|&i| knots[i] <= t).unwrap_or(ORDER - 1)
        };
        // Cox-de Boor triangle for the ORDER non-zero functions on the span
        let mut n = [T::zero(); ORDER];
        n[0] = T::one();
        let mut left = [T::zero(); ORDER];
        let mut right = [T::zero(); ORDER];
        for j in 1..ORDER {
            left[j] = t - knots[span + 1 - j];
            right[j] = knots[span + j] - t;
            let mut saved = T::zero();
            for k in 0..j {
                let denom = right[k + 1] + left[j - k];
                let tmp = if denom > T::zero() { n[k] / denom } else { T::zero() };
                n[k] = saved + right[k + 1] * tmp;
                saved = left[j - k] * tmp;
            }
            n[j] = saved;
        }
        for (k, &v) in n.iter().enumerate() {
            out[(r, span + 1 - ORDER + k)] = v;
        }
    }
    Ok(out)
}

/// Raw curve observations on a common grid, one curve per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSample<T: Scalar> {
    grid: Grid<T>,
    values: DMatrix<T>,
}

impl<T: Scalar> DiscreteSample<T> {
    pub fn new(grid: Grid<T>, values: DMatrix<T>) -> Result<Self> {
        if values.ncols() != grid.len() {
            return Err(shape!("{} columns for a {}-point grid", values.ncols(), grid.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid!("sample contains non-finite values"));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    pub fn n_curves(&self) -> usize {
        self.values.nrows()
    }

    pub fn row(&self, k: usize) -> Vec<T> {
        self.values.row(k).iter().copied().collect()
    }

    /// Rows concatenated in time order.
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.values.len());
        for r in 0..self.values.nrows() {
            out.extend(self.values.row(r).iter().copied());
        }
        out
    }

    pub fn select_rows(&self, rows: std::ops::Range<usize>) -> Result<Self> {
        if rows.end > self.n_curves() || rows.start >= rows.end {
            return Err(invalid!("row range {rows:?} outside 0..{}", self.n_curves()));
        }
        let values = self.values.rows(rows.start, rows.len()).into_owned();
        Ok(Self { grid: self.grid.clone(), values })
    }
}

/// A single curve in basis coordinates.
#[derive(Debug, Clone)]
pub struct Curve<T: Scalar> {
    basis: Arc<BasisSystem<T>>,
    coeffs: DVector<T>,
}

impl<T: Scalar> Curve<T> {
    pub fn new(basis: Arc<BasisSystem<T>>, coeffs: DVector<T>) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return Err(shape!("{} coefficients for a {}-dimensional basis", coeffs.len(), basis.dim()));
        }
        Ok(Self { basis, coeffs })
    }

    /// Least-squares fit of grid values onto `basis`.
    pub fn from_values(basis: Arc<BasisSystem<T>>, values: &[T]) -> Result<Self> {
        let coeffs = basis.project(values)?;
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<BasisSystem<T>> {
        &self.basis
    }

    pub fn coeffs(&self) -> &DVector<T> {
        &self.coeffs
    }

    pub fn domain(&self) -> &Domain<T> {
        self.basis.domain()
    }

    pub fn values(&self) -> DVector<T> {
        self.basis.evaluate(&self.coeffs)
    }

    pub fn restrict_to(&self, basis: &Arc<BasisSystem<T>>) -> Result<Self> {
        if basis.dim() != self.basis.dim() || basis.kind() != self.basis.kind() {
            return Err(shape!("target basis does not share the coefficient space"));
        }
        Ok(Self { basis: Arc::clone(basis), coeffs: self.coeffs.clone() })
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        if !self.basis.compatible(&other.basis) {
            return Err(shape!("curves live on different grids or domains"));
        }
        Ok((self.coeffs.transpose() * self.basis.gram() * &other.coeffs)[(0, 0)])
    }

    pub fn norm_squared(&self) -> T {
        (self.coeffs.transpose() * self.basis.gram() * &self.coeffs)[(0, 0)]
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.basis.compatible(&other.basis) {
            return Err(shape!("curves live on different grids or domains"));
        }
        Ok(Self { basis: Arc::clone(&self.basis), coeffs: &self.coeffs - &other.coeffs })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.basis.compatible(&other.basis) {
            return Err(shape!("curves live on different grids or domains"));
        }
        Ok(Self { basis: Arc::clone(&self.basis), coeffs: &self.coeffs + &other.coeffs })
    }
}

/// `n` curves stored as coefficient rows against a shared basis.
#[derive(Debug, Clone)]
pub struct FunctionalSeries<T: Scalar> {
    basis: Arc<BasisSystem<T>>,
    coeffs: DMatrix<T>,
}

impl<T: Scalar> FunctionalSeries<T> {
    pub fn new(basis: Arc<BasisSystem<T>>, coeffs: DMatrix<T>) -> Result<Self> {
        if coeffs.ncols() != basis.dim() {
            return Err(shape!("{} coefficient columns for a {}-dimensional basis", coeffs.ncols(), basis.dim()));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(invalid!("non-finite basis coefficients"));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn from_curves(basis: Arc<BasisSystem<T>>, curves: &[DVector<T>]) -> Result<Self> {
        let d = basis.dim();
        if curves.iter().any(|c| c.len() != d) {
            return Err(shape!("curve coefficients must have length {d}"));
        }
        let coeffs = DMatrix::from_fn(curves.len(), d, |r, c| curves[r][c]);
        Self::new(basis, coeffs)
    }

    pub fn basis(&self) -> &Arc<BasisSystem<T>> {
        &self.basis
    }

    pub fn coeffs(&self) -> &DMatrix<T> {
        &self.coeffs
    }

    pub fn domain(&self) -> &Domain<T> {
        self.basis.domain()
    }

    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.nrows() == 0
    }

    pub fn curve(&self, k: usize) -> Curve<T> {
        Curve { basis: Arc::clone(&self.basis), coeffs: self.coeffs.row(k).transpose() }
    }

    /// `n × J` matrix of curve values at the grid points.
    pub fn evaluate(&self) -> DMatrix<T> {
        &self.coeffs * self.basis.eval().transpose()
    }

    pub fn to_sample(&self) -> Result<DiscreteSample<T>> {
        DiscreteSample::new(self.basis.grid().clone(), self.evaluate())
    }

    /// Consecutive curves `rows`.
    pub fn window(&self, rows: std::ops::Range<usize>) -> Result<Self> {
        if rows.end > self.len() || rows.start > rows.end {
            return Err(invalid!("curve range {rows:?} outside 0..{}", self.len()));
        }
        Ok(Self {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.rows(rows.start, rows.len()).into_owned(),
        })
    }

    /// Same coefficients seen through `basis`, a restriction of this series' basis.
    pub fn with_basis(&self, basis: &Arc<BasisSystem<T>>) -> Result<Self> {
        if basis.dim() != self.basis.dim() || basis.kind() != self.basis.kind() {
            return Err(shape!("target basis does not share the coefficient space"));
        }
        Ok(Self { basis: Arc::clone(basis), coeffs: self.coeffs.clone() })
    }

    /// Inner products `⟨Y_a, Y_b⟩` over the series' domain.
    pub fn inner_products(&self) -> DMatrix<T> {
        &self.coeffs * self.basis.gram() * self.coeffs.transpose()
    }
}

/// Least-squares projection of every raw curve onto `basis`.
///
/// Returns the smoothed series and the pre-smoothing residuals
/// `raw(t_j) - smooth(t_j)`, which are orthogonal to every basis function
/// under the quadrature inner product.
pub fn smooth<T: Scalar>(
    raw: &DiscreteSample<T>,
    basis: &Arc<BasisSystem<T>>,
) -> Result<(FunctionalSeries<T>, DiscreteSample<T>)> {
    if raw.grid().points() != basis.grid().points() {
        return Err(shape!("raw sample grid does not match the basis grid"));
    }
    let coeffs = raw.values() * basis.projector.transpose();
    let fitted = &coeffs * basis.eval().transpose();
    let residuals = raw.values() - fitted;
    let series = FunctionalSeries::new(Arc::clone(basis), coeffs)?;
    Ok((series, DiscreteSample::new(raw.grid().clone(), residuals)?))
}

/// Restriction of a series to the closed sub-interval `[lo, hi]`.
pub fn restrict<T: Scalar>(series: &FunctionalSeries<T>, lo: T, hi: T) -> Result<FunctionalSeries<T>> {
    restrict_to(series, &Domain::closed(lo, hi)?)
}

pub fn restrict_to<T: Scalar>(series: &FunctionalSeries<T>, domain: &Domain<T>) -> Result<FunctionalSeries<T>> {
    if domain == series.domain() {
        return Ok(series.clone());
    }
    let basis = Arc::new(series.basis.restrict(domain)?);
    series.with_basis(&basis)
}

/// Left `[0, τ]` and right `(τ, 1]` bases of a full-domain basis.
pub fn split_basis<T: Scalar>(
    basis: &BasisSystem<T>,
    tau: T,
) -> Result<(Arc<BasisSystem<T>>, Arc<BasisSystem<T>>)> {
    let (left, right) = Domain::split(tau)?;
    Ok((Arc::new(basis.restrict(&left)?), Arc::new(basis.restrict(&right)?)))
}

/// Removes the pointwise sample mean; returns the centered series and the mean.
pub fn center<T: Scalar>(series: &FunctionalSeries<T>) -> Result<(FunctionalSeries<T>, Curve<T>)> {
    if series.is_empty() {
        return Err(invalid!("cannot center an empty series"));
    }
    let mean = mean_coeffs(series.coeffs());
    let mut centered = series.coeffs.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    Ok((
        FunctionalSeries { basis: Arc::clone(&series.basis), coeffs: centered },
        Curve { basis: Arc::clone(&series.basis), coeffs: mean },
    ))
}

pub(crate) fn mean_coeffs<T: Scalar>(coeffs: &DMatrix<T>) -> DVector<T> {
    let n = T::from_usize_lossy(coeffs.nrows().max(1));
    coeffs.row_sum().transpose() / n
}

/// Elementwise square root of a nonnegative sample.
pub fn sqrt_transform<T: Scalar>(raw: &DiscreteSample<T>) -> Result<DiscreteSample<T>> {
    if let Some(v) = raw.values().iter().find(|v| **v < T::zero()) {
        return Err(PfpError::Domain(format!("square root of negative value {v}")));
    }
    DiscreteSample::new(raw.grid().clone(), raw.values().map(|v| v.sqrt()))
}
