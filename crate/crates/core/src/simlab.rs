//! Simulation laboratory: FAR processes in a Fourier basis, AR(1)
//! measurement error, and the sliding-window evaluation protocols.
//!
//! Every replication draws from its own ChaCha stream keyed by the master
//! seed, the replication index and the purpose of the draw, so reports do
//! not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::arma::fit_ar;
use crate::bootstrap::{averaged_score, ffr_bands, mean_width, pfp_bands, pooled_coverage, BootstrapConfig};
use crate::error::{invalid, numerical, shape, PfpError, Result};
use crate::far::{select_far, sliding_residuals_many, FarSpec};
use crate::ffr::{fit_ffr, select_dims, FfrPair};
use crate::funkdata::{split_basis, BasisSystem, Curve, DiscreteSample, Domain, FunctionalSeries, Grid};
use crate::linalg;
use crate::pfp::{moving_block_predict, pfp_fit, pfp_fit_noisy, PfpConfig};
use crate::scalar::{self, Scalar};
pub use crate::io::format_fixed;

/// Innovation standard deviations across the basis functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SigmaProfile {
    /// `σ_j = 1/j`.
    Harmonic,
    /// `σ_j = 1.2^{-j}`.
    Geometric,
}

impl SigmaProfile {
    pub fn values<T: Scalar>(self, d: usize) -> Vec<T> {
        (1..=d)
            .map(|j| match self {
                Self::Harmonic => T::one() / T::from_usize_lossy(j),
                Self::Geometric => T::lit(1.2f64.powi(-(j as i32))),
            })
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Harmonic => "sigma1",
            Self::Geometric => "sigma2",
        }
    }
}

impl FromStr for SigmaProfile {
    type Err = PfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigma1" | "1" | "harmonic" => Ok(Self::Harmonic),
            "sigma2" | "2" | "geometric" => Ok(Self::Geometric),
            other => Err(PfpError::Parse(format!("unknown sigma profile '{other}'"))),
        }
    }
}

/// Matrix norm used to scale a random operator to size `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorNorm {
    Spectral,
    Frobenius,
}

impl FromStr for OperatorNorm {
    type Err = PfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spectral" | "l2" | "2" => Ok(Self::Spectral),
            "frobenius" | "fro" => Ok(Self::Frobenius),
            other => Err(PfpError::Parse(format!("unknown operator norm '{other}'"))),
        }
    }
}

/// Which protocol `run` executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// PFP against FAR-only, regression-only and moving-block prediction.
    Forecast,
    /// Joint `(p, d, dx, dy)` selection against the grid-minimal error.
    Joint,
    /// Rough curves with AR(1) measurement error.
    Noisy,
    /// Bootstrap bands, interval scores and widths.
    Bands,
}

impl FromStr for Protocol {
    type Err = PfpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "forecast" | "table1" => Ok(Self::Forecast),
            "joint" | "table2" => Ok(Self::Joint),
            "noisy" | "table3" => Ok(Self::Noisy),
            "bands" | "bootstrap" | "table4" | "table5" => Ok(Self::Bands),
            other => Err(PfpError::Parse(format!("unknown protocol '{other}'"))),
        }
    }
}

/// One simulated design point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    pub profile: SigmaProfile,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl Setting {
    pub fn new(profile: SigmaProfile, kappa1: f64, kappa2: f64) -> Self {
        Self { profile, kappa1, kappa2 }
    }

    /// The five `(κ1, κ2)` pairs of the benchmark tables for one profile.
    pub fn benchmark(profile: SigmaProfile) -> Vec<Self> {
        [(1.8, 0.0), (0.8, 0.0), (0.2, 0.0), (0.4, 0.4), (0.0, 0.8)]
            .into_iter()
            .map(|(k1, k2)| Self::new(profile, k1, k2))
            .collect()
    }

    fn labels(&self) -> Vec<String> {
        vec![self.profile.name().to_string(), format!("{:.1}", self.kappa1), format!("{:.1}", self.kappa2)]
    }
}

/// Simulation and protocol settings. Defaults follow the benchmark design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Fourier basis dimension `D`.
    pub dim: usize,
    /// Grid size `J`.
    pub grid_points: usize,
    pub n_curves: usize,
    pub burn_in: usize,
    pub settings: Vec<Setting>,
    pub norm: OperatorNorm,
    /// Redraw operators until the companion spectral radius is below one.
    pub require_stationary: bool,
    pub tau: f64,
    /// Sliding window `n₁`.
    pub window: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub replications: usize,
    pub seed: u64,
    pub orders: RangeInclusive<usize>,
    pub dims: RangeInclusive<usize>,
    /// Regression dimensions, or their upper bounds when `select_dims` is set.
    pub dx: usize,
    pub dy: usize,
    pub select_dims: bool,
    /// AR(1) coefficient of the measurement error.
    pub phi: f64,
    /// Marginal standard deviation of the measurement error.
    pub sigma_e: f64,
    pub horizon: usize,
    pub q_max: usize,
    /// Number of trailing raw values the direct AR competitor is fitted on.
    pub arima_history: usize,
    pub arima_q_max: usize,
    pub bootstrap_replicates: usize,
    pub alpha: f64,
    pub var_threshold: f64,
    pub bootstrap_noise: bool,
    pub protocol: Protocol,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dim: 15,
            grid_points: 48,
            n_curves: 400,
            burn_in: 100,
            settings: vec![Setting::new(SigmaProfile::Harmonic, 1.8, 0.0)],
            norm: OperatorNorm::Spectral,
            require_stationary: true,
            tau: 0.5,
            window: 200,
            n_train: 180,
            n_test: 20,
            replications: 100,
            seed: 1,
            orders: 1..=2,
            dims: 1..=15,
            dx: 12,
            dy: 12,
            select_dims: false,
            phi: 0.5,
            sigma_e: 0.2,
            horizon: 5,
            q_max: 10,
            arima_history: 4800,
            arima_q_max: 20,
            bootstrap_replicates: 1000,
            alpha: 0.05,
            var_threshold: 0.8,
            bootstrap_noise: true,
            protocol: Protocol::Forecast,
        }
    }
}

fn parse_num<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value.trim().parse().map_err(|_| PfpError::Parse(format!("bad value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(PfpError::Parse(format!("bad boolean '{value}' for '{key}'"))),
    }
}

fn parse_range(key: &str, value: &str) -> Result<RangeInclusive<usize>> {
    let v = value.trim();
    let (a, b) = v
        .split_once("..=")
        .or_else(|| v.split_once('-'))
        .or_else(|| v.split_once(':'))
        .unwrap_or((v, v));
    let lo: usize = parse_num(key, a)?;
    let hi: usize = parse_num(key, b)?;
    if lo > hi {
        return Err(PfpError::Parse(format!("empty range '{value}' for '{key}'")));
    }
    Ok(lo..=hi)
}

/// Prefix of environment variables that override configuration keys.
pub const ENV_PREFIX: &str = "PFP_";

impl SimConfig {
    /// Sets one key. Keys are case-insensitive; see the README for the list.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = key.trim().to_ascii_lowercase();
        match k.as_str() {
            "dim" => self.dim = parse_num(&k, value)?,
            "grid_points" => self.grid_points = parse_num(&k, value)?,
            "n_curves" => self.n_curves = parse_num(&k, value)?,
            "burn_in" => self.burn_in = parse_num(&k, value)?,
            "sigma" | "kappa" => {
                let (profiles, kappas) = self.setting_axes();
                let (profiles, kappas) = if k == "sigma" {
                    let p = value.split(',').map(SigmaProfile::from_str).collect::<Result<Vec<_>>>()?;
                    (p, kappas)
                } else if value.trim().eq_ignore_ascii_case("benchmark") {
                    let b = Setting::benchmark(SigmaProfile::Harmonic);
                    (profiles, b.iter().map(|s| (s.kappa1, s.kappa2)).collect())
                } else {
                    let ks = value
                        .split(',')
                        .map(|pair| {
                            let (a, b) = pair.split_once(':').unwrap_or((pair, "0"));
                            Ok((parse_num(&k, a)?, parse_num(&k, b)?))
                        })
                        .collect::<Result<Vec<(f64, f64)>>>()?;
                    (profiles, ks)
                };
                self.settings = profiles
                    .iter()
                    .flat_map(|&p| kappas.iter().map(move |&(a, b)| Setting::new(p, a, b)))
                    .collect();
            }
            "norm" => self.norm = value.parse()?,
            "require_stationary" => self.require_stationary = parse_bool(&k, value)?,
            "tau" => self.tau = parse_num(&k, value)?,
            "window" => self.window = parse_num(&k, value)?,
            "n_train" => self.n_train = parse_num(&k, value)?,
            "n_test" => self.n_test = parse_num(&k, value)?,
            "replications" => self.replications = parse_num(&k, value)?,
            "seed" => self.seed = parse_num(&k, value)?,
            "orders" => self.orders = parse_range(&k, value)?,
            "dims" => self.dims = parse_range(&k, value)?,
            "dx" => self.dx = parse_num(&k, value)?,
            "dy" => self.dy = parse_num(&k, value)?,
            "select_dims" => self.select_dims = parse_bool(&k, value)?,
            "phi" => self.phi = parse_num(&k, value)?,
            "sigma_e" => self.sigma_e = parse_num(&k, value)?,
            "horizon" => self.horizon = parse_num(&k, value)?,
            "q_max" => self.q_max = parse_num(&k, value)?,
            "arima_history" => self.arima_history = parse_num(&k, value)?,
            "arima_q_max" => self.arima_q_max = parse_num(&k, value)?,
            "bootstrap_replicates" => self.bootstrap_replicates = parse_num(&k, value)?,
            "alpha" => self.alpha = parse_num(&k, value)?,
            "var_threshold" => self.var_threshold = parse_num(&k, value)?,
            "bootstrap_noise" => self.bootstrap_noise = parse_bool(&k, value)?,
            "protocol" => self.protocol = value.parse()?,
            _ => return Err(PfpError::Parse(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    fn setting_axes(&self) -> (Vec<SigmaProfile>, Vec<(f64, f64)>) {
        let mut profiles: Vec<SigmaProfile> = Vec::new();
        let mut kappas: Vec<(f64, f64)> = Vec::new();
        for s in &self.settings {
            if !profiles.contains(&s.profile) {
                profiles.push(s.profile);
            }
            if !kappas.contains(&(s.kappa1, s.kappa2)) {
                kappas.push((s.kappa1, s.kappa2));
            }
        }
        (profiles, kappas)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| PfpError::Parse(format!("line {}: expected key = value", no + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Defaults overridden by a configuration text.
    pub fn from_str_config(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_str(text)?;
        Ok(cfg)
    }

    /// Applies `PFP_<KEY>` pairs, e.g. `PFP_SEED=7`.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        let mut pairs: Vec<(String, String)> =
            vars.into_iter().filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|s| (s.to_string(), v))).collect();
        pairs.sort();
        for (k, v) in pairs {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("grid_points", self.grid_points),
            ("n_curves", self.n_curves),
            ("window", self.window),
            ("n_train", self.n_train),
            ("n_test", self.n_test),
            ("replications", self.replications),
            ("dx", self.dx),
            ("dy", self.dy),
            ("horizon", self.horizon),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(invalid!("{name} must be positive"));
        }
        if self.settings.is_empty() {
            return Err(invalid!("no simulation settings"));
        }
        if self.settings.iter().any(|s| s.kappa1 < 0.0 || s.kappa2 < 0.0) {
            return Err(invalid!("operator sizes must be nonnegative"));
        }
        if self.window + self.n_train + self.n_test > self.n_curves {
            return Err(invalid!(
                "window {} + training {} + test {} exceeds {} curves",
                self.window,
                self.n_train,
                self.n_test,
                self.n_curves
            ));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid!("tau must lie in (0, 1)"));
        }
        if *self.dims.end() > self.dim || *self.dims.start() == 0 {
            return Err(invalid!("dimension range must lie in 1..={}", self.dim));
        }
        if self.dx > self.dim || self.dy > self.dim {
            return Err(invalid!("regression dimensions must not exceed {}", self.dim));
        }
        if self.phi.abs() >= 1.0 || self.sigma_e < 0.0 {
            return Err(invalid!("measurement error needs |phi| < 1 and sigma_e >= 0"));
        }
        Ok(())
    }

    /// Indices of the curves that receive a sliding-window residual.
    pub fn targets(&self) -> std::ops::Range<usize> {
        self.window..self.window + self.n_train + self.n_test
    }

    pub fn basis<T: Scalar>(&self) -> Result<Arc<BasisSystem<T>>> {
        Ok(Arc::new(BasisSystem::fourier(Grid::uniform(self.grid_points)?, self.dim)?))
    }

    fn pfp_config<T: Scalar>(&self, spec: FarSpec, dx: usize, dy: usize) -> PfpConfig<T> {
        PfpConfig { tau: T::lit(self.tau), spec, dx, dy, window: self.window, n_train: Some(self.n_train) }
    }

    fn bootstrap_config<T: Scalar>(&self, seed: u64) -> BootstrapConfig<T> {
        BootstrapConfig {
            replicates: self.bootstrap_replicates,
            alpha: T::lit(self.alpha),
            var_threshold: T::lit(self.var_threshold),
            seed,
            include_noise: self.bootstrap_noise,
            keep_replicates: false,
        }
    }
}

/// Purposes of random draws within a replication.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    Operator = 0,
    Innovation = 1,
    Noise = 2,
    Bootstrap = 3,
}

/// Random stream for `(seed, replication, purpose)`.
pub fn stream_rng(seed: u64, replication: usize, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((replication as u64) << 4) | purpose as u64);
    rng
}

fn normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Unscaled operator with independent entries `N(0, σ_j σ_j')`.
pub fn raw_operator<T: Scalar, R: Rng + ?Sized>(sigma: &[T], rng: &mut R) -> DMatrix<T> {
    let mut m = DMatrix::from_fn(sigma.len(), sigma.len(), |i, j| (sigma[i] * sigma[j]).sqrt());
    for v in m.iter_mut() {
        *v *= normal(rng);
    }
    m
}

/// Random `D × D` operator with entries `N(0, σ_j σ_j')`, rescaled so that
/// its `norm` equals `kappa`.
pub fn gen_operator<T: Scalar, R: Rng + ?Sized>(sigma: &[T], kappa: T, norm: OperatorNorm, rng: &mut R) -> DMatrix<T> {
    let d = sigma.len();
    let m = raw_operator(sigma, rng);
    if kappa == T::zero() {
        return DMatrix::zeros(d, d);
    }
    let size = match norm {
        OperatorNorm::Spectral => linalg::spectral_norm(&m),
        OperatorNorm::Frobenius => m.norm(),
    };
    m * (kappa / size)
}

/// Operators `Ψ_1, Ψ_2` of a setting; `Ψ_2` is omitted when `κ2 = 0`.
/// With `require_stationary`, draws repeat until the companion spectral
/// radius is below one.
pub fn draw_operators<T: Scalar, R: Rng + ?Sized>(
    setting: &Setting,
    dim: usize,
    norm: OperatorNorm,
    require_stationary: bool,
    rng: &mut R,
) -> Result<Vec<DMatrix<T>>> {
    let sigma = setting.profile.values::<T>(dim);
    for _ in 0..10_000 {
        let mut ops = vec![gen_operator(&sigma, T::lit(setting.kappa1), norm, rng)];
        if setting.kappa2 > 0.0 {
            ops.push(gen_operator(&sigma, T::lit(setting.kappa2), norm, rng));
        }
        if !require_stationary || linalg::spectral_radius(&linalg::companion(&ops)) < T::one() {
            return Ok(ops);
        }
    }
    Err(numerical!("no stationary operator drawn for κ1 = {}, κ2 = {}", setting.kappa1, setting.kappa2))
}

/// `c_k = Σ_l Ψ_l c_{k−l} + a_k` with `a_{kj} ~ N(0, σ_j²)`, started at zero;
/// the first `burn_in` curves are discarded.
pub fn simulate_far<T: Scalar, R: Rng + ?Sized>(
    operators: &[DMatrix<T>],
    sigma: &[T],
    n: usize,
    burn_in: usize,
    basis: &Arc<BasisSystem<T>>,
    rng: &mut R,
) -> Result<FunctionalSeries<T>> {
    let d = sigma.len();
    if d != basis.dim() || operators.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(shape!("operators and innovation scales must match the basis dimension {}", basis.dim()));
    }
    if !operators.is_empty() && linalg::spectral_radius(&linalg::companion(operators)) >= T::one() {
        log::warn!("simulated FAR operator is not stationary");
    }
    let p = operators.len();
    let mut hist: Vec<DVector<T>> = vec![DVector::zeros(d); p];
    let mut out = DMatrix::zeros(n, d);
    for k in 0..burn_in + n {
        let mut c = DVector::from_fn(d, |j, _| sigma[j] * normal::<T, _>(rng));
        for (l, op) in operators.iter().enumerate() {
            c += op * &hist[hist.len() - 1 - l];
        }
        if k >= burn_in {
            out.set_row(k - burn_in, &c.transpose());
        }
        hist.push(c);
        if hist.len() > p.max(1) {
            hist.remove(0);
        }
    }
    FunctionalSeries::new(Arc::clone(basis), out)
}

/// Adds a stationary AR(1) sequence with coefficient `phi` and marginal
/// standard deviation `sigma_e`, running through the curves in time order.
pub fn add_ar1_error<T: Scalar, R: Rng + ?Sized>(
    sample: &DiscreteSample<T>,
    phi: T,
    sigma_e: T,
    rng: &mut R,
) -> Result<DiscreteSample<T>> {
    if phi.abs() >= T::one() {
        return Err(invalid!("AR(1) coefficient must satisfy |phi| < 1"));
    }
    if sigma_e < T::zero() {
        return Err(invalid!("error standard deviation must be nonnegative"));
    }
    let scale = sigma_e * (T::one() - phi * phi).sqrt();
    let mut x = sigma_e * normal::<T, _>(rng);
    let mut values = sample.values().clone();
    for k in 0..values.nrows() {
        for j in 0..values.ncols() {
            values[(k, j)] += x;
            x = phi * x + scale * normal::<T, _>(rng);
        }
    }
    DiscreteSample::new(sample.grid().clone(), values)
}

/// `∫_{(τ,1]} (y − ŷ)²` by the trapezoid rule on the given `(τ, 1]` grid.
pub fn pmse_values<T: Scalar>(grid: &Grid<T>, truth: &[T], prediction: &[T]) -> Result<T> {
    if truth.len() != grid.len() || prediction.len() != grid.len() {
        return Err(shape!("{} and {} values for {} grid points", truth.len(), prediction.len(), grid.len()));
    }
    let sq: Vec<T> = truth.iter().zip(prediction).map(|(&a, &b)| (a - b) * (a - b)).collect();
    grid.integrate(&sq)
}

/// Integrated squared error over `(τ, 1]` of two curves sharing a
/// coefficient space; either may live on the full or the `(τ, 1]` basis.
pub fn pmse<T: Scalar>(truth: &Curve<T>, prediction: &Curve<T>, tau: T) -> Result<T> {
    let (_, right_dom) = Domain::split(tau)?;
    let (tb, pb) = (truth.basis(), prediction.basis());
    let same_grid = |b: &BasisSystem<T>| b.domain().is_full() || *b.domain() == right_dom;
    if tb.dim() != pb.dim() || tb.kind() != pb.kind() || !same_grid(tb) || !same_grid(pb) {
        return Err(shape!("curves on {} and {} cannot be compared on (τ, 1]", truth.domain(), prediction.domain()));
    }
    let full = if tb.domain().is_full() { tb } else { pb };
    let right = full.restrict(&right_dom)?;
    if tb.grid().points().last() != pb.grid().points().last() {
        return Err(shape!("curves live on different grids"));
    }
    let diff = truth.coeffs() - prediction.coeffs();
    let v = right.evaluate(&diff);
    let sq: Vec<T> = v.iter().map(|&x| x * x).collect();
    right.grid().integrate(&sq)
}

/// Mean over targets of `pmse / (1 − τ)`.
pub fn mipe<T: Scalar>(truths: &[Curve<T>], predictions: &[Curve<T>], tau: T) -> Result<T> {
    if truths.len() != predictions.len() || truths.is_empty() {
        return Err(shape!("{} truths for {} predictions", truths.len(), predictions.len()));
    }
    let v: Vec<T> = truths
        .iter()
        .zip(predictions)
        .map(|(y, p)| Ok(pmse(y, p, tau)? / (T::one() - tau)))
        .collect::<Result<_>>()?;
    Ok(scalar::mean(&v))
}

/// Smooth curves of replication `r` of a setting.
pub fn simulate_replication<T: Scalar>(cfg: &SimConfig, setting: &Setting, r: usize) -> Result<FunctionalSeries<T>> {
    let basis = cfg.basis::<T>()?;
    let mut op_rng = stream_rng(cfg.seed, r, Stream::Operator);
    let ops = draw_operators::<T, _>(setting, cfg.dim, cfg.norm, cfg.require_stationary, &mut op_rng)?;
    let mut rng = stream_rng(cfg.seed, r, Stream::Innovation);
    simulate_far(&ops, &setting.profile.values::<T>(cfg.dim), cfg.n_curves, cfg.burn_in, &basis, &mut rng)
}

/// Table of averaged results. Every row records how many replications
/// contributed to it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub title: String,
    pub label_columns: Vec<String>,
    pub value_columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub replications: usize,
    pub seed: u64,
    /// Messages of failed replications.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    /// Replications that completed for this row.
    pub completed: usize,
}

impl EvaluationReport {
    pub fn new(title: &str, labels: &[&str], values: &[&str], replications: usize, seed: u64) -> Self {
        Self {
            title: title.to_string(),
            label_columns: labels.iter().map(|s| s.to_string()).collect(),
            value_columns: values.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            replications,
            seed,
            failures: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.value_columns.iter().position(|c| c == name)
    }

    /// Value of column `name` in row `row`.
    pub fn value(&self, row: usize, name: &str) -> Option<f64> {
        Some(self.rows.get(row)?.values[self.column(name)?])
    }

    /// CSV with a fixed column order and six-decimal fixed-point values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self
            .label_columns
            .iter()
            .chain(&self.value_columns)
            .map(String::as_str)
            .chain(std::iter::once("replications"))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut cells: Vec<String> = row.labels.clone();
            cells.extend(row.values.iter().map(|v| format_fixed(*v)));
            cells.push(row.completed.to_string());
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Markdown table with a short header.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}\n", self.title);
        let _ = writeln!(out, "Seed {}, {} replications per row.\n", self.seed, self.replications);
        let cols: Vec<&str> = self.label_columns.iter().chain(&self.value_columns).map(String::as_str).collect();
        let _ = writeln!(out, "| {} | completed |", cols.join(" | "));
        let _ = writeln!(out, "|{}---|", "---|".repeat(cols.len()));
        for row in &self.rows {
            let mut cells = row.labels.clone();
            cells.extend(row.values.iter().map(|v| format!("{v:.4}")));
            let _ = writeln!(out, "| {} | {} |", cells.join(" | "), row.completed);
        }
        if !self.failures.is_empty() {
            let _ = writeln!(out, "\n{} failed replications:\n", self.failures.len());
            for f in &self.failures {
                let _ = writeln!(out, "- {f}");
            }
        }
        out
    }
}

/// Six-decimal fixed point; negative zero prints as zero.
fn mean_f64(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        scalar::pairwise_sum(xs) / xs.len() as f64
    }
}

fn run_replications<O: Send>(
    cfg: &SimConfig,
    setting: &Setting,
    f: impl Fn(usize) -> Result<O> + Sync,
    failures: &mut Vec<String>,
) -> Vec<O> {
    let results: Vec<Result<O>> = (0..cfg.replications).into_par_iter().map(&f).collect();
    let mut ok = Vec::with_capacity(results.len());
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(o) => ok.push(o),
            Err(e) => {
                let labels = setting.labels().join("/");
                log::warn!("replication {r} of {labels} failed: {e}");
                failures.push(format!("{labels} replication {r}: {e}"));
            }
        }
    }
    ok
}

/// Per-replication results of the forecast comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastOutcome {
    pub spec: FarSpec,
    pub dx: usize,
    pub dy: usize,
    pub ffpe_pfp: f64,
    pub pmse_pfp: f64,
    pub pmse_ts: f64,
    pub ffpe_r: f64,
    pub pmse_r: f64,
    pub pmse_mb: f64,
}

/// One replication: `(p, d)` chosen by the FAR criterion on the first
/// window, residuals of the following `n_train + n_test` curves, regression
/// trained on the first `n_train` of them and evaluated on the rest.
pub fn forecast_replication<T: Scalar>(cfg: &SimConfig, setting: &Setting, r: usize) -> Result<ForecastOutcome> {
    let series = simulate_replication::<T>(cfg, setting, r)?;
    evaluate_forecast(cfg, &series)
}

/// The forecast comparison on a given series.
pub fn evaluate_forecast<T: Scalar>(cfg: &SimConfig, series: &FunctionalSeries<T>) -> Result<ForecastOutcome> {
    let tau = T::lit(cfg.tau);
    let (spec, _) = select_far(
        &series.window(0..cfg.window)?,
        *cfg.orders.start()..*cfg.orders.end() + 1,
        *cfg.dims.start()..*cfg.dims.end() + 1,
    )?;
    let targets = cfg.targets();
    let (left, right) = split_basis(series.basis(), tau)?;
    let curves_train = series.window(cfg.window..cfg.window + cfg.n_train)?;
    let (dx, dy) = if cfg.select_dims {
        let set = crate::far::sliding_residuals(series, spec, cfg.window, targets.clone())?;
        let train = set.residuals().window(0..cfg.n_train)?;
        let (dx, dy, _) = select_dims(&train.with_basis(&left)?, &train.with_basis(&right)?, cfg.dx, cfg.dy)?;
        (dx, dy)
    } else {
        (cfg.dx, cfg.dy)
    };
    let model = pfp_fit(&series.window(0..targets.end)?, cfg.pfp_config(spec, dx, dy))?;
    let (rdx, rdy) = if cfg.select_dims {
        let (a, b, _) =
            select_dims(&curves_train.with_basis(&left)?, &curves_train.with_basis(&right)?, cfg.dx, cfg.dy)?;
        (a, b)
    } else {
        (cfg.dx, cfg.dy)
    };
    let flr = fit_ffr(&curves_train.with_basis(&left)?, &curves_train.with_basis(&right)?, rdx, rdy)?;
    let left_idx = series.basis().grid().indices_in(left.domain());
    let values = series.evaluate();
    let mut acc = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for i in cfg.n_train..cfg.n_train + cfg.n_test {
        let k = cfg.window + i;
        let truth = series.curve(k);
        let forecast = model.residual_set().predictions().curve(i);
        let partial = Curve::new(Arc::clone(&left), truth.coeffs().clone())?;
        let update = model.update(&forecast, &partial)?;
        acc[0].push(pmse(&truth, &update.combined, tau)?);
        acc[1].push(pmse(&truth, &forecast, tau)?);
        acc[2].push(pmse(&truth, &flr.predict(&partial)?, tau)?);
        let partial_values: Vec<T> = left_idx.iter().map(|&j| values[(k, j)]).collect();
        let mb = moving_block_predict(&series.window(k - cfg.window..k)?, &partial_values, tau, spec)?;
        let truth_right = right.evaluate(truth.coeffs());
        acc[3].push(pmse_values(right.grid(), truth_right.as_slice(), &mb)?);
    }
    let m = |v: &[T]| scalar::mean(v).as_f64();
    Ok(ForecastOutcome {
        spec,
        dx,
        dy,
        ffpe_pfp: model.ffpe().as_f64(),
        pmse_pfp: m(&acc[0]),
        pmse_ts: m(&acc[1]),
        ffpe_r: flr.ffpe().as_f64(),
        pmse_r: m(&acc[2]),
        pmse_mb: m(&acc[3]),
    })
}

fn modal<K: Ord + Copy>(keys: impl Iterator<Item = K>) -> Option<(K, usize)> {
    let mut counts: BTreeMap<K, usize> = BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_default() += 1;
    }
    counts.into_iter().fold(None, |best, (k, c)| match best {
        Some((_, bc)) if bc >= c => best,
        _ => Some((k, c)),
    })
}

/// Forecast comparison over every configured setting.
pub fn run_forecast<T: Scalar>(cfg: &SimConfig) -> Result<EvaluationReport> {
    cfg.validate()?;
    let mut report = EvaluationReport::new(
        "Average fFPE values and prediction errors",
        &["sigma", "kappa1", "kappa2"],
        &["fFPE_PFP", "PMSE_PFP", "PMSE_ts", "fFPE_r", "PMSE_r", "PMSE_mb", "PFP_beats_mb", "p", "d"],
        cfg.replications,
        cfg.seed,
    );
    for setting in &cfg.settings {
        let outs = run_replications(cfg, setting, |r| forecast_replication::<T>(cfg, setting, r), &mut report.failures);
        let col = |f: fn(&ForecastOutcome) -> f64| mean_f64(&outs.iter().map(f).collect::<Vec<_>>());
        let (p, d) = modal(outs.iter().map(|o| (o.spec.p, o.spec.d))).map(|(k, _)| k).unwrap_or((0, 0));
        report.rows.push(ReportRow {
            labels: setting.labels(),
            values: vec![
                col(|o| o.ffpe_pfp),
                col(|o| o.pmse_pfp),
                col(|o| o.pmse_ts),
                col(|o| o.ffpe_r),
                col(|o| o.pmse_r),
                col(|o| o.pmse_mb),
                col(|o| if o.pmse_pfp < o.pmse_mb { 1.0 } else { 0.0 }),
                p as f64,
                d as f64,
            ],
            completed: outs.len(),
        });
    }
    Ok(report)
}

/// A `(p, d, dx, dy)` cell of the joint search.
pub type JointKey = (FarSpec, usize, usize);

/// Per-replication results of the joint selection study: criterion value
/// and mean test error of every cell of [`joint_cells`], `NaN` where the
/// cell was infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcome {
    pub ffpe: Vec<f64>,
    pub pmse: Vec<f64>,
}

impl JointOutcome {
    fn argmin(v: &[f64]) -> Option<usize> {
        v.iter()
            .enumerate()
            .filter(|(_, x)| x.is_finite())
            .fold(None, |best: Option<(usize, f64)>, (i, &x)| match best {
                Some((_, b)) if b <= x => best,
                _ => Some((i, x)),
            })
            .map(|(i, _)| i)
    }

    /// Cell minimizing the criterion in this replication.
    pub fn selected(&self) -> Option<usize> {
        Self::argmin(&self.ffpe)
    }

    /// Cell minimizing the test error in this replication.
    pub fn oracle(&self) -> Option<usize> {
        Self::argmin(&self.pmse)
    }
}

/// Cells of the joint search in evaluation order.
pub fn joint_cells(cfg: &SimConfig) -> Vec<JointKey> {
    let mut out = Vec::new();
    for p in cfg.orders.clone() {
        for d in cfg.dims.clone() {
            for dx in 1..=cfg.dx {
                for dy in 1..=cfg.dy {
                    out.push((FarSpec::new(p, d), dx, dy));
                }
            }
        }
    }
    out
}

/// One replication of the joint study.
pub fn joint_replication<T: Scalar>(cfg: &SimConfig, setting: &Setting, r: usize) -> Result<JointOutcome> {
    let series = simulate_replication::<T>(cfg, setting, r)?;
    evaluate_joint(cfg, &series)
}

/// The joint study on a given series: every cell gets its criterion value
/// and its mean test error.
pub fn evaluate_joint<T: Scalar>(cfg: &SimConfig, series: &FunctionalSeries<T>) -> Result<JointOutcome> {
    let tau = T::lit(cfg.tau);
    let (left, right) = split_basis(series.basis(), tau)?;
    let specs: Vec<FarSpec> =
        cfg.orders.clone().flat_map(|p| cfg.dims.clone().map(move |d| FarSpec::new(p, d))).collect();
    let sets = sliding_residuals_many(series, &specs, cfg.window, cfg.targets())?;
    let test: Vec<usize> = (cfg.n_train..cfg.n_train + cfg.n_test).collect();
    let truths: Vec<DVector<T>> = test.iter().map(|&i| series.coeffs().row(cfg.window + i).transpose()).collect();
    let per_cell = cfg.dx * cfg.dy;
    let mut ffpe = vec![f64::NAN; specs.len() * per_cell];
    let mut pmse_v = vec![f64::NAN; specs.len() * per_cell];
    for (s, set) in sets.iter().enumerate() {
        let Ok(set) = set else { continue };
        let train = set.residuals().window(0..cfg.n_train)?;
        let Ok(pair) = FfrPair::new(&train.with_basis(&left)?, &train.with_basis(&right)?) else { continue };
        for dx in 1..=cfg.dx {
            for dy in 1..=cfg.dy {
                let Ok(m) = pair.fit(dx, dy) else { continue };
                let mut errs = Vec::with_capacity(test.len());
                for (&i, truth) in test.iter().zip(&truths) {
                    let pred = set.predictions().coeffs().row(i).transpose();
                    let combined = &pred + m.predict_coeffs(&(truth - &pred))?;
                    let v = right.evaluate(&(truth - combined));
                    let sq: Vec<T> = v.iter().map(|&x| x * x).collect();
                    errs.push(right.grid().integrate(&sq)?);
                }
                let idx = s * per_cell + (dx - 1) * cfg.dy + (dy - 1);
                ffpe[idx] = m.ffpe().as_f64();
                pmse_v[idx] = scalar::mean(&errs).as_f64();
            }
        }
    }
    if ffpe.iter().all(|v| !v.is_finite()) {
        return Err(invalid!("no feasible cell in the joint grid"));
    }
    Ok(JointOutcome { ffpe, pmse: pmse_v })
}

/// Joint selection study over every configured setting.
///
/// Criterion values and test errors are averaged per cell over the
/// replications; `(p, d, dx, dy)` is the minimizer of the averaged
/// criterion, `fFPE_a`/`PMSE_a` are the averages at that cell and
/// `fFPE_b`/`PMSE_b` those at the minimizer of the averaged error. The
/// `run_*` columns describe the per-replication selections instead: the
/// modal `(p, d)`, its share, and the mean error at each replication's own
/// selected and error-minimizing cells.
pub fn run_joint<T: Scalar>(cfg: &SimConfig) -> Result<EvaluationReport> {
    cfg.validate()?;
    let mut report = EvaluationReport::new(
        "Jointly selected order and dimensions",
        &["sigma", "kappa1", "kappa2"],
        &[
            "p",
            "d",
            "dx",
            "dy",
            "fFPE_a",
            "fFPE_b",
            "PMSE_a",
            "PMSE_b",
            "run_p",
            "run_d",
            "run_share",
            "run_PMSE_a",
            "run_PMSE_b",
        ],
        cfg.replications,
        cfg.seed,
    );
    let cells = joint_cells(cfg);
    for setting in &cfg.settings {
        let outs = run_replications(cfg, setting, |r| joint_replication::<T>(cfg, setting, r), &mut report.failures);
        let avg = |f: fn(&JointOutcome) -> &Vec<f64>, c: usize| {
            let v: Vec<f64> = outs.iter().map(|o| f(o)[c]).collect();
            if v.iter().all(|x| x.is_finite()) {
                mean_f64(&v)
            } else {
                f64::NAN
            }
        };
        let mean_ffpe: Vec<f64> = (0..cells.len()).map(|c| avg(|o| &o.ffpe, c)).collect();
        let mean_pmse: Vec<f64> = (0..cells.len()).map(|c| avg(|o| &o.pmse, c)).collect();
        let a = JointOutcome::argmin(&mean_ffpe);
        let b = JointOutcome::argmin(&mean_pmse);
        let sel: Vec<usize> = outs.iter().filter_map(JointOutcome::selected).collect();
        let run_mode = modal(sel.iter().map(|&c| (cells[c].0.p, cells[c].0.d)));
        let nan = f64::NAN;
        let mut values = match (a, b) {
            (Some(a), Some(b)) => vec![
                cells[a].0.p as f64,
                cells[a].0.d as f64,
                cells[a].1 as f64,
                cells[a].2 as f64,
                mean_ffpe[a],
                mean_ffpe[b],
                mean_pmse[a],
                mean_pmse[b],
            ],
            _ => vec![nan; 8],
        };
        values.extend([
            run_mode.map(|((p, _), _)| p as f64).unwrap_or(nan),
            run_mode.map(|((_, d), _)| d as f64).unwrap_or(nan),
            run_mode.map(|(_, c)| c as f64 / sel.len() as f64).unwrap_or(nan),
            mean_f64(&outs.iter().filter_map(|o| Some(o.pmse[o.selected()?])).collect::<Vec<_>>()),
            mean_f64(&outs.iter().filter_map(|o| Some(o.pmse[o.oracle()?])).collect::<Vec<_>>()),
        ]);
        report.rows.push(ReportRow { labels: setting.labels(), values, completed: outs.len() });
    }
    Ok(report)
}

/// Per-replication squared errors at the first `horizon` grid points after `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyOutcome {
    /// PFP with the AR error correction.
    pub corrected: Vec<f64>,
    /// PFP without it.
    pub smooth: Vec<f64>,
    /// Direct AR forecast of the raw sequence.
    pub direct: Vec<f64>,
}

/// One replication of the noisy study.
pub fn noisy_replication<T: Scalar>(cfg: &SimConfig, setting: &Setting, r: usize) -> Result<NoisyOutcome> {
    let series = simulate_replication::<T>(cfg, setting, r)?;
    let mut rng = stream_rng(cfg.seed, r, Stream::Noise);
    let raw = add_ar1_error(&series.to_sample()?, T::lit(cfg.phi), T::lit(cfg.sigma_e), &mut rng)?;
    evaluate_noisy(cfg, &raw)
}

/// The noisy study on raw curves.
pub fn evaluate_noisy<T: Scalar>(cfg: &SimConfig, raw: &DiscreteSample<T>) -> Result<NoisyOutcome> {
    let basis = cfg.basis::<T>()?;
    let h = cfg.horizon;
    let end = cfg.targets().end;
    let (smooth_series, _) = crate::funkdata::smooth(&raw.select_rows(0..cfg.window)?, &basis)?;
    let (spec, _) = select_far(
        &smooth_series,
        *cfg.orders.start()..*cfg.orders.end() + 1,
        *cfg.dims.start()..*cfg.dims.end() + 1,
    )?;
    let model = pfp_fit_noisy(&raw.select_rows(0..end)?, &basis, cfg.pfp_config(spec, cfg.dx, cfg.dy), cfg.q_max)?;
    let presmooth = model.presmoothing_residuals().expect("noisy fit keeps residuals");
    let j = raw.grid().len();
    let left_idx = basis.grid().indices_in(model.left_basis().domain());
    let right_idx = basis.grid().indices_in(model.right_basis().domain());
    if right_idx.len() < h {
        return Err(invalid!("horizon {h} exceeds the {} grid points after τ", right_idx.len()));
    }
    let flat = raw.flatten();
    let mut sums = [vec![T::zero(); h], vec![T::zero(); h], vec![T::zero(); h]];
    for i in cfg.n_train..cfg.n_train + cfg.n_test {
        let k = cfg.window + i;
        let history = &presmooth[..k * j];
        let ar = fit_ar(history, cfg.q_max)?;
        let forecast = model.residual_set().predictions().curve(i);
        let partial: Vec<T> = left_idx.iter().map(|&c| raw.values()[(k, c)]).collect();
        let pred = model.update_noisy_with(&ar, &forecast, &partial, history, h)?;
        let smooth = pred.combined.values();
        let err = pred.error_part.expect("noisy update carries an error forecast");
        let mut seq: Vec<T> = flat[..k * j].to_vec();
        seq.extend_from_slice(&partial);
        let start = seq.len().saturating_sub(cfg.arima_history);
        let direct_model = fit_ar(&seq[start..], cfg.arima_q_max)?;
        let direct = direct_model.forecast(&seq[start..], h)?;
        for s in 0..h {
            let y = raw.values()[(k, right_idx[s])];
            let e_n = smooth[s] - y;
            let e_c = e_n + err[s];
            let e_a = direct[s] - y;
            sums[0][s] += e_c * e_c;
            sums[1][s] += e_n * e_n;
            sums[2][s] += e_a * e_a;
        }
    }
    let nt = T::from_usize_lossy(cfg.n_test);
    let avg = |v: &[T]| v.iter().map(|&x| (x / nt).as_f64()).collect::<Vec<f64>>();
    Ok(NoisyOutcome { corrected: avg(&sums[0]), smooth: avg(&sums[1]), direct: avg(&sums[2]) })
}

/// Noisy study: one row per setting and horizon.
pub fn run_noisy<T: Scalar>(cfg: &SimConfig) -> Result<EvaluationReport> {
    cfg.validate()?;
    let mut report = EvaluationReport::new(
        "Prediction errors for rough curves",
        &["sigma", "kappa1", "kappa2", "phi", "sigma_e", "h"],
        &["MSEc", "MSEn", "MSEa", "best_c", "best_n", "best_a"],
        cfg.replications,
        cfg.seed,
    );
    for setting in &cfg.settings {
        let outs = run_replications(cfg, setting, |r| noisy_replication::<T>(cfg, setting, r), &mut report.failures);
        for s in 0..cfg.horizon {
            let col = |f: fn(&NoisyOutcome) -> &Vec<f64>| mean_f64(&outs.iter().map(|o| f(o)[s]).collect::<Vec<_>>());
            let best = |which: usize| {
                let v: Vec<f64> = outs
                    .iter()
                    .map(|o| {
                        let e = [o.corrected[s], o.smooth[s], o.direct[s]];
                        let min = e.iter().copied().fold(f64::INFINITY, f64::min);
                        if e[which] == min {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                mean_f64(&v)
            };
            let mut labels = setting.labels();
            labels.extend([format!("{:.2}", cfg.phi), format!("{:.2}", cfg.sigma_e), (s + 1).to_string()]);
            report.rows.push(ReportRow {
                labels,
                values: vec![col(|o| &o.corrected), col(|o| &o.smooth), col(|o| &o.direct), best(0), best(1), best(2)],
                completed: outs.len(),
            });
        }
    }
    Ok(report)
}

/// Per-replication band summaries for PFP and the plain regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandsOutcome {
    pub score_pfp: f64,
    pub score_flr: f64,
    pub width_pfp: f64,
    pub width_flr: f64,
    pub coverage_pfp: f64,
    pub coverage_flr: f64,
}

/// One replication of the band study on the forecast-comparison design.
pub fn bands_replication<T: Scalar>(cfg: &SimConfig, setting: &Setting, r: usize) -> Result<BandsOutcome> {
    let series = simulate_replication::<T>(cfg, setting, r)?;
    let seed = stream_rng(cfg.seed, r, Stream::Bootstrap).next_u64();
    evaluate_bands(cfg, &series, seed)
}

/// The band study on a given series.
pub fn evaluate_bands<T: Scalar>(cfg: &SimConfig, series: &FunctionalSeries<T>, seed: u64) -> Result<BandsOutcome> {
    let tau = T::lit(cfg.tau);
    let (spec, _) = select_far(
        &series.window(0..cfg.window)?,
        *cfg.orders.start()..*cfg.orders.end() + 1,
        *cfg.dims.start()..*cfg.dims.end() + 1,
    )?;
    let targets = cfg.targets();
    let model = pfp_fit(&series.window(0..targets.end)?, cfg.pfp_config(spec, cfg.dx, cfg.dy))?;
    let left = model.left_basis();
    let right = model.right_basis();
    let mut pairs = Vec::with_capacity(cfg.n_test);
    let mut partials = Vec::with_capacity(cfg.n_test);
    let mut truths = Vec::with_capacity(cfg.n_test);
    for i in cfg.n_train..cfg.n_train + cfg.n_test {
        let truth = series.curve(cfg.window + i);
        let partial = Curve::new(Arc::clone(left), truth.coeffs().clone())?;
        pairs.push((model.residual_set().predictions().curve(i), partial.clone()));
        partials.push(partial);
        truths.push(right.evaluate(truth.coeffs()).iter().copied().collect::<Vec<T>>());
    }
    let bcfg = cfg.bootstrap_config::<T>(seed);
    let pfp = pfp_bands(&model, &pairs, &bcfg)?;
    let curves_train = series.window(cfg.window..cfg.window + cfg.n_train)?;
    let flr = ffr_bands(&curves_train, tau, cfg.dx, cfg.dy, &partials, &bcfg)?;
    Ok(BandsOutcome {
        score_pfp: averaged_score(&pfp, &truths)?.as_f64(),
        score_flr: averaged_score(&flr, &truths)?.as_f64(),
        width_pfp: mean_width(&pfp).as_f64(),
        width_flr: mean_width(&flr).as_f64(),
        coverage_pfp: pooled_coverage(&pfp, &truths)?.as_f64(),
        coverage_flr: pooled_coverage(&flr, &truths)?.as_f64(),
    })
}

/// Band study over every configured setting.
pub fn run_bands<T: Scalar>(cfg: &SimConfig) -> Result<EvaluationReport> {
    cfg.validate()?;
    let mut report = EvaluationReport::new(
        "Bootstrap interval scores and widths",
        &["sigma", "kappa1", "kappa2", "tau"],
        &["score_PFP", "score_FLR", "width_PFP", "width_FLR", "coverage_PFP", "coverage_FLR"],
        cfg.replications,
        cfg.seed,
    );
    for setting in &cfg.settings {
        let outs = run_replications(cfg, setting, |r| bands_replication::<T>(cfg, setting, r), &mut report.failures);
        let col = |f: fn(&BandsOutcome) -> f64| mean_f64(&outs.iter().map(f).collect::<Vec<_>>());
        let mut labels = setting.labels();
        labels.push(format!("{:.3}", cfg.tau));
        report.rows.push(ReportRow {
            labels,
            values: vec![
                col(|o| o.score_pfp),
                col(|o| o.score_flr),
                col(|o| o.width_pfp),
                col(|o| o.width_flr),
                col(|o| o.coverage_pfp),
                col(|o| o.coverage_flr),
            ],
            completed: outs.len(),
        });
    }
    Ok(report)
}

/// Runs the configured protocol.
pub fn run_protocol<T: Scalar>(cfg: &SimConfig) -> Result<EvaluationReport> {
    match cfg.protocol {
        Protocol::Forecast => run_forecast::<T>(cfg),
        Protocol::Joint => run_joint::<T>(cfg),
        Protocol::Noisy => run_noisy::<T>(cfg),
        Protocol::Bands => run_bands::<T>(cfg),
    }
}
