//! Partial functional prediction for functional time series.
//!
//! Given `n` fully observed curves and the first part `[0, τ]` of curve
//! `n + 1`, the crate predicts the remainder `(τ, 1]` by adding two pieces:
//! a FAR(p) full-curve forecast obtained from a VAR on functional principal
//! component scores ([`far`]), and an intraday fully functional regression
//! fitted on the sliding-window forecast residuals ([`ffr`], [`pfp`]).
//! Rough measurement error is handled by an AR model on pre-smoothing
//! residuals ([`arma`]), prediction bands come from a residual bootstrap
//! ([`bootstrap`]), and [`simlab`] hosts the simulation protocols.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common double-precision case.

pub mod arma;
pub mod bootstrap;
pub mod error;
pub mod far;
pub mod ffr;
pub mod fpca;
pub mod funkdata;
pub mod io;
pub mod linalg;
pub mod pfp;
pub mod scalar;
pub mod simlab;

pub use error::{PfpError, Result};
pub use scalar::Scalar;

pub type Grid = funkdata::Grid<f64>;
pub type BasisSystem = funkdata::BasisSystem<f64>;
pub type Curve = funkdata::Curve<f64>;
pub type DiscreteSample = funkdata::DiscreteSample<f64>;
pub type FunctionalSeries = funkdata::FunctionalSeries<f64>;

pub type EigenSystem = fpca::EigenSystem<f64>;
pub type FarModel = far::FarModel<f64>;
pub type ResidualSet = far::ResidualSet<f64>;
pub type FfrPair = ffr::FfrPair<f64>;
pub type FfrModel = ffr::FfrModel<f64>;
pub type ArModel = arma::ArModel<f64>;
pub type PfpConfig = pfp::PfpConfig<f64>;
pub type PfpModel = pfp::PfpModel<f64>;
pub type PfpPrediction = pfp::PfpPrediction<f64>;
pub type BootstrapConfig = bootstrap::BootstrapConfig<f64>;
pub type BootstrapBands = bootstrap::BootstrapBands<f64>;

pub use far::FarSpec;
pub use simlab::{EvaluationReport, SimConfig};
