//! Heavy-tail analytics for limit-order-book volume profiles.
//!
//! The crate covers the whole path from tick files to tail estimates:
//!
//! - [`ingest`]: tick CSV parsing, last-volume sub-sampling on a regular grid,
//!   block maxima and peaks-over-threshold preparation.
//! - [`diagnostics`]: descriptive statistics, hourly median heat maps, DFA Hurst
//!   exponent, mean excess, Hill and exponential QQ curves.
//! - [`stable`], [`gev`], [`gpd`]: the three sub-exponential families with their
//!   estimators (McCulloch quantiles; L-moments, MLE and mixed MLE/L-moments;
//!   reparameterized MLE, moments, Pickands and empirical percentiles).
//! - [`gof`]: Kolmogorov-Smirnov statistics and percentile comparisons.
//! - [`simstudy`]: seeded estimator-comparison experiments.
//!
//! All numerical code is generic over the floating point type through the
//! [`Real`] trait. The `*64` aliases below fix the scalar to `f64`, which is what
//! the command line driver uses.

// `!(x > 0)` is used on purpose so that NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod gev;
pub mod gof;
pub mod gpd;
pub mod ingest;
pub mod optim;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod simstudy;
pub mod special;
pub mod stable;
pub mod types;

pub use error::{Error, Result};
pub use scalar::Real;
pub use types::{
    validate_series, Family, FitResult, GevParams, GpdParams, Method, Params, SeriesKey, Side,
    StableParams, VolumeSeries,
};

pub type StableParams64 = StableParams<f64>;
pub type GevParams64 = GevParams<f64>;
pub type GpdParams64 = GpdParams<f64>;
pub type FitResult64 = FitResult<f64>;
pub type VolumeSeries64 = VolumeSeries<f64>;
pub type PreparedSample64 = ingest::PreparedSample<f64>;
pub type DescriptiveStats64 = diagnostics::DescriptiveStats<f64>;
pub type CurvePoints64 = diagnostics::CurvePoints<f64>;
pub type LMoments64 = gev::LMoments<f64>;

pub type StableParams32 = StableParams<f32>;
pub type GevParams32 = GevParams<f32>;
pub type GpdParams32 = GpdParams<f32>;
pub type FitResult32 = FitResult<f32>;
