//! Estimation of the trend, the time-varying autocovariance curves and the
//! banded covariance matrix of a locally stationary time series, together
//! with the one-step best linear predictor built on top of them.
//!
//! Every estimator is generic over the floating point type through
//! [`Real`]; `f64` aliases are exported at the crate root for the common case.

// `!(x > 0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autocov;
pub mod bandselect;
pub mod covmatrix;
pub mod error;
pub mod estimate;
pub mod kernel;
pub mod linalg;
pub mod predictor;
pub mod series;
pub mod smoothing;

use std::fmt::{Debug, Display};
use std::iter::Sum;

pub use error::{Error, Result};
pub use kernel::Kernel;
pub use series::TimeSeries;

/// Floating point scalar accepted by the estimators (`f32` or `f64`).
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable literal")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("representable integer")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type TimeSeries64 = series::TimeSeries<f64>;
pub type LocalLinearFit64 = smoothing::LocalLinearFit<f64>;
pub type BandwidthSearch64 = smoothing::BandwidthSearch<f64>;
pub type ResidualSeries64 = autocov::ResidualSeries<f64>;
pub type LagCurve64 = autocov::LagCurve<f64>;
pub type LongRunVarianceCurve64 = bandselect::LongRunVarianceCurve<f64>;
pub type BandSelection64 = bandselect::BandSelection<f64>;
pub type BandedCovariance64 = covmatrix::BandedCovariance<f64>;
pub type SpectralFloorParams64 = covmatrix::SpectralFloorParams<f64>;
pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
pub type PredictorCoefficients64 = predictor::PredictorCoefficients<f64>;
pub type ForecastResult64 = predictor::ForecastResult<f64>;
pub type BacktestReport64 = predictor::BacktestReport<f64>;
pub type CovarianceEstimate64 = estimate::CovarianceEstimate<f64>;
