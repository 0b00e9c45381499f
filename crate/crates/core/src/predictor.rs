//! Estimated best linear one-step predictor and rolling backtests.

use std::io::Write;

use crate::autocov::{fit_trend, CurveGrid, LagCurve};
use crate::bandselect::{select_band, BandSelectConfig};
use crate::covmatrix::{banded_local, pd_solve, BandedCovariance, SpectralFloorParams};
use crate::estimate::lag_curves;
use crate::smoothing::bandwidth_grid;
use crate::{Error, Kernel, Real, Result, TimeSeries};

/// Settings for [`fit_coefficients`].
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorConfig {
    pub kernel: Kernel,
    pub alpha: f64,
    /// Band search range; `None` uses `ceil(ln m)` and `5 + ceil(ln m)`.
    pub l0: Option<usize>,
    pub l1: Option<usize>,
    pub block: Option<usize>,
    pub beta: f64,
    pub floor_multiplier: f64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self { kernel: Kernel::Biweight, alpha: 0.01, l0: None, l1: None, block: None, beta: 0.5, floor_multiplier: 10.0 }
    }
}

impl PredictorConfig {
    /// Band search range for a window of length `m`.
    pub fn band_range(&self, m: usize) -> (usize, usize) {
        let log_m = (m as f64).ln().ceil() as usize;
        (self.l0.unwrap_or(log_m.max(1)), self.l1.unwrap_or(5 + log_m))
    }
}

/// Fitted predictor for the observation following a window `1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorCoefficients<T> {
    pub window: usize,
    pub intercept: T,
    /// Weight `k` multiplies `y_{k+1}`; in the usual notation this is
    /// `(a_m, ..., a_1)` applied to `(y_1, ..., y_m)`.
    pub weights: Vec<T>,
    /// Right-hand side of the system, zero except for the last `band` slots.
    pub gamma_vector: Vec<T>,
    pub band: usize,
    pub floor: T,
    /// Trend estimate at the design points of the window.
    pub trend: Vec<T>,
}

/// One forecast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastResult<T> {
    pub point: T,
    pub trend_at_window_end: T,
    pub standardization: Option<T>,
}

/// Right-hand side: slot `m - s` holds `gamma_s((2m - s + 1) / (2n))` for
/// `1 <= s <= band`; all other slots are zero.
///
/// The evaluation point sits half a grid step below the midpoint
/// `(2m + 2 - s) / (2n)` of the pair `(m + 1, m + 1 - s)`; the printed
/// estimator is followed here.
pub fn gamma_vector<T: Real>(curves: &[LagCurve<T>], m: usize, band: usize) -> Result<Vec<T>> {
    if band >= m {
        return Err(Error::InvalidArgument(format!("band {band} must be below the window {m}")));
    }
    let mut g = vec![T::zero(); m];
    for s in 1..=band {
        let curve = curves
            .iter()
            .find(|c| c.lag == s)
            .ok_or_else(|| Error::InvalidArgument(format!("no curve supplied for lag {s}")))?;
        g[m - s] = curve.at_half(2 * m - s + 1)?;
    }
    Ok(g)
}

/// Solves for the weights given the pieces of the pipeline. `trend` holds the
/// trend estimate at `1/n, ..., m/n`.
pub fn coefficients_from_parts<T: Real>(
    sigma: &BandedCovariance<T>,
    floor: T,
    gamma: Vec<T>,
    trend: Vec<T>,
    band: usize,
) -> Result<PredictorCoefficients<T>> {
    let m = sigma.dim();
    for len in [gamma.len(), trend.len()] {
        if len != m {
            return Err(Error::LengthMismatch { expected: m, actual: len });
        }
    }
    let weights = pd_solve(sigma, floor, &gamma)?;
    let intercept = trend[m - 1] - weights.iter().zip(&trend).map(|(&w, &mu)| w * mu).sum::<T>();
    Ok(PredictorCoefficients { window: m, intercept, weights, gamma_vector: gamma, band, floor, trend })
}

/// Fits the predictor on the window `y` (values `1..=m`, rescaled by
/// `y.scale()`).
pub fn fit_coefficients<T: Real>(y: &TimeSeries<T>, cfg: &PredictorConfig) -> Result<PredictorCoefficients<T>> {
    let m = y.len();
    let n = y.scale();
    if m < 10 {
        return Err(Error::InvalidArgument(format!("window must hold at least 10 observations, got {m}")));
    }
    let candidates = bandwidth_grid::<T>(m);
    let trend = fit_trend(y, &candidates, cfg.kernel)?;
    let res = &trend.residuals;
    let (l0, l1) = cfg.band_range(m);
    let band_cfg = BandSelectConfig { l0, l1: l1.min(m - 1), alpha: cfg.alpha, block: cfg.block, kernel: cfg.kernel };
    let band = select_band(res, &band_cfg)?.selected;
    let curves = lag_curves(res, band, &candidates, cfg.kernel, |_| CurveGrid::HalfGrid { scale: n, first: 0, last: 2 * m })?;
    let sigma = banded_local(&curves, m, band)?;
    let floor = SpectralFloorParams::from_lag0(&curves[0], m, n, T::lit(cfg.beta), T::lit(cfg.floor_multiplier))?;
    let gamma = gamma_vector(&curves, m, band)?;
    coefficients_from_parts(&sigma, floor.floor, gamma, trend.level, band)
}

/// `intercept + sum_k weights[k] * y[k]`.
pub fn predict_one<T: Real>(coeffs: &PredictorCoefficients<T>, y: &[T]) -> Result<ForecastResult<T>> {
    if y.len() != coeffs.window {
        return Err(Error::LengthMismatch { expected: coeffs.window, actual: y.len() });
    }
    let point = coeffs.intercept + coeffs.weights.iter().zip(y).map(|(&w, &v)| w * v).sum::<T>();
    let trend_at_window_end = coeffs.trend.last().copied().unwrap_or_else(T::zero);
    Ok(ForecastResult { point, trend_at_window_end, standardization: None })
}

/// Outcome of a rolling one-step backtest.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport<T> {
    /// 1-based index of each predicted observation.
    pub steps: Vec<usize>,
    pub predictions: Vec<T>,
    pub realized: Vec<T>,
    pub errors: Vec<T>,
    pub standardized_errors: Option<Vec<T>>,
    /// Steps whose fit failed, with the reason.
    pub failures: Vec<(usize, String)>,
}

impl<T: Real> BacktestReport<T> {
    /// Mean of the squared errors over successful steps.
    pub fn mse(&self) -> T {
        if self.errors.is_empty() {
            return T::nan();
        }
        self.errors.iter().map(|&e| e * e).sum::<T>() / T::from_usize_lossy(self.errors.len())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,prediction,realized,error,standardized_error")?;
        for k in 0..self.steps.len() {
            let z = self.standardized_errors.as_ref().map(|z| z[k].to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{}", self.steps[k], self.predictions[k], self.realized[k], self.errors[k], z)?;
        }
        Ok(())
    }
}

/// For each `m` from `start - 1` to `T - 1`, fits on `y_1..y_m` and predicts
/// `y_{m+1}`. Every window is rescaled by the full length `T`. `sigma`, when
/// known, standardizes the errors by `sigma((m + 1) / T)`.
pub fn rolling_backtest<T: Real>(
    y: &[T],
    start: usize,
    cfg: &PredictorConfig,
    sigma: Option<&dyn Fn(T) -> T>,
) -> Result<BacktestReport<T>> {
    let total = y.len();
    if start < 11 || start > total {
        return Err(Error::InvalidArgument(format!("start {start} must lie in [11, {total}]")));
    }
    let mut report = BacktestReport {
        steps: Vec::new(),
        predictions: Vec::new(),
        realized: Vec::new(),
        errors: Vec::new(),
        standardized_errors: sigma.map(|_| Vec::new()),
        failures: Vec::new(),
    };
    let scale = T::from_usize_lossy(total);
    for m in start - 1..total {
        let step = m + 1;
        let fitted = TimeSeries::with_scale(y[..m].to_vec(), total)
            .and_then(|w| fit_coefficients(&w, cfg))
            .and_then(|c| predict_one(&c, &y[..m]));
        match fitted {
            Ok(f) => {
                let err = y[m] - f.point;
                report.steps.push(step);
                report.predictions.push(f.point);
                report.realized.push(y[m]);
                report.errors.push(err);
                if let (Some(s), Some(z)) = (sigma, report.standardized_errors.as_mut()) {
                    z.push(err / s(T::from_usize_lossy(step) / scale));
                }
            }
            Err(e) => report.failures.push((step, e.to_string())),
        }
    }
    Ok(report)
}
