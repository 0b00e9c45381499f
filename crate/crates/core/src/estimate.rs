//! Full covariance pipeline: trend, residuals, band choice, lag curves and
//! the banded estimators.

use crate::autocov::{estimate_lag_curve, fit_trend, CurveGrid, LagCurve, TrendFit};
use crate::bandselect::{select_band, BandSelectConfig, BandSelection};
use crate::covmatrix::{banded_local, banded_stationary, pd_correct, taper_local, BandedCovariance, SpectralFloorParams};
use crate::smoothing::bandwidth_grid;
use crate::{Error, Kernel, Real, Result, TimeSeries};

/// Settings for [`estimate_covariance`].
#[derive(Debug, Clone, PartialEq)]
#[derive(Default)]
pub struct CovarianceConfig {
    pub band: BandSelectConfig,
    /// Fixed half width; skips the selection rule when set.
    pub half_width: Option<usize>,
    pub taper: bool,
    /// Bandwidth candidates; `None` uses the default grid for the sample size.
    pub candidates: Option<Vec<f64>>,
}


impl CovarianceConfig {
    pub fn kernel(&self) -> Kernel {
        self.band.kernel
    }

    pub(crate) fn candidate_grid<T: Real>(&self, m: usize) -> Vec<T> {
        match &self.candidates {
            Some(c) => c.iter().map(|&b| T::lit(b)).collect(),
            None => bandwidth_grid(m),
        }
    }
}

/// Everything produced by one pass of the pipeline.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate<T> {
    pub trend: TrendFit<T>,
    /// `None` when the half width was fixed by the caller.
    pub selection: Option<BandSelection<T>>,
    pub half_width: usize,
    /// Lag curves `0..` up to the band (twice the band when tapering).
    pub curves: Vec<LagCurve<T>>,
    pub stationary: BandedCovariance<T>,
    pub local: BandedCovariance<T>,
}

impl<T: Real> CovarianceEstimate<T> {
    /// Floor parameters from the lag-0 curve.
    pub fn floor_params(&self, beta: T, multiplier: T) -> Result<SpectralFloorParams<T>> {
        let m = self.trend.level.len();
        SpectralFloorParams::from_lag0(&self.curves[0], m, self.trend.residuals.scale(), beta, multiplier)
    }

    /// Eigenvalue-floored version of the local estimate.
    pub fn pd_corrected(&self, beta: T, multiplier: T) -> Result<BandedCovariance<T>> {
        pd_correct(&self.local, &self.floor_params(beta, multiplier)?)
    }
}

/// Lag curves `0..=max_lag` with GCV bandwidths. Lag 0 always covers the
/// whole half grid `0..=2m` so that it can be integrated; `grid_for` gives
/// the grid for the other lags.
pub(crate) fn lag_curves<T: Real>(
    res: &crate::autocov::ResidualSeries<T>,
    max_lag: usize,
    candidates: &[T],
    kernel: Kernel,
    grid_for: impl Fn(usize) -> CurveGrid<T>,
) -> Result<Vec<LagCurve<T>>> {
    let m = res.len();
    let n = res.scale();
    (0..=max_lag)
        .map(|k| {
            let grid = if k == 0 { CurveGrid::HalfGrid { scale: n, first: 0, last: 2 * m } } else { grid_for(k) };
            estimate_lag_curve(res, k, candidates, &grid, kernel)
        })
        .collect()
}

/// Runs the covariance pipeline on the whole series (`m = n`).
pub fn estimate_covariance<T: Real>(y: &TimeSeries<T>, cfg: &CovarianceConfig) -> Result<CovarianceEstimate<T>> {
    let m = y.len();
    if m < 10 {
        return Err(Error::InvalidArgument(format!("need at least 10 observations, got {m}")));
    }
    let kernel = cfg.kernel();
    let candidates = cfg.candidate_grid::<T>(m);
    let trend = fit_trend(y, &candidates, kernel)?;
    let res = &trend.residuals;
    let (selection, half_width) = match cfg.half_width {
        Some(l) => (None, l),
        None => {
            let sel = select_band(res, &cfg.band)?;
            let l = sel.selected;
            (Some(sel), l)
        }
    };
    if half_width >= m {
        return Err(Error::InvalidArgument(format!("half width {half_width} must be below {m}")));
    }
    let max_lag = if cfg.taper { (2 * half_width).saturating_sub(1).min(m - 1) } else { half_width };
    let n = y.scale();
    let curves = lag_curves(res, max_lag, &candidates, kernel, |k| CurveGrid::midpoints(k, m, n))?;
    let stationary = banded_stationary(res, half_width)?;
    let local = if cfg.taper { taper_local(&curves, m, half_width)? } else { banded_local(&curves, m, half_width)? };
    Ok(CovarianceEstimate { trend, selection, half_width, curves, stationary, local })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covmatrix::Flavor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ar1(n: usize, phi: f64, seed: u64) -> TimeSeries<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut prev = 0.0;
        let mut out = Vec::with_capacity(n);
        for i in 0..n + 200 {
            let e: f64 = StandardNormal.sample(&mut rng);
            prev = phi * prev + e;
            if i >= 200 {
                out.push(prev);
            }
        }
        TimeSeries::new(out)
    }

    #[test]
    fn pipeline_shapes() {
        let y = ar1(200, 0.5, 4);
        let est = estimate_covariance(&y, &CovarianceConfig::default()).unwrap();
        let l = est.half_width;
        assert!(l <= 6);
        assert_eq!(est.curves.len(), l + 1);
        assert_eq!(est.stationary.flavor(), Flavor::Stationary);
        assert_eq!(est.local.dim(), 200);
        assert!(est.selection.is_some());
        let pd = est.pd_corrected(0.5, 10.0).unwrap();
        assert_eq!(pd.flavor(), Flavor::PdCorrected);
    }

    #[test]
    fn strong_dependence_gives_positive_band() {
        let y = ar1(500, 0.6, 9);
        let est = estimate_covariance(&y, &CovarianceConfig::default()).unwrap();
        assert!(est.half_width >= 1);
        // lag-1 curve is near 0.6 / 0.64 in the interior
        let mid = est.curves[1].at_half(500).unwrap();
        assert!((mid - 0.9375).abs() < 0.5, "{mid}");
    }

    #[test]
    fn taper_uses_twice_the_lags() {
        let y = ar1(150, 0.4, 2);
        let cfg = CovarianceConfig { half_width: Some(3), taper: true, ..Default::default() };
        let est = estimate_covariance(&y, &cfg).unwrap();
        assert_eq!(est.curves.len(), 6);
        assert_eq!(est.local.effective_width(), 5);
        assert_eq!(est.local.get(0, 6), 0.0);
    }

    #[test]
    fn too_short() {
        let y = TimeSeries::new(vec![1.0; 5]);
        assert!(estimate_covariance(&y, &CovarianceConfig::default()).is_err());
    }
}
