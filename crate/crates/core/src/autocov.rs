//! Residuals of the trend fit and local linear estimates of the
//! time-varying autocovariance curves `gamma_k(t)`.
//!
//! For an even lag `k` the curve is the local linear fit of the products
//! `e_{i-k/2} e_{i+k/2}`; for an odd lag it is the average of the fits of
//! `e_{i-(k-1)/2} e_{i+(k+1)/2}` ("plus") and `e_{i-(k+1)/2} e_{i+(k-1)/2}`
//! ("minus"). Residuals outside the window read as zero and the products
//! that touch them stay in the fit, so curves carry some attenuation within
//! `k/2` steps of either end of the sample.

use crate::smoothing::{gcv_select_slice, local_linear_fit, BandwidthSearch, GridSmoother, LocalLinearFit};
use crate::{Error, Kernel, Real, Result, TimeSeries};

/// Residuals `e_1..e_m` on the design grid of scale `n`; any index outside
/// `1..=m` reads as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries<T> {
    values: Vec<T>,
    scale: usize,
}

impl<T: Real> ResidualSeries<T> {
    pub fn new(values: Vec<T>, scale: usize) -> Result<Self> {
        if scale < values.len() || values.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "scale {scale} must be at least the window length {}",
                values.len()
            )));
        }
        Ok(Self { values, scale })
    }

    /// Zero-padded access with a 1-based, possibly out-of-range index.
    #[inline]
    pub fn get(&self, i: isize) -> T {
        if i >= 1 && (i as usize) <= self.values.len() {
            self.values[i as usize - 1]
        } else {
            T::zero()
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Window length `m`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    /// Products `e_{i-back} e_{i+ahead}` for `i = 1..=m`.
    pub fn products(&self, back: usize, ahead: usize) -> Vec<T> {
        (1..=self.len() as isize)
            .map(|i| self.get(i - back as isize) * self.get(i + ahead as isize))
            .collect()
    }

    /// Series reversed in time, `e'_i = e_{m+1-i}`.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { values, scale: self.scale }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { values: self.values.iter().map(|&v| v * c).collect(), scale: self.scale }
    }
}

/// `e_i = y_i - mu(i/n)` from a fit evaluated at every design point.
pub fn residuals<T: Real>(y: &TimeSeries<T>, fit: &LocalLinearFit<T>) -> Result<ResidualSeries<T>> {
    let m = y.len();
    for i in 1..=m {
        let covered = fit.grid.get(i - 1).is_some_and(|&t| (t - y.design_point(i)).abs() <= T::lit(1e-12));
        if !covered {
            return Err(Error::GridMismatch { index: i });
        }
    }
    let values = y.values().iter().zip(&fit.level).map(|(&a, &b)| a - b).collect();
    ResidualSeries::new(values, y.scale())
}

/// Trend estimate at the design points with a GCV-selected bandwidth.
#[derive(Debug, Clone)]
pub struct TrendFit<T> {
    pub search: BandwidthSearch<T>,
    pub level: Vec<T>,
    pub residuals: ResidualSeries<T>,
}

/// Selects the trend bandwidth by GCV, fits at the design points and forms
/// the residuals.
pub fn fit_trend<T: Real>(y: &TimeSeries<T>, candidates: &[T], kernel: Kernel) -> Result<TrendFit<T>> {
    let search = gcv_select_slice(y.values(), y.scale(), candidates, kernel)?;
    let smoother = GridSmoother::new(y.len(), y.scale(), search.selected, kernel, false)?;
    let level = smoother.fit_design(y.values())?;
    let values = y.values().iter().zip(&level).map(|(&a, &b)| a - b).collect();
    Ok(TrendFit { search, level, residuals: ResidualSeries::new(values, y.scale())? })
}

/// Evaluation points of a lag curve.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveGrid<T> {
    /// Half-step positions `h / (2n)` for `h = first..=last`; covers every
    /// midpoint `(i + j) / (2n)` in that range.
    HalfGrid { scale: usize, first: usize, last: usize },
    /// Arbitrary points, e.g. a uniform diagnostic grid.
    Points(Vec<T>),
}

impl<T: Real> CurveGrid<T> {
    /// Half grid holding every midpoint `(i + j) / (2n)` with `|i - j| = lag`
    /// and `1 <= i, j <= m`.
    pub fn midpoints(lag: usize, m: usize, n: usize) -> Self {
        CurveGrid::HalfGrid { scale: n, first: lag + 2, last: (2 * m).saturating_sub(lag).max(lag + 2) }
    }

    /// Uniform grid of `count` points on `[0, upper]`.
    pub fn uniform(count: usize, upper: T) -> Self {
        let denom = T::from_usize_lossy(count.max(2) - 1);
        CurveGrid::Points((0..count).map(|i| upper * T::from_usize_lossy(i) / denom).collect())
    }

    pub fn points(&self) -> Vec<T> {
        match self {
            CurveGrid::HalfGrid { scale, first, last } => {
                let denom = T::from_usize_lossy(2 * scale);
                (*first..=*last).map(|h| T::from_usize_lossy(h) / denom).collect()
            }
            CurveGrid::Points(p) => p.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CurveGrid::HalfGrid { first, last, .. } => last + 1 - first,
            CurveGrid::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Estimated autocovariance curve for one lag.
#[derive(Debug, Clone, PartialEq)]
pub struct LagCurve<T> {
    pub lag: usize,
    pub grid: CurveGrid<T>,
    pub values: Vec<T>,
    pub bandwidth: T,
    /// For odd lags, the "plus" and "minus" component fits.
    pub parity_parts: Option<(Vec<T>, Vec<T>)>,
}

impl<T: Real> LagCurve<T> {
    /// Value at the half-grid position `h`, i.e. at `t = h / (2n)`.
    pub fn at_half(&self, h: usize) -> Result<T> {
        match &self.grid {
            CurveGrid::HalfGrid { first, last, .. } if (*first..=*last).contains(&h) => Ok(self.values[h - first]),
            _ => Err(Error::MissingMidpoint { lag: self.lag, position: h }),
        }
    }
}

/// Product series entering the fit for lag `k`: a single series for even
/// lags, the plus/minus pair for odd lags.
fn lag_products<T: Real>(res: &ResidualSeries<T>, k: usize) -> (Vec<T>, Option<Vec<T>>) {
    if k.is_multiple_of(2) {
        (res.products(k / 2, k / 2), None)
    } else {
        (res.products((k - 1) / 2, k.div_ceil(2)), Some(res.products(k.div_ceil(2), (k - 1) / 2)))
    }
}

fn fit_series<T: Real>(
    z: &[T],
    n: usize,
    grid: &CurveGrid<T>,
    b: T,
    kernel: Kernel,
) -> Result<Vec<T>> {
    match grid {
        CurveGrid::HalfGrid { first, last, .. } => {
            let m = z.len();
            let whole = GridSmoother::new(m, n, b, kernel, false)?;
            let half = GridSmoother::new(m, n, b, kernel, true)?;
            (*first..=*last)
                .map(|h| if h % 2 == 0 { whole.level_at(z, h / 2) } else { half.level_at(z, h / 2) })
                .collect()
        }
        CurveGrid::Points(points) => {
            let series = TimeSeries::with_scale(z.to_vec(), n)?;
            Ok(local_linear_fit(&series, points, b, kernel)?.level)
        }
    }
}

/// Local linear estimate of `gamma_k` on `grid` with bandwidth `b`.
pub fn autocov_at<T: Real>(
    res: &ResidualSeries<T>,
    k: usize,
    grid: &CurveGrid<T>,
    b: T,
    kernel: Kernel,
) -> Result<LagCurve<T>> {
    if k >= res.scale() {
        return Err(Error::InvalidArgument(format!("lag {k} must be below the scale {}", res.scale())));
    }
    if let CurveGrid::HalfGrid { scale, .. } = grid {
        if *scale != res.scale() {
            return Err(Error::InvalidArgument(format!(
                "curve grid scale {scale} differs from residual scale {}",
                res.scale()
            )));
        }
    }
    let n = res.scale();
    let (z, minus) = lag_products(res, k);
    let first = fit_series(&z, n, grid, b, kernel)?;
    let (values, parity_parts) = match minus {
        None => (first, None),
        Some(zm) => {
            let second = fit_series(&zm, n, grid, b, kernel)?;
            let half = T::lit(0.5);
            let avg = first.iter().zip(&second).map(|(&p, &q)| half * (p + q)).collect();
            (avg, Some((first, second)))
        }
    };
    Ok(LagCurve { lag: k, grid: grid.clone(), values, bandwidth: b, parity_parts })
}

/// GCV bandwidth for lag `k`; odd lags use the "plus" product series.
pub fn autocov_bandwidth<T: Real>(
    res: &ResidualSeries<T>,
    k: usize,
    candidates: &[T],
    kernel: Kernel,
) -> Result<BandwidthSearch<T>> {
    let (z, _) = lag_products(res, k);
    gcv_select_slice(&z, res.scale(), candidates, kernel)
}

/// Selects the lag-`k` bandwidth by GCV and evaluates the curve on `grid`.
pub fn estimate_lag_curve<T: Real>(
    res: &ResidualSeries<T>,
    k: usize,
    candidates: &[T],
    grid: &CurveGrid<T>,
    kernel: Kernel,
) -> Result<LagCurve<T>> {
    let search = autocov_bandwidth(res, k, candidates, kernel)?;
    autocov_at(res, k, grid, search.selected, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::bandwidth_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(m: usize, seed: u64) -> ResidualSeries<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ResidualSeries::new((0..m).map(|_| rng.random_range(-1.0..1.0)).collect(), m).unwrap()
    }

    /// Plain weighted least squares on an explicit product list.
    fn wls(z: &[f64], n: usize, t: f64, b: f64) -> f64 {
        let (mut a00, mut a01, mut a11, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (idx, &v) in z.iter().enumerate() {
            let x = (idx + 1) as f64 / n as f64 - t;
            let w = Kernel::Biweight.evaluate(x / b);
            a00 += w;
            a01 += w * x;
            a11 += w * x * x;
            r0 += w * v;
            r1 += w * x * v;
        }
        (a11 * r0 - a01 * r1) / (a00 * a11 - a01 * a01)
    }

    #[test]
    fn padding_reads_zero() {
        let r = ResidualSeries::new(vec![1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(r.get(0), 0.0);
        assert_eq!(r.get(4), 0.0);
        assert_eq!(r.get(-3), 0.0);
        assert_eq!(r.get(2), 2.0);
    }

    #[test]
    fn residuals_require_design_grid() {
        let y = TimeSeries::new((1..=20).map(|i| i as f64 / 20.0).collect());
        let bad = local_linear_fit(&y, &[0.5], 0.3, Kernel::Biweight).unwrap();
        assert_eq!(residuals(&y, &bad).unwrap_err(), Error::GridMismatch { index: 1 });
        let good = local_linear_fit(&y, &y.design_grid(), 0.3, Kernel::Biweight).unwrap();
        let res = residuals(&y, &good).unwrap();
        assert!(res.values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn zero_residuals_give_zero_curves() {
        let res = ResidualSeries::new(vec![0.0; 50], 50).unwrap();
        for k in 0..4 {
            let c = autocov_at(&res, k, &CurveGrid::midpoints(k, 50, 50), 0.2, Kernel::Biweight).unwrap();
            assert!(c.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn odd_lag_is_average_of_parity_fits() {
        // a trending, asymmetric residual pattern makes plus and minus differ
        let m = 80;
        let res = ResidualSeries::new(
            (1..=m).map(|i| (i as f64 * 0.7).sin() * (1.0 + i as f64 / 30.0)).collect(),
            m,
        )
        .unwrap();
        let grid = CurveGrid::midpoints(3, m, m);
        let curve = autocov_at(&res, 3, &grid, 0.15, Kernel::Biweight).unwrap();
        let (plus, minus) = curve.parity_parts.clone().unwrap();
        assert!(plus.iter().zip(&minus).any(|(a, b)| (a - b).abs() > 1e-3));
        // independent oracle: two explicit product lists, fitted separately
        let zp: Vec<f64> = (1..=m as isize).map(|i| res.get(i - 1) * res.get(i + 2)).collect();
        let zm: Vec<f64> = (1..=m as isize).map(|i| res.get(i - 2) * res.get(i + 1)).collect();
        for (idx, t) in grid.points().iter().enumerate() {
            let expected = 0.5 * (wls(&zp, m, *t, 0.15) + wls(&zm, m, *t, 0.15));
            assert!((curve.values[idx] - expected).abs() < 1e-12);
            assert!((curve.values[idx] - 0.5 * (plus[idx] + minus[idx])).abs() < 1e-12);
        }
    }

    #[test]
    fn time_reversal_with_reflected_grid() {
        let m = 120;
        let n = 150;
        let res = ResidualSeries::new(noise(m, 9).values().to_vec(), n).unwrap();
        let rev = res.reversed();
        // design points reflect onto each other under t -> (m + 1)/n - t
        for k in 0..5 {
            let grid = CurveGrid::midpoints(k, m, n);
            let a = autocov_at(&res, k, &grid, 0.2, Kernel::Biweight).unwrap();
            let b = autocov_at(&rev, k, &grid, 0.2, Kernel::Biweight).unwrap();
            if let CurveGrid::HalfGrid { first, last, .. } = grid {
                for h in first..=last {
                    let mirrored = 2 * (m + 1) - h;
                    assert!((a.at_half(h).unwrap() - b.at_half(mirrored).unwrap()).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn points_grid_matches_half_grid() {
        let res = noise(60, 4);
        for k in [0usize, 1, 2, 5] {
            let hg = CurveGrid::midpoints(k, 60, 60);
            let a = autocov_at(&res, k, &hg, 0.25, Kernel::Biweight).unwrap();
            let b = autocov_at(&res, k, &CurveGrid::Points(hg.points()), 0.25, Kernel::Biweight).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn missing_midpoint_is_reported() {
        let res = noise(30, 1);
        let c = autocov_at(&res, 2, &CurveGrid::midpoints(2, 30, 30), 0.3, Kernel::Biweight).unwrap();
        assert_eq!(c.at_half(3).unwrap_err(), Error::MissingMidpoint { lag: 2, position: 3 });
        assert!(c.at_half(4).is_ok());
    }

    #[test]
    fn bandwidth_choice_is_scale_invariant() {
        let res = noise(300, 12);
        let grid = bandwidth_grid::<f64>(300);
        for k in 0..3 {
            let a = autocov_bandwidth(&res, k, &grid, Kernel::Biweight).unwrap();
            let b = autocov_bandwidth(&res.scaled(10.0), k, &grid, Kernel::Biweight).unwrap();
            assert_eq!(a.selected, b.selected);
            let best = a.scores[a.selected_index].unwrap();
            assert!(a.scores.iter().flatten().all(|s| best <= *s));
        }
    }
}
