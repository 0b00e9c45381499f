//! Data-driven choice of the band half-width.
//!
//! For each candidate lag `l` the normalised sum `n^-1/2 |sum_i e_i e_{i+l}|`
//! is compared with `kappa(alpha) * sigma_l`, where `sigma_l^2` integrates a
//! kernel-smoothed long-run variance of the product series built from
//! differences of adjacent block sums. The width is the largest exceeding
//! lag, or `l0 - 1` when no lag exceeds.

use statrs::function::erf::erfc;

use crate::autocov::ResidualSeries;
use crate::smoothing::{bandwidth_grid, gcv_select_slice};
use crate::{Error, Kernel, Real, Result};

/// Smoothed long-run variance `g^2(t)` of the lag-`k` product series.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRunVarianceCurve<T> {
    pub lag: usize,
    pub block: usize,
    /// Bandwidth of the normalised kernel weights.
    pub weight_bandwidth: T,
    pub grid: Vec<T>,
    pub values: Vec<T>,
}

/// Default block length `ceil(2 m^(1/3))`, kept within `[2, m/4]`.
pub fn default_block(m: usize) -> usize {
    let b = (2.0 * (m as f64).cbrt()).ceil() as usize;
    b.min(m / 4).max(2)
}

/// Long-run variance curve of `e_i e_{i+k}` on `grid`.
///
/// `g^2(t) = sum_j (b/2) D_j^2 w(t, j)`, where `D_j` is the difference of the
/// block sums over `j-b+1..=j` and `j+1..=j+b` divided by `b`, and `w(t, .)`
/// are kernel weights with bandwidth `weight_bandwidth` normalised to one
/// over the window. Outside `[b/n, (m-b)/n]` the curve is held constant.
pub fn longrun_variance<T: Real>(
    res: &ResidualSeries<T>,
    k: usize,
    block: usize,
    weight_bandwidth: T,
    kernel: Kernel,
    grid: &[T],
) -> Result<LongRunVarianceCurve<T>> {
    let m = res.len();
    let n = res.scale();
    if block < 2 {
        return Err(Error::InvalidArgument(format!("block size {block} must be at least 2")));
    }
    if 4 * block > m {
        return Err(Error::BlockTooLarge { block, window: m });
    }
    if !(weight_bandwidth > T::zero()) {
        return Err(Error::InvalidArgument("weight bandwidth must be positive".into()));
    }
    let products = res.products(0, k);
    // prefix[i] = sum of products over 1..=i (zero beyond the window)
    let mut prefix = vec![T::zero(); m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i] + products[i];
    }
    let block_sum = |lo: isize, hi: isize| -> T {
        let lo = lo.max(1);
        let hi = hi.min(m as isize);
        if lo > hi {
            T::zero()
        } else {
            prefix[hi as usize] - prefix[lo as usize - 1]
        }
    };
    let bf = T::from_usize_lossy(block);
    let b = block as isize;
    let terms: Vec<T> = (1..=m as isize)
        .map(|j| {
            let delta = (block_sum(j - b + 1, j) - block_sum(j + 1, j + b)) / bf;
            bf * delta * delta / T::lit(2.0)
        })
        .collect();

    let nf = T::from_usize_lossy(n);
    let lower = bf / nf;
    let upper = T::from_usize_lossy(m.saturating_sub(block)) / nf;
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid {
        let t = t.max(lower).min(upper);
        let lo = ((t - weight_bandwidth) * nf).floor().max(T::one()).to_usize().unwrap_or(1);
        let hi = ((t + weight_bandwidth) * nf).ceil().min(T::from_usize_lossy(m)).to_usize().unwrap_or(m);
        let mut num = T::zero();
        let mut den = T::zero();
        for j in lo..=hi {
            let w = kernel.evaluate((T::from_usize_lossy(j) / nf - t) / weight_bandwidth);
            num += w * terms[j - 1];
            den += w;
        }
        if !(den > T::zero()) {
            return Err(Error::DegenerateWindow { t: t.to_f64_lossy() });
        }
        values.push(num / den);
    }
    Ok(LongRunVarianceCurve { lag: k, block, weight_bandwidth, grid: grid.to_vec(), values })
}

/// `sigma_k = sqrt(int_0^U g^2(t) dt)` with `U = min(m, n - k) / n`, by the
/// trapezoid rule on the curve's grid (linearly interpolated at `U`).
pub fn sigma_hat<T: Real>(curve: &LongRunVarianceCurve<T>, m: usize, n: usize, k: usize) -> Result<T> {
    let upper = T::from_usize_lossy(m.min(n.saturating_sub(k))) / T::from_usize_lossy(n);
    let g = &curve.grid;
    let tol = T::lit(1e-12);
    if g.is_empty() || g[0] > tol || *g.last().unwrap() < upper - tol {
        return Err(Error::InvalidArgument("long-run variance grid does not cover the integration range".into()));
    }
    let mut integral = T::zero();
    let half = T::lit(0.5);
    for i in 1..g.len() {
        let (t0, t1) = (g[i - 1], g[i]);
        if t0 >= upper {
            break;
        }
        let (v0, v1) = (curve.values[i - 1], curve.values[i]);
        if t1 <= upper {
            integral += half * (t1 - t0) * (v0 + v1);
        } else {
            let vu = v0 + (v1 - v0) * (upper - t0) / (t1 - t0);
            integral += half * (upper - t0) * (v0 + vu);
        }
    }
    Ok(integral.max(T::zero()).sqrt())
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse standard normal distribution function: Acklam's rational
/// approximation followed by one Halley step.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DomainError(p));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement; the upper tail works on the complement to keep precision
    let e = if p > 0.5 { -(0.5 * erfc(x / std::f64::consts::SQRT_2) - (1.0 - p)) } else { normal_cdf(x) - p };
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    Ok(x - u / (1.0 + x * u / 2.0))
}

/// Threshold multiplier: the `(1 + (1 - alpha)^(1/(l1 - l0 + 1))) / 2`
/// quantile of the standard normal law.
pub fn threshold_multiplier(alpha: f64, l0: usize, l1: usize) -> Result<f64> {
    let count = (l1 + 1).saturating_sub(l0).max(1) as f64;
    normal_quantile((1.0 + (1.0 - alpha).powf(1.0 / count)) / 2.0)
}

/// Settings for [`select_band`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandSelectConfig {
    pub l0: usize,
    pub l1: usize,
    pub alpha: f64,
    /// Block length for the long-run variance; `None` uses [`default_block`].
    pub block: Option<usize>,
    pub kernel: Kernel,
}

impl Default for BandSelectConfig {
    fn default() -> Self {
        Self { l0: 1, l1: 6, alpha: 0.01, block: None, kernel: Kernel::Biweight }
    }
}

/// Diagnostics and outcome of the band-width rule.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSelection<T> {
    pub l0: usize,
    pub l1: usize,
    pub alpha: f64,
    pub kappa: f64,
    /// `n^-1/2 |sum_i e_i e_{i+l}|` for `l = l0..=l1`.
    pub statistics: Vec<T>,
    pub sigmas: Vec<T>,
    /// Kernel-weight bandwidths chosen by GCV for each lag.
    pub bandwidths: Vec<T>,
    pub selected: usize,
}

impl<T: Real> BandSelection<T> {
    /// Lags whose statistic reaches the threshold (lags with `sigma = 0`
    /// never count).
    pub fn exceedances(&self) -> Vec<usize> {
        let kappa = T::lit(self.kappa);
        (self.l0..=self.l1)
            .zip(self.statistics.iter().zip(&self.sigmas))
            .filter(|(_, (&s, &sig))| sig > T::zero() && s >= kappa * sig)
            .map(|(l, _)| l)
            .collect()
    }
}

pub(crate) fn pick_band(l0: usize, exceed: &[usize]) -> usize {
    exceed.iter().copied().max().unwrap_or(l0 - 1)
}

/// Chooses the band half-width from the residuals.
pub fn select_band<T: Real>(res: &ResidualSeries<T>, cfg: &BandSelectConfig) -> Result<BandSelection<T>> {
    let m = res.len();
    let n = res.scale();
    if cfg.l0 < 1 || cfg.l0 > cfg.l1 || cfg.l1 >= m {
        return Err(Error::InvalidArgument(format!(
            "band range [{}, {}] must satisfy 1 <= l0 <= l1 < m = {m}",
            cfg.l0, cfg.l1
        )));
    }
    let block = cfg.block.unwrap_or_else(|| default_block(m));
    let kappa = threshold_multiplier(cfg.alpha, cfg.l0, cfg.l1)?;
    let candidates = bandwidth_grid::<T>(m);
    let nf = T::from_usize_lossy(n);
    let grid: Vec<T> = (0..=m).map(|j| T::from_usize_lossy(j) / nf).collect();
    let mut statistics = Vec::new();
    let mut sigmas = Vec::new();
    let mut bandwidths = Vec::new();
    for l in cfg.l0..=cfg.l1 {
        let products = res.products(0, l);
        let sum: T = products.iter().copied().sum();
        statistics.push(sum.abs() / nf.sqrt());
        let search = gcv_select_slice(&products, n, &candidates, cfg.kernel)?;
        let curve = longrun_variance(res, l, block, search.selected, cfg.kernel, &grid)?;
        sigmas.push(sigma_hat(&curve, m, n, l)?);
        bandwidths.push(search.selected);
    }
    let mut sel = BandSelection {
        l0: cfg.l0,
        l1: cfg.l1,
        alpha: cfg.alpha,
        kappa,
        statistics,
        sigmas,
        bandwidths,
        selected: 0,
    };
    sel.selected = pick_band(cfg.l0, &sel.exceedances());
    Ok(sel)
}
