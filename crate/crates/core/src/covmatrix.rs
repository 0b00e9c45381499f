//! Banded covariance matrix estimators and the positive-definite correction.

use std::io::Write;

use crate::autocov::{LagCurve, ResidualSeries};
use crate::linalg::{banded_spectral_radius, operator_norm, BandSpectral, DenseMatrix, SymmetricEigen};
use crate::{Error, Real, Result};

/// Which estimator produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Toeplitz, from residual sample autocovariances.
    Stationary,
    /// Midpoint-evaluated time-varying autocovariance curves.
    Local,
    /// Local estimator with the trapezoidal taper between `l` and `2l`.
    Tapered,
    /// Eigenvalues floored from below; dense.
    PdCorrected,
    /// Anything else, e.g. a difference of two estimates or a true matrix.
    Other,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage<T> {
    /// `diagonals[k][i]` is entry `(i, i + k)`.
    Diagonals(Vec<Vec<T>>),
    Dense(DenseMatrix<T>),
}

/// Symmetric `n x n` covariance matrix, stored by diagonals while banded.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedCovariance<T> {
    dim: usize,
    half_width: usize,
    flavor: Flavor,
    storage: Storage<T>,
}

impl<T: Real> BandedCovariance<T> {
    /// Builds a matrix from its main diagonal and superdiagonals.
    pub fn from_diagonals(diagonals: Vec<Vec<T>>, half_width: usize, flavor: Flavor) -> Result<Self> {
        let dim = diagonals.first().map_or(0, |d| d.len());
        for (k, d) in diagonals.iter().enumerate() {
            if d.len() != dim.saturating_sub(k) {
                return Err(Error::LengthMismatch { expected: dim.saturating_sub(k), actual: d.len() });
            }
        }
        Ok(Self { dim, half_width, flavor, storage: Storage::Diagonals(diagonals) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The band half-width `l_n` the estimate was built with.
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Largest `|i - j|` that may hold a nonzero entry.
    pub fn effective_width(&self) -> usize {
        match &self.storage {
            Storage::Diagonals(d) => d.len().saturating_sub(1),
            Storage::Dense(_) => self.dim.saturating_sub(1),
        }
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn diagonals(&self) -> Option<&[Vec<T>]> {
        match &self.storage {
            Storage::Diagonals(d) => Some(d),
            Storage::Dense(_) => None,
        }
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> T {
        match &self.storage {
            Storage::Diagonals(d) => {
                let (lo, k) = if i <= j { (i, j - i) } else { (j, i - j) };
                d.get(k).map_or(T::zero(), |diag| diag[lo])
            }
            Storage::Dense(m) => m[(i, j)],
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Diagonals(d) => {
                let mut out = DenseMatrix::zeros(self.dim, self.dim);
                for (k, diag) in d.iter().enumerate() {
                    for (i, &v) in diag.iter().enumerate() {
                        out[(i, i + k)] = v;
                        out[(i + k, i)] = v;
                    }
                }
                out
            }
        }
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, actual: x.len() });
        }
        match &self.storage {
            Storage::Dense(m) => Ok(m.matvec(x)),
            Storage::Diagonals(d) => {
                let mut y = vec![T::zero(); self.dim];
                for (k, diag) in d.iter().enumerate() {
                    for (i, &v) in diag.iter().enumerate() {
                        y[i] += v * x[i + k];
                        if k > 0 {
                            y[i + k] += v * x[i];
                        }
                    }
                }
                Ok(y)
            }
        }
    }

    /// `self - other` as a banded matrix of width `max` of both widths.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::LengthMismatch { expected: self.dim, actual: other.dim });
        }
        let (Some(a), Some(b)) = (self.diagonals(), other.diagonals()) else {
            let dense = self.to_dense().sub(&other.to_dense());
            return Ok(Self { dim: self.dim, half_width: self.dim, flavor: Flavor::Other, storage: Storage::Dense(dense) });
        };
        let width = a.len().max(b.len());
        let diagonals = (0..width)
            .map(|k| {
                (0..self.dim - k)
                    .map(|i| {
                        a.get(k).map_or(T::zero(), |d| d[i]) - b.get(k).map_or(T::zero(), |d| d[i])
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            half_width: self.half_width.max(other.half_width),
            flavor: Flavor::Other,
            storage: Storage::Diagonals(diagonals),
        })
    }

    /// Operator norm; banded storage uses the band reduction.
    pub fn operator_norm(&self) -> Result<T> {
        match &self.storage {
            Storage::Diagonals(d) if !d.is_empty() => banded_spectral_radius(d),
            Storage::Diagonals(_) => Ok(T::zero()),
            Storage::Dense(m) => operator_norm(m),
        }
    }

    /// Writes the nonzero upper-triangle entries as `i,j,value` rows
    /// (1-based indices) for banded storage, every entry for dense storage.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,value")?;
        match &self.storage {
            Storage::Diagonals(d) => {
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        let k = i.abs_diff(j);
                        if k < d.len() {
                            writeln!(out, "{},{},{}", i + 1, j + 1, self.get(i, j))?;
                        }
                    }
                }
            }
            Storage::Dense(m) => {
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        writeln!(out, "{},{},{}", i + 1, j + 1, m[(i, j)])?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Row-major dense CSV without header.
    pub fn write_dense_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| self.get(i, j).to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Toeplitz banded estimate from the residual sample autocovariances
/// `(m - k)^-1 sum_s e_s e_{s+k}`.
pub fn banded_stationary<T: Real>(res: &ResidualSeries<T>, half_width: usize) -> Result<BandedCovariance<T>> {
    let m = res.len();
    if half_width >= m {
        return Err(Error::InvalidArgument(format!("half width {half_width} must be below {m}")));
    }
    let e = res.values();
    let diagonals = (0..=half_width)
        .map(|k| {
            let s: T = e.iter().zip(&e[k..]).map(|(&a, &b)| a * b).sum();
            vec![s / T::from_usize_lossy(m - k); m - k]
        })
        .collect();
    BandedCovariance::from_diagonals(diagonals, half_width, Flavor::Stationary)
}

fn curve_for<T: Real>(curves: &[LagCurve<T>], k: usize) -> Result<&LagCurve<T>> {
    curves
        .iter()
        .find(|c| c.lag == k)
        .ok_or_else(|| Error::InvalidArgument(format!("no curve supplied for lag {k}")))
}

/// Diagonal `k` of the midpoint matrix: `gamma_k((2i + k) / (2n))` for
/// 1-based `i = 1..=dim-k`.
fn midpoint_diagonal<T: Real>(curve: &LagCurve<T>, dim: usize, k: usize, weight: T) -> Result<Vec<T>> {
    (1..=dim - k).map(|i| Ok(weight * curve.at_half(2 * i + k)?)).collect()
}

/// Banded estimate with entry `(i, j) = gamma_{|i-j|}((i + j) / (2n))`.
pub fn banded_local<T: Real>(curves: &[LagCurve<T>], dim: usize, half_width: usize) -> Result<BandedCovariance<T>> {
    if half_width >= dim {
        return Err(Error::InvalidArgument(format!("half width {half_width} must be below {dim}")));
    }
    let diagonals = (0..=half_width)
        .map(|k| midpoint_diagonal(curve_for(curves, k)?, dim, k, T::one()))
        .collect::<Result<Vec<_>>>()?;
    BandedCovariance::from_diagonals(diagonals, half_width, Flavor::Local)
}

/// Trapezoidal taper: 1 on `|x| < 1`, `2 - |x|` on `[1, 2]`, 0 beyond.
pub fn taper<T: Real>(x: T) -> T {
    let a = x.abs();
    let two = T::lit(2.0);
    if a < T::one() {
        T::one()
    } else if a <= two {
        two - a
    } else {
        T::zero()
    }
}

/// Tapered estimate: entry `(i, j)` is `taper(|i-j| / l) gamma_{|i-j|}`
/// at the midpoint. Needs curves for lags below `2 l`.
pub fn taper_local<T: Real>(curves: &[LagCurve<T>], dim: usize, half_width: usize) -> Result<BandedCovariance<T>> {
    let width = if half_width == 0 { 0 } else { (2 * half_width - 1).min(dim.saturating_sub(1)) };
    let l = T::from_usize_lossy(half_width.max(1));
    let diagonals = (0..=width)
        .map(|k| {
            let w = if half_width == 0 { T::one() } else { taper(T::from_usize_lossy(k) / l) };
            midpoint_diagonal(curve_for(curves, k)?, dim, k, w)
        })
        .collect::<Result<Vec<_>>>()?;
    BandedCovariance::from_diagonals(diagonals, half_width, Flavor::Tapered)
}

/// Eigenvalue floor `multiplier * int_0^{m/n} gamma_0 / m^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFloorParams<T> {
    pub beta: T,
    pub multiplier: T,
    pub gamma0_integral: T,
    pub floor: T,
}

impl<T: Real> SpectralFloorParams<T> {
    pub const DEFAULT_BETA: f64 = 0.5;
    pub const DEFAULT_MULTIPLIER: f64 = 10.0;

    pub fn new(gamma0_integral: T, m: usize, beta: T, multiplier: T) -> Self {
        let floor = multiplier * gamma0_integral / T::from_usize_lossy(m).powf(beta);
        Self { beta, multiplier, gamma0_integral, floor }
    }

    /// Integrates the lag-0 curve over `[0, m/n]` with the trapezoid rule on
    /// the design grid; the curve must hold every even half-grid position
    /// `0, 2, ..., 2m`.
    pub fn from_lag0(curve: &LagCurve<T>, m: usize, n: usize, beta: T, multiplier: T) -> Result<Self> {
        let step = T::one() / T::from_usize_lossy(n);
        let half = T::lit(0.5);
        let mut integral = T::zero();
        let mut prev = curve.at_half(0)?;
        for j in 1..=m {
            let next = curve.at_half(2 * j)?;
            integral += half * step * (prev + next);
            prev = next;
        }
        Ok(Self::new(integral, m, beta, multiplier))
    }
}

/// Replaces every eigenvalue below `params.floor` by the floor, keeping the
/// eigenvectors. The result is dense and symmetric.
pub fn pd_correct<T: Real>(a: &BandedCovariance<T>, params: &SpectralFloorParams<T>) -> Result<BandedCovariance<T>> {
    if !params.floor.is_finite() {
        return Err(Error::InvalidArgument("eigenvalue floor must be finite".into()));
    }
    let eig = SymmetricEigen::new(&a.to_dense())?;
    let floor = params.floor;
    let mut dense = eig.reconstruct(|v| v.max(floor));
    dense.symmetrize();
    Ok(BandedCovariance {
        dim: a.dim,
        half_width: a.half_width,
        flavor: Flavor::PdCorrected,
        storage: Storage::Dense(dense),
    })
}

/// Solves `A_pd x = rhs`, where `A_pd` is the floored version of the banded
/// matrix `a`, without forming `A_pd`: the inverse is applied through the
/// spectral factorisation as `U diag(1 / max(v, floor)) U^T rhs`.
pub fn pd_solve<T: Real>(a: &BandedCovariance<T>, floor: T, rhs: &[T]) -> Result<Vec<T>> {
    if !(floor > T::zero()) {
        return Err(Error::SolveFailure);
    }
    let x = match a.diagonals() {
        Some(d) => BandSpectral::new(d, true)?.apply(|v| T::one() / v.max(floor), rhs)?,
        None => {
            let eig = SymmetricEigen::new(&a.to_dense())?;
            let z: Vec<T> = (0..a.dim)
                .map(|k| (0..a.dim).map(|i| eig.vectors[(i, k)] * rhs[i]).sum::<T>() / eig.values[k].max(floor))
                .collect();
            (0..a.dim).map(|i| (0..a.dim).map(|k| eig.vectors[(i, k)] * z[k]).sum()).collect()
        }
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolveFailure);
    }
    Ok(x)
}
