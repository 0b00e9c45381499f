//! Dense and banded symmetric linear algebra: Householder tridiagonalisation,
//! implicit-shift QL, band-to-tridiagonal reduction by Givens rotations, and
//! the operator (spectral) norm.

use std::ops::{Index, IndexMut};

use crate::{Error, Real, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch { expected: rows * cols, actual: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    /// Replaces the matrix by `(A + A^T) / 2`.
    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        for i in 0..self.rows {
            for j in 0..i {
                let v = (self[(i, j)] + self[(j, i)]) * half;
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition `A = U diag(values) U^T` of a symmetric matrix.
/// Eigenvalues ascend; column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

impl<T: Real> SymmetricEigen<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        check_square(a)?;
        let n = a.rows();
        if n == 0 {
            return Ok(Self { values: vec![], vectors: DenseMatrix::zeros(0, 0) });
        }
        let mut v = a.clone();
        let mut d = vec![T::zero(); n];
        let mut e = vec![T::zero(); n];
        householder_tridiagonal(&mut v, &mut d, &mut e, true);
        tridiagonal_ql(&mut d, &mut e, |i, c, s| {
            for k in 0..n {
                let h = v[(k, i + 1)];
                v[(k, i + 1)] = s * v[(k, i)] + c * h;
                v[(k, i)] = c * v[(k, i)] - s * h;
            }
        })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| d[x].partial_cmp(&d[y]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&k| d[k]).collect();
        let vectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
        Ok(Self { values, vectors })
    }

    /// `U diag(f(values)) U^T`, symmetrised.
    pub fn reconstruct(&self, f: impl Fn(T) -> T) -> DenseMatrix<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(|&v| f(v)).collect();
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = T::zero();
                let ri = self.vectors.row(i);
                let rj = self.vectors.row(j);
                for k in 0..n {
                    acc += ri[k] * fv[k] * rj[k];
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc;
            }
        }
        out
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues<T: Real>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    check_square(a)?;
    let n = a.rows();
    let mut v = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    if n == 0 {
        return Ok(d);
    }
    householder_tridiagonal(&mut v, &mut d, &mut e, false);
    tridiagonal_ql(&mut d, &mut e, |_, _, _| {})?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

fn check_square<T: Real>(a: &DenseMatrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, expected square", a.rows(), a.cols())));
    }
    Ok(())
}

/// Householder reduction of the symmetric matrix held in `v` to tridiagonal
/// form (EISPACK `tred2`). On exit `d` holds the diagonal, `e[1..]` the
/// subdiagonal, and `v` the orthogonal transform when `accumulate` is set.
fn householder_tridiagonal<T: Real>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T], accumulate: bool) {
    let n = d.len();
    let zero = T::zero();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = zero;
                v[(j, i)] = zero;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[(k, j)] -= upd;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = zero;
            }
        }
        d[i] = h;
    }
    if accumulate {
        for i in 0..n - 1 {
            v[(n - 1, i)] = v[(i, i)];
            v[(i, i)] = T::one();
            let h = d[i + 1];
            if h != zero {
                for k in 0..=i {
                    d[k] = v[(k, i + 1)] / h;
                }
                for j in 0..=i {
                    let mut g = zero;
                    for k in 0..=i {
                        g += v[(k, i + 1)] * v[(k, j)];
                    }
                    for k in 0..=i {
                        let upd = g * d[k];
                        v[(k, j)] -= upd;
                    }
                }
            }
            for k in 0..=i {
                v[(k, i + 1)] = zero;
            }
        }
        for j in 0..n {
            d[j] = v[(n - 1, j)];
            v[(n - 1, j)] = zero;
        }
        v[(n - 1, n - 1)] = T::one();
    } else {
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = v[(j, j)];
        }
    }
    e[0] = zero;
}

/// Implicit-shift QL on the symmetric tridiagonal matrix with diagonal `d`
/// and subdiagonal `e[1..]` (EISPACK `tql2` convention). Eigenvalues are
/// left unsorted in `d`. Every plane rotation acting on coordinates
/// `(i, i + 1)` is reported to `rotation(i, c, s)` in application order.
fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T], mut rotation: impl FnMut(usize, T, T)) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let zero = T::zero();
    let one = T::one();
    let two = T::lit(2.0);
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;
    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigenFailure);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = norm2(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotation(i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok(())
}

/// `sqrt(a^2 + b^2)`, falling back to `hypot` when the squares leave the
/// normal range.
#[inline]
fn norm2<T: Real>(a: T, b: T) -> T {
    let r = (a * a + b * b).sqrt();
    if r.is_finite() && r > T::min_positive_value() {
        r
    } else {
        a.hypot(b)
    }
}

/// Plane rotation `x_p <- c x_p + s x_q`, `x_q <- -s x_p + c x_q`.
#[derive(Debug, Clone, Copy)]
struct Givens<T> {
    p: u32,
    c: T,
    s: T,
}

/// Spectral factorisation `A = Q S diag(d) S^T Q^T` of a symmetric banded
/// matrix, kept as two logs of plane rotations instead of explicit
/// eigenvectors. Costs `O(n^2 w)` time and `O(n w)` memory plus the logs, which makes it
/// practical to apply matrix functions to vectors for `n` in the thousands.
#[derive(Debug, Clone)]
pub struct BandSpectral<T> {
    n: usize,
    /// Eigenvalues, in the order matching the rotation log (not sorted).
    values: Vec<T>,
    band_rotations: Vec<Givens<T>>,
    ql_rotations: Vec<Givens<T>>,
}

impl<T: Real> BandSpectral<T> {
    /// Factorises the symmetric matrix whose `k`-th superdiagonal is
    /// `diagonals[k]` (length `n - k`).
    pub fn new(diagonals: &[Vec<T>], with_vectors: bool) -> Result<Self> {
        let n = diagonals.first().map_or(0, |d| d.len());
        let w = diagonals.len().saturating_sub(1).min(n.saturating_sub(1));
        let mut a = BandStore::new(n, w + 2);
        for (k, diag) in diagonals.iter().enumerate().take(w + 1) {
            if diag.len() != n - k {
                return Err(Error::LengthMismatch { expected: n - k, actual: diag.len() });
            }
            for (i, &v) in diag.iter().enumerate() {
                a[(i + k, i)] = v;
                a[(i, i + k)] = v;
            }
        }
        let mut band_rotations = Vec::new();
        reduce_band(&mut a, n, w, &mut band_rotations);
        let mut d: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
        let mut e = vec![T::zero(); n];
        for i in 1..n {
            e[i] = a[(i, i - 1)];
        }
        let mut ql_rotations = Vec::new();
        tridiagonal_ql(&mut d, &mut e, |i, c, s| {
            if with_vectors {
                ql_rotations.push(Givens { p: i as u32, c, s });
            }
        })?;
        if !with_vectors {
            band_rotations.clear();
        }
        Ok(Self { n, values: d, band_rotations, ql_rotations })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        let mut v = self.values.clone();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        v
    }

    /// `f(A) x`. Requires the factorisation to have been built with vectors.
    pub fn apply(&self, f: impl Fn(T) -> T, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: x.len() });
        }
        let mut z = x.to_vec();
        // Q^T x
        for g in &self.band_rotations {
            let (p, q) = (g.p as usize, g.p as usize + 1);
            let (xp, xq) = (z[p], z[q]);
            z[p] = g.c * xp + g.s * xq;
            z[q] = -g.s * xp + g.c * xq;
        }
        // S^T
        for g in &self.ql_rotations {
            let i = g.p as usize;
            let h = z[i + 1];
            z[i + 1] = g.s * z[i] + g.c * h;
            z[i] = g.c * z[i] - g.s * h;
        }
        for (zi, &v) in z.iter_mut().zip(&self.values) {
            *zi *= f(v);
        }
        // S
        for g in self.ql_rotations.iter().rev() {
            let i = g.p as usize;
            let (a, b) = (z[i], z[i + 1]);
            z[i] = g.c * a + g.s * b;
            z[i + 1] = -g.s * a + g.c * b;
        }
        // Q
        for g in self.band_rotations.iter().rev() {
            let (p, q) = (g.p as usize, g.p as usize + 1);
            let (xp, xq) = (z[p], z[q]);
            z[p] = g.c * xp - g.s * xq;
            z[q] = g.s * xp + g.c * xq;
        }
        Ok(z)
    }
}

/// Row-major storage of the entries with `|i - j| <= h` of an `n x n` matrix.
struct BandStore<T> {
    h: usize,
    data: Vec<T>,
}

impl<T: Real> BandStore<T> {
    fn new(n: usize, h: usize) -> Self {
        Self { h, data: vec![T::zero(); n * (2 * h + 1)] }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.h);
        i * (2 * self.h + 1) + j + self.h - i
    }
}

impl<T: Real> Index<(usize, usize)> for BandStore<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[self.offset(i, j)]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for BandStore<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        let k = self.offset(i, j);
        &mut self.data[k]
    }
}

/// Reduces the symmetric matrix `a` with half-bandwidth `w` to tridiagonal
/// form by Givens rotations with bulge chasing. Each rotation acts on the
/// adjacent pair `(p, p + 1)` and is appended to `log` as `a <- R a R^T`.
fn reduce_band<T: Real, M>(a: &mut M, n: usize, w: usize, log: &mut Vec<Givens<T>>)
where
    M: IndexMut<(usize, usize), Output = T>,
{
    if n < 3 || w < 2 {
        return;
    }
    for k in 0..n - 2 {
        let last = (k + w).min(n - 1);
        for r in (k + 2..=last).rev() {
            let mut col = k;
            let mut q = r;
            loop {
                let p = q - 1;
                let b = a[(q, col)];
                if b == T::zero() {
                    break;
                }
                let x = a[(p, col)];
                let rho = norm2(x, b);
                let (c, s) = (x / rho, b / rho);
                let lo = p.saturating_sub(w + 1);
                let hi = (q + w + 1).min(n - 1);
                for j in lo..=hi {
                    let (ap, aq) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = c * ap + s * aq;
                    a[(q, j)] = -s * ap + c * aq;
                }
                for i in lo..=hi {
                    let (ap, aq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * ap + s * aq;
                    a[(i, q)] = -s * ap + c * aq;
                }
                a[(q, col)] = T::zero();
                a[(col, q)] = T::zero();
                log.push(Givens { p: p as u32, c, s });
                let next = q + w;
                if next >= n {
                    break;
                }
                col = p;
                q = next;
            }
        }
    }
}

/// Largest absolute eigenvalue of a symmetric banded matrix given by its
/// superdiagonals.
pub fn banded_spectral_radius<T: Real>(diagonals: &[Vec<T>]) -> Result<T> {
    let spec = BandSpectral::new(diagonals, false)?;
    Ok(spec.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs())))
}

/// Dimension above which [`operator_norm`] switches to power iteration.
pub const DENSE_NORM_LIMIT: usize = 2000;

/// Operator norm `max_{|x| = 1} |A x|`, i.e. the largest singular value.
///
/// Symmetric inputs use the largest absolute eigenvalue from the
/// tridiagonal QL solver; other inputs use the eigenvalues of `A^T A`.
/// Beyond [`DENSE_NORM_LIMIT`] rows, power iteration on `A^T A` is used.
pub fn operator_norm<T: Real>(a: &DenseMatrix<T>) -> Result<T> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(T::zero());
    }
    if a.rows().max(a.cols()) > DENSE_NORM_LIMIT {
        return power_norm(a, T::lit(1e-10), 10_000);
    }
    if a.is_symmetric() {
        let ev = symmetric_eigenvalues(a)?;
        return Ok(ev.iter().fold(T::zero(), |acc, v| acc.max(v.abs())));
    }
    let gram = a.transpose().matmul(a);
    let ev = symmetric_eigenvalues(&gram)?;
    Ok(ev.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt())
}

/// Power iteration on `A^T A`, stopped once the relative change of the
/// norm estimate falls below `tol`.
pub fn power_norm<T: Real>(a: &DenseMatrix<T>, tol: T, max_iter: usize) -> Result<T> {
    let n = a.cols();
    // deterministic start with mixed signs to avoid orthogonality to the top vector
    let mut x: Vec<T> = (0..n).map(|i| T::one() + T::lit(((i * 7919) % 101) as f64 / 101.0)).collect();
    let norm = |v: &[T]| v.iter().map(|&t| t * t).sum::<T>().sqrt();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let at = a.transpose();
    let mut est = T::zero();
    for _ in 0..max_iter {
        let y = a.matvec(&x);
        let next = norm(&y);
        let z = at.matvec(&y);
        let nz = norm(&z);
        if nz == T::zero() {
            return Ok(T::zero());
        }
        x = z.into_iter().map(|v| v / nz).collect();
        if (next - est).abs() <= tol * next {
            return Ok(next);
        }
        est = next;
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, w: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                if i - j <= w {
                    let v = rng.random_range(-1.0..1.0);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
        }
        a
    }

    fn to_nalgebra(a: &DenseMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
    }

    fn diagonals_of(a: &DenseMatrix<f64>, w: usize) -> Vec<Vec<f64>> {
        let n = a.rows();
        (0..=w).map(|k| (0..n - k).map(|i| a[(i, i + k)]).collect()).collect()
    }

    #[test]
    fn eigen_matches_reference_solver() {
        for (n, seed) in [(1, 1), (2, 2), (8, 3), (33, 4)] {
            let a = random_symmetric(n, n, seed);
            let ours = SymmetricEigen::new(&a).unwrap();
            let mut theirs: Vec<f64> = to_nalgebra(&a).symmetric_eigen().eigenvalues.iter().copied().collect();
            theirs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (x, y) in ours.values.iter().zip(&theirs) {
                assert!((x - y).abs() < 1e-10);
            }
            let back = ours.reconstruct(|v| v);
            assert!(back.max_abs_diff(&a) < 1e-10);
            let only = symmetric_eigenvalues(&a).unwrap();
            for (x, y) in only.iter().zip(&theirs) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn band_spectral_apply_matches_dense_function() {
        for (n, w, seed) in [(3, 1, 5), (12, 2, 6), (40, 5, 7), (25, 24, 8), (60, 9, 9)] {
            let a = random_symmetric(n, w, seed);
            let spec = BandSpectral::new(&diagonals_of(&a, w), true).unwrap();
            let dense = SymmetricEigen::new(&a).unwrap();
            let mut ev = spec.eigenvalues();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (x, y) in ev.iter().zip(&dense.values) {
                assert!((x - y).abs() < 1e-10);
            }
            let f = |v: f64| 1.0 / v.max(0.3);
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
            let via_band = spec.apply(f, &x).unwrap();
            let via_dense = dense.reconstruct(f).matvec(&x);
            for (p, q) in via_band.iter().zip(&via_dense) {
                assert!((p - q).abs() < 1e-10, "n = {n}, w = {w}");
            }
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&DenseMatrix::<f64>::identity(7)).unwrap() - 1.0).abs() < 1e-14);
        let d = DenseMatrix::<f64>::diagonal(&[1.0, -3.0, 2.0]);
        assert!((operator_norm(&d).unwrap() - 3.0).abs() < 1e-14);
        let a = random_symmetric(8, 8, 42);
        let reference = to_nalgebra(&a)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        let ours = operator_norm(&a).unwrap();
        assert!((ours - reference).abs() <= 1e-8 * reference);
        let r = banded_spectral_radius(&diagonals_of(&a, 7)).unwrap();
        assert!((r - reference).abs() <= 1e-8 * reference);
    }

    #[test]
    fn nonsymmetric_norm_is_largest_singular_value() {
        let a = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 0.0, -1.0, 0.5, 3.0]).unwrap();
        let reference = to_nalgebra(&a).singular_values().max();
        assert!((operator_norm(&a).unwrap() - reference).abs() < 1e-10);
        let p = power_norm(&a, 1e-12, 10_000).unwrap();
        assert!((p - reference).abs() < 1e-8);
    }
}
