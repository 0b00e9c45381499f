use crate::{Error, Real, Result};

/// Observations `x_1..x_len` placed on the design grid `i / scale`.
///
/// `scale` is the sample size `n` that fixes rescaled time. A window of the
/// first `m` observations keeps the same scale, so its design points cover
/// `[1/n, m/n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    values: Vec<T>,
    scale: usize,
}

impl<T: Real> TimeSeries<T> {
    /// A full sample: the scale equals the length.
    pub fn new(values: Vec<T>) -> Self {
        let scale = values.len();
        Self { values, scale }
    }

    pub fn with_scale(values: Vec<T>, scale: usize) -> Result<Self> {
        if scale < values.len() || scale == 0 {
            return Err(Error::InvalidArgument(format!(
                "scale {scale} must be positive and at least the length {}",
                values.len()
            )));
        }
        Ok(Self { values, scale })
    }

    /// The first `m` observations on the same design grid.
    pub fn window(&self, m: usize) -> Result<Self> {
        if m > self.values.len() {
            return Err(Error::LengthMismatch { expected: m, actual: self.values.len() });
        }
        Ok(Self { values: self.values[..m].to_vec(), scale: self.scale })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    /// Design point `i / n` for the 1-based index `i`.
    pub fn design_point(&self, i: usize) -> T {
        T::from_usize_lossy(i) / T::from_usize_lossy(self.scale)
    }

    pub fn design_grid(&self) -> Vec<T> {
        (1..=self.len()).map(|i| self.design_point(i)).collect()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), scale: self.scale }
    }
}
