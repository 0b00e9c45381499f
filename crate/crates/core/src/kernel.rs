use crate::Real;

/// Compactly supported smoothing kernels on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// `(15/16)(1 - u^2)^2`, continuously differentiable on the real line.
    #[default]
    Biweight,
    /// `(3/4)(1 - u^2)`; has kinks at the support boundary.
    Epanechnikov,
}

impl Kernel {
    /// Kernel density at `u`; zero outside the open interval `(-1, 1)`.
    #[inline]
    pub fn evaluate<T: Real>(self, u: T) -> T {
        let one = T::one();
        if u.abs() >= one {
            return T::zero();
        }
        let q = one - u * u;
        match self {
            Kernel::Biweight => T::from_f64(15.0 / 16.0).unwrap() * q * q,
            Kernel::Epanechnikov => T::from_f64(0.75).unwrap() * q,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Biweight => "biweight",
            Kernel::Epanechnikov => "epanechnikov",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "biweight" | "quartic" => Ok(Kernel::Biweight),
            "epanechnikov" => Ok(Kernel::Epanechnikov),
            other => Err(format!("unknown kernel `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(k: Kernel, a: f64, b: f64, steps: usize) -> f64 {
        let h = (b - a) / steps as f64;
        let mut acc = k.evaluate(a) + k.evaluate(b);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * k.evaluate(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn kernels_are_symmetric_densities() {
        for k in [Kernel::Biweight, Kernel::Epanechnikov] {
            assert!((simpson(k, -1.0, 1.0, 2000) - 1.0).abs() < 1e-6);
            for i in 0..=100 {
                let u = -1.5 + 3.0 * i as f64 / 100.0;
                assert_eq!(k.evaluate(u), k.evaluate(-u));
                assert!(k.evaluate(u) >= 0.0);
            }
            assert_eq!(k.evaluate(1.0f64), 0.0);
            assert_eq!(k.evaluate(-1.2f64), 0.0);
        }
    }

    #[test]
    fn biweight_derivative_vanishes_at_support_edge() {
        let h = 1e-6;
        let left: f64 = (Kernel::Biweight.evaluate(1.0 - h) - Kernel::Biweight.evaluate(1.0 - 2.0 * h)) / h;
        assert!(left.abs() < 1e-4);
        let epa: f64 = (Kernel::Epanechnikov.evaluate(1.0 - h) - Kernel::Epanechnikov.evaluate(1.0 - 2.0 * h)) / h;
        assert!(epa.abs() > 1.0);
    }
}
