use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal, StudentT};

use crate::SimError;

/// Innovation distributions, all standardized to mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnovationLaw {
    StdNormal,
    /// `t(6) / sqrt(1.5)`.
    StdT6,
    /// `(X - 5) / sqrt(10)` with `X ~ chi2(5)`.
    StdChiSq5,
    /// `(X - 6) / sqrt(12)` with `X ~ chi2(6)`.
    StdChiSq6,
}

#[derive(Debug, Clone, Copy)]
enum Sampler {
    Normal,
    T(StudentT<f64>),
    Chi(ChiSquared<f64>, f64),
}

impl InnovationLaw {
    fn sampler(self) -> Sampler {
        match self {
            InnovationLaw::StdNormal => Sampler::Normal,
            InnovationLaw::StdT6 => Sampler::T(StudentT::new(6.0).expect("valid degrees of freedom")),
            InnovationLaw::StdChiSq5 => Sampler::Chi(ChiSquared::new(5.0).expect("valid degrees of freedom"), 5.0),
            InnovationLaw::StdChiSq6 => Sampler::Chi(ChiSquared::new(6.0).expect("valid degrees of freedom"), 6.0),
        }
    }

    /// `count` iid draws.
    pub fn sample<R: Rng + ?Sized>(self, count: usize, rng: &mut R) -> Vec<f64> {
        let sampler = self.sampler();
        let t_scale = 1.5f64.sqrt().recip();
        (0..count)
            .map(|_| match sampler {
                Sampler::Normal => StandardNormal.sample(rng),
                Sampler::T(d) => d.sample(rng) * t_scale,
                Sampler::Chi(d, nu) => (d.sample(rng) - nu) / (2.0 * nu).sqrt(),
            })
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            InnovationLaw::StdNormal => "normal",
            InnovationLaw::StdT6 => "t6",
            InnovationLaw::StdChiSq5 => "chisq5",
            InnovationLaw::StdChiSq6 => "chisq6",
        }
    }
}

impl fmt::Display for InnovationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InnovationLaw {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "std_normal" => Ok(InnovationLaw::StdNormal),
            "t6" | "std_t6" => Ok(InnovationLaw::StdT6),
            "chisq5" | "std_chisq5" => Ok(InnovationLaw::StdChiSq5),
            "chisq6" | "std_chisq6" => Ok(InnovationLaw::StdChiSq6),
            _ => Err(SimError::Parse(format!("unknown innovation law '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(law: InnovationLaw, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = law.sample(1_000_000, &mut rng);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        (mean, var)
    }

    #[test]
    fn standardized_moments() {
        let (m, v) = moments(InnovationLaw::StdNormal, 1);
        assert!(m.abs() < 0.004 && (v - 1.0).abs() < 0.01, "{m} {v}");
        for (law, seed) in [(InnovationLaw::StdT6, 2), (InnovationLaw::StdChiSq5, 3), (InnovationLaw::StdChiSq6, 4)] {
            let (m, v) = moments(law, seed);
            assert!(m.abs() < 0.005, "{law}: mean {m}");
            assert!((v - 1.0).abs() < 0.02, "{law}: var {v}");
        }
    }

    #[test]
    fn deterministic_given_state() {
        let a = InnovationLaw::StdT6.sample(50, &mut ChaCha8Rng::seed_from_u64(9));
        let b = InnovationLaw::StdT6.sample(50, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn parse_names() {
        assert_eq!("chisq6".parse::<InnovationLaw>().unwrap(), InnovationLaw::StdChiSq6);
        assert!("cauchy".parse::<InnovationLaw>().is_err());
    }
}
