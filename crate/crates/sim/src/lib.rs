//! Exact simulation of locally stationary test processes and their true
//! covariance matrices.

mod innovation;
mod process;

pub use innovation::InnovationLaw;
pub use process::{
    factor_polynomial, trim_band, truncation_length, tv6_factors, MeanFunction, ModelKind, ProcessSpec, SimulatedPath,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// True covariance matrices use the core banded storage.
pub type TrueCovariance = lscov::BandedCovariance64;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("filter is not stable at t = {t}: factor modulus {modulus}")]
    UnstableFilter { t: f64, modulus: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Parse(String),
    #[error("sample size {0} is too small")]
    TooShort(usize),
    #[error(transparent)]
    Core(#[from] lscov::Error),
}

/// Independent stream for replication `rep` under `master_seed`.
pub fn replication_rng(master_seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(rep);
    rng
}
