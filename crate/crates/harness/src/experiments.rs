//! Monte Carlo drivers for the covariance and prediction studies.

use std::io::Write;

use lscov::bandselect::BandSelectConfig;
use lscov::covmatrix::BandedCovariance;
use lscov::estimate::{estimate_covariance, CovarianceConfig};
use lscov::predictor::{fit_coefficients, predict_one, PredictorConfig};
use lscov::TimeSeries;
use lscov_sim::{replication_rng, trim_band, ProcessSpec};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::stats::{mean_and_se, qq_pairs};
use crate::HarnessError;

/// Truth entries dropped from the band may move the loss by at most this.
const TRUTH_TRIM: f64 = 1e-9;

/// Share of failed replications above which a cell is invalid.
const MAX_FAILURE_RATE: f64 = 0.01;

/// Failed replications with the reason, in replication order.
pub type Failures = Vec<(usize, String)>;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub model: String,
    pub mean: String,
    pub n: usize,
    pub estimator: String,
    pub mean_loss: f64,
    pub se: f64,
    /// Successful replications.
    pub reps: usize,
    pub failures: Failures,
    pub losses: Vec<f64>,
}

impl CellSummary {
    fn new(cfg: &ExperimentConfig, n: usize, estimator: &str, losses: Vec<f64>, failures: Failures) -> Self {
        let (mean_loss, se) = mean_and_se(&losses);
        Self {
            model: cfg.model.to_string(),
            mean: cfg.mean.to_string(),
            n,
            estimator: estimator.into(),
            mean_loss,
            se,
            reps: losses.len(),
            failures,
            losses,
        }
    }

    pub fn is_valid(&self) -> bool {
        let total = self.reps + self.failures.len();
        total > 0 && (self.failures.len() as f64) <= MAX_FAILURE_RATE * total as f64
    }
}

/// All cells of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub cells: Vec<CellSummary>,
}

impl ExperimentReport {
    pub fn cell(&self, n: usize, estimator: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.n == n && c.estimator == estimator)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "model,mean,n,estimator,mean_loss,se,reps")?;
        for c in &self.cells {
            writeln!(out, "{},{},{},{},{},{},{}", c.model, c.mean, c.n, c.estimator, c.mean_loss, c.se, c.reps)?;
        }
        Ok(())
    }
}

pub fn process_spec(cfg: &ExperimentConfig) -> ProcessSpec {
    ProcessSpec::new(cfg.model, cfg.mean).with_law(cfg.innovation_law()).with_noise_scale(cfg.noise_scale)
}

pub fn covariance_config(cfg: &ExperimentConfig) -> CovarianceConfig {
    CovarianceConfig {
        band: BandSelectConfig {
            l0: cfg.l0.unwrap_or(1),
            l1: cfg.l1.unwrap_or(6),
            alpha: cfg.alpha,
            block: cfg.block,
            kernel: cfg.kernel,
        },
        half_width: cfg.half_width,
        taper: cfg.taper,
        candidates: None,
    }
}

pub fn predictor_config(cfg: &ExperimentConfig) -> PredictorConfig {
    PredictorConfig {
        kernel: cfg.kernel,
        alpha: cfg.alpha,
        l0: cfg.l0,
        l1: cfg.l1,
        block: cfg.block,
        beta: cfg.beta,
        floor_multiplier: cfg.floor_multiplier,
    }
}

/// Runs `job` for every replication, in parallel, keeping replication order.
fn replicate<R: Send>(cfg: &ExperimentConfig, job: impl Fn(usize) -> R + Sync) -> Result<Vec<R>, HarnessError> {
    let run = || (0..cfg.reps).into_par_iter().map(&job).collect::<Vec<R>>();
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map(|pool| pool.install(run))
            .map_err(|e| HarnessError::Config(e.to_string())),
        None => Ok(run()),
    }
}

/// Spectral losses of the local and stationary estimators for one path.
fn cov_losses(
    spec: &ProcessSpec,
    n: usize,
    truth: &BandedCovariance<f64>,
    est_cfg: &CovarianceConfig,
    seed: u64,
    rep: usize,
) -> Result<[f64; 2], String> {
    let mut rng = replication_rng(seed, rep as u64);
    let path = spec.simulate(n, &mut rng).map_err(|e| e.to_string())?;
    let est = estimate_covariance(&TimeSeries::new(path.x), est_cfg).map_err(|e| e.to_string())?;
    let loss = |a: &BandedCovariance<f64>| -> Result<f64, String> {
        a.difference(truth).and_then(|d| d.operator_norm()).map_err(|e| e.to_string())
    };
    Ok([loss(&est.local)?, loss(&est.stationary)?])
}

/// Spectral loss of both estimators for each configured sample size.
pub fn run_cov_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let spec = process_spec(cfg);
    let est_cfg = covariance_config(cfg);
    let local_name = if cfg.taper { "tapered" } else { "local" };
    let mut cells = Vec::new();
    for &n in &cfg.sample_sizes {
        let truth = trim_band(&spec.true_covariance(n)?, TRUTH_TRIM);
        let results = replicate(cfg, |rep| cov_losses(&spec, n, &truth, &est_cfg, cfg.seed, rep))?;
        let mut local = Vec::new();
        let mut stationary = Vec::new();
        let mut failures = Vec::new();
        for (rep, r) in results.into_iter().enumerate() {
            match r {
                Ok([a, b]) => {
                    local.push(a);
                    stationary.push(b);
                }
                Err(e) => failures.push((rep, e)),
            }
        }
        cells.push(CellSummary::new(cfg, n, local_name, local, failures.clone()));
        cells.push(CellSummary::new(cfg, n, "stationary", stationary, failures));
    }
    Ok(ExperimentReport { cells })
}

/// One prediction outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionDraw {
    pub error: f64,
    /// Error divided by `sigma((m + 1) / n)`.
    pub standardized: f64,
}

/// Window length for the prediction time: `floor(n / 2)` or `n - 1`.
pub fn prediction_window(n: usize, t_pred: f64) -> usize {
    if t_pred >= 1.0 {
        n - 1
    } else {
        n / 2
    }
}

/// Simulates one path and predicts `X_{m+1}` from `X_1..X_m`.
pub fn prediction_draw(cfg: &ExperimentConfig, n: usize, rep: usize) -> Result<PredictionDraw, String> {
    let spec = process_spec(cfg);
    let mut rng = replication_rng(cfg.seed, rep as u64);
    let path = spec.simulate(n, &mut rng).map_err(|e| e.to_string())?;
    let m = prediction_window(n, cfg.t_pred);
    let window = TimeSeries::with_scale(path.x[..m].to_vec(), n).map_err(|e| e.to_string())?;
    let coeffs = fit_coefficients(&window, &predictor_config(cfg)).map_err(|e| e.to_string())?;
    let point = predict_one(&coeffs, &path.x[..m]).map_err(|e| e.to_string())?.point;
    let error = path.x[m] - point;
    let sigma = spec.sigma((m + 1) as f64 / n as f64);
    Ok(PredictionDraw { error, standardized: error / sigma })
}

/// Draws per sample size, in replication order.
pub fn prediction_draws(
    cfg: &ExperimentConfig,
    n: usize,
) -> Result<(Vec<PredictionDraw>, Failures), HarnessError> {
    let results = replicate(cfg, |rep| prediction_draw(cfg, n, rep))?;
    let mut draws = Vec::new();
    let mut failures = Vec::new();
    for (rep, r) in results.into_iter().enumerate() {
        match r {
            Ok(d) => draws.push(d),
            Err(e) => failures.push((rep, e)),
        }
    }
    Ok((draws, failures))
}

/// Mean squared one-step prediction error per sample size.
pub fn run_pred_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let name = format!("predictor_t{}", cfg.t_pred);
    let mut cells = Vec::new();
    for &n in &cfg.sample_sizes {
        let (draws, failures) = prediction_draws(cfg, n)?;
        let sq = draws.iter().map(|d| d.error * d.error).collect();
        cells.push(CellSummary::new(cfg, n, &name, sq, failures));
    }
    Ok(ExperimentReport { cells })
}

/// Pooled standardized errors over all sample sizes paired with quantiles of
/// the innovation law.
pub fn emit_qq(cfg: &ExperimentConfig) -> Result<Vec<(f64, f64)>, HarnessError> {
    let mut pooled = Vec::new();
    for &n in &cfg.sample_sizes {
        let (draws, _) = prediction_draws(cfg, n)?;
        pooled.extend(draws.iter().map(|d| d.standardized));
    }
    Ok(qq_pairs(&pooled, cfg.innovation_law()))
}

pub fn write_qq<W: Write>(pairs: &[(f64, f64)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "theoretical,sample")?;
    for (q, s) in pairs {
        writeln!(out, "{q},{s}")?;
    }
    Ok(())
}
