//! Experiment configuration: a TOML file with sections, overridden key by key
//! from the command line.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lscov::Kernel;
use lscov_sim::{InnovationLaw, MeanFunction, ModelKind};
use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    CovLoss,
    PredMse,
    Qq,
    Market,
}

/// `[run]`
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Master seed; replication `r` uses stream `r` under this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// `[bench]`
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// a, b, c, d, tvar6 or tvma6.
    #[arg(long)]
    pub model: Option<String>,
    /// I, II or III.
    #[arg(long)]
    pub mean: Option<String>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// normal, t6, chisq5 or chisq6; the model default when absent.
    #[arg(long)]
    pub law: Option<String>,
    /// Prediction time: 0.5 predicts X_{n/2+1}, 1 predicts X_n.
    #[arg(long)]
    pub t_pred: Option<f64>,
    /// Multiplies the error process.
    #[arg(long)]
    pub noise_scale: Option<f64>,
}

/// `[estimation]`
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct EstimationSection {
    /// biweight or epanechnikov.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub l0: Option<usize>,
    #[arg(long)]
    pub l1: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Block length of the long-run variance estimator.
    #[arg(long)]
    pub block: Option<usize>,
    /// Fixed band half width instead of the selection rule.
    #[arg(long)]
    pub half_width: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub taper: Option<bool>,
    /// Exponent of the eigenvalue floor.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub floor_multiplier: Option<f64>,
}

/// `[analyze]`
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    /// Input CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Value column (case-insensitive header match).
    #[arg(long)]
    pub column: Option<String>,
    /// Transform prices to log absolute log returns.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log_abs_returns: Option<bool>,
    /// 1-based index of the first forecast in the cleaned series.
    #[arg(long)]
    pub start: Option<usize>,
    /// Number of final observations to forecast; alternative to `start`.
    #[arg(long)]
    pub steps: Option<usize>,
}

/// Whole file; every section optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub bench: BenchSection,
    #[serde(default)]
    pub estimation: EstimationSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }
}

macro_rules! overlay {
    ($base:expr, $over:expr, $($field:ident),+) => {
        $( if $over.$field.is_some() { $base.$field = $over.$field.clone(); } )+
    };
}

/// Command-line values take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub run: RunSection,
    pub bench: BenchSection,
    pub estimation: EstimationSection,
    pub analyze: AnalyzeSection,
}

impl ConfigFile {
    pub fn overlay(mut self, o: &Overrides) -> Self {
        overlay!(self.run, o.run, seed, out, threads);
        overlay!(self.bench, o.bench, experiment, model, mean, n, reps, law, t_pred, noise_scale);
        overlay!(
            self.estimation,
            o.estimation,
            kernel,
            l0,
            l1,
            alpha,
            block,
            half_width,
            taper,
            beta,
            floor_multiplier
        );
        overlay!(self.analyze, o.analyze, input, column, log_abs_returns, start, steps);
        self
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub experiment: Experiment,
    pub model: ModelKind,
    pub mean: MeanFunction,
    pub sample_sizes: Vec<usize>,
    pub reps: usize,
    pub law: Option<InnovationLaw>,
    pub t_pred: f64,
    pub noise_scale: f64,
    pub kernel: Kernel,
    /// Band search range; `None` means the experiment's default.
    pub l0: Option<usize>,
    pub l1: Option<usize>,
    pub alpha: f64,
    pub block: Option<usize>,
    pub half_width: Option<usize>,
    pub taper: bool,
    pub beta: f64,
    pub floor_multiplier: f64,
    pub input: Option<PathBuf>,
    pub column: String,
    pub log_abs_returns: bool,
    pub start: Option<usize>,
    pub steps: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out: None,
            threads: None,
            experiment: Experiment::CovLoss,
            model: ModelKind::A,
            mean: MeanFunction::I,
            sample_sizes: vec![250, 500, 1000],
            reps: 200,
            law: None,
            t_pred: 0.5,
            noise_scale: 1.0,
            kernel: Kernel::Biweight,
            l0: None,
            l1: None,
            alpha: 0.01,
            block: None,
            half_width: None,
            taper: false,
            beta: 0.5,
            floor_multiplier: 10.0,
            input: None,
            column: "close".into(),
            log_abs_returns: false,
            start: None,
            steps: None,
        }
    }
}

fn parse_with<T, E: std::fmt::Display>(v: &str, f: impl Fn(&str) -> Result<T, E>) -> Result<T, HarnessError> {
    f(v).map_err(|e| HarnessError::Config(e.to_string()))
}

impl ExperimentConfig {
    pub fn resolve(file: &ConfigFile) -> Result<Self, HarnessError> {
        let mut c = Self::default();
        let (r, b, e, a) = (&file.run, &file.bench, &file.estimation, &file.analyze);
        if let Some(v) = r.seed {
            c.seed = v;
        }
        c.out = r.out.clone();
        c.threads = r.threads;
        if let Some(v) = b.experiment {
            c.experiment = v;
        }
        if let Some(v) = &b.model {
            c.model = parse_with(v, str::parse)?;
        }
        if let Some(v) = &b.mean {
            c.mean = parse_with(v, str::parse)?;
        }
        if let Some(v) = &b.n {
            c.sample_sizes = v.clone();
        }
        if let Some(v) = b.reps {
            c.reps = v;
        }
        if let Some(v) = &b.law {
            c.law = Some(parse_with(v, str::parse)?);
        }
        if let Some(v) = b.t_pred {
            c.t_pred = v;
        }
        if let Some(v) = b.noise_scale {
            c.noise_scale = v;
        }
        if let Some(v) = &e.kernel {
            c.kernel = parse_with(v, str::parse)?;
        }
        c.l0 = e.l0;
        c.l1 = e.l1;
        if let Some(v) = e.alpha {
            c.alpha = v;
        }
        c.block = e.block;
        c.half_width = e.half_width;
        if let Some(v) = e.taper {
            c.taper = v;
        }
        if let Some(v) = e.beta {
            c.beta = v;
        }
        if let Some(v) = e.floor_multiplier {
            c.floor_multiplier = v;
        }
        c.input = a.input.clone();
        if let Some(v) = &a.column {
            c.column = v.clone();
        }
        if let Some(v) = a.log_abs_returns {
            c.log_abs_returns = v;
        }
        c.start = a.start;
        c.steps = a.steps;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.reps < 1 {
            return bad("reps must be at least 1".into());
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < 50) {
            return bad(format!("sample size {n} is below 50"));
        }
        if self.sample_sizes.is_empty() {
            return bad("no sample sizes given".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} must lie in (0, 1)", self.alpha));
        }
        if self.t_pred != 0.5 && self.t_pred != 1.0 {
            return bad(format!("t_pred must be 0.5 or 1, got {}", self.t_pred));
        }
        if !(self.noise_scale >= 0.0) || !(self.beta > 0.0) || !(self.floor_multiplier > 0.0) {
            return bad("noise_scale, beta and floor_multiplier must be positive".into());
        }
        Ok(())
    }

    /// Innovation law used for the configured model.
    pub fn innovation_law(&self) -> InnovationLaw {
        self.law.unwrap_or_else(|| self.model.default_law())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_defaults() {
        let file = ConfigFile::parse(
            "[run]\nseed = 7\n[bench]\nexperiment = \"pred_mse\"\nmodel = \"tvar6\"\nn = [300]\nreps = 4\n[estimation]\ntaper = true\n",
        )
        .unwrap();
        let c = ExperimentConfig::resolve(&file).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.experiment, Experiment::PredMse);
        assert_eq!(c.model, ModelKind::TvAr6);
        assert_eq!(c.sample_sizes, vec![300]);
        assert!(c.taper);
        assert_eq!(c.mean, MeanFunction::I);
        assert_eq!(c.innovation_law(), InnovationLaw::StdNormal);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(ConfigFile::parse("[bench]\nrepz = 3\n").is_err());
        assert!(ConfigFile::parse("[other]\nx = 1\n").is_err());
    }

    #[test]
    fn cli_overrides_file() {
        let file = ConfigFile::parse("[bench]\nreps = 10\nmodel = \"b\"\n").unwrap();
        let mut o = Overrides::default();
        o.bench.reps = Some(3);
        let c = ExperimentConfig::resolve(&file.overlay(&o)).unwrap();
        assert_eq!(c.reps, 3);
        assert_eq!(c.model, ModelKind::B);
    }

    #[test]
    fn invalid_values() {
        assert!(ExperimentConfig::resolve(&ConfigFile::parse("[bench]\nreps = 0\n").unwrap()).is_err());
        assert!(ExperimentConfig::resolve(&ConfigFile::parse("[bench]\nn = [20]\n").unwrap()).is_err());
        assert!(ExperimentConfig::resolve(&ConfigFile::parse("[bench]\nmodel = \"z\"\n").unwrap()).is_err());
    }
}
