use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lscov::covmatrix::BandedCovariance;
use lscov::estimate::estimate_covariance;
use lscov::predictor::{fit_coefficients, predict_one};
use lscov::TimeSeries;
use lscov_harness::config::{AnalyzeSection, BenchSection, EstimationSection, RunSection};
use lscov_harness::experiments::{covariance_config, predictor_config, process_spec, write_qq};
use lscov_harness::{
    analyze_csv, emit_qq, run_cov_experiment, run_pred_experiment, ConfigFile, Experiment, ExperimentConfig,
    MarketSeries, Overrides,
};
use lscov_sim::replication_rng;

#[derive(Parser)]
#[command(name = "lscov", version, about = "Covariance estimation and prediction for locally stationary series")]
struct Cli {
    /// TOML file with [run], [bench], [estimation] and [analyze] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Local,
    Stationary,
    Pd,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path of a model and write index,t,x,epsilon rows.
    Simulate {
        #[command(flatten)]
        run: RunSection,
        #[command(flatten)]
        bench: BenchSection,
    },
    /// Estimate the covariance matrix of a series and write i,j,value triplets.
    EstimateCov {
        #[command(flatten)]
        run: RunSection,
        #[command(flatten)]
        bench: BenchSection,
        #[command(flatten)]
        estimation: EstimationSection,
        #[command(flatten)]
        analyze: AnalyzeSection,
        #[arg(long, value_enum, default_value = "local")]
        estimator: Estimator,
    },
    /// Forecast the value following a series.
    Predict {
        #[command(flatten)]
        run: RunSection,
        #[command(flatten)]
        estimation: EstimationSection,
        #[command(flatten)]
        analyze: AnalyzeSection,
    },
    /// Run a Monte Carlo experiment.
    Bench {
        #[command(flatten)]
        run: RunSection,
        #[command(flatten)]
        bench: BenchSection,
        #[command(flatten)]
        estimation: EstimationSection,
    },
    /// Rolling one-step forecasts over a CSV column.
    Analyze {
        #[command(flatten)]
        run: RunSection,
        #[command(flatten)]
        estimation: EstimationSection,
        #[command(flatten)]
        analyze: AnalyzeSection,
    },
}

fn settings(file: &Option<PathBuf>, o: Overrides) -> Result<ExperimentConfig> {
    let base = match file {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    Ok(ExperimentConfig::resolve(&base.overlay(&o))?)
}

fn output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Input series: the configured file column, or a simulated path.
fn input_series(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    match &cfg.input {
        Some(p) => Ok(MarketSeries::load(p, &cfg.column, cfg.log_abs_returns)?.values),
        None => {
            let n = cfg.sample_sizes[0];
            Ok(process_spec(cfg).simulate(n, &mut replication_rng(cfg.seed, 0))?.x)
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { run, bench } => {
            let cfg = settings(&cli.config, Overrides { run, bench, ..Default::default() })?;
            let n = cfg.sample_sizes[0];
            let path = process_spec(&cfg).simulate(n, &mut replication_rng(cfg.seed, 0))?;
            path.write_csv(output(&cfg)?)?;
        }
        Command::EstimateCov { run, bench, estimation, analyze, estimator } => {
            let cfg = settings(&cli.config, Overrides { run, bench, estimation, analyze })?;
            let y = TimeSeries::new(input_series(&cfg)?);
            let est = estimate_covariance(&y, &covariance_config(&cfg))?;
            let matrix: BandedCovariance<f64> = match estimator {
                Estimator::Local => est.local,
                Estimator::Stationary => est.stationary,
                Estimator::Pd => est.pd_corrected(cfg.beta, cfg.floor_multiplier)?,
            };
            eprintln!("half width {}", est.half_width);
            matrix.write_triplets(output(&cfg)?)?;
        }
        Command::Predict { run, estimation, analyze } => {
            let cfg = settings(&cli.config, Overrides { run, estimation, analyze, ..Default::default() })?;
            let y = input_series(&cfg)?;
            let coeffs = fit_coefficients(&TimeSeries::new(y.clone()), &predictor_config(&cfg))?;
            let f = predict_one(&coeffs, &y)?;
            let mut out = output(&cfg)?;
            writeln!(out, "window,band,intercept,trend_at_window_end,prediction")?;
            writeln!(out, "{},{},{},{},{}", coeffs.window, coeffs.band, coeffs.intercept, f.trend_at_window_end, f.point)?;
        }
        Command::Bench { run, bench, estimation } => {
            let cfg = settings(&cli.config, Overrides { run, bench, estimation, ..Default::default() })?;
            match cfg.experiment {
                Experiment::CovLoss => {
                    let report = run_cov_experiment(&cfg)?;
                    for c in report.cells.iter().filter(|c| !c.is_valid()) {
                        eprintln!("warning: n = {} {}: {} failed replications", c.n, c.estimator, c.failures.len());
                    }
                    report.write_csv(output(&cfg)?)?;
                }
                Experiment::PredMse => run_pred_experiment(&cfg)?.write_csv(output(&cfg)?)?,
                Experiment::Qq => write_qq(&emit_qq(&cfg)?, output(&cfg)?)?,
                Experiment::Market => bail!("use the analyze subcommand for market data"),
            }
        }
        Command::Analyze { run, estimation, analyze } => {
            let cfg = settings(&cli.config, Overrides { run, estimation, analyze, ..Default::default() })?;
            let Some(input) = cfg.input.clone() else {
                bail!("analyze needs --input");
            };
            let (series, report) = analyze_csv(&input, &cfg)?;
            eprintln!(
                "{} values after cleaning ({} dropped), {} forecasts, {} failed, mse {}",
                series.values.len(),
                series.dropped.len(),
                report.steps.len(),
                report.failures.len(),
                report.mse()
            );
            report.write_csv(output(&cfg)?)?;
        }
    }
    Ok(())
}
