//! Price-series loading, the log absolute return transform and the rolling
//! forecast evaluation.

use std::io::Read;
use std::path::Path;

use lscov::predictor::{rolling_backtest, BacktestReport};

use crate::config::ExperimentConfig;
use crate::experiments::predictor_config;
use crate::HarnessError;

/// A cleaned input series.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSeries {
    /// Labels from a `date` column when present, one per kept value.
    pub dates: Vec<String>,
    /// Raw column values in file order.
    pub raw: Vec<f64>,
    /// Transformed values with non-finite entries removed.
    pub values: Vec<f64>,
    /// Positions (in the transformed series, 0-based) that were dropped.
    pub dropped: Vec<usize>,
    pub len_before: usize,
}

impl MarketSeries {
    /// Reads `column` (case-insensitive header match) from CSV text.
    pub fn from_reader<R: Read>(reader: R, column: &str, log_abs_returns: bool) -> Result<Self, HarnessError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| parse_error(1, e.to_string()))?.clone();
        let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let col = find(column).ok_or_else(|| parse_error(1, format!("no column named '{column}'")))?;
        let date_col = find("date");
        let mut raw = Vec::new();
        let mut labels = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 2;
            let rec = rec.map_err(|e| parse_error(line, e.to_string()))?;
            let field = rec.get(col).ok_or_else(|| parse_error(line, "missing field".into()))?;
            let v: f64 = field.parse().map_err(|_| parse_error(line, format!("'{field}' is not a number")))?;
            raw.push(v);
            labels.push(date_col.and_then(|c| rec.get(c)).unwrap_or_default().to_string());
        }
        let (transformed, transformed_labels): (Vec<f64>, Vec<String>) = if log_abs_returns {
            (raw.windows(2).map(|w| (w[1].ln() - w[0].ln()).abs().ln()).collect(), labels.into_iter().skip(1).collect())
        } else {
            (raw.clone(), labels)
        };
        let len_before = transformed.len();
        let mut values = Vec::new();
        let mut dates = Vec::new();
        let mut dropped = Vec::new();
        for (i, (v, d)) in transformed.into_iter().zip(transformed_labels).enumerate() {
            if v.is_finite() {
                values.push(v);
                dates.push(d);
            } else {
                dropped.push(i);
            }
        }
        if values.is_empty() {
            return Err(HarnessError::EmptyAfterCleaning);
        }
        Ok(Self { dates, raw, values, dropped, len_before })
    }

    pub fn load(path: &Path, column: &str, log_abs_returns: bool) -> Result<Self, HarnessError> {
        let file = std::fs::File::open(path).map_err(|e| HarnessError::Io(path.display().to_string(), e))?;
        Self::from_reader(file, column, log_abs_returns)
    }
}

fn parse_error(line: usize, message: String) -> HarnessError {
    HarnessError::Parse { line, message }
}

/// First forecast index: `start` if given, else the last `steps` values.
pub fn forecast_start(cfg: &ExperimentConfig, len: usize) -> Result<usize, HarnessError> {
    match (cfg.start, cfg.steps) {
        (Some(s), _) => Ok(s),
        (None, Some(k)) if k >= 1 && k < len => Ok(len + 1 - k),
        (None, Some(k)) => Err(HarnessError::Config(format!("cannot forecast {k} of {len} values"))),
        (None, None) => Err(HarnessError::Config("analyze needs start or steps".into())),
    }
}

/// Loads, transforms and backtests the configured input file.
pub fn analyze_csv(path: &Path, cfg: &ExperimentConfig) -> Result<(MarketSeries, BacktestReport<f64>), HarnessError> {
    let series = MarketSeries::load(path, &cfg.column, cfg.log_abs_returns)?;
    let start = forecast_start(cfg, series.values.len())?;
    let report = rolling_backtest(&series.values, start, &predictor_config(cfg), None)?;
    Ok((series, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_and_cleaning() {
        let text = "date,close\n2020-01-01,100\n2020-01-02,101\n2020-01-03,101\n2020-01-06,99\n";
        let s = MarketSeries::from_reader(text.as_bytes(), "Close", true).unwrap();
        assert_eq!(s.len_before, 3);
        assert_eq!(s.dropped, vec![1]);
        assert_eq!(s.values.len(), 2);
        assert!((s.values[0] - (101f64.ln() - 100f64.ln()).abs().ln()).abs() < 1e-12);
        assert_eq!(s.dates, vec!["2020-01-02", "2020-01-06"]);
    }

    #[test]
    fn constant_prices_leave_nothing() {
        let text = "close\n5\n5\n5\n";
        assert!(matches!(MarketSeries::from_reader(text.as_bytes(), "close", true), Err(HarnessError::EmptyAfterCleaning)));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "close\n1.0\nabc\n";
        match MarketSeries::from_reader(text.as_bytes(), "close", false) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(MarketSeries::from_reader("price\n1\n".as_bytes(), "close", false).is_err());
    }
}
