use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use lscov::covmatrix::{BandedCovariance, Flavor};
use rand::Rng;

use crate::{InnovationLaw, SimError};

/// Error processes of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Stationary AR(1) with coefficient 0.3.
    A,
    /// `0.8 G`, with `G` a time-varying AR(1) with coefficient `0.7 sin(2 pi t)`.
    B,
    /// Nonlinear time-varying MA(1) with uncorrelated values.
    C,
    /// Time-varying MA(2).
    D,
    /// Time-varying AR(6) with scale `(1 + 0.5 sin(2 pi t))^0.5`.
    TvAr6,
    /// Time-varying MA(6) with the same factors and scale.
    TvMa6,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::A => "a",
            ModelKind::B => "b",
            ModelKind::C => "c",
            ModelKind::D => "d",
            ModelKind::TvAr6 => "tvar6",
            ModelKind::TvMa6 => "tvma6",
        }
    }

    pub fn default_law(self) -> InnovationLaw {
        match self {
            ModelKind::B => InnovationLaw::StdT6,
            ModelKind::D => InnovationLaw::StdChiSq5,
            _ => InnovationLaw::StdNormal,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(ModelKind::A),
            "b" => Ok(ModelKind::B),
            "c" => Ok(ModelKind::C),
            "d" => Ok(ModelKind::D),
            "tvar6" => Ok(ModelKind::TvAr6),
            "tvma6" => Ok(ModelKind::TvMa6),
            _ => Err(SimError::Parse(format!("unknown model '{s}'"))),
        }
    }
}

/// Trend functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeanFunction {
    /// `2 sin(2 pi t)`
    I,
    /// `2 - 8 (t - 0.5)^2`
    II,
    /// `0`
    III,
}

impl MeanFunction {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            MeanFunction::I => 2.0 * (2.0 * PI * t).sin(),
            MeanFunction::II => 2.0 - 8.0 * (t - 0.5).powi(2),
            MeanFunction::III => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeanFunction::I => "I",
            MeanFunction::II => "II",
            MeanFunction::III => "III",
        }
    }
}

impl fmt::Display for MeanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeanFunction {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(MeanFunction::I),
            "II" | "2" => Ok(MeanFunction::II),
            "III" | "3" => Ok(MeanFunction::III),
            _ => Err(SimError::Parse(format!("unknown mean function '{s}'"))),
        }
    }
}

/// The six time-varying factors of the AR(6) and MA(6) models.
pub fn tv6_factors(t: f64) -> [f64; 6] {
    [
        0.6 * (2.0 * PI * (t - 0.05)).sin(),
        0.3 * (3.0 * PI * t).cos().powi(2),
        (t - 0.6).exp().powi(2) / 3.0 - 0.4,
        -0.4 * (6.0 * PI * t).sin() - 0.1,
        (t - 0.3).powi(2) - 0.2,
        0.2,
    ]
}

/// Coefficients of `prod_s (1 - a_s z)`, lowest degree first.
pub fn factor_polynomial(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &a in roots {
        let mut next = vec![0.0; p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= a * c;
        }
        p = next;
    }
    p
}

/// Smallest `J` with `sum_{j > J} C(j + p - 1, p - 1) rho^j <= tol`, which
/// bounds the tail of the MA coefficients of a product of `p` geometric
/// series with ratios at most `rho` in modulus.
pub fn truncation_length(rho: f64, p: usize, tol: f64) -> usize {
    if rho == 0.0 || p == 0 {
        return 0;
    }
    let pf = p as f64;
    // term(j) = C(j + p - 1, p - 1) rho^j
    let mut term = 1.0;
    let mut j = 0usize;
    loop {
        let next = term * rho * (j as f64 + pf) / (j as f64 + 1.0);
        let ratio = rho * (j as f64 + 1.0 + pf) / (j as f64 + 2.0);
        if ratio < 1.0 && next / (1.0 - ratio) <= tol {
            return j;
        }
        term = next;
        j += 1;
    }
}

/// A simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub x: Vec<f64>,
    pub epsilon: Vec<f64>,
}

impl SimulatedPath {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `index,t,x,epsilon` rows with `t = index / n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.len();
        writeln!(out, "index,t,x,epsilon")?;
        for i in 0..n {
            writeln!(out, "{},{},{},{}", i + 1, (i + 1) as f64 / n as f64, self.x[i], self.epsilon[i])?;
        }
        Ok(())
    }
}

/// Mean function, error process and innovation law of one simulation design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessSpec {
    pub kind: ModelKind,
    pub mean: MeanFunction,
    pub law: InnovationLaw,
    /// Bound on the neglected tail of the MA representation.
    pub tolerance: f64,
    /// Multiplies the error process; 1 reproduces the models as stated.
    pub noise_scale: f64,
}

impl ProcessSpec {
    pub fn new(kind: ModelKind, mean: MeanFunction) -> Self {
        Self { kind, mean, law: kind.default_law(), tolerance: 1e-10, noise_scale: 1.0 }
    }

    pub fn with_law(mut self, law: InnovationLaw) -> Self {
        self.law = law;
        self
    }

    pub fn with_noise_scale(mut self, scale: f64) -> Self {
        self.noise_scale = scale;
        self
    }

    /// Scale applied to the innovation entering at time `t`. For model (c)
    /// this is the coefficient of the current innovation.
    pub fn sigma(&self, t: f64) -> f64 {
        let s = match self.kind {
            ModelKind::A => 1.0,
            ModelKind::B => 0.8,
            ModelKind::C => ((4.0 * (t - 0.5).powi(2)).exp() + 1.0) / 6.0,
            ModelKind::D => ((PI * t).cos() + 2.0) / 4.0,
            ModelKind::TvAr6 | ModelKind::TvMa6 => (1.0 + 0.5 * (2.0 * PI * t).sin()).sqrt(),
        };
        s * self.noise_scale
    }

    /// Autoregressive factors `a_s(t)`; empty for moving-average kinds.
    pub fn ar_factors(&self, t: f64) -> Vec<f64> {
        match self.kind {
            ModelKind::A => vec![0.3],
            ModelKind::B => vec![0.7 * (2.0 * PI * t).sin()],
            ModelKind::TvAr6 => tv6_factors(t).to_vec(),
            _ => Vec::new(),
        }
    }

    /// Frozen-time MA coefficients `c_0 = 1, c_1, ...` of the unscaled
    /// filter, truncated by the tail bound. Model (c) is not linear.
    pub fn ma_coefficients(&self, t: f64) -> Result<Vec<f64>, SimError> {
        match self.kind {
            ModelKind::C => Err(SimError::Unsupported("model (c) has no linear representation".into())),
            ModelKind::D => Ok(vec![1.0, 0.9, -0.6]),
            ModelKind::TvMa6 => Ok(factor_polynomial(&tv6_factors(t))),
            _ => {
                let roots = self.ar_factors(t);
                let rho = roots.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                if rho >= 1.0 {
                    return Err(SimError::UnstableFilter { t, modulus: rho });
                }
                let len = truncation_length(rho, roots.len(), self.tolerance);
                let p = factor_polynomial(&roots);
                let mut c = vec![0.0; len + 1];
                c[0] = 1.0;
                for j in 1..=len {
                    c[j] = -(1..p.len().min(j + 1)).map(|k| p[k] * c[j - k]).sum::<f64>();
                }
                Ok(c)
            }
        }
    }

    fn coefficient_table(&self, n: usize) -> Result<Vec<Vec<f64>>, SimError> {
        (1..=n).map(|i| self.ma_coefficients(i as f64 / n as f64)).collect()
    }

    /// Simulates `X_{1..n}` and the errors `epsilon_{1..n}`.
    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SimulatedPath, SimError> {
        if n < 10 {
            return Err(SimError::TooShort(n));
        }
        let epsilon = match self.kind {
            ModelKind::C => {
                if self.law != InnovationLaw::StdNormal {
                    return Err(SimError::Unsupported("model (c) needs normal innovations".into()));
                }
                let e = self.law.sample(n + 1, rng);
                let abs_mean = (2.0 / PI).sqrt();
                (1..=n)
                    .map(|i| {
                        let t = i as f64 / n as f64;
                        self.sigma(t) * e[i] + self.noise_scale * 0.6 * (e[i - 1].abs() - abs_mean)
                    })
                    .collect()
            }
            _ => {
                let table = self.coefficient_table(n)?;
                let buffer = table.iter().map(|c| c.len() - 1).max().unwrap_or(0);
                let e = self.law.sample(n + buffer, rng);
                table
                    .iter()
                    .enumerate()
                    .map(|(idx, c)| {
                        let t = (idx + 1) as f64 / n as f64;
                        let here = buffer + idx;
                        self.sigma(t) * c.iter().enumerate().map(|(r, &cr)| cr * e[here - r]).sum::<f64>()
                    })
                    .collect::<Vec<f64>>()
            }
        };
        let x = epsilon.iter().enumerate().map(|(idx, &v)| self.mean.eval((idx + 1) as f64 / n as f64) + v).collect();
        Ok(SimulatedPath { x, epsilon })
    }

    /// Exact covariance matrix of `epsilon_{1..n}` under the truncated
    /// representation: `sigma_{i,j} = sigma(t_i) sigma(t_j) sum_r c_r(t_i) c_{r+j-i}(t_j)`.
    pub fn true_covariance(&self, n: usize) -> Result<BandedCovariance<f64>, SimError> {
        if n < 1 {
            return Err(SimError::TooShort(n));
        }
        if self.kind == ModelKind::C {
            let abs_var = 1.0 - 2.0 / PI;
            let diag = (1..=n)
                .map(|i| {
                    let s = self.sigma(i as f64 / n as f64);
                    s * s + self.noise_scale.powi(2) * 0.36 * abs_var
                })
                .collect();
            return Ok(BandedCovariance::from_diagonals(vec![diag], 0, Flavor::Other)?);
        }
        let table = self.coefficient_table(n)?;
        let sig: Vec<f64> = (1..=n).map(|i| self.sigma(i as f64 / n as f64)).collect();
        let width = table.iter().map(|c| c.len() - 1).max().unwrap_or(0).min(n - 1);
        let diagonals = (0..=width)
            .map(|d| {
                (0..n - d)
                    .map(|i| {
                        let (ci, cj) = (&table[i], &table[i + d]);
                        let s: f64 = ci.iter().zip(cj.iter().skip(d)).map(|(a, b)| a * b).sum();
                        sig[i] * sig[i + d] * s
                    })
                    .collect()
            })
            .collect();
        Ok(BandedCovariance::from_diagonals(diagonals, width, Flavor::Other)?)
    }
}

/// Drops trailing diagonals while the dropped part has operator norm at
/// most `tol`; the norm is bounded by twice the sum of the largest absolute
/// entries of the dropped diagonals.
pub fn trim_band(cov: &BandedCovariance<f64>, tol: f64) -> BandedCovariance<f64> {
    let Some(diags) = cov.diagonals() else {
        return cov.clone();
    };
    let maxima: Vec<f64> = diags.iter().map(|d| d.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    let mut keep = diags.len();
    let mut dropped = 0.0;
    while keep > 1 {
        let next = dropped + 2.0 * maxima[keep - 1];
        if next > tol {
            break;
        }
        dropped = next;
        keep -= 1;
    }
    BandedCovariance::from_diagonals(diags[..keep].to_vec(), cov.half_width().min(keep - 1), cov.flavor())
        .expect("prefix of valid diagonals")
}
