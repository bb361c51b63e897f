//! Coupling constant from mean photon numbers and the square-root pump-power law.
//!
//! With `r_k = C·√λ_k` the mean photon number is `n̄(C) = Σ_k sinh²(C√λ_k)`,
//! strictly increasing in `C`, so each measured `n̄` fixes one `C`.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schmidt::SchmidtSpectrum;

/// Bisection stops once the bracket is narrower than this (relative to its upper end).
const BISECTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMeasurement {
    pump_power: f64,
    mean_n: f64,
}

impl PowerMeasurement {
    pub fn new(pump_power: f64, mean_n: f64) -> Result<Self> {
        if !(pump_power.is_finite() && pump_power > 0.0) {
            return Err(Error::invalid(format!(
                "pump power must be positive, got {pump_power}"
            )));
        }
        if !(mean_n.is_finite() && mean_n >= 0.0) {
            return Err(Error::invalid(format!(
                "mean photon number must be non-negative, got {mean_n}"
            )));
        }
        Ok(Self { pump_power, mean_n })
    }

    pub fn pump_power(&self) -> f64 {
        self.pump_power
    }

    pub fn mean_n(&self) -> f64 {
        self.mean_n
    }
}

/// Per-point couplings and the least-squares scale κ in `C = κ·√P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub couplings: Vec<f64>,
    pub scale: f64,
    /// Root-mean-square of `C_i - κ√P_i`.
    pub residual: f64,
}

fn mean_at(roots: &[f64], c: f64) -> f64 {
    roots.iter().map(|s| (c * s).sinh().powi(2)).sum()
}

fn mean_slope(roots: &[f64], c: f64) -> f64 {
    roots.iter().map(|s| s * (2.0 * c * s).sinh()).sum()
}

/// The unique `C ≥ 0` with `Σ_k sinh²(C√λ_k) = mean_n`.
///
/// Bisection on `[0, asinh(√n̄)/√λ_0 + 1]`, which always brackets the root
/// because the leading term alone reaches `n̄` at the inner bound, followed by
/// one Newton step.
pub fn solve_coupling(s: &SchmidtSpectrum, mean_n: f64) -> Result<f64> {
    if !(mean_n.is_finite() && mean_n >= 0.0) {
        return Err(Error::invalid(format!(
            "mean photon number must be non-negative, got {mean_n}"
        )));
    }
    if mean_n == 0.0 {
        return Ok(0.0);
    }
    let roots: Vec<f64> = s.eigenvalues().iter().map(|l| l.sqrt()).collect();
    let lead = roots.first().copied().unwrap_or(0.0);
    if lead == 0.0 {
        return Err(Error::invalid("spectrum has no weight"));
    }
    let f = |c: f64| mean_at(&roots, c) - mean_n;
    let (mut lo, mut hi) = (0.0, mean_n.sqrt().asinh() / lead + 1.0);
    if !f(hi).is_finite() {
        return Err(Error::Numerical(format!(
            "mean photon number {mean_n} is out of range"
        )));
    }
    while hi - lo > BISECTION_TOLERANCE * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut c = 0.5 * (lo + hi);
    let slope = mean_slope(&roots, c);
    if slope > 0.0 {
        let polished = c - f(c) / slope;
        if polished.is_finite() && polished >= 0.0 && f(polished).abs() <= f(c).abs() {
            c = polished;
        }
    }
    Ok(c)
}

/// Solves the coupling at every point and fits `C = κ√P` by linear least
/// squares through the origin.
pub fn fit_sqrt_law(series: &[PowerMeasurement], s: &SchmidtSpectrum) -> Result<FitResult> {
    if series.len() < 2 {
        return Err(Error::DegenerateSeries(format!(
            "need at least 2 measurements, got {}",
            series.len()
        )));
    }
    let p0 = series[0].pump_power;
    if series.iter().all(|m| m.pump_power == p0) {
        return Err(Error::DegenerateSeries("all pump powers are equal".into()));
    }
    let couplings = series
        .iter()
        .map(|m| solve_coupling(s, m.mean_n))
        .collect::<Result<Vec<_>>>()?;
    let num: f64 = series
        .iter()
        .zip(&couplings)
        .map(|(m, c)| c * m.pump_power.sqrt())
        .sum();
    let den: f64 = series.iter().map(|m| m.pump_power).sum();
    let scale = num / den;
    let residual = (series
        .iter()
        .zip(&couplings)
        .map(|(m, c)| (c - scale * m.pump_power.sqrt()).powi(2))
        .sum::<f64>()
        / series.len() as f64)
        .sqrt();
    Ok(FitResult {
        couplings,
        scale,
        residual,
    })
}

/// Reads `pump_power,mean_n` rows. A non-numeric first row is taken as a header
/// and `#` lines are comments.
pub fn load_series(path: &Path) -> Result<Vec<PowerMeasurement>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_two_column_csv(&text)?
        .into_iter()
        .map(|(line, a, b)| {
            PowerMeasurement::new(a, b).map_err(|e| Error::parse(line, 1, e.to_string()))
        })
        .collect()
}

/// Two numeric columns per row, returned with their 1-based line numbers.
pub(crate) fn parse_two_column_csv(text: &str) -> Result<Vec<(usize, f64, f64)>> {
    let mut rows = Vec::new();
    for (idx, (line, record)) in crate::kernel_io::csv_lines(text)?.into_iter().enumerate() {
        if record.len() != 2 {
            return Err(Error::parse(
                line,
                1,
                format!("expected 2 columns, found {}", record.len()),
            ));
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.parse::<f64>().ok()).collect();
        match (parsed[0], parsed[1]) {
            (Some(a), Some(b)) => rows.push((line, a, b)),
            _ if idx == 0 && rows.is_empty() => continue, // header
            (None, _) => {
                return Err(Error::parse(
                    line,
                    1,
                    format!("invalid number `{}`", &record[0]),
                ))
            }
            (_, None) => {
                return Err(Error::parse(
                    line,
                    2,
                    format!("invalid number `{}`", &record[1]),
                ))
            }
        }
    }
    Ok(rows)
}
