// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Relative tolerance on sample spacing for Allan analysis.
const SPACING_TOL: f64 = 0.01;

/// A time series on a nominally uniform grid (times in seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid("times and values differ in length"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("times must be strictly increasing"));
        }
        Ok(Self { times, values })
    }

    pub fn uniform(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        let times = (0..values.len()).map(|i| start + step * i as f64).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean spacing, after checking it is uniform within 1%.
    pub fn base_spacing(&self) -> Result<f64> {
        if self.len() < 2 {
            return Err(Error::invalid("need at least two samples"));
        }
        let n = self.len() - 1;
        let mean = (self.times[n] - self.times[0]) / n as f64;
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - mean).abs() > SPACING_TOL * mean {
                return Err(Error::invalid("samples are not uniformly spaced"));
            }
        }
        Ok(mean)
    }

    pub fn span(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllanPoint {
    pub tau: f64,
    pub ad: f64,
    pub stderr: f64,
}

/// Overlapping Allan deviation at each averaging time in `taus`.
///
/// With `m = τ/τ₀` and `N` samples,
/// `σ²(τ) = Σ_j (Σ_{i=j}^{j+m−1} (y_{i+m} − y_i))² / (2 m² (N − 2m + 1))`.
/// The standard error is `σ/√(⌊N/m⌋ − 1)`, one over the root of the number
/// of non-overlapping differences.
pub fn allan_deviation(series: &TimeSeries, taus: &[f64]) -> Result<Vec<AllanPoint>> {
    let tau0 = series.base_spacing()?;
    let y = series.values();
    let n = y.len();
    let max_tau = series.span() / 3.0;
    taus.iter()
        .map(|&tau| {
            let ratio = tau / tau0;
            let m = ratio.round();
            if !(m >= 1.0) || (ratio - m).abs() > 1e-6 * ratio.max(1.0) {
                return Err(Error::invalid(format!(
                    "tau {tau} is not a multiple of the spacing {tau0}"
                )));
            }
            if tau > max_tau * (1.0 + 1e-9) {
                return Err(Error::invalid(format!("tau {tau} exceeds span/3 = {max_tau}")));
            }
            let m = m as usize;
            let count = n + 1 - 2 * m;
            let mut acc = 0.0;
            for j in 0..count {
                let mut inner = 0.0;
                for i in j..j + m {
                    inner += y[i + m] - y[i];
                }
                acc += inner * inner;
            }
            let var = acc / (2.0 * (m * m * count) as f64);
            let ad = var.sqrt();
            let independent = (n / m).saturating_sub(1).max(1) as f64;
            Ok(AllanPoint {
                tau,
                ad,
                stderr: ad / independent.sqrt(),
            })
        })
        .collect()
}

/// Averaging times `m·τ₀` roughly log-spaced up to span/3, `per_decade` per decade.
pub fn log_spaced_taus(series: &TimeSeries, per_decade: usize) -> Result<Vec<f64>> {
    let tau0 = series.base_spacing()?;
    let max_m = (series.span() / 3.0 / tau0).floor() as usize;
    let mut ms: Vec<usize> = Vec::new();
    let steps = per_decade.max(1) as f64;
    let mut k = 0.0;
    loop {
        let m = 10f64.powf(k / steps).round() as usize;
        if m > max_m {
            break;
        }
        if ms.last() != Some(&m) {
            ms.push(m);
        }
        k += 1.0;
    }
    Ok(ms.into_iter().map(|m| m as f64 * tau0).collect())
}

/// CSV with columns `tau_s,ad,ad_stderr`.
pub fn allan_csv(points: &[AllanPoint]) -> String {
    let mut out = String::from("tau_s,ad,ad_stderr\n");
    for p in points {
        writeln!(out, "{:.9e},{:.9e},{:.9e}", p.tau, p.ad, p.stderr).unwrap();
    }
    out
}

/// Least-squares slope of log10(ad) against log10(tau).
pub fn log_log_slope(points: &[AllanPoint]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.ad > 0.0)
        .map(|p| (p.tau.log10(), p.ad.log10()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn constant_series_has_zero_deviation() {
        let s = TimeSeries::uniform(0.0, 30.0, vec![0.999; 300]).unwrap();
        let taus = log_spaced_taus(&s, 5).unwrap();
        for p in allan_deviation(&s, &taus).unwrap() {
            assert_eq!(p.ad, 0.0);
        }
    }

    #[test]
    fn first_point_matches_brute_force_exactly() {
        let mut rng = rng_from_seed(3);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let y: Vec<f64> = (0..500).map(|_| noise.sample(&mut rng)).collect();
        let s = TimeSeries::uniform(0.0, 1.0, y.clone()).unwrap();
        let ad = allan_deviation(&s, &[1.0]).unwrap()[0].ad;
        let diffs: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]).powi(2)).collect();
        let brute = (0.5 * (diffs.iter().sum::<f64>() / diffs.len() as f64)).sqrt();
        assert_eq!(ad, brute);
    }

    #[test]
    fn white_noise_slope_is_minus_half_and_drift_slope_is_one() {
        let mut rng = rng_from_seed(8);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let white: Vec<f64> = (0..6000).map(|_| noise.sample(&mut rng)).collect();
        let s = TimeSeries::uniform(0.0, 1.0, white).unwrap();
        let taus: Vec<f64> = (0..=10).map(|k| 10f64.powf(1.0 + k as f64 / 10.0).round()).collect();
        let slope = log_log_slope(&allan_deviation(&s, &taus).unwrap());
        assert!((slope + 0.5).abs() < 0.1, "white slope {slope}");

        let drift = TimeSeries::uniform(0.0, 1.0, (0..3000).map(|i| 1e-3 * i as f64).collect()).unwrap();
        let slope = log_log_slope(&allan_deviation(&drift, &taus).unwrap());
        assert!((slope - 1.0).abs() < 0.1, "drift slope {slope}");
    }

    #[test]
    fn invalid_taus_are_rejected() {
        let s = TimeSeries::uniform(0.0, 2.0, vec![0.0; 30]).unwrap();
        assert!(allan_deviation(&s, &[3.0]).is_err());
        assert!(allan_deviation(&s, &[40.0]).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0, 5.0], vec![0.0; 3]).unwrap().base_spacing().is_err());
    }
}
