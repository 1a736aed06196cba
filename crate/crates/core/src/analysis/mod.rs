// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Curve fitting, Allan deviation and percentiles.

mod allan;
mod fit;
mod lm;

pub use allan::{allan_csv, allan_deviation, log_log_slope, log_spaced_taus, AllanPoint, TimeSeries};
pub use fit::{dominant_frequency, fit_nlls, initial_guess, FitOptions, FitResult, Model};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};

use crate::error::{Error, Result};

/// Linear-interpolation percentile (`q` in 0..=100) of the values whose mask
/// entry is `false`; `exclude = None` keeps everything.
pub fn percentile(values: &[f64], q: f64, exclude: Option<&[bool]>) -> Result<f64> {
    if !(0.0..=100.0).contains(&q) {
        return Err(Error::invalid(format!("percentile {q} outside 0..=100")));
    }
    if let Some(mask) = exclude {
        if mask.len() != values.len() {
            return Err(Error::invalid("exclusion mask length differs from values"));
        }
    }
    let mut kept: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|(i, _)| exclude.is_none_or(|m| !m[*i]))
        .map(|(_, v)| *v)
        .collect();
    if kept.is_empty() {
        return Err(Error::invalid("no values left after exclusion"));
    }
    kept.sort_by(f64::total_cmp);
    let h = (kept.len() - 1) as f64 * q / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(kept[lo] + (h - lo as f64) * (kept[hi] - kept[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_basics() {
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 90.0, None).unwrap(), 90.0);
        assert_eq!(percentile(&[4.2], 37.0, None).unwrap(), 4.2);
        assert_eq!(percentile(&[1.0, 2.0], 50.0, None).unwrap(), 1.5);
        let mask = [false, true, false];
        assert_eq!(percentile(&[1.0, 100.0, 3.0], 100.0, Some(&mask)).unwrap(), 3.0);
        assert!(percentile(&[1.0], 50.0, Some(&[true])).is_err());
    }
}
