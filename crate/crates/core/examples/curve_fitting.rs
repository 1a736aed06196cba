// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Levenberg-Marquardt fits of the decay and oscillation models.

use fluxgate::analysis::{fit_nlls, FitOptions, Model};

fn main() -> fluxgate::Result<()> {
    let xs: Vec<f64> = (0..40).map(|k| 25.0 * k as f64).collect();
    let decay: Vec<f64> = xs.iter().map(|m| 0.48 * 0.99857f64.powf(*m) + 0.5).collect();
    let fit = fit_nlls(Model::EXP_DECAY, &xs, &decay, &FitOptions::default())?;
    println!("exponential decay\n{}", fit.report());

    let ts: Vec<f64> = (0..200).map(|k| k as f64).collect();
    let rabi: Vec<f64> = ts.iter().map(|t| 0.5 - 0.45 * (std::f64::consts::TAU * 0.0123 * t).cos()).collect();
    let fit = fit_nlls(Model::Sinusoid, &ts, &rabi, &FitOptions::default())?;
    println!("Rabi oscillation\n{}", fit.report());
    println!("pi time {:.3} ns", 0.5 / fit.params[1]);
    Ok(())
}
