// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Repeated RB on a stationary backend: the moving-window fidelity scatters
//! less as the window grows, and its Allan deviation falls like tau^-1/2.

use fluxgate::analysis::{allan_deviation, log_log_slope, log_spaced_taus, TimeSeries};
use fluxgate::benchmarking::{log_spaced_lengths, refit_windows, temporal_stability, ChannelBackend, GateNoiseModel, StabilityConfig};
use fluxgate::pulsesim::Shots;

fn std_dev(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn main() -> fluxgate::Result<()> {
    let backend = ChannelBackend::new(GateNoiseModel::depolarizing(0.0015)?, 1.0)?;
    let cfg = StabilityConfig {
        lengths: log_spaced_lengths(1, 3000, 19)?,
        iterations: 1200,
        window: 10,
        shots: Shots::Finite(1000),
        seed: 5,
        iteration_period_s: 30.0,
    };
    let series = temporal_stability(&backend, &cfg)?;
    for window in [10, 40, 90] {
        let s = refit_windows(&series.raw, &series.lengths, window, cfg.iteration_period_s)?;
        println!("window {window:3}: mean F {:.6}, scatter {:.2e}", s.fidelity.iter().sum::<f64>() / s.fidelity.len() as f64, std_dev(&s.fidelity));
    }
    let blocks: Vec<usize> = (0..series.fidelity.len() / 10).map(|k| 10 * k + 5).collect();
    let ts = TimeSeries::new(
        blocks.iter().map(|&j| series.times_s[j]).collect(),
        blocks.iter().map(|&j| series.fidelity[j]).collect(),
    )?;
    let points = allan_deviation(&ts, &log_spaced_taus(&ts, 5)?)?;
    for p in &points {
        println!("tau {:7.0} s  ADEV {:.3e}", p.tau, p.ad);
    }
    println!("slope {:.3}", log_log_slope(&points));
    Ok(())
}
