// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Overlapping Allan deviation of white noise, a random walk and a linear
//! drift, with their log-log slopes.

use fluxgate::analysis::{allan_deviation, log_log_slope, log_spaced_taus, TimeSeries};
use fluxgate::rng::rng_from_seed;
use rand_distr::{Distribution, StandardNormal};

fn slope(name: &str, values: Vec<f64>) -> fluxgate::Result<()> {
    let ts = TimeSeries::uniform(0.0, 1.0, values)?;
    let points = allan_deviation(&ts, &log_spaced_taus(&ts, 5)?)?;
    println!("{name:12} slope {:+.3}  (tau {}..{})", log_log_slope(&points), points[0].tau, points[points.len() - 1].tau);
    Ok(())
}

fn main() -> fluxgate::Result<()> {
    let mut rng = rng_from_seed(11);
    let white: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let walk: Vec<f64> = white.iter().scan(0.0, |acc, x| { *acc += x; Some(*acc) }).collect();
    let drift: Vec<f64> = (0..20_000).map(|k| 1e-3 * k as f64).collect();
    slope("white", white)?;
    slope("random walk", walk)?;
    slope("drift", drift)?;
    Ok(())
}
