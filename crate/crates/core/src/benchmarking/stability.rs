// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use rayon::prelude::*;

use super::{draw_program, fit_rb, measure_pg, Backend, DecayEntry, DecayRecord, Quantity};
use crate::clifford::compile_virtual_z;
use crate::error::{Error, Result};
use crate::pulsesim::Shots;
use crate::rng::{derive_seed, derived_rng};

/// Repeated RB with one sequence per length per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    pub lengths: Vec<usize>,
    pub iterations: usize,
    /// Number of iterations averaged around each center.
    pub window: usize,
    pub shots: Shots,
    pub seed: u64,
    /// Time between iteration starts, seconds.
    pub iteration_period_s: f64,
}

/// Moving-window fidelity series.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySeries {
    pub times_s: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// Iterations actually averaged at each center (smaller at the edges).
    pub window_sizes: Vec<usize>,
    pub lengths: Vec<usize>,
    /// `raw[iteration][length index]` = measured P_g.
    pub raw: Vec<Vec<f64>>,
}

impl StabilitySeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,fidelity,window\n");
        for k in 0..self.times_s.len() {
            writeln!(out, "{},{},{}", self.times_s[k], self.fidelity[k], self.window_sizes[k]).unwrap();
        }
        out
    }
}

/// Run `iterations` RB passes and refit over a moving window.
pub fn temporal_stability<B: Backend + ?Sized>(backend: &B, config: &StabilityConfig) -> Result<StabilitySeries> {
    if config.lengths.len() < 3 || config.lengths.windows(2).any(|w| w[1] <= w[0]) || config.lengths[0] == 0 {
        return Err(Error::invalid("need at least 3 increasing positive lengths"));
    }
    if config.window == 0 || config.iterations < config.window {
        return Err(Error::invalid(format!(
            "{} iterations cannot fill a window of {}",
            config.iterations, config.window
        )));
    }
    let n_len = config.lengths.len();
    let raw: Vec<Vec<f64>> = (0..config.iterations)
        .into_par_iter()
        .map(|it| {
            let seed = derive_seed(config.seed, &[it as u64]);
            config
                .lengths
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    let (prim, _) = draw_program(seed, i, 0, m)?;
                    let mut ro = derived_rng(derive_seed(seed, &[i as u64, 0]), &[0]);
                    measure_pg(backend, &compile_virtual_z(&prim), config.shots, &mut ro)
                        .map_err(|e| e.context(format!("iteration {it}, length {m}")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    debug_assert!(raw.iter().all(|r| r.len() == n_len));
    refit_windows(&raw, &config.lengths, config.window, config.iteration_period_s)
}

/// Refit stored per-iteration P_g values with a window of `window` iterations
/// centered on each iteration. An even window reaches one iteration further
/// back than forward. Near the ends the window shrinks symmetrically.
pub fn refit_windows(raw: &[Vec<f64>], lengths: &[usize], window: usize, period_s: f64) -> Result<StabilitySeries> {
    let n = raw.len();
    if window == 0 || n < window {
        return Err(Error::invalid(format!("{n} iterations cannot fill a window of {window}")));
    }
    let back = window / 2;
    let fwd = window - 1 - back;
    let fits = (0..n)
        .into_par_iter()
        .map(|j| {
            let room = j.min(n - 1 - j);
            let (lo, hi) = (j - back.min(room), j + fwd.min(room));
            let entries = lengths
                .iter()
                .enumerate()
                .flat_map(|(i, &m)| {
                    (lo..=hi).map(move |it| DecayEntry { length: m, sequence: it, value: raw[it][i], timestamp_s: 0.0 })
                })
                .collect();
            let rec = DecayRecord { quantity: Quantity::SurvivalProbability, entries };
            let fit = fit_rb(&rec).map_err(|e| e.context(format!("window centered on iteration {j}")))?;
            Ok((fit.fidelity, hi - lo + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilitySeries {
        times_s: (0..n).map(|j| j as f64 * period_s).collect(),
        fidelity: fits.iter().map(|f| f.0).collect(),
        window_sizes: fits.iter().map(|f| f.1).collect(),
        lengths: lengths.to_vec(),
        raw: raw.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarking::{log_spaced_lengths, ChannelBackend, GateNoiseModel};

    #[test]
    fn noiseless_series_is_flat_at_one() {
        let cfg = StabilityConfig {
            lengths: vec![1, 4, 16, 64],
            iterations: 12,
            window: 5,
            shots: Shots::Infinite,
            seed: 2,
            iteration_period_s: 30.0,
        };
        let s = temporal_stability(&ChannelBackend::noiseless(), &cfg).unwrap();
        assert!(s.fidelity.iter().all(|f| *f == 1.0));
        assert_eq!(s.window_sizes[0], 1);
        assert_eq!(s.window_sizes[6], 5);
        assert_eq!(s.times_s[11], 330.0);
    }

    #[test]
    fn scatter_shrinks_with_window() {
        let b = ChannelBackend::new(GateNoiseModel::depolarizing(2e-3).unwrap(), 0.9).unwrap();
        let cfg = StabilityConfig {
            lengths: log_spaced_lengths(1, 1000, 10).unwrap(),
            iterations: 600,
            window: 10,
            shots: Shots::Finite(100),
            seed: 7,
            iteration_period_s: 30.0,
        };
        let s10 = temporal_stability(&b, &cfg).unwrap();
        let s90 = refit_windows(&s10.raw, &cfg.lengths, 90, 30.0).unwrap();
        let std = |v: &[f64]| {
            let core = &v[45..v.len() - 45];
            let m = core.iter().sum::<f64>() / core.len() as f64;
            (core.iter().map(|x| (x - m).powi(2)).sum::<f64>() / core.len() as f64).sqrt()
        };
        let ratio = std(&s10.fidelity) / std(&s90.fidelity);
        assert!(ratio > 3f64.sqrt(), "ratio {ratio}");
    }
}
