// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Randomized benchmarking on the channel backend with depolarizing noise
//! per time slot, compared with the analytic decay of that noise.

use fluxgate::benchmarking::{
    depolarizing_decay_oracle, fidelity_from_decay, fit_rb, log_spaced_lengths, run_rb, ChannelBackend, GateNoiseModel,
    RBConfig,
};
use fluxgate::pulsesim::Shots;

fn main() -> fluxgate::Result<()> {
    let lambda = 0.002;
    let backend = ChannelBackend::new(GateNoiseModel::depolarizing(lambda)?, 1.0)?;
    let cfg = RBConfig::new(log_spaced_lengths(1, 1000, 15)?, 30, Shots::Infinite, 1)?;
    let record = run_rb(&backend, &cfg)?;
    for s in record.by_length() {
        println!("m = {:4}  P_g = {:.6} +- {:.6}", s.length, s.mean, s.std);
    }
    let fit = fit_rb(&record)?;
    print!("{}", fit.report());
    let oracle = fidelity_from_decay(depolarizing_decay_oracle(lambda));
    println!("fitted F = {:.6}, analytic F = {:.6}", fit.fidelity, oracle);
    Ok(())
}
