// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Purity benchmarking separates incoherent error from the total RB error.
//! The channel here mixes depolarizing noise with a coherent over-rotation.

use fluxgate::benchmarking::{
    coherent_error, fit_pb, fit_rb, log_spaced_lengths, run_pb, ChannelBackend, GateNoiseModel, PurityEstimator,
    RBConfig,
};
use fluxgate::pulsesim::Shots;

fn main() -> fluxgate::Result<()> {
    let noise = GateNoiseModel { depolarizing_prob: 0.001, overrotation: 0.03, ..GateNoiseModel::NOISELESS };
    let backend = ChannelBackend::new(noise, 1.0)?;
    let cfg = RBConfig::new(log_spaced_lengths(1, 600, 12)?, 30, Shots::Infinite, 3)?;
    let record = run_pb(&backend, &cfg, PurityEstimator::PlugIn)?;
    let pb = fit_pb(&record.purity)?;
    let rb = fit_rb(&record.survival)?;
    let coh = coherent_error(rb.error(), pb.eps_inc)?;
    println!("u       = {:.6}", pb.u);
    println!("eps     = {:.3e}", rb.error());
    println!("eps_inc = {:.3e}", pb.eps_inc);
    println!("eps_coh = {:.3e}", coh.eps_coh);
    Ok(())
}
