// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Process tomography from a 36-entry record: the bundled Choi matrices,
//! a sampled record of a known channel, and its CPTP reconstruction.

use fluxgate::pulsesim::Shots;
use fluxgate::qcore::{average_gate_fidelity, choi_defects};
use fluxgate::rng::rng_from_seed;
use fluxgate::tomography::{
    bundled_fidelities, linear_inversion, qpt_record, reconstruct, ChoiExecutor, ReconstructionOptions, TargetGate,
};

fn main() -> fluxgate::Result<()> {
    print!("bundled matrices\n{}", bundled_fidelities()?.to_text());

    let gate = TargetGate::T;
    let truth = gate.bundled_choi();
    let exec = ChoiExecutor { choi: truth.clone(), visibility: 1.0 };
    let record = qpt_record(&exec, Shots::Finite(10_000), &mut rng_from_seed(1))?;

    let raw = linear_inversion(&record)?;
    let min_eig = choi_defects(&raw)?.min_eigenvalue;
    println!("linear inversion: min eigenvalue {min_eig:.2e}");
    let rec = reconstruct(&record, &ReconstructionOptions::default())?;
    println!("projected gradient: {} iterations, converged {}", rec.iterations, rec.converged);
    println!("distance to truth {:.3e}", (&rec.choi - &truth).frobenius_norm());
    println!("F = {:.4} (truth {:.4})", average_gate_fidelity(&rec.choi, &gate.unitary())?, average_gate_fidelity(&truth, &gate.unitary())?);
    Ok(())
}
