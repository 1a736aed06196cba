// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Kraus channels, their Choi matrices and fidelities against a target.

use fluxgate::qcore::{
    average_gate_fidelity, choi_defects, inplane_rotation, process_fidelity, DensityMatrix, KrausChannel, CPTP_TOL,
};

fn main() -> fluxgate::Result<()> {
    let x90 = inplane_rotation(0.0, std::f64::consts::FRAC_PI_2);
    let noisy = KrausChannel::unitary(&x90)
        .then(&KrausChannel::amplitude_damping(0.02)?)
        .then(&KrausChannel::depolarizing(0.01)?);
    let choi = noisy.choi();
    let defects = choi_defects(&choi)?;
    println!("CPTP within {CPTP_TOL}: {}", defects.is_cptp(CPTP_TOL));
    println!("process fidelity {:.6}", process_fidelity(&choi, &x90)?);
    println!("average fidelity {:.6}", average_gate_fidelity(&choi, &x90)?);

    let out = noisy.apply(&DensityMatrix::ground());
    println!("P_e after X_pi/2 from |g>: {:.6}", out.pe());
    print!("Choi matrix\n{}", choi.to_text());
    Ok(())
}
