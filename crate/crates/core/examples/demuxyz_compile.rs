// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Compile gates into flux-pulse programs: rotation axes are chosen by
//! pulse timing and Z rotations become frame shifts.

use fluxgate::demuxyz::{compile_gate, compile_program, sequence_choi, Calibration, CompileOptions, Gate};
use fluxgate::pulsesim::DeviceParams;
use fluxgate::qcore::average_gate_fidelity;

fn main() -> fluxgate::Result<()> {
    let p = DeviceParams::demux_qpt().noiseless();
    let cal = Calibration::nominal(&p)?;
    let opts = CompileOptions::default();
    for gate in [Gate::XHalfPi, Gate::YMinusHalfPi, Gate::T, Gate::S, Gate::H] {
        let seq = compile_gate(&gate, &cal, &p, &opts)?;
        let f = average_gate_fidelity(&sequence_choi(&p, &seq)?, &gate.unitary())?;
        println!("{:8} {} pulses, {:6.2} ns, F = {:.6}", gate.label(), seq.pulses.len(), seq.total_duration, f);
    }
    let program = compile_program(&[Gate::H, Gate::Z(0.3), Gate::XHalfPi], &cal, &p, &opts)?;
    print!("H, Z(0.3), X_pi/2 schedule\n{}", program.to_csv());
    Ok(())
}
