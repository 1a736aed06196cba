// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! The three calibration steps: resonance amplitude from the chevron, pi
//! time from the resonant Rabi oscillation, axis period from a Ramsey fringe.

use fluxgate::demuxyz::{calibrate, CalibrationPlan};
use fluxgate::pulsesim::{DeviceParams, Readout, Shots};

fn main() -> fluxgate::Result<()> {
    let p = DeviceParams::demux_qpt();
    let plan = CalibrationPlan::default_for(&p, Readout { shots: Shots::Finite(2000), seed: 4 })?;
    let run = calibrate(&p, &plan)?;
    let best = run.amplitude.contrast.iter().cloned().fold(0.0, f64::max);
    println!("step 1: delta_i_res {:.3} uA (peak contrast {best:.3})", run.amplitude.delta_i_res);
    println!("step 2: Rabi {:.3} MHz, t_pi {:.3} ns", 1e3 * run.duration.rabi_ghz, run.duration.t_pi);
    println!(
        "step 3: axis period {:.3} +- {:.3} ns, offset {:.3} rad",
        run.timing.axis_period, run.timing.axis_period_stderr, run.timing.phase_offset
    );
    print!("calibration file:\n{}", run.calibration.to_text());
    Ok(())
}
