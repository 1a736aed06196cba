// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! How a flux pulse between two pi/2 pulses rotates the drive axis, and the
//! gaps that give a quarter-turn of the axis.

use fluxgate::demuxyz::{calibrate_timing, delays_for_axis, Calibration};
use fluxgate::pulsesim::{ramsey_axis_scan, DeviceParams, RamseySetup, Readout};

fn main() -> fluxgate::Result<()> {
    let p = DeviceParams::demux_ramsey();
    let setup = RamseySetup::calibrated(&p)?;
    println!("pi/2 pulse {:.3} ns at {:.3} uA", setup.t_half_pi, setup.delta_i_res);

    let gaps: Vec<f64> = (0..97).map(|k| 1.0 + 0.25 * k as f64).collect();
    let amps = [-20.0, -10.0, 0.0];
    let map = ramsey_axis_scan(&p, &setup, &amps, &gaps, Readout::EXACT)?;
    for r in (0..gaps.len()).step_by(8) {
        let row: Vec<String> = (0..amps.len()).map(|c| format!("{:.3}", map.get(r, c))).collect();
        println!("gap {:5.2} ns  P_e {}", gaps[r], row.join("  "));
    }

    let timing = calibrate_timing(&p, setup.delta_i_res, 2.0 * setup.t_half_pi, &gaps, Readout::EXACT)?;
    let cal = Calibration::new(setup.delta_i_res, 2.0 * setup.t_half_pi, timing.axis_period, timing.phase_offset)?;
    println!("axis period {:.3} ns, offset {:.3} rad", cal.axis_period, cal.phase_offset);
    println!("gaps for a +90 degree axis: {:?}", delays_for_axis(&cal, std::f64::consts::FRAC_PI_2, 0.0, 25.0));
    Ok(())
}
