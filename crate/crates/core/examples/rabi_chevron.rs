// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Rabi chevron of a flux-pulsed qubit under a detuned continuous drive, and
//! the on-off contrast between drive amplitudes.

use fluxgate::pulsesim::{
    chevron_asymmetry, mirrored_delta_i_grid, on_off_scan, on_off_stats, rabi_chevron, DeviceParams, Readout, Shots,
};

fn main() -> fluxgate::Result<()> {
    let p = DeviceParams::demux_chevron();
    let detunings: Vec<f64> = (0..21).map(|k| -0.040 + 0.004 * k as f64).collect();
    let delta_is = mirrored_delta_i_grid(&p, &detunings)?;
    let times: Vec<f64> = (0..51).map(|k| 4.0 * k as f64).collect();

    let map = rabi_chevron(&p, &delta_is, &times, Readout::EXACT)?;
    let centre = delta_is.len() / 2;
    println!("resonant column (delta_i = {:.3} uA):", delta_is[centre]);
    for r in (0..times.len()).step_by(5) {
        println!("  t = {:5.1} ns  P_e = {:.4}", times[r], map.get(r, centre));
    }
    println!("asymmetry {:.4}", chevron_asymmetry(&map));

    let v_dr = [0.0, 0.5 * p.drive_voltage_v, p.drive_voltage_v];
    let maps = on_off_scan(&p, &v_dr, &delta_is, &times, Readout { shots: Shots::Finite(1000), seed: 9 })?;
    let stats = on_off_stats(&maps, &v_dr)?;
    println!("on-off ratio {:.1}", stats.ratio);
    Ok(())
}
