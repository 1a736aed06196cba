// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Swap spectroscopy and the residual-excitation scan of the socket qubit.

use fluxgate::pulsesim::{idle_scan, swap_spectroscopy, DeviceParams, Prepared, Readout, ReadoutBand, Shots};

fn main() -> fluxgate::Result<()> {
    let p = DeviceParams::socket_qubit();
    let freqs: Vec<f64> = (0..17).map(|k| 4.0 + 0.05 * k as f64).collect();
    let times: Vec<f64> = (0..11).map(|k| 200.0 * k as f64).collect();
    let scan = swap_spectroscopy(&p, Prepared::Excited, &freqs, &times, Readout::EXACT)?;
    println!("P(e | prepared e) at t = 2 us:");
    for (c, f) in freqs.iter().enumerate() {
        println!("  {f:.3} GHz  {:.4}", scan.prepared_prob.get(times.len() - 1, c));
    }

    let band = ReadoutBand { lo_ghz: 4.30, hi_ghz: 4.34, excess_pe: 0.1 };
    let fine: Vec<f64> = (0..161).map(|k| 4.0 + 0.005 * k as f64).collect();
    let idle = idle_scan(&p, &fine, 0.01, &[band], Readout { shots: Shots::Finite(2000), seed: 2 })?;
    println!("90th percentile of P_e outside the anomalous band: {:.4}", idle.p90);
    Ok(())
}
