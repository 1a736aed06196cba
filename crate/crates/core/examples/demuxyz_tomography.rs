// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end DemuXYZ tomography: compile preparation, gate and measurement
//! into one flux program per record entry, simulate, reconstruct.

use fluxgate::demuxyz::{qpt_pipeline, Calibration, FluxDistortion, Gate, QptOptions};
use fluxgate::pulsesim::{DeviceParams, Shots};

fn main() -> fluxgate::Result<()> {
    let p = DeviceParams::demux_qpt();
    let cal = Calibration::nominal(&p)?;

    let ideal = qpt_pipeline(&p.clone().noiseless(), &cal, &Gate::TOMOGRAPHY_SET, &QptOptions::default())?;
    print!("noiseless device\n{}", ideal.to_text());

    let opts = QptOptions {
        shots: Shots::Finite(2000),
        seed: 3,
        distortion: FluxDistortion { amplitude_error: 0.01, timing_jitter_ns: 0.05, settling: None },
        ..QptOptions::default()
    };
    let realistic = qpt_pipeline(&p, &cal, &Gate::TOMOGRAPHY_SET, &opts)?;
    print!("decoherence, readout error, flux distortion\n{}", realistic.to_text());
    Ok(())
}
