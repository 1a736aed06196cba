// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain simulation of a flux-tunable qubit under a fixed-frequency drive.
//!
//! Frequencies are in GHz and times in ns throughout, so `2π·f·t` is a phase
//! in radians. Coherence times in [`DeviceParams`] are in µs.

mod device;
mod evolve;
mod readout;
mod scans;
mod schedule;

pub use device::{current_from_freq, freq_from_current, DeviceParams, TlsDip};
pub use evolve::{
    auto_dt, evolve, evolve_final, evolve_microwave, microwave_choi, process_choi, MicrowaveSegment, SimResult,
    STEP_FACTOR,
};
pub use readout::{measure, observed_probability, sample_probability, Shots};
pub use scans::{
    chevron_asymmetry, delta_pe5, idle_scan, mirrored_delta_i_grid, on_off_scan, on_off_stats, rabi_chevron,
    ramsey_axis_scan, ramsey_schedule, swap_spectroscopy, HeatMap, IdleScan, OnOffStats, Prepared, RamseySetup,
    Readout, ReadoutBand, SwapSpectroscopy,
};
pub use schedule::{DriveMode, FluxPulse, PulseSchedule, SettlingTail};
