// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! DemuXYZ gates: a single continuous drive, with flux pulses choosing when
//! the qubit is resonant with it.
//!
//! A resonant flux pulse rotates the qubit about the in-plane axis given by
//! its timing. Between pulses the idle qubit precesses relative to the drive
//! at `f_CW − f̃_q`, so delaying a pulse by one axis period leaves its axis
//! unchanged and shorter delays rotate it. Pulse length sets the rotation
//! angle.
//!
//! Gates are expressed in the frame that follows this precession: the axis
//! of pulse `k` is `−Φ_k` with `Φ_k = a·τ_k − k·c`, where `τ_k` is the idle
//! time before its leading edge, `a = ±2π/axis_period` and `c` is the
//! calibrated axis offset between consecutive pulses. Idling is the identity
//! in this frame, and a Z rotation is a shift of the later pulse axes.

mod calibrate;
mod compile;
mod qpt;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

pub use calibrate::{
    calibrate, calibrate_amplitude, calibrate_duration, calibrate_timing, AmplitudeScan, CalibrationPlan,
    CalibrationRun, DurationScan, TimingScan,
};
pub use compile::{
    compile_gate, compile_ops, compile_program, decompose_in_plane, delays_for_axis, sequence_choi, simulate_sequence,
    CompileOptions, DemuxSequence, FluxDistortion, Gate, Op,
};
pub use qpt::{meas_ops, prep_ops, qpt_pipeline, qpt_record_demux, GateQpt, QptOptions, QptReport};

use crate::error::{Error, Result};
use crate::pulsesim::DeviceParams;

/// Output of the three calibration steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    /// Flux amplitude that brings the qubit onto the drive, µA.
    #[serde(rename = "delta_i_res_uA")]
    pub delta_i_res: f64,
    #[serde(rename = "t_pi_ns")]
    pub t_pi: f64,
    /// Idle time per full turn of the rotation axis, ns.
    #[serde(rename = "axis_period_ns")]
    pub axis_period: f64,
    /// Axis of a pulse relative to the previous one at zero delay, radians.
    #[serde(rename = "phase_offset_rad")]
    pub phase_offset: f64,
}

impl Calibration {
    pub fn new(delta_i_res: f64, t_pi: f64, axis_period: f64, phase_offset: f64) -> Result<Self> {
        let c = Self { delta_i_res, t_pi, axis_period, phase_offset };
        c.validate()?;
        Ok(c)
    }

    /// Values implied by the device model for rectangular pulses.
    pub fn nominal(p: &DeviceParams) -> Result<Self> {
        let detuning = p.idle_detuning();
        if detuning == 0.0 {
            return Err(Error::Calibration("drive is resonant with the idle qubit".into()));
        }
        Self::new(p.delta_i_for_freq(p.f_cw_ghz)?, 0.5 / p.rabi_ghz(p.drive_voltage_v), 1.0 / detuning.abs(), 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.delta_i_res.is_finite()
            && self.t_pi > 0.0
            && self.t_pi.is_finite()
            && self.axis_period > 0.0
            && self.axis_period.is_finite()
            && self.phase_offset.is_finite();
        if !ok {
            return Err(Error::Calibration(format!("calibration needs t_pi > 0 and axis_period > 0: {self:?}")));
        }
        Ok(())
    }

    /// +1 when the drive sits above the idle qubit, which is the case when
    /// reaching it takes a positive flux pulse.
    pub fn direction(&self) -> f64 {
        if self.delta_i_res >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Frame phase gained per ns of idling, `a`.
    pub fn axis_rate(&self) -> f64 {
        self.direction() * TAU / self.axis_period
    }

    /// Key-value text, one `key = value` line per field.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("calibration serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Parse(format!("calibration file: {e}")))?;
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_constants() {
        let c = Calibration::nominal(&DeviceParams::demux_qpt()).unwrap();
        assert!((c.t_pi - 40.65).abs() < 0.01);
        assert!((c.axis_period - 9.90).abs() < 0.01);
        assert_eq!(c.direction(), 1.0);
    }

    #[test]
    fn text_round_trip() {
        let c = Calibration::new(41.25, 40.7, 9.9, 0.35).unwrap();
        let text = c.to_text();
        assert!(text.contains("axis_period_ns = 9.9"));
        assert_eq!(Calibration::from_text(&text).unwrap(), c);
        assert!(Calibration::from_text("t_pi_ns = 1.0").is_err());
        assert!(Calibration::new(1.0, -1.0, 9.9, 0.0).is_err());
    }
}
