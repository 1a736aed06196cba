// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Lorentzian dip in T1 centred at `center_ghz` (full width `width_mhz`)
/// whose peak adds a relaxation rate of `1/t1_us`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlsDip {
    pub center_ghz: f64,
    pub width_mhz: f64,
    pub t1_us: f64,
}

/// Device constants. Frequencies in GHz, currents in µA, times in µs for
/// coherence and ns for pulses.
///
/// The qubit frequency follows a symmetric-SQUID map of the net bias current
/// `i_net = i_idle + δi`:
/// `f_q = f_max·sqrt(|cos(π(i_net − i_offset)/i_period)|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    pub f_max_ghz: f64,
    pub i_offset_ua: f64,
    pub i_period_ua: f64,
    /// Quasistatic bias current setting the idle frequency.
    pub i_idle_ua: f64,
    /// Frequency of the continuous drive.
    pub f_cw_ghz: f64,
    /// Rabi frequency per volt of drive amplitude, in MHz/V.
    pub rabi_per_volt_mhz: f64,
    /// Default drive amplitude in volts.
    pub drive_voltage_v: f64,
    /// Use `inf` for no relaxation.
    pub t1_us: f64,
    /// Use `inf` for no dephasing; must not exceed 2·T1.
    pub t2_us: f64,
    #[serde(default)]
    pub tls_dips: Vec<TlsDip>,
    pub visibility: f64,
    /// Readout resonator frequency (informational).
    pub readout_f_ghz: f64,
    /// Linear ramp time of flux-pulse edges, in ns.
    pub rise_time_ns: f64,
    /// Fixed frame phase picked up at the leading edge of every flux pulse
    /// (latency between the drive reference and the flux line), in radians.
    #[serde(default)]
    pub phase_origin_rad: f64,
}

impl DeviceParams {
    /// The tunable qubit used for the wiring and benchmarking experiments,
    /// with the frequency map fitted to its measured bias points.
    pub fn socket_qubit() -> Self {
        Self {
            f_max_ghz: 4.825_104_81,
            i_offset_ua: 87.590_073_98,
            i_period_ua: 451.679_800_26,
            i_idle_ua: 32.0,
            f_cw_ghz: 4.644,
            rabi_per_volt_mhz: 12.30 / 0.7,
            drive_voltage_v: 0.7,
            t1_us: 20.0,
            t2_us: 10.0,
            tls_dips: vec![
                TlsDip { center_ghz: 4.250, width_mhz: 3.0, t1_us: 0.5 },
                TlsDip { center_ghz: 4.683, width_mhz: 3.0, t1_us: 0.5 },
            ],
            visibility: 0.9,
            readout_f_ghz: 5.032,
            rise_time_ns: 2.0,
            phase_origin_rad: 0.0,
        }
    }

    /// A DemuXYZ device idling at 5.042 GHz under a 5.147 GHz drive
    /// (105 MHz detuning), with 2 ns flux-pulse edges.
    pub fn demux_chevron() -> Self {
        Self {
            f_max_ghz: 5.5,
            i_offset_ua: 82.353_250_99,
            i_period_ua: 451.679_800_26,
            i_idle_ua: 0.0,
            f_cw_ghz: 5.147,
            rabi_per_volt_mhz: 12.30 / 0.7,
            drive_voltage_v: 0.7,
            t1_us: 20.0,
            t2_us: 10.0,
            tls_dips: Vec::new(),
            visibility: 0.9,
            readout_f_ghz: 5.6,
            rise_time_ns: 2.0,
            phase_origin_rad: 0.0,
        }
    }

    /// The Ramsey axis-control device: same detuning as
    /// [`demux_chevron`](Self::demux_chevron), 1 ns edges, and a frame phase
    /// origin that puts the 90° points at 1, 10.5, 20, ... ns.
    pub fn demux_ramsey() -> Self {
        Self {
            rise_time_ns: 1.0,
            phase_origin_rad: RAMSEY_PHASE_ORIGIN,
            ..Self::demux_chevron()
        }
    }

    /// The DemuXYZ tomography device: 101 MHz drive detuning, 12.30 MHz Rabi
    /// frequency and rectangular flux pulses.
    pub fn demux_qpt() -> Self {
        Self {
            f_cw_ghz: 5.143,
            rise_time_ns: 0.0,
            ..Self::demux_chevron()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "socket" => Ok(Self::socket_qubit()),
            "demux-chevron" => Ok(Self::demux_chevron()),
            "demux-ramsey" => Ok(Self::demux_ramsey()),
            "demux-qpt" => Ok(Self::demux_qpt()),
            other => Err(Error::Config(format!(
                "unknown device preset '{other}' (socket, demux-chevron, demux-ramsey, demux-qpt)"
            ))),
        }
    }

    /// No decoherence and perfect readout.
    pub fn noiseless(mut self) -> Self {
        self.t1_us = f64::INFINITY;
        self.t2_us = f64::INFINITY;
        self.tls_dips.clear();
        self.visibility = 1.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.f_max_ghz > 0.0) {
            return bad("f_max_ghz must be positive");
        }
        if !(self.i_period_ua > 0.0) {
            return bad("i_period_ua must be positive");
        }
        if !(self.visibility > 0.0 && self.visibility <= 1.0) {
            return bad("visibility must lie in (0, 1]");
        }
        if !(self.t1_us > 0.0) || !(self.t2_us > 0.0) {
            return bad("t1_us and t2_us must be positive");
        }
        if self.t2_us > 2.0 * self.t1_us + 1e-9 {
            return bad("t2_us must not exceed 2·t1_us");
        }
        if !(self.rise_time_ns >= 0.0) {
            return bad("rise_time_ns must be non-negative");
        }
        if self.tls_dips.iter().any(|d| !(d.width_mhz > 0.0 && d.t1_us > 0.0)) {
            return bad("TLS dips need positive width and T1");
        }
        for v in [self.i_offset_ua, self.i_idle_ua, self.f_cw_ghz, self.rabi_per_volt_mhz,
                  self.drive_voltage_v, self.phase_origin_rad] {
            if !v.is_finite() {
                return bad("device parameters must be finite");
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: DeviceParams =
            toml::from_str(text).map_err(|e| Error::Config(format!("device file: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("device parameters serialize")
    }

    pub fn freq_from_current(&self, i_net: f64) -> f64 {
        freq_from_current(self, i_net)
    }

    /// Qubit frequency with no flux pulse applied.
    pub fn idle_freq(&self) -> f64 {
        freq_from_current(self, self.i_idle_ua)
    }

    /// Drive minus idle frequency, GHz.
    pub fn idle_detuning(&self) -> f64 {
        self.f_cw_ghz - self.idle_freq()
    }

    /// Rabi frequency at `volts` of drive, in GHz.
    pub fn rabi_ghz(&self, volts: f64) -> f64 {
        self.rabi_per_volt_mhz * volts * 1e-3
    }

    /// Flux-pulse amplitude that brings the qubit to `f_ghz` from idle.
    pub fn delta_i_for_freq(&self, f_ghz: f64) -> Result<f64> {
        Ok(current_from_freq(self, f_ghz)? - self.i_idle_ua)
    }

    /// Relaxation rate at frequency `f` in 1/ns, including TLS dips.
    pub fn relaxation_rate(&self, f_ghz: f64) -> f64 {
        let mut rate = 1e-3 / self.t1_us;
        for d in &self.tls_dips {
            let half = 0.5e-3 * d.width_mhz;
            let x = (f_ghz - d.center_ghz) / half;
            rate += 1e-3 / d.t1_us / (1.0 + x * x);
        }
        rate
    }

    /// Pure dephasing rate 1/T2 − 1/(2T1) in 1/ns.
    pub fn dephasing_rate(&self) -> f64 {
        (1e-3 / self.t2_us - 0.5e-3 / self.t1_us).max(0.0)
    }

    pub fn is_decoherence_free(&self) -> bool {
        self.t1_us.is_infinite() && self.t2_us.is_infinite() && self.tls_dips.is_empty()
    }
}

/// Frame phase used by [`DeviceParams::demux_ramsey`].
const RAMSEY_PHASE_ORIGIN: f64 = -2.215_838_748_7;

pub fn freq_from_current(p: &DeviceParams, i_net: f64) -> f64 {
    let c = (PI * (i_net - p.i_offset_ua) / p.i_period_ua).cos();
    p.f_max_ghz * c.abs().sqrt()
}

/// Inverse of [`freq_from_current`] on the branch below `i_offset`, the side
/// on which raising the current raises the frequency.
pub fn current_from_freq(p: &DeviceParams, f_ghz: f64) -> Result<f64> {
    if !(f_ghz > 0.0 && f_ghz <= p.f_max_ghz) {
        return Err(Error::invalid(format!(
            "{f_ghz} GHz is outside the tunable band (0, {}]",
            p.f_max_ghz
        )));
    }
    let r = (f_ghz / p.f_max_ghz).powi(2);
    Ok(p.i_offset_ua - p.i_period_ua / PI * r.acos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_peaks_at_offset_and_is_even() {
        let p = DeviceParams::socket_qubit();
        assert_eq!(p.freq_from_current(p.i_offset_ua), p.f_max_ghz);
        for d in [1.0, 17.0, 90.0, 200.0] {
            let a = p.freq_from_current(p.i_offset_ua + d);
            let b = p.freq_from_current(p.i_offset_ua - d);
            assert!((a - b).abs() < 1e-12);
            assert!(a < p.f_max_ghz);
        }
    }

    #[test]
    fn socket_map_hits_measured_bias_points() {
        let p = DeviceParams::socket_qubit();
        assert!((p.freq_from_current(0.0) - 4.369).abs() < 1e-3);
        assert!((p.freq_from_current(32.0) - 4.644).abs() < 1e-3);
        assert!((p.freq_from_current(-25.8) - 4.051).abs() < 2e-3);
        assert!((p.freq_from_current(88.3) - 4.825).abs() < 2e-3);
    }

    #[test]
    fn inverse_round_trip_on_the_rising_branch() {
        let p = DeviceParams::socket_qubit();
        for i in [-100.0, -25.8, 0.0, 32.0, 80.0] {
            let back = current_from_freq(&p, p.freq_from_current(i)).unwrap();
            assert!((back - i).abs() < 1e-6, "{i} -> {back}");
        }
        assert!(current_from_freq(&p, 5.0).is_err());
    }

    #[test]
    fn presets_validate_and_round_trip_through_toml() {
        for name in ["socket", "demux-chevron", "demux-ramsey", "demux-qpt"] {
            let p = DeviceParams::preset(name).unwrap();
            p.validate().unwrap();
            assert_eq!(DeviceParams::from_toml(&p.to_toml()).unwrap(), p);
        }
        let n = DeviceParams::demux_qpt().noiseless();
        assert_eq!(DeviceParams::from_toml(&n.to_toml()).unwrap(), n);
    }

    #[test]
    fn demux_detunings() {
        assert!((DeviceParams::demux_ramsey().idle_detuning() - 0.105).abs() < 1e-6);
        assert!((DeviceParams::demux_qpt().idle_detuning() - 0.101).abs() < 1e-6);
        let res = DeviceParams::demux_chevron().delta_i_for_freq(5.147).unwrap();
        assert!((res - 9.92).abs() < 0.01);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut p = DeviceParams::socket_qubit();
        p.t2_us = 50.0;
        assert!(p.validate().is_err());
        assert!(DeviceParams::from_toml("f_max_ghz = 1.0").is_err());
    }
}
