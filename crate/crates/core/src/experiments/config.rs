// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration. Every key is optional; omitted keys take the
//! defaults listed on each section.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pulsesim::{DeviceParams, ReadoutBand};

/// Top-level configuration, one section per experiment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed; every random stream is derived from it.
    pub seed: u64,
    /// Experiment this file is meant for. When set, running any other
    /// subcommand with it is a config error.
    pub experiment: Option<String>,
    /// Device preset name. Each experiment has its own default.
    pub device: Option<String>,
    /// TOML device description, relative to the config file.
    pub device_file: Option<PathBuf>,
    /// Strip decoherence and readout error from the device.
    pub noiseless: bool,
    /// Output directory, relative to the working directory.
    pub out_dir: Option<PathBuf>,
    pub swap_spec: SwapSpecConfig,
    pub idle_scan: IdleScanConfig,
    pub rb: RbConfigSection,
    pub pb: RbConfigSection,
    pub rb_stability: StabilitySection,
    pub allan: AllanSection,
    pub chevron: ChevronSection,
    pub onoff: OnOffSection,
    pub ramsey_axis: RamseyAxisSection,
    pub calibrate: CalibrateSection,
    pub qpt: QptSection,
    /// Directory that relative paths in the file resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parse `path`; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Canonical serialization with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`Config::to_toml`], lowercase hex.
    pub fn sha256(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Device for an experiment whose default preset is `default_preset`.
    pub fn device_params(&self, default_preset: &str) -> Result<DeviceParams> {
        let p = match (&self.device, &self.device_file) {
            (Some(_), Some(_)) => return Err(Error::Config("set either `device` or `device_file`, not both".into())),
            (Some(name), None) => DeviceParams::preset(name)?,
            (None, Some(file)) => {
                let path = self.base_dir.join(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read device file {}: {e}", path.display())))?;
                DeviceParams::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            (None, None) => DeviceParams::preset(default_preset)?,
        };
        p.validate().map_err(|e| Error::Config(format!("device: {e}")))?;
        Ok(if self.noiseless { p.noiseless() } else { p })
    }
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(name: &str, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !lo.is_finite() || !hi.is_finite() || points == 0 || (points > 1 && hi <= lo) {
        return Err(Error::Config(format!("{name}: need lo < hi and at least one point, got [{lo}, {hi}] x {points}")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect())
}

/// Swap spectroscopy: defaults `f` 4.0-4.8 GHz x 81, `t` 0-2000 ns x 41, prepared `excited`, exact readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwapSpecConfig {
    /// `excited` or `ground`.
    pub prepared: String,
    pub f_min_ghz: f64,
    pub f_max_ghz: f64,
    pub f_points: usize,
    pub t_max_ns: f64,
    pub t_points: usize,
    /// 0 means exact probabilities.
    pub shots: u64,
}

impl Default for SwapSpecConfig {
    fn default() -> Self {
        Self {
            prepared: "excited".into(),
            f_min_ghz: 4.0,
            f_max_ghz: 4.8,
            f_points: 81,
            t_max_ns: 2000.0,
            t_points: 41,
            shots: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub lo_ghz: f64,
    pub hi_ghz: f64,
    pub excess_pe: f64,
}

impl From<BandConfig> for ReadoutBand {
    fn from(b: BandConfig) -> Self {
        ReadoutBand { lo_ghz: b.lo_ghz, hi_ghz: b.hi_ghz, excess_pe: b.excess_pe }
    }
}

/// Residual excitation vs idle frequency: defaults 4.0-4.8 GHz x 161, 2000 shots, no bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdleScanConfig {
    pub f_min_ghz: f64,
    pub f_max_ghz: f64,
    pub f_points: usize,
    pub thermal_pe: f64,
    pub shots: u64,
    /// Frequency bands where the readout reports excess P_e.
    pub bands: Vec<BandConfig>,
}

impl Default for IdleScanConfig {
    fn default() -> Self {
        Self { f_min_ghz: 4.0, f_max_ghz: 4.8, f_points: 161, thermal_pe: 0.0, shots: 2000, bands: Vec::new() }
    }
}

/// Execution backend of the benchmarking experiments, a `backend` subtable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    /// `channel` (exact unitaries plus a per-slot noise channel) or `pulse`
    /// (time-domain simulation of the device).
    pub kind: String,
    pub depolarizing_prob: f64,
    pub amplitude_damping_prob: f64,
    pub overrotation_rad: f64,
    pub axis_error_rad: f64,
    /// Readout visibility of the channel backend.
    pub visibility: f64,
    /// Pulse and idle slot length of the pulse backend, ns.
    pub slot_ns: f64,
}

impl Default for BackendSection {
    fn default() -> Self {
        Self {
            kind: "channel".into(),
            depolarizing_prob: 0.0,
            amplitude_damping_prob: 0.0,
            overrotation_rad: 0.0,
            axis_error_rad: 0.0,
            visibility: 1.0,
            slot_ns: 20.0,
        }
    }
}

/// RB or PB run: defaults 15 log-spaced lengths from 1 to 1000, 30 sequences each, exact readout, noiseless channel backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbConfigSection {
    pub backend: BackendSection,
    /// Explicit lengths; when empty they are log spaced.
    pub lengths: Vec<usize>,
    pub min_length: usize,
    pub max_length: usize,
    pub length_count: usize,
    pub sequences_per_length: usize,
    pub shots: u64,
    /// `unweighted` or `inverse-variance`.
    pub weighting: String,
    /// PB only: `plug-in` or `bias-corrected`.
    pub purity_estimator: String,
}

impl Default for RbConfigSection {
    fn default() -> Self {
        Self {
            backend: BackendSection::default(),
            lengths: Vec::new(),
            min_length: 1,
            max_length: 1000,
            length_count: 15,
            sequences_per_length: 30,
            shots: 0,
            weighting: "unweighted".into(),
            purity_estimator: "plug-in".into(),
        }
    }
}

/// Repeated RB: defaults 4800 iterations every 30 s, 19 lengths from 1 to 3000, window 90, 1000 shots, depolarizing 0.0015 per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub backend: BackendSection,
    pub lengths: Vec<usize>,
    pub min_length: usize,
    pub max_length: usize,
    pub length_count: usize,
    pub iterations: usize,
    pub window: usize,
    pub shots: u64,
    pub iteration_period_s: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            backend: BackendSection { depolarizing_prob: 0.0015, ..BackendSection::default() },
            lengths: Vec::new(),
            min_length: 1,
            max_length: 3000,
            length_count: 19,
            iterations: 4800,
            window: 90,
            shots: 1000,
            iteration_period_s: 30.0,
        }
    }
}

/// Allan deviation of the stability series. The `[rb_stability]` section
/// supplies the data; the series is refit with `window` and sampled once
/// per window so that consecutive points do not share iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllanSection {
    pub window: usize,
    pub taus_per_decade: usize,
}

impl Default for AllanSection {
    fn default() -> Self {
        Self { window: 10, taus_per_decade: 5 }
    }
}

/// Rabi chevron: defaults ±40 MHz x 41 mirrored about resonance, 0-200 ns x 101, exact readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChevronSection {
    pub detuning_mhz: f64,
    pub detuning_points: usize,
    pub t_max_ns: f64,
    pub t_points: usize,
    pub shots: u64,
}

impl Default for ChevronSection {
    fn default() -> Self {
        Self { detuning_mhz: 40.0, detuning_points: 41, t_max_ns: 200.0, t_points: 101, shots: 0 }
    }
}

/// Chevrons at several drive amplitudes: defaults 0, half and full drive, ±40 MHz x 21, 0-200 ns x 51, 1000 shots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnOffSection {
    /// Drive amplitudes in volts; empty means 0, half and full device drive.
    pub v_dr: Vec<f64>,
    pub detuning_mhz: f64,
    pub detuning_points: usize,
    pub t_max_ns: f64,
    pub t_points: usize,
    pub shots: u64,
}

impl Default for OnOffSection {
    fn default() -> Self {
        Self { v_dr: Vec::new(), detuning_mhz: 40.0, detuning_points: 21, t_max_ns: 200.0, t_points: 51, shots: 1000 }
    }
}

/// Two π/2 pulses with a middle flux pulse: defaults δi_mid ±20 µA x 41, δt_mid from one rise time to 25 ns x 97.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseyAxisSection {
    pub di_min_ua: f64,
    pub di_max_ua: f64,
    pub di_points: usize,
    /// Smallest gap; defaults to the device rise time.
    pub dt_min_ns: Option<f64>,
    pub dt_max_ns: f64,
    pub dt_points: usize,
    pub shots: u64,
}

impl Default for RamseyAxisSection {
    fn default() -> Self {
        Self { di_min_ua: -20.0, di_max_ua: 20.0, di_points: 41, dt_min_ns: None, dt_max_ns: 25.0, dt_points: 97, shots: 0 }
    }
}

/// Three-step DemuXYZ calibration: defaults ±40 MHz x 33 over 0-160 ns x 81, Rabi 0-200 ns x 201, Ramsey 40 ns x 161.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateSection {
    pub detuning_mhz: f64,
    pub detuning_points: usize,
    pub chevron_t_max_ns: f64,
    pub chevron_t_points: usize,
    pub rabi_t_max_ns: f64,
    pub rabi_t_points: usize,
    pub ramsey_span_ns: f64,
    pub ramsey_points: usize,
    pub shots: u64,
}

impl Default for CalibrateSection {
    fn default() -> Self {
        Self {
            detuning_mhz: 40.0,
            detuning_points: 33,
            chevron_t_max_ns: 160.0,
            chevron_t_points: 81,
            rabi_t_max_ns: 200.0,
            rabi_t_points: 201,
            ramsey_span_ns: 40.0,
            ramsey_points: 161,
            shots: 0,
        }
    }
}

/// DemuXYZ process tomography: defaults the five target gates, nominal calibration, exact readout, ideal flux line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QptSection {
    pub gates: Vec<String>,
    /// `nominal` (from the device), `calibrate` (run the `[calibrate]`
    /// steps first) or a calibration file relative to the config file.
    pub calibration: String,
    pub shots: u64,
    /// Divide the readout visibility out of the record before fitting.
    pub visibility_correction: bool,
    pub amplitude_error: f64,
    pub timing_jitter_ns: f64,
    pub settling_fraction: f64,
    pub settling_tau_ns: f64,
    pub min_gap_ns: f64,
    /// AWG timing grid, ns; 0 means continuous delays.
    pub delay_resolution_ns: f64,
    pub step_size: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub projection_rounds: usize,
}

impl Default for QptSection {
    fn default() -> Self {
        let r = crate::tomography::ReconstructionOptions::default();
        Self {
            gates: ["X_pi/2", "Y_-pi/2", "T", "S", "H"].map(String::from).to_vec(),
            calibration: "nominal".into(),
            shots: 0,
            visibility_correction: false,
            amplitude_error: 0.0,
            timing_jitter_ns: 0.0,
            settling_fraction: 0.0,
            settling_tau_ns: 10.0,
            min_gap_ns: 0.0,
            delay_resolution_ns: 0.0,
            step_size: r.step_size,
            max_iterations: r.max_iterations,
            tolerance: r.tolerance,
            projection_rounds: r.projection_rounds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        let cfg = Config::from_toml("").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.rb.sequences_per_length, 30);
    }

    #[test]
    fn bundled_sample_config_is_the_default() {
        let text = include_str!("../../data/configs/defaults.toml");
        assert_eq!(Config::from_toml(text).unwrap(), Config::default());
    }

    #[test]
    fn bundled_device_files_match_presets() {
        for name in ["socket", "demux-chevron", "demux-ramsey", "demux-qpt"] {
            let path = format!("{}/data/devices/{name}.toml", env!("CARGO_MANIFEST_DIR"));
            let text = std::fs::read_to_string(&path).unwrap();
            assert_eq!(DeviceParams::from_toml(&text).unwrap(), DeviceParams::preset(name).unwrap(), "{name}");
        }
    }

    #[test]
    fn canonical_form_round_trips() {
        let cfg = Config::from_toml("seed = 7\n[rb]\nlengths = [1, 2, 4]\n[rb.backend]\ndepolarizing_prob = 0.001\n").unwrap();
        let again = Config::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.sha256(), again.sha256());
        assert_eq!(cfg.sha256().len(), 64);
    }

    #[test]
    fn hash_tracks_content() {
        let a = Config::from_toml("seed = 1").unwrap();
        let b = Config::from_toml("seed = 2").unwrap();
        assert_ne!(a.sha256(), b.sha256());
        // explicit defaults hash like omitted ones
        let c = Config::from_toml("seed = 1\n[rb]\nsequences_per_length = 30\n").unwrap();
        assert_eq!(a.sha256(), c.sha256());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Config::from_toml("sed = 1"), Err(Error::Config(_))));
        assert!(matches!(Config::from_toml("[rb]\nlenghts = [1]"), Err(Error::Config(_))));
    }

    #[test]
    fn device_selection() {
        let cfg = Config::default();
        assert_eq!(cfg.device_params("socket").unwrap(), DeviceParams::socket_qubit());
        let both = Config { device: Some("socket".into()), device_file: Some("x.toml".into()), ..Config::default() };
        assert!(matches!(both.device_params("socket"), Err(Error::Config(_))));
        let missing = Config { device_file: Some("does-not-exist.toml".into()), ..Config::default() };
        assert!(matches!(missing.device_params("socket"), Err(Error::Config(_))));
        let quiet = Config { noiseless: true, ..Config::default() };
        assert_eq!(quiet.device_params("demux-qpt").unwrap().visibility, 1.0);
    }

    #[test]
    fn device_file_resolves_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("dev.toml"), DeviceParams::demux_qpt().to_toml()).unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "device_file = \"dev.toml\"\n").unwrap();
        let cfg = Config::load(&path).unwrap();
        assert_eq!(cfg.device_params("socket").unwrap(), DeviceParams::demux_qpt());
    }

    #[test]
    fn linspace_bounds() {
        assert_eq!(linspace("x", 0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace("x", 2.0, 2.0, 1).unwrap(), vec![2.0]);
        assert!(linspace("x", 1.0, 0.0, 3).is_err());
        assert!(linspace("x", 0.0, 1.0, 0).is_err());
    }
}
