// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! The three calibration steps: resonance amplitude, π time, axis timing.



use super::Calibration;
use crate::analysis::{fit_nlls, FitOptions, FitResult, Model};
use crate::error::{Error, Result};
use crate::pulsesim::{rabi_chevron, ramsey_axis_scan, DeviceParams, HeatMap, RamseySetup, Readout};
use crate::clifford::wrap_angle;
use crate::rng::derive_seed;

/// Smallest peak-to-peak Rabi contrast accepted as an oscillation.
const MIN_CONTRAST: f64 = 0.5;

/// Scan grids and readout for a full calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPlan {
    /// Flux amplitudes of the chevron, µA.
    pub delta_is: Vec<f64>,
    /// Pulse durations of the chevron, ns.
    pub chevron_times: Vec<f64>,
    /// Pulse durations of the resonant Rabi scan, ns.
    pub rabi_times: Vec<f64>,
    /// Gaps between the two π/2 pulses of the Ramsey scan, ns.
    pub ramsey_delays: Vec<f64>,
    pub readout: Readout,
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

impl CalibrationPlan {
    /// Chevron over ±40 MHz around the drive, 0-160 ns; Rabi over 0-200 ns;
    /// Ramsey over 40 ns of delay starting at one rise time.
    pub fn default_for(p: &DeviceParams, readout: Readout) -> Result<Self> {
        let detunings: Vec<f64> = grid(-0.040, 0.040, 33);
        let delta_is = crate::pulsesim::mirrored_delta_i_grid(p, &detunings)?;
        let r = p.rise_time_ns;
        Ok(Self {
            delta_is,
            chevron_times: grid(0.0, 160.0, 81),
            rabi_times: grid(0.0, 200.0, 201),
            ramsey_delays: grid(r, r + 40.0, 161),
            readout,
        })
    }

    /// Chevron grid narrowed to ±`half_width_mhz` around `center`, for a
    /// second pass.
    pub fn refined_around(&self, p: &DeviceParams, center: f64, half_width_mhz: f64) -> Result<Self> {
        let f0 = p.freq_from_current(p.i_idle_ua + center);
        let detunings = grid(-1e-3 * half_width_mhz, 1e-3 * half_width_mhz, 21);
        let delta_is = detunings
            .iter()
            .map(|d| p.delta_i_for_freq(f0 + d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { delta_is, ..self.clone() })
    }
}

/// Chevron data and per-column oscillation contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeScan {
    pub delta_i_res: f64,
    pub chevron: HeatMap,
    /// Peak-to-peak amplitude of the fitted Rabi oscillation, per column.
    pub contrast: Vec<f64>,
}

fn rabi_contrast(times: &[f64], pe: &[f64]) -> f64 {
    match fit_nlls(Model::Sinusoid, times, pe, &FitOptions::default()) {
        Ok(fit) if fit.params.iter().all(|v| v.is_finite()) => 2.0 * fit.params[0].abs(),
        _ => 0.0,
    }
}

/// Step 1: run a chevron and return the flux amplitude with the largest Rabi
/// contrast. The peak is located by fitting `1/contrast`, which is quadratic
/// in detuning for a Lorentzian line, against static frequency.
pub fn calibrate_amplitude(p: &DeviceParams, delta_is: &[f64], times: &[f64], readout: Readout) -> Result<AmplitudeScan> {
    if delta_is.len() < 3 {
        return Err(Error::invalid("amplitude calibration needs at least 3 flux amplitudes"));
    }
    let chevron = rabi_chevron(p, delta_is, times, readout)?;
    let contrast: Vec<f64> = (0..delta_is.len()).map(|c| rabi_contrast(times, &chevron.column(c))).collect();
    let (best, &cmax) = contrast
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if cmax < MIN_CONTRAST * p.visibility {
        return Err(Error::Calibration(format!(
            "no Rabi oscillation above contrast {:.2} (best {cmax:.3})",
            MIN_CONTRAST * p.visibility
        )));
    }
    if best == 0 || best == delta_is.len() - 1 {
        return Err(Error::Calibration(format!(
            "strongest oscillation is at the edge of the scan (delta_i = {} uA); resonance is not bracketed",
            delta_is[best]
        )));
    }
    // contiguous columns above half the peak contrast
    let (mut lo, mut hi) = (best, best);
    while lo > 0 && contrast[lo - 1] >= 0.5 * cmax {
        lo -= 1;
    }
    while hi + 1 < contrast.len() && contrast[hi + 1] >= 0.5 * cmax {
        hi += 1;
    }
    if hi - lo < 2 {
        lo = best - 1;
        hi = best + 1;
    }
    let fs: Vec<f64> = (lo..=hi).map(|c| 1e3 * (p.freq_from_current(p.i_idle_ua + delta_is[c]) - p.f_cw_ghz)).collect();
    let inv: Vec<f64> = (lo..=hi).map(|c| 1.0 / contrast[c].max(1e-6)).collect();
    let vertex = quadratic_vertex(&fs, &inv).filter(|v| *v >= fs[0].min(fs[fs.len() - 1]) && *v <= fs[0].max(fs[fs.len() - 1]));
    let delta_i_res = match vertex {
        Some(mhz) => p.delta_i_for_freq(p.f_cw_ghz + 1e-3 * mhz)?,
        None => delta_is[best],
    };
    Ok(AmplitudeScan { delta_i_res, chevron, contrast })
}

/// Minimum of the least-squares parabola through `(x, y)`, if it opens upward.
fn quadratic_vertex(x: &[f64], y: &[f64]) -> Option<f64> {
    let a = nalgebra::DMatrix::from_fn(x.len(), 3, |i, j| x[i].powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(y);
    let q = a.svd(true, true).solve(&b, 1e-14).ok()?;
    (q[2] > 0.0).then(|| -q[1] / (2.0 * q[2]))
}

/// Resonant Rabi data with its sinusoid fit.
#[derive(Debug, Clone)]
pub struct DurationScan {
    pub t_pi: f64,
    /// Fitted Rabi frequency, GHz.
    pub rabi_ghz: f64,
    pub times: Vec<f64>,
    pub pe: Vec<f64>,
    pub fit: FitResult,
}

/// Step 2: Rabi oscillation at `delta_i_res`; `t_pi = 1/(2·Ω_R)`.
pub fn calibrate_duration(p: &DeviceParams, delta_i_res: f64, times: &[f64], readout: Readout) -> Result<DurationScan> {
    let map = rabi_chevron(p, &[delta_i_res], times, readout)?;
    let pe = map.column(0);
    let fit = fit_nlls(Model::Sinusoid, times, &pe, &FitOptions::default())
        .map_err(|e| e.context("fitting the resonant Rabi oscillation"))?;
    let rabi_ghz = fit.params[1];
    if !fit.converged || !(rabi_ghz > 0.0) {
        return Err(Error::FitFailure { message: "Rabi fit did not converge".into(), residual_norm: fit.residual_norm });
    }
    Ok(DurationScan { t_pi: 0.5 / rabi_ghz, rabi_ghz, times: times.to_vec(), pe, fit })
}

/// Ramsey fringe and the axis constants derived from it.
#[derive(Debug, Clone)]
pub struct TimingScan {
    pub axis_period: f64,
    pub axis_period_stderr: f64,
    pub phase_offset: f64,
    pub delays: Vec<f64>,
    pub pe: Vec<f64>,
    pub fit: FitResult,
}

/// Step 3: two π/2 pulses separated by each delay. `P_e = ½(1 + cos Δ)` with
/// `Δ` the angle between the two axes, so `P_e = 1` means the same axis,
/// `0` opposite axes and `½` normal axes. The fringe period is the axis
/// period; the phase at zero delay is the offset between consecutive pulses.
pub fn calibrate_timing(p: &DeviceParams, delta_i_res: f64, t_pi: f64, delays: &[f64], readout: Readout) -> Result<TimingScan> {
    let setup = RamseySetup { delta_i_res, t_half_pi: 0.5 * t_pi };
    let map = ramsey_axis_scan(p, &setup, &[0.0], delays, readout)?;
    let pe = map.column(0);
    let fit = fit_nlls(Model::CosineFringe, delays, &pe, &FitOptions::default())
        .map_err(|e| e.context("fitting the Ramsey fringe"))?;
    let f = fit.params[1];
    let stderr = fit.stderr.as_ref().map(|s| s[1]);
    let (true, Some(sf)) = (fit.converged && f > 0.0, stderr) else {
        return Err(Error::FitFailure { message: "Ramsey fit did not converge".into(), residual_norm: fit.residual_norm });
    };
    // Δ(δt) = −a·δt + c and the fit gives cos(2π f δt + φ), so c = −dir·φ
    let dir = if delta_i_res >= 0.0 { 1.0 } else { -1.0 };
    Ok(TimingScan {
        axis_period: 1.0 / f,
        axis_period_stderr: sf / (f * f),
        phase_offset: wrap_angle(-dir * fit.params[2]),
        delays: delays.to_vec(),
        pe,
        fit,
    })
}

/// All three steps with their raw data.
#[derive(Debug, Clone)]
pub struct CalibrationRun {
    pub calibration: Calibration,
    pub amplitude: AmplitudeScan,
    pub duration: DurationScan,
    pub timing: TimingScan,
}

/// Steps 1-3 in order; each step reads out with its own derived seed.
pub fn calibrate(p: &DeviceParams, plan: &CalibrationPlan) -> Result<CalibrationRun> {
    let step = |k: u64| Readout { seed: derive_seed(plan.readout.seed, &[k]), ..plan.readout };
    let amplitude = calibrate_amplitude(p, &plan.delta_is, &plan.chevron_times, step(1))?;
    let duration = calibrate_duration(p, amplitude.delta_i_res, &plan.rabi_times, step(2))?;
    let timing = calibrate_timing(p, amplitude.delta_i_res, duration.t_pi, &plan.ramsey_delays, step(3))?;
    let calibration = Calibration::new(amplitude.delta_i_res, duration.t_pi, timing.axis_period, timing.phase_offset)?;
    Ok(CalibrationRun { calibration, amplitude, duration, timing })
}
