// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise propagation of a driven, decohering qubit in the drive frame.
//!
//! In the basis (|g⟩, |e⟩) with σ_z = diag(1, −1) the drive-frame
//! Hamiltonian is `H/h = −(Δ/2)σ_z + (Ω/2)(cos φ σ_x + sin φ σ_y)` with
//! `Δ = f_q − f_CW`. Each step applies the exact exponential of H at the step
//! midpoint between two half steps of amplitude damping and pure dephasing.

use std::f64::consts::TAU;

use super::device::DeviceParams;
use super::schedule::PulseSchedule;
use crate::error::{Error, Result};
use crate::qcore::{ComplexMatrix, DensityMatrix, C64};

/// Largest allowed `dt·max(|Δ|, Ω)` while the drive is on.
pub const STEP_FACTOR: f64 = 0.05;
const DEFAULT_MAX_DT: f64 = 0.1;
const TRACE_TOL: f64 = 1e-9;
/// Ramps and settling transients are stepped this many times finer than `dt`.
const RAMP_REFINE: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct SimResult {
    pub times: Vec<f64>,
    pub pe: Vec<f64>,
    pub final_state: DensityMatrix,
}

/// A constant-drive interval for microwave-pulse programs at the idle frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrowaveSegment {
    pub duration: f64,
    /// Rabi frequency in GHz; 0 for an idle slot.
    pub rabi_ghz: f64,
    /// Rotation-axis angle in the x-y plane.
    pub phase: f64,
    /// Qubit minus drive frequency during the segment, GHz.
    pub detuning_ghz: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Piece {
    pub a: f64,
    pub b: f64,
    /// Hamiltonian and rates are constant on the piece.
    pub flat: bool,
    pub drive: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Ham {
    pub delta: f64,
    pub omega: f64,
    pub phi: f64,
    pub f_q: f64,
}

type State = [C64; 4];

fn rotate(m: &mut State, h: &Ham, tau: f64) {
    let (vx, vy, vz) = (h.omega * h.phi.cos(), h.omega * h.phi.sin(), -h.delta);
    let norm = (vx * vx + vy * vy + vz * vz).sqrt();
    if norm == 0.0 || tau == 0.0 {
        return;
    }
    let (nx, ny, nz) = (vx / norm, vy / norm, vz / norm);
    let (s, c) = (0.5 * TAU * norm * tau).sin_cos();
    let u = [
        C64::new(c, -s * nz),
        C64::new(-s * ny, -s * nx),
        C64::new(s * ny, -s * nx),
        C64::new(c, s * nz),
    ];
    // t = U·m
    let t = [
        u[0] * m[0] + u[1] * m[2],
        u[0] * m[1] + u[1] * m[3],
        u[2] * m[0] + u[3] * m[2],
        u[2] * m[1] + u[3] * m[3],
    ];
    // m = t·U†
    let (a0, a1, a2, a3) = (u[0].conj(), u[2].conj(), u[1].conj(), u[3].conj());
    m[0] = t[0] * a0 + t[1] * a2;
    m[1] = t[0] * a1 + t[1] * a3;
    m[2] = t[2] * a0 + t[3] * a2;
    m[3] = t[2] * a1 + t[3] * a3;
}

fn phase_kick(m: &mut State, angle: f64) {
    // R_z(angle) multiplies the g-e coherence by exp(−i·angle)
    let k = C64::from_polar(1.0, -angle);
    m[1] *= k;
    m[2] *= k.conj();
}

fn decohere(m: &mut State, p: &DeviceParams, f_q: f64, tau: f64) {
    let gamma = 1.0 - (-tau * p.relaxation_rate(f_q)).exp();
    let coherence = (-tau * p.dephasing_rate()).exp();
    let ee = m[3];
    m[0] += ee * gamma;
    m[3] = ee * (1.0 - gamma);
    let k = (1.0 - gamma).sqrt() * coherence;
    m[1] *= k;
    m[2] *= k;
}

pub(crate) struct Engine<'a, H: Fn(f64) -> Ham> {
    pub device: &'a DeviceParams,
    pub pieces: Vec<Piece>,
    pub ham: H,
    /// (time, z phase) kicks applied at piece starts.
    pub kicks: Vec<(f64, f64)>,
}

impl<H: Fn(f64) -> Ham> Engine<'_, H> {
    /// Largest step satisfying the resolution rule, capped at 0.1 ns.
    pub fn auto_dt(&self) -> f64 {
        let rate = self.max_drive_rate();
        if rate > 0.0 {
            (STEP_FACTOR / rate).min(DEFAULT_MAX_DT)
        } else {
            DEFAULT_MAX_DT
        }
    }

    fn max_drive_rate(&self) -> f64 {
        let mut rate: f64 = 0.0;
        for piece in self.pieces.iter().filter(|pc| pc.drive) {
            for k in 0..=8 {
                let h = (self.ham)(piece.a + (piece.b - piece.a) * k as f64 / 8.0);
                rate = rate.max(h.delta.abs()).max(h.omega.abs());
            }
        }
        rate
    }

    pub fn check_dt(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step {dt} must be positive")));
        }
        let rate = self.max_drive_rate();
        if rate > 0.0 && dt > STEP_FACTOR / rate * (1.0 + 1e-9) {
            return Err(Error::invalid(format!(
                "time step {dt} ns exceeds {:.4} ns, the limit for rates up to {rate:.4} GHz",
                STEP_FACTOR / rate
            )));
        }
        Ok(())
    }

    pub fn run(&self, dt: f64, m0: State, record: bool) -> Result<(State, Vec<f64>, Vec<f64>)> {
        let mut m = m0;
        let mut times = Vec::new();
        let mut pe = Vec::new();
        if record {
            times.push(self.pieces.first().map_or(0.0, |p| p.a));
            pe.push(m[3].re);
        }
        let noisy = !self.device.is_decoherence_free();
        let mut kick_idx = 0;
        for piece in &self.pieces {
            while kick_idx < self.kicks.len() && self.kicks[kick_idx].0 <= piece.a + 1e-12 {
                phase_kick(&mut m, self.kicks[kick_idx].1);
                kick_idx += 1;
            }
            let len = piece.b - piece.a;
            if len <= 0.0 {
                continue;
            }
            if piece.flat && (!noisy || !piece.drive) {
                let h = (self.ham)(0.5 * (piece.a + piece.b));
                rotate(&mut m, &h, len);
                if noisy {
                    decohere(&mut m, self.device, h.f_q, len);
                }
                if record {
                    times.push(piece.b);
                    pe.push(m[3].re);
                }
                continue;
            }
            let h = if piece.flat { dt } else { dt / RAMP_REFINE };
            let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
            let step = len / n as f64;
            for k in 0..n {
                let mid = piece.a + (k as f64 + 0.5) * step;
                let h = (self.ham)(mid);
                if noisy {
                    decohere(&mut m, self.device, h.f_q, 0.5 * step);
                }
                rotate(&mut m, &h, step);
                if noisy {
                    decohere(&mut m, self.device, h.f_q, 0.5 * step);
                }
                if record {
                    times.push(piece.a + (k + 1) as f64 * step);
                    pe.push(m[3].re);
                }
            }
            let tr = (m[0] + m[3]).re;
            let tr0 = (m0[0] + m0[3]).re;
            if (tr - tr0).abs() > TRACE_TOL * tr0.abs().max(1.0) {
                return Err(Error::NumericalFailure(format!(
                    "trace drifted to {tr} at t = {} ns",
                    piece.b
                )));
            }
        }
        Ok((m, times, pe))
    }
}

fn state_of(m: &ComplexMatrix) -> State {
    let s = m.as_slice();
    [s[0], s[1], s[2], s[3]]
}

fn matrix_of(m: State) -> ComplexMatrix {
    ComplexMatrix::from_rows([[m[0], m[1]], [m[2], m[3]]])
}

fn check_rho(rho0: &DensityMatrix) -> Result<()> {
    if rho0.matrix().dim() != 2 {
        return Err(Error::InvalidState("evolution needs a single-qubit state".into()));
    }
    Ok(())
}

fn finish(m: State) -> Result<DensityMatrix> {
    DensityMatrix::new(matrix_of(m)).map_err(|e| Error::NumericalFailure(format!("evolution left the state space: {e}")))
}

pub(crate) fn schedule_engine<'a>(
    p: &'a DeviceParams,
    s: &'a PulseSchedule,
) -> Engine<'a, impl Fn(f64) -> Ham + 'a> {
    let bps = s.breakpoints();
    let pieces = bps
        .windows(2)
        .map(|w| Piece {
            a: w[0],
            b: w[1],
            flat: s.is_flat(w[0], w[1]),
            drive: s.drive_on(0.5 * (w[0] + w[1])),
        })
        .collect();
    let omega = p.rabi_ghz(s.drive_amplitude);
    let kicks = if p.phase_origin_rad != 0.0 {
        s.leading_edges().into_iter().map(|t| (t, p.phase_origin_rad)).collect()
    } else {
        Vec::new()
    };
    let ham = move |t: f64| {
        let f_q = p.freq_from_current(p.i_idle_ua + s.current(t));
        Ham {
            delta: f_q - p.f_cw_ghz,
            omega: if s.drive_on(t) { omega } else { 0.0 },
            phi: s.drive_phase,
            f_q,
        }
    };
    Engine { device: p, pieces, ham, kicks }
}

/// Step size that satisfies the resolution rule for `s` on `p`.
pub fn auto_dt(p: &DeviceParams, s: &PulseSchedule) -> f64 {
    schedule_engine(p, s).auto_dt()
}

/// Propagate `rho0` through `s`, recording P_e after every step.
pub fn evolve(p: &DeviceParams, s: &PulseSchedule, dt: f64, rho0: &DensityMatrix) -> Result<SimResult> {
    check_rho(rho0)?;
    let engine = schedule_engine(p, s);
    engine.check_dt(dt)?;
    let (m, times, pe) = engine.run(dt, state_of(rho0.matrix()), true)?;
    Ok(SimResult { times, pe, final_state: finish(m)? })
}

/// Like [`evolve`] without the P_e trace.
pub fn evolve_final(p: &DeviceParams, s: &PulseSchedule, dt: f64, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    check_rho(rho0)?;
    let engine = schedule_engine(p, s);
    engine.check_dt(dt)?;
    let (m, _, _) = engine.run(dt, state_of(rho0.matrix()), false)?;
    finish(m)
}

fn choi_of<H: Fn(f64) -> Ham>(engine: &Engine<'_, H>, dt: f64) -> Result<ComplexMatrix> {
    let mut c = ComplexMatrix::zeros(4);
    for j in 0..2 {
        for k in 0..2 {
            let mut e = [C64::new(0.0, 0.0); 4];
            e[2 * j + k] = C64::new(1.0, 0.0);
            let (out, _, _) = engine.run(dt, e, false)?;
            for a in 0..2 {
                for b in 0..2 {
                    c[(2 * j + a, 2 * k + b)] = out[2 * a + b];
                }
            }
        }
    }
    Ok(c)
}

/// Choi matrix (trace 2, input factor first) of the channel realized by `s`.
pub fn process_choi(p: &DeviceParams, s: &PulseSchedule, dt: f64) -> Result<ComplexMatrix> {
    let engine = schedule_engine(p, s);
    engine.check_dt(dt)?;
    choi_of(&engine, dt)
}

fn microwave_engine<'a>(
    p: &'a DeviceParams,
    segments: &'a [MicrowaveSegment],
    starts: &'a [f64],
) -> Engine<'a, impl Fn(f64) -> Ham + 'a> {
    let pieces = segments
        .iter()
        .zip(starts)
        .map(|(seg, &a)| Piece { a, b: a + seg.duration, flat: true, drive: seg.rabi_ghz != 0.0 })
        .collect();
    let f_idle = p.idle_freq();
    let ham = move |t: f64| {
        let idx = starts.partition_point(|s| *s <= t).saturating_sub(1);
        let seg = &segments[idx];
        Ham { delta: seg.detuning_ghz, omega: seg.rabi_ghz, phi: seg.phase, f_q: f_idle }
    };
    Engine { device: p, pieces, ham, kicks: Vec::new() }
}

fn segment_starts(segments: &[MicrowaveSegment]) -> Result<Vec<f64>> {
    let mut t = 0.0;
    let mut starts = Vec::with_capacity(segments.len());
    for s in segments {
        if !(s.duration >= 0.0) || !s.rabi_ghz.is_finite() || !s.detuning_ghz.is_finite() {
            return Err(Error::invalid("microwave segments need finite, non-negative durations"));
        }
        starts.push(t);
        t += s.duration;
    }
    Ok(starts)
}

/// Propagate through square microwave pulses applied at the idle frequency.
pub fn evolve_microwave(
    p: &DeviceParams,
    segments: &[MicrowaveSegment],
    dt: f64,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_rho(rho0)?;
    let starts = segment_starts(segments)?;
    let engine = microwave_engine(p, segments, &starts);
    engine.check_dt(dt)?;
    let (m, _, _) = engine.run(dt, state_of(rho0.matrix()), false)?;
    finish(m)
}

/// Choi matrix of a microwave program.
pub fn microwave_choi(p: &DeviceParams, segments: &[MicrowaveSegment], dt: f64) -> Result<ComplexMatrix> {
    let starts = segment_starts(segments)?;
    let engine = microwave_engine(p, segments, &starts);
    engine.check_dt(dt)?;
    choi_of(&engine, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulsesim::{DriveMode, FluxPulse};
    use crate::qcore::{average_gate_fidelity, choi_defects, purity, KrausChannel};
    use proptest::prelude::*;

    fn resonant_device() -> DeviceParams {
        DeviceParams::demux_qpt().noiseless()
    }

    fn single_pulse(p: &DeviceParams, delta_i: f64, dur: f64, rise: f64) -> PulseSchedule {
        let pulse = FluxPulse::new(delta_i, 0.5 * rise, dur, rise).unwrap();
        PulseSchedule::tight(vec![pulse], p.drive_voltage_v, DriveMode::DuringFluxPulses).unwrap()
    }

    #[test]
    fn resonant_rabi_follows_sin_squared() {
        let p = resonant_device();
        let res = p.delta_i_for_freq(p.f_cw_ghz).unwrap();
        let omega = p.rabi_ghz(p.drive_voltage_v);
        assert!((omega - 0.01230).abs() < 1e-12);
        for t in [5.0, 20.325, 40.65, 63.0] {
            let s = single_pulse(&p, res, t, 0.0);
            let r = evolve_final(&p, &s, 0.05, &DensityMatrix::ground()).unwrap();
            let want = (std::f64::consts::PI * omega * t).sin().powi(2);
            assert!((r.pe() - want).abs() < 1e-9, "t={t}: {} vs {want}", r.pe());
        }
        let t_pi = 0.5 / omega;
        assert!((t_pi - 40.65).abs() < 0.2);
    }

    #[test]
    fn detuned_rabi_matches_closed_form() {
        let p = resonant_device();
        let omega = p.rabi_ghz(p.drive_voltage_v);
        for detune in [0.005, -0.02, 0.04] {
            let di = p.delta_i_for_freq(p.f_cw_ghz + detune).unwrap();
            let s = single_pulse(&p, di, 37.0, 0.0);
            let got = evolve(&p, &s, 0.05, &DensityMatrix::ground()).unwrap();
            let gen = (detune * detune + omega * omega).sqrt();
            let want = omega * omega / (gen * gen) * (std::f64::consts::PI * gen * 37.0).sin().powi(2);
            assert!((got.final_state.pe() - want).abs() < 0.01 * want.max(1e-3), "{detune}");
        }
    }

    #[test]
    fn dt_precondition_is_enforced_only_with_drive() {
        let p = resonant_device();
        let s = single_pulse(&p, -30.0, 50.0, 2.0);
        assert!(evolve(&p, &s, 1.0, &DensityMatrix::ground()).is_err());
        let mut off = s.clone();
        off.drive_mode = DriveMode::Off;
        assert!(evolve(&p, &off, 1.0, &DensityMatrix::ground()).is_ok());
    }

    #[test]
    fn idle_precession_rate_is_the_drive_detuning() {
        // (|g⟩+|e⟩)/√2 idling with the drive gated off precesses at f_CW − f̃_q
        let p = resonant_device();
        let plus = DensityMatrix::from_pure([C64::new(1.0, 0.0) / 2f64.sqrt(), C64::new(1.0, 0.0) / 2f64.sqrt()]).unwrap();
        let s = PulseSchedule::new(vec![], 2.5, p.drive_voltage_v, DriveMode::DuringFluxPulses).unwrap();
        let out = evolve_final(&p, &s, 0.05, &plus).unwrap();
        let v = crate::qcore::bloch_from_density(&out).unwrap();
        let angle = v.y.atan2(v.x);
        let want = TAU * p.idle_detuning() * 2.5;
        assert!((crate::clifford::wrap_angle(angle - want)).abs() < 1e-9);
    }

    #[test]
    fn swap_decay_matches_exponential() {
        let p = DeviceParams { tls_dips: vec![], ..DeviceParams::socket_qubit() };
        let pulse = FluxPulse::new(20.0, 0.0, 600.0, 0.0).unwrap();
        let s = PulseSchedule::tight(vec![pulse], 0.0, DriveMode::Off).unwrap();
        let out = evolve_final(&p, &s, 0.1, &DensityMatrix::excited()).unwrap();
        assert!((out.pe() - (-600.0 / 20_000.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn step_kraus_split_agrees_with_kraus_channels() {
        let p = DeviceParams { tls_dips: vec![], ..DeviceParams::socket_qubit() };
        let tau = 7.0;
        let rho = DensityMatrix::from_pure([C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let mut m = state_of(rho.matrix());
        decohere(&mut m, &p, 4.5, tau);
        let gamma = 1.0 - (-tau * p.relaxation_rate(4.5)).exp();
        let c = (-tau * p.dephasing_rate()).exp();
        let ch = KrausChannel::amplitude_damping(gamma).unwrap().then(&KrausChannel::dephasing(c).unwrap());
        let want = ch.apply(&rho);
        assert!(matrix_of(m).max_abs_diff(want.matrix()) < 1e-14);
    }

    #[test]
    fn ramped_pulse_converges_in_dt() {
        let p = DeviceParams::demux_chevron().noiseless();
        let res = p.delta_i_for_freq(p.f_cw_ghz).unwrap();
        let s = single_pulse(&p, res, 30.0, 2.0);
        let dt = auto_dt(&p, &s);
        let a = evolve_final(&p, &s, dt, &DensityMatrix::ground()).unwrap().pe();
        let b = evolve_final(&p, &s, dt / 2.0, &DensityMatrix::ground()).unwrap().pe();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn noiseless_choi_is_unitary_and_noisy_choi_is_cptp() {
        let p = resonant_device();
        let res = p.delta_i_for_freq(p.f_cw_ghz).unwrap();
        let omega = p.rabi_ghz(p.drive_voltage_v);
        let s = single_pulse(&p, res, 0.25 / omega, 0.0);
        let c = process_choi(&p, &s, 0.05).unwrap();
        let x_half = crate::qcore::inplane_rotation(0.0, std::f64::consts::FRAC_PI_2);
        assert!((average_gate_fidelity(&c, &x_half).unwrap() - 1.0).abs() < 1e-9);
        let noisy = DeviceParams::demux_qpt();
        let c = process_choi(&noisy, &s, 0.05).unwrap();
        assert!(choi_defects(&c).unwrap().is_cptp(1e-9));
    }

    #[test]
    fn microwave_program_realizes_pulses() {
        let p = DeviceParams::socket_qubit().noiseless();
        let seg = MicrowaveSegment { duration: 20.0, rabi_ghz: 0.5 / 20.0, phase: 0.0, detuning_ghz: 0.0 };
        let out = evolve_microwave(&p, &[seg], 0.05, &DensityMatrix::ground()).unwrap();
        assert!((out.pe() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn trace_and_purity_invariants(delta_i in -20.0f64..30.0, dur in 1.0f64..80.0, rise in 0.0f64..3.0) {
            let p = DeviceParams::demux_chevron().noiseless();
            let s = single_pulse(&p, delta_i, dur, rise);
            let dt = auto_dt(&p, &s);
            let rho0 = DensityMatrix::from_pure([C64::new(0.8, 0.0), C64::new(0.36, 0.48)]).unwrap();
            let out = evolve_final(&p, &s, dt, &rho0).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-9);
            prop_assert!((purity(&out) - 1.0).abs() < 1e-9);
            let noisy = DeviceParams::demux_chevron();
            let out = evolve(&noisy, &s, dt, &rho0).unwrap();
            prop_assert!((out.final_state.trace() - 1.0).abs() < 1e-9);
            prop_assert!(out.pe.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
        }
    }
}
