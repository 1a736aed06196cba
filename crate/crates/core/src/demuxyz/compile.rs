// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Gate compilation onto timed resonant flux pulses.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::Calibration;
use crate::analysis::{levenberg_marquardt, LmOptions};
use crate::clifford::wrap_angle;
use crate::error::{Error, Result};
use crate::pulsesim::{
    auto_dt, evolve_final, process_choi, DeviceParams, DriveMode, FluxPulse, PulseSchedule, SettlingTail,
};
use crate::qcore::{inplane_rotation, rz, ComplexMatrix, DensityMatrix, C64};
use crate::tomography::TargetGate;

const DECOMPOSITION_TOL: f64 = 1e-9;
const GRID_POINTS: usize = 16;

/// Gates the compiler understands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Identity,
    XHalfPi,
    YMinusHalfPi,
    XPi,
    T,
    S,
    H,
    /// `angle` about the in-plane axis at `axis_angle` from +x.
    Rotation { axis_angle: f64, angle: f64 },
    Z(f64),
}

impl Gate {
    pub const TOMOGRAPHY_SET: [Gate; 5] = [Gate::XHalfPi, Gate::YMinusHalfPi, Gate::T, Gate::S, Gate::H];

    /// Names as accepted by [`Gate::parse`]; rotations print in radians.
    pub fn label(&self) -> String {
        match *self {
            Gate::Identity => "I".into(),
            Gate::XHalfPi => "X_pi/2".into(),
            Gate::YMinusHalfPi => "Y_-pi/2".into(),
            Gate::XPi => "X_pi".into(),
            Gate::T => "T".into(),
            Gate::S => "S".into(),
            Gate::H => "H".into(),
            Gate::Rotation { axis_angle, angle } => format!("R:{axis_angle}:{angle}"),
            Gate::Z(theta) => format!("Z:{theta}"),
        }
    }

    /// Accepts the tomography gate names and keys, `X_pi`/`x_pi`, `I`/`identity`,
    /// `Z:<rad>` and `R:<axis rad>:<angle rad>`.
    pub fn parse(name: &str) -> Result<Self> {
        let n = name.trim();
        let lower = n.to_ascii_lowercase();
        if let Ok(t) = TargetGate::parse(n) {
            return Ok(Self::from(t));
        }
        match lower.as_str() {
            "i" | "identity" | "id" => return Ok(Gate::Identity),
            "x_pi" => return Ok(Gate::XPi),
            _ => {}
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad angle '{s}' in gate '{name}'")));
        let parts: Vec<&str> = lower.split(':').collect();
        match parts.as_slice() {
            ["z", theta] => Ok(Gate::Z(num(theta)?)),
            ["r", axis, angle] => Ok(Gate::Rotation { axis_angle: num(axis)?, angle: num(angle)? }),
            _ => Err(Error::invalid(format!(
                "unknown gate '{name}' (X_pi/2, Y_-pi/2, T, S, H, X_pi, I, Z:<rad>, R:<axis>:<angle>)"
            ))),
        }
    }

    pub fn unitary(&self) -> ComplexMatrix {
        match *self {
            Gate::Identity => ComplexMatrix::identity(2),
            Gate::XPi => inplane_rotation(0.0, PI),
            Gate::Rotation { axis_angle, angle } => inplane_rotation(axis_angle, angle),
            Gate::Z(theta) => rz(theta),
            other => other.target().expect("tomography gate").unitary(),
        }
    }

    pub fn target(&self) -> Option<TargetGate> {
        match self {
            Gate::XHalfPi => Some(TargetGate::XHalfPi),
            Gate::YMinusHalfPi => Some(TargetGate::YMinusHalfPi),
            Gate::T => Some(TargetGate::T),
            Gate::S => Some(TargetGate::S),
            Gate::H => Some(TargetGate::H),
            _ => None,
        }
    }

    /// Pulse-level program of the gate.
    pub fn ops(&self) -> Result<Vec<Op>> {
        let pulse = |axis_angle: f64, rotation: f64| Op::Pulse { axis_angle, rotation };
        Ok(match *self {
            Gate::Identity => Vec::new(),
            Gate::XHalfPi => vec![pulse(0.0, FRAC_PI_2)],
            Gate::YMinusHalfPi => vec![pulse(-FRAC_PI_2, FRAC_PI_2)],
            Gate::XPi => vec![pulse(0.0, PI)],
            Gate::Rotation { axis_angle, angle } => {
                let turns = wrap_angle(angle);
                if turns == 0.0 {
                    Vec::new()
                } else if turns < 0.0 {
                    vec![pulse(wrap_angle(axis_angle + PI), -turns)]
                } else {
                    vec![pulse(wrap_angle(axis_angle), turns)]
                }
            }
            Gate::Z(theta) => vec![Op::VirtualZ(theta)],
            Gate::T | Gate::S | Gate::H => stored_decomposition(*self)?
                .iter()
                .map(|&(a, r)| pulse(a, r))
                .collect(),
        })
    }
}

impl From<TargetGate> for Gate {
    fn from(t: TargetGate) -> Self {
        match t {
            TargetGate::XHalfPi => Gate::XHalfPi,
            TargetGate::YMinusHalfPi => Gate::YMinusHalfPi,
            TargetGate::T => Gate::T,
            TargetGate::S => Gate::S,
            TargetGate::H => Gate::H,
        }
    }
}

/// One step of a pulse program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    /// Resonant pulse of `rotation` radians about the axis at `axis_angle`.
    Pulse { axis_angle: f64, rotation: f64 },
    /// Z rotation: shifts the axes of all later pulses and costs a drive-off
    /// delay of `θ/a` modulo one axis period.
    VirtualZ(f64),
}

fn stored_decomposition(g: Gate) -> Result<&'static [(f64, f64)]> {
    static CACHE: OnceLock<[Result<Vec<(f64, f64)>>; 3]> = OnceLock::new();
    let table = CACHE.get_or_init(|| [Gate::T, Gate::S, Gate::H].map(|g| decompose_in_plane(&g.unitary())));
    let k = match g {
        Gate::T => 0,
        Gate::S => 1,
        Gate::H => 2,
        _ => unreachable!("only T, S and H are stored"),
    };
    match &table[k] {
        Ok(v) => Ok(v),
        Err(e) => Err(Error::Internal(format!("no stored decomposition for {}: {e}", g.label()))),
    }
}

fn product(axes: &[f64], rotations: &[f64]) -> ComplexMatrix {
    axes.iter()
        .zip(rotations)
        .fold(ComplexMatrix::identity(2), |acc, (&a, &r)| &inplane_rotation(a, r) * &acc)
}

/// Shortest list of in-plane rotations with angles in {π/2, π} equal to `u`
/// up to global phase, with at most three pulses. Candidates are ordered by
/// total rotation angle, then pulse count; axis angles are found by a grid
/// search refined with Levenberg-Marquardt.
pub fn decompose_in_plane(u: &ComplexMatrix) -> Result<Vec<(f64, f64)>> {
    if u.dim() != 2 || !u.is_unitary(1e-9) {
        return Err(Error::invalid("in-plane decomposition needs a 2x2 unitary"));
    }
    if u.eq_up_to_phase(&ComplexMatrix::identity(2), DECOMPOSITION_TOL) {
        return Ok(Vec::new());
    }
    let mut patterns: Vec<Vec<f64>> = Vec::new();
    for len in 1..=3u32 {
        for bits in 0..(1u32 << len) {
            patterns.push((0..len).map(|k| if bits >> k & 1 == 1 { PI } else { FRAC_PI_2 }).collect());
        }
    }
    patterns.sort_by(|a, b| {
        let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
        sa.total_cmp(&sb).then(a.len().cmp(&b.len()))
    });
    for rotations in &patterns {
        if let Some(axes) = fit_axes(u, rotations) {
            return Ok(axes.into_iter().zip(rotations.iter().copied()).collect());
        }
    }
    Err(Error::invalid("no decomposition into three or fewer pulses of π/2 or π"))
}

fn overlap_cost(u: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    1.0 - 0.5 * u.trace_product_adjoint(v).norm()
}

fn fit_axes(u: &ComplexMatrix, rotations: &[f64]) -> Option<Vec<f64>> {
    let n = rotations.len();
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
    let total = GRID_POINTS.pow(n as u32);
    for idx in 0..total {
        let axes: Vec<f64> = (0..n).map(|k| TAU * ((idx / GRID_POINTS.pow(k as u32)) % GRID_POINTS) as f64 / GRID_POINTS as f64).collect();
        starts.push((overlap_cost(u, &product(&axes, rotations)), axes));
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let residual = |x: &[f64]| -> DVector<f64> {
        let v = product(&x[..n], rotations);
        let phase = C64::from_polar(1.0, x[n]);
        let mut r = DVector::zeros(8);
        for (k, (a, b)) in v.as_slice().iter().zip(u.as_slice()).enumerate() {
            let d = a - b * phase;
            r[2 * k] = d.re;
            r[2 * k + 1] = d.im;
        }
        r
    };
    for (_, axes) in starts.into_iter().take(4) {
        let v = product(&axes, rotations);
        let mut x0 = axes.clone();
        x0.push(u.trace_product_adjoint(&v).arg());
        let out = levenberg_marquardt(
            |x| {
                let r0 = residual(x);
                let mut j = DMatrix::zeros(8, n + 1);
                for c in 0..=n {
                    let h = 1e-7;
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[c] += h;
                    xm[c] -= h;
                    j.set_column(c, &((residual(&xp) - residual(&xm)) / (2.0 * h)));
                }
                (r0, j)
            },
            &x0,
            &LmOptions { max_iterations: 500, ..Default::default() },
        );
        let axes: Vec<f64> = out.params[..n].iter().map(|a| wrap_angle(*a)).collect();
        if product(&axes, rotations).phase_distance(u) < DECOMPOSITION_TOL {
            return Some(axes);
        }
    }
    None
}

/// Spacing and timing constraints of the compiler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    /// Extra idle time required between pulses beyond the ramps, ns.
    pub min_gap_ns: f64,
    /// Timing grid for delays (AWG sample period); continuous when `None`.
    pub delay_resolution_ns: Option<f64>,
    /// How many axis periods past the earliest slot a delay may search.
    pub horizon_periods: f64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { min_gap_ns: 0.0, delay_resolution_ns: None, horizon_periods: 10.0 }
    }
}

/// Compiled flux-pulse program.
#[derive(Debug, Clone, PartialEq)]
pub struct DemuxSequence {
    pub pulses: Vec<FluxPulse>,
    /// Realized axis angle of each pulse in the gate frame.
    pub axis_angles: Vec<f64>,
    pub rotations: Vec<f64>,
    pub total_duration: f64,
    /// Frame phase `Φ` at the end of the sequence.
    pub final_frame: f64,
    /// Accumulated Z rotation carried by the frame.
    pub virtual_z: f64,
}

impl DemuxSequence {
    pub fn leading_edges(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.start).collect()
    }

    /// Unitary the sequence is meant to realize: the pulses in order, then
    /// the carried Z rotation.
    pub fn ideal_unitary(&self) -> ComplexMatrix {
        &rz(self.virtual_z) * &product(&self.axis_angles, &self.rotations)
    }

    /// Maps a drive-frame result into the gate frame.
    pub fn frame_correction(&self) -> ComplexMatrix {
        &rz(self.virtual_z) * &rz(-self.final_frame)
    }

    /// Gated-drive schedule at the device's drive amplitude.
    pub fn schedule(&self, p: &DeviceParams) -> Result<PulseSchedule> {
        PulseSchedule::new(self.pulses.clone(), self.total_duration, p.drive_voltage_v, DriveMode::DuringFluxPulses)
    }

    /// `index,start_ns,duration_ns,delta_i_uA,axis_angle_rad`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,start_ns,duration_ns,delta_i_uA,axis_angle_rad\n");
        for (k, (p, a)) in self.pulses.iter().zip(&self.axis_angles).enumerate() {
            writeln!(out, "{k},{},{},{},{}", p.start, p.duration, p.delta_i, a).unwrap();
        }
        out
    }
}

/// Place the pulses of `ops` one after another, each at the first delay
/// after the previous pulse that realizes its axis.
pub fn compile_ops(ops: &[Op], cal: &Calibration, p: &DeviceParams, opts: &CompileOptions) -> Result<DemuxSequence> {
    cal.validate()?;
    let a = cal.axis_rate();
    let period = cal.axis_period;
    let r = p.rise_time_ns;
    if let Some(q) = opts.delay_resolution_ns {
        if !(q > 0.0) {
            return Err(Error::invalid("delay resolution must be positive"));
        }
    }
    let mut seq = DemuxSequence {
        pulses: Vec::new(),
        axis_angles: Vec::new(),
        rotations: Vec::new(),
        total_duration: 0.0,
        final_frame: 0.0,
        virtual_z: 0.0,
    };
    let mut prev_end = 0.0;
    let mut tau = 0.0;
    // earliest allowed leading edge
    let mut earliest = 0.5 * r;
    for op in ops {
        match *op {
            Op::VirtualZ(theta) => {
                seq.virtual_z += theta;
                let delay = (theta / a).rem_euclid(period);
                earliest += delay;
                seq.total_duration = seq.total_duration.max(earliest - 0.5 * r);
            }
            Op::Pulse { axis_angle, rotation } => {
                if !(rotation > 0.0) || !axis_angle.is_finite() {
                    return Err(Error::invalid(format!("pulse rotation must be positive, got {rotation}")));
                }
                let k = (seq.pulses.len() + 1) as f64;
                let beta = axis_angle - seq.virtual_z;
                let g_min = earliest - prev_end;
                let g0 = (-beta + k * cal.phase_offset) / a - tau;
                let mut g = g_min + (g0 - g_min).rem_euclid(period);
                if let Some(q) = opts.delay_resolution_ns {
                    g = (g / q).round() * q;
                    if g < g_min - 1e-12 {
                        g = ((g + period) / q).round() * q;
                    }
                }
                if g - g_min > opts.horizon_periods * period {
                    return Err(Error::invalid(format!(
                        "axis {axis_angle} rad is not reachable within {} axis periods",
                        opts.horizon_periods
                    )));
                }
                let start = prev_end + g;
                let duration = rotation / PI * cal.t_pi;
                let pulse = FluxPulse::new(cal.delta_i_res, start, duration, r)?;
                tau += g;
                seq.axis_angles.push(wrap_angle(-(a * tau - k * cal.phase_offset)));
                seq.rotations.push(rotation);
                seq.pulses.push(pulse);
                prev_end = pulse.end();
                earliest = prev_end + r + opts.min_gap_ns;
                seq.total_duration = seq.total_duration.max(pulse.occupied_end());
            }
        }
    }
    let idle_after = seq.total_duration - prev_end;
    let n = seq.pulses.len() as f64;
    seq.final_frame = a * (tau + idle_after) - n * cal.phase_offset;
    seq.virtual_z = wrap_angle(seq.virtual_z);
    Ok(seq)
}

pub fn compile_gate(gate: &Gate, cal: &Calibration, p: &DeviceParams, opts: &CompileOptions) -> Result<DemuxSequence> {
    compile_ops(&gate.ops()?, cal, p, opts).map_err(|e| e.context(format!("compiling {}", gate.label())))
}

/// Gates applied left to right as one program.
pub fn compile_program(gates: &[Gate], cal: &Calibration, p: &DeviceParams, opts: &CompileOptions) -> Result<DemuxSequence> {
    let mut ops = Vec::new();
    for g in gates {
        ops.extend(g.ops()?);
    }
    compile_ops(&ops, cal, p, opts)
}

/// Every delay in `[min_delay, max_delay]` after a pulse at which the next
/// pulse's axis is `relative_angle` away from it.
pub fn delays_for_axis(cal: &Calibration, relative_angle: f64, min_delay: f64, max_delay: f64) -> Vec<f64> {
    let a = cal.axis_rate();
    // −a·δt + c ≡ relative_angle
    let d0 = (cal.phase_offset - relative_angle) / a;
    let first = min_delay + (d0 - min_delay).rem_euclid(cal.axis_period);
    let mut out = Vec::new();
    let mut d = first;
    while d <= max_delay + 1e-12 {
        out.push(d);
        d += cal.axis_period;
    }
    out
}

/// Imperfections of the flux line for realism runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxDistortion {
    /// Relative error of every pulse amplitude.
    pub amplitude_error: f64,
    /// Standard deviation of a random shift of every pulse, ns.
    pub timing_jitter_ns: f64,
    pub settling: Option<SettlingTail>,
}

impl FluxDistortion {
    pub fn is_ideal(&self) -> bool {
        self.amplitude_error == 0.0 && self.timing_jitter_ns == 0.0 && self.settling.is_none()
    }

    /// Distorted schedule of `seq`. Jittered pulses are kept from
    /// overlapping by pushing a late pulse past its predecessor.
    pub fn schedule<R: Rng + ?Sized>(&self, seq: &DemuxSequence, p: &DeviceParams, rng: &mut R) -> Result<PulseSchedule> {
        if !(self.timing_jitter_ns >= 0.0) || !self.amplitude_error.is_finite() {
            return Err(Error::invalid("timing jitter must be non-negative and the amplitude error finite"));
        }
        let jitter = Normal::new(0.0, self.timing_jitter_ns).map_err(|e| Error::invalid(format!("jitter: {e}")))?;
        let mut pulses: Vec<FluxPulse> = Vec::with_capacity(seq.pulses.len());
        for q in &seq.pulses {
            let mut start = q.start + if self.timing_jitter_ns > 0.0 { jitter.sample(rng) } else { 0.0 };
            let floor = pulses.last().map_or(0.5 * q.rise_time, |prev| prev.occupied_end() + 0.5 * q.rise_time);
            start = start.max(floor);
            pulses.push(FluxPulse::new(q.delta_i * (1.0 + self.amplitude_error), start, q.duration, q.rise_time)?);
        }
        let total = pulses.last().map_or(seq.total_duration, |l| l.occupied_end().max(seq.total_duration));
        let s = PulseSchedule::new(pulses, total, p.drive_voltage_v, DriveMode::DuringFluxPulses)?;
        match self.settling {
            Some(tail) => s.with_settling(tail),
            None => Ok(s),
        }
    }
}

/// Final state after running `schedule` (the sequence, possibly distorted)
/// from `rho0`, in the drive frame.
pub fn simulate_sequence(p: &DeviceParams, schedule: &PulseSchedule, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    evolve_final(p, schedule, auto_dt(p, schedule), rho0)
}

/// Choi matrix of the undistorted sequence in the gate frame.
pub fn sequence_choi(p: &DeviceParams, seq: &DemuxSequence) -> Result<ComplexMatrix> {
    let s = seq.schedule(p)?;
    let c = process_choi(p, &s, auto_dt(p, &s))?;
    let w = ComplexMatrix::identity(2).kron(&seq.frame_correction());
    Ok(&(&w * &c) * &w.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::average_gate_fidelity;

    fn setup() -> (DeviceParams, Calibration) {
        let p = DeviceParams::demux_qpt().noiseless();
        let cal = Calibration::nominal(&p).unwrap();
        (p, cal)
    }

    #[test]
    fn decompositions_are_exact_and_short() {
        for g in [Gate::T, Gate::S, Gate::H, Gate::XHalfPi, Gate::YMinusHalfPi] {
            let ops = g.ops().unwrap();
            assert!(!ops.is_empty() && ops.len() <= 3, "{g:?}");
            let (axes, rots): (Vec<f64>, Vec<f64>) = ops
                .iter()
                .map(|o| match o {
                    Op::Pulse { axis_angle, rotation } => (*axis_angle, *rotation),
                    Op::VirtualZ(_) => panic!("no Z in {g:?}"),
                })
                .unzip();
            assert!(rots.iter().all(|r| (*r - FRAC_PI_2).abs() < 1e-15 || (*r - PI).abs() < 1e-15));
            assert!(product(&axes, &rots).phase_distance(&g.unitary()) < 1e-9, "{g:?}");
        }
        assert_eq!(Gate::XHalfPi.ops().unwrap().len(), 1);
        assert_eq!(Gate::YMinusHalfPi.ops().unwrap().len(), 1);
    }

    #[test]
    fn single_pulse_gates() {
        let (p, cal) = setup();
        let seq = compile_gate(&Gate::XHalfPi, &cal, &p, &CompileOptions::default()).unwrap();
        assert_eq!(seq.pulses.len(), 1);
        assert!((seq.pulses[0].duration - 0.5 * cal.t_pi).abs() < 1e-12);
    }

    #[test]
    fn noiseless_sequences_realize_their_gates() {
        let (p, cal) = setup();
        for g in [Gate::XHalfPi, Gate::YMinusHalfPi, Gate::T, Gate::S, Gate::H, Gate::XPi, Gate::Identity] {
            let seq = compile_gate(&g, &cal, &p, &CompileOptions::default()).unwrap();
            assert!(seq.ideal_unitary().phase_distance(&g.unitary()) < 1e-9, "{g:?}");
            let c = sequence_choi(&p, &seq).unwrap();
            let f = average_gate_fidelity(&c, &g.unitary()).unwrap();
            assert!(f > 0.999, "{g:?}: {f}");
        }
        // the same with a timing grid of one thousandth of the axis period
        let opts = CompileOptions { delay_resolution_ns: Some(cal.axis_period / 1000.0), ..Default::default() };
        for g in Gate::TOMOGRAPHY_SET {
            let seq = compile_gate(&g, &cal, &p, &opts).unwrap();
            let f = average_gate_fidelity(&sequence_choi(&p, &seq).unwrap(), &g.unitary()).unwrap();
            assert!(f > 0.999, "{g:?}: {f}");
        }
    }

    #[test]
    fn delays_are_the_first_available() {
        let (p, cal) = setup();
        let seq = compile_gate(&Gate::H, &cal, &p, &CompileOptions::default()).unwrap();
        for w in seq.pulses.windows(2) {
            let gap = w[1].start - w[0].end();
            assert!(gap >= -1e-12 && gap < cal.axis_period, "{gap}");
        }
        let ramped = DeviceParams { rise_time_ns: 2.0, ..p.clone() };
        let seq = compile_gate(&Gate::T, &cal, &ramped, &CompileOptions::default()).unwrap();
        for w in seq.pulses.windows(2) {
            assert!(w[1].occupied_start() >= w[0].occupied_end() - 1e-9);
        }
    }

    #[test]
    fn z_rotation_is_a_delay() {
        let (p, cal) = setup();
        let seq = compile_gate(&Gate::Z(FRAC_PI_2), &cal, &p, &CompileOptions::default()).unwrap();
        assert!(seq.pulses.is_empty());
        assert!((seq.total_duration - 0.25 * cal.axis_period).abs() < 1e-12);
        // in the drive frame the delay is the rotation itself
        let c = crate::pulsesim::process_choi(&p, &seq.schedule(&p).unwrap(), 0.1).unwrap();
        assert!(average_gate_fidelity(&c, &rz(FRAC_PI_2)).unwrap() > 1.0 - 1e-12);
        // and later pulses see a shifted axis
        let prog = compile_program(&[Gate::Z(FRAC_PI_2), Gate::XHalfPi, Gate::Z(-FRAC_PI_2)], &cal, &p, &CompileOptions::default()).unwrap();
        let expected = &(&rz(-FRAC_PI_2) * &inplane_rotation(0.0, FRAC_PI_2)) * &rz(FRAC_PI_2);
        assert!(prog.ideal_unitary().phase_distance(&expected) < 1e-12);
        let f = average_gate_fidelity(&sequence_choi(&p, &prog).unwrap(), &expected).unwrap();
        assert!(f > 1.0 - 1e-9, "{f}");
    }

    #[test]
    fn quarter_turn_delays_on_the_ramsey_device() {
        let p = DeviceParams::demux_ramsey().noiseless();
        let setup = crate::pulsesim::RamseySetup::calibrated(&p).unwrap();
        let delays: Vec<f64> = (0..=160).map(|k| p.rise_time_ns + 0.25 * k as f64).collect();
        let t = super::super::calibrate_timing(&p, setup.delta_i_res, 2.0 * setup.t_half_pi, &delays, crate::pulsesim::Readout::EXACT).unwrap();
        let cal = Calibration::new(setup.delta_i_res, 2.0 * setup.t_half_pi, t.axis_period, t.phase_offset).unwrap();
        let found = delays_for_axis(&cal, FRAC_PI_2, 0.0, 25.0);
        assert_eq!(found.len(), 3, "{found:?}");
        for (d, want) in found.iter().zip([1.0, 10.5, 20.0]) {
            assert!((d - want).abs() < 0.05, "{found:?}");
        }
    }

    #[test]
    fn csv_and_names() {
        let (p, cal) = setup();
        let seq = compile_gate(&Gate::T, &cal, &p, &CompileOptions::default()).unwrap();
        let csv = seq.to_csv();
        assert_eq!(csv.lines().count(), seq.pulses.len() + 1);
        assert!(csv.starts_with("index,start_ns,duration_ns,delta_i_uA,axis_angle_rad\n"));
        assert_eq!(Gate::parse("y_minus_half_pi").unwrap(), Gate::YMinusHalfPi);
        assert_eq!(Gate::parse("Z:0.5").unwrap(), Gate::Z(0.5));
        assert_eq!(Gate::parse("r:0:3.0").unwrap(), Gate::Rotation { axis_angle: 0.0, angle: 3.0 });
        assert!(Gate::parse("cnot").is_err());
    }
}
