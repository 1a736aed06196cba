// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Process tomography of compiled gates, with preparation and basis changes
//! made of DemuXYZ pulses as well.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use rayon::prelude::*;

use super::compile::{compile_ops, simulate_sequence, CompileOptions, DemuxSequence, FluxDistortion, Gate, Op};
use super::Calibration;
use crate::error::Result;
use crate::pulsesim::{observed_probability, sample_probability, DeviceParams, Shots};
use crate::qcore::{average_gate_fidelity, DensityMatrix};
use crate::rng::derived_rng;
use crate::tomography::{entry_axes, reconstruct, Axis, MeasurementRecord, Reconstruction, ReconstructionOptions, RecordEntry, RECORD_LEN};

fn half(axis_angle: f64) -> Op {
    Op::Pulse { axis_angle, rotation: FRAC_PI_2 }
}

/// Pulses taking |g⟩ (+z) to `axis`.
pub fn prep_ops(axis: Axis) -> Vec<Op> {
    match axis {
        Axis::PlusZ => vec![],
        Axis::MinusZ => vec![Op::Pulse { axis_angle: 0.0, rotation: PI }],
        Axis::PlusX => vec![half(FRAC_PI_2)],
        Axis::MinusX => vec![half(-FRAC_PI_2)],
        Axis::PlusY => vec![half(PI)],
        Axis::MinusY => vec![half(0.0)],
    }
}

/// Pulses taking `axis` to +z, so that P_g reads the projection onto it.
/// For −z nothing is applied and P_e is read instead.
pub fn meas_ops(axis: Axis) -> Vec<Op> {
    match axis {
        Axis::PlusZ | Axis::MinusZ => vec![],
        Axis::PlusX => vec![half(-FRAC_PI_2)],
        Axis::MinusX => vec![half(FRAC_PI_2)],
        Axis::PlusY => vec![half(0.0)],
        Axis::MinusY => vec![half(PI)],
    }
}

/// Settings of a tomography run.
#[derive(Debug, Clone, PartialEq)]
pub struct QptOptions {
    pub shots: Shots,
    pub seed: u64,
    pub compile: CompileOptions,
    pub distortion: FluxDistortion,
    pub reconstruction: ReconstructionOptions,
}

impl Default for QptOptions {
    fn default() -> Self {
        Self {
            shots: Shots::Infinite,
            seed: 0,
            compile: CompileOptions::default(),
            distortion: FluxDistortion::default(),
            reconstruction: ReconstructionOptions::default(),
        }
    }
}

fn entry_probability(p: &DeviceParams, seq: &DemuxSequence, meas: Axis, opts: &QptOptions, stream: &[u64]) -> Result<f64> {
    let mut rng = derived_rng(opts.seed, stream);
    let schedule = if opts.distortion.is_ideal() { seq.schedule(p)? } else { opts.distortion.schedule(seq, p, &mut rng)? };
    let pe = simulate_sequence(p, &schedule, &DensityMatrix::ground())?.pe();
    let pe_hat = sample_probability(observed_probability(pe, p.visibility), opts.shots, &mut rng)?;
    Ok(if meas == Axis::MinusZ { pe_hat } else { 1.0 - pe_hat })
}

/// 36-entry record of `gate`, each entry one compiled program of
/// preparation, gate and basis change. `gate_index` separates the random
/// streams of different gates.
pub fn qpt_record_demux(p: &DeviceParams, cal: &Calibration, gate: &Gate, gate_index: u64, opts: &QptOptions) -> Result<MeasurementRecord> {
    let body = gate.ops()?;
    let entries = (0..RECORD_LEN)
        .into_par_iter()
        .map(|k| {
            let (prep, meas) = entry_axes(k);
            let ops: Vec<Op> = prep_ops(prep).into_iter().chain(body.iter().copied()).chain(meas_ops(meas)).collect();
            let seq = compile_ops(&ops, cal, p, &opts.compile)?;
            let probability = entry_probability(p, &seq, meas, opts, &[gate_index, k as u64])
                .map_err(|e| e.context(format!("record entry {k} ({} -> {})", prep.label(), meas.label())))?;
            Ok(RecordEntry { prep, meas, probability, shots: opts.shots })
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementRecord::new(entries)
}

/// Tomography result for one gate.
#[derive(Debug, Clone)]
pub struct GateQpt {
    pub gate: Gate,
    pub record: MeasurementRecord,
    pub reconstruction: Reconstruction,
    /// F̄ of the reconstructed channel against the ideal gate.
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct QptReport {
    pub gates: Vec<GateQpt>,
}

impl QptReport {
    /// Same layout as [`crate::tomography::FidelityTable::to_text`].
    pub fn to_text(&self) -> String {
        let mut head = String::from("gate");
        let mut vals = String::from("F_avg_percent");
        for g in &self.gates {
            write!(head, ",{}", g.gate.label()).unwrap();
            write!(vals, ",{:.3}", 100.0 * g.fidelity).unwrap();
        }
        format!("{head}\n{vals}\n")
    }

    pub fn all_converged(&self) -> bool {
        self.gates.iter().all(|g| g.reconstruction.converged)
    }
}

/// Record, reconstruct and score every gate. Gates run in parallel on
/// streams derived from their position in `gates`.
pub fn qpt_pipeline(p: &DeviceParams, cal: &Calibration, gates: &[Gate], opts: &QptOptions) -> Result<QptReport> {
    let gates = gates
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let record = qpt_record_demux(p, cal, g, i as u64, opts)?;
            let reconstruction = reconstruct(&record, &opts.reconstruction)?;
            let fidelity = average_gate_fidelity(&reconstruction.choi, &g.unitary())?;
            Ok(GateQpt { gate: *g, record, reconstruction, fidelity })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QptReport { gates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::inplane_rotation;
    use crate::tomography::predict;

    fn compiled_unitary(ops: &[Op]) -> crate::qcore::ComplexMatrix {
        ops.iter().fold(crate::qcore::ComplexMatrix::identity(2), |acc, op| match *op {
            Op::Pulse { axis_angle, rotation } => &inplane_rotation(axis_angle, rotation) * &acc,
            Op::VirtualZ(_) => unreachable!(),
        })
    }

    #[test]
    fn preparation_and_basis_pulses_are_correct() {
        for axis in Axis::ALL {
            let rho = DensityMatrix::ground().conjugate(&compiled_unitary(&prep_ops(axis)));
            assert!(rho.matrix().max_abs_diff(&axis.projector()) < 1e-12, "{axis:?}");
            let back = axis.state().conjugate(&compiled_unitary(&meas_ops(axis)));
            let p_aligned = if axis == Axis::MinusZ { back.pe() } else { back.pg() };
            assert!((p_aligned - 1.0).abs() < 1e-12, "{axis:?}");
        }
    }

    #[test]
    fn noiseless_pipeline_matches_the_born_rule() {
        let p = DeviceParams::demux_qpt().noiseless();
        let cal = Calibration::nominal(&p).unwrap();
        let rec = qpt_record_demux(&p, &cal, &Gate::H, 0, &QptOptions::default()).unwrap();
        let ideal = crate::qcore::choi_from_unitary(&Gate::H.unitary());
        for (k, e) in rec.entries().iter().enumerate() {
            assert!((e.probability - predict(&ideal, k)).abs() < 1e-6, "entry {k}");
        }
    }

    #[test]
    fn noiseless_fidelities() {
        let p = DeviceParams::demux_qpt().noiseless();
        let cal = Calibration::nominal(&p).unwrap();
        let mut gates = Gate::TOMOGRAPHY_SET.to_vec();
        gates.push(Gate::Identity);
        let report = qpt_pipeline(&p, &cal, &gates, &QptOptions::default()).unwrap();
        for g in &report.gates {
            assert!(g.fidelity >= 0.999, "{:?}: {}", g.gate, g.fidelity);
        }
        assert!(report.to_text().starts_with("gate,X_pi/2,Y_-pi/2,T,S,H,I\n"));
    }

    #[test]
    fn distorted_pipeline_is_reproducible() {
        let p = DeviceParams::demux_qpt();
        let cal = Calibration::nominal(&p).unwrap();
        let opts = QptOptions {
            shots: Shots::Finite(2000),
            seed: 8,
            distortion: FluxDistortion { amplitude_error: 0.01, timing_jitter_ns: 0.1, settling: None },
            ..Default::default()
        };
        let a = qpt_pipeline(&p, &cal, &[Gate::T], &opts).unwrap();
        let b = qpt_pipeline(&p, &cal, &[Gate::T], &opts).unwrap();
        assert_eq!(a.gates[0].record, b.gates[0].record);
        assert!(a.gates[0].fidelity < 0.99 && a.gates[0].fidelity > 0.8, "{}", a.gates[0].fidelity);
    }
}
