// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::clifford::{decomposition_table, PhysicalOp, PhysicalPulse, PhysicalPulseList, GROUP_ORDER};
use crate::error::{Error, Result};
use crate::pulsesim::{evolve_microwave, DeviceParams, MicrowaveSegment};
use crate::qcore::{DensityMatrix, C64};

/// Executes compiled single-qubit programs starting from |g⟩.
pub trait Backend: Sync {
    /// Final state before readout.
    fn execute(&self, program: &PhysicalPulseList) -> Result<DensityMatrix>;

    /// Readout visibility applied to measured probabilities.
    fn visibility(&self) -> f64;
}

/// Noise applied in every time slot of a program.
///
/// Each slot (microwave pulse or identity idle) is followed by a depolarizing
/// channel and then amplitude damping. Pulses additionally carry a coherent
/// over-rotation (added to |θ|) and an axis tilt within the x-y plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GateNoiseModel {
    pub depolarizing_prob: f64,
    pub amplitude_damping_prob: f64,
    pub overrotation: f64,
    pub axis_error: f64,
}

impl GateNoiseModel {
    pub const NOISELESS: GateNoiseModel = GateNoiseModel {
        depolarizing_prob: 0.0,
        amplitude_damping_prob: 0.0,
        overrotation: 0.0,
        axis_error: 0.0,
    };

    pub fn depolarizing(p: f64) -> Result<Self> {
        let m = Self { depolarizing_prob: p, ..Self::NOISELESS };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("depolarizing", self.depolarizing_prob), ("amplitude damping", self.amplitude_damping_prob)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} probability {v} is outside [0, 1]")));
            }
        }
        if !self.overrotation.is_finite() || !self.axis_error.is_finite() {
            return Err(Error::invalid("coherent errors must be finite"));
        }
        Ok(())
    }

    /// Bloch-vector shrink factors (transverse, longitudinal) and z shift per slot.
    fn contraction(&self) -> (f64, f64, f64) {
        let keep = 1.0 - self.depolarizing_prob;
        let g = self.amplitude_damping_prob;
        (keep * (1.0 - g).sqrt(), keep * (1.0 - g), g)
    }
}

/// Rotate `v` by `angle` about the unit in-plane axis at `phi`
/// (the Bloch action of exp(−iθ n·σ/2)).
fn rotate_bloch(v: [f64; 3], phi: f64, angle: f64) -> [f64; 3] {
    let (s_phi, c_phi) = phi.sin_cos();
    let n = [c_phi, s_phi, 0.0];
    let (s, c) = angle.sin_cos();
    let dot = n[0] * v[0] + n[1] * v[1];
    let cross = [n[1] * v[2] - n[2] * v[1], n[2] * v[0] - n[0] * v[2], n[0] * v[1] - n[1] * v[0]];
    [
        v[0] * c + cross[0] * s + n[0] * dot * (1.0 - c),
        v[1] * c + cross[1] * s + n[1] * dot * (1.0 - c),
        v[2] * c + cross[2] * s,
    ]
}

fn state_from_bloch(v: [f64; 3]) -> DensityMatrix {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let s = if norm > 1.0 { 1.0 / norm } else { 1.0 };
    let (x, y, z) = (v[0] * s, v[1] * s, v[2] * s);
    DensityMatrix::new_unchecked(crate::qcore::ComplexMatrix::from_rows([
        [C64::new(0.5 * (1.0 + z), 0.0), C64::new(0.5 * x, -0.5 * y)],
        [C64::new(0.5 * x, 0.5 * y), C64::new(0.5 * (1.0 - z), 0.0)],
    ]))
}

/// Exact unitaries followed by a [`GateNoiseModel`] channel, tracked as an
/// affine map of the Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelBackend {
    pub noise: GateNoiseModel,
    pub visibility: f64,
}

impl ChannelBackend {
    pub fn new(noise: GateNoiseModel, visibility: f64) -> Result<Self> {
        noise.validate()?;
        if !(visibility > 0.0 && visibility <= 1.0) {
            return Err(Error::invalid(format!("visibility {visibility} is outside (0, 1]")));
        }
        Ok(Self { noise, visibility })
    }

    pub fn noiseless() -> Self {
        Self { noise: GateNoiseModel::NOISELESS, visibility: 1.0 }
    }

    fn apply_pulse(&self, v: [f64; 3], p: &PhysicalPulse) -> [f64; 3] {
        let angle = p.rotation + self.noise.overrotation * p.rotation.signum();
        rotate_bloch(v, p.axis_angle + self.noise.axis_error, angle)
    }
}

impl Backend for ChannelBackend {
    fn execute(&self, program: &PhysicalPulseList) -> Result<DensityMatrix> {
        let (t, l, shift) = self.noise.contraction();
        let mut v = [0.0, 0.0, 1.0];
        for op in &program.ops {
            if let PhysicalOp::Pulse(p) = op {
                v = self.apply_pulse(v, p);
            }
            v = [v[0] * t, v[1] * t, v[2] * l + shift];
        }
        // the final frame rotation is about z
        let (s, c) = program.frame_phase.sin_cos();
        v = [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]];
        Ok(state_from_bloch(v))
    }

    fn visibility(&self) -> f64 {
        self.visibility
    }
}

/// RB decay constant of a [`ChannelBackend`] with depolarizing noise only:
/// the mean over Cliffords and their decompositions of `(1 − λ)^slots`.
pub fn depolarizing_decay_oracle(depolarizing_prob: f64) -> f64 {
    let keep = 1.0 - depolarizing_prob;
    let table = decomposition_table();
    let mut total = 0.0;
    for alternatives in table {
        let mean: f64 = alternatives
            .iter()
            .map(|seq| keep.powi(seq.gates.iter().filter(|g| !g.is_virtual_z()).count() as i32))
            .sum::<f64>()
            / alternatives.len() as f64;
        total += mean;
    }
    total / GROUP_ORDER as f64
}

/// Runs compiled programs as square microwave pulses through the time-domain
/// simulator, with the qubit parked at its idle frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseBackend {
    pub device: DeviceParams,
    /// Length of every pulse and idle slot, ns.
    pub slot_ns: f64,
    /// Qubit minus drive frequency during pulses, GHz (0 for resonant pulses).
    pub detuning_ghz: f64,
    pub dt: f64,
}

impl PulseBackend {
    pub fn new(device: DeviceParams, slot_ns: f64) -> Result<Self> {
        device.validate()?;
        if !(slot_ns > 0.0) {
            return Err(Error::invalid("slot length must be positive"));
        }
        Ok(Self { device, slot_ns, detuning_ghz: 0.0, dt: 0.5 })
    }

    /// Segments realizing `program`; a π pulse uses Rabi frequency 1/(2·slot).
    pub fn segments(&self, program: &PhysicalPulseList) -> Vec<MicrowaveSegment> {
        program
            .ops
            .iter()
            .map(|op| match op {
                PhysicalOp::Pulse(p) => MicrowaveSegment {
                    duration: self.slot_ns,
                    rabi_ghz: p.rotation.abs() / (std::f64::consts::TAU * self.slot_ns),
                    phase: if p.rotation < 0.0 { p.axis_angle + std::f64::consts::PI } else { p.axis_angle },
                    detuning_ghz: self.detuning_ghz,
                },
                PhysicalOp::Idle => MicrowaveSegment {
                    duration: self.slot_ns,
                    rabi_ghz: 0.0,
                    phase: 0.0,
                    detuning_ghz: self.detuning_ghz,
                },
            })
            .collect()
    }
}

impl Backend for PulseBackend {
    fn execute(&self, program: &PhysicalPulseList) -> Result<DensityMatrix> {
        let rho = evolve_microwave(&self.device, &self.segments(program), self.dt, &DensityMatrix::ground())?;
        Ok(rho.conjugate(&crate::qcore::rz(program.frame_phase)))
    }

    fn visibility(&self) -> f64 {
        self.device.visibility
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{compile_virtual_z, decompose_sequence, CliffordSequence};
    use crate::qcore::bloch_from_density;
    use crate::rng::rng_from_seed;

    #[test]
    fn bloch_rotation_matches_unitary_conjugation() {
        let rho = crate::qcore::density_from_bloch(crate::qcore::BlochVector::new(0.3, -0.5, 0.6).unwrap()).unwrap();
        for (phi, theta) in [(0.0, 0.7), (1.1, -2.0), (-2.5, std::f64::consts::PI)] {
            let v = rotate_bloch([0.3, -0.5, 0.6], phi, theta);
            let want = bloch_from_density(&rho.conjugate(&crate::qcore::inplane_rotation(phi, theta))).unwrap();
            assert!((v[0] - want.x).abs() < 1e-12 && (v[1] - want.y).abs() < 1e-12 && (v[2] - want.z).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_and_pulse_backends_agree_on_noiseless_programs() {
        let mut rng = rng_from_seed(4);
        let pulse = PulseBackend::new(DeviceParams::socket_qubit().noiseless(), 20.0).unwrap();
        for _ in 0..20 {
            let seq = CliffordSequence::random(3, &mut rng);
            let program = compile_virtual_z(&decompose_sequence(&seq.gates, &mut rng));
            let a = ChannelBackend::noiseless().execute(&program).unwrap();
            let b = pulse.execute(&program).unwrap();
            let want = DensityMatrix::ground().conjugate(&program.unitary());
            assert!(a.matrix().max_abs_diff(want.matrix()) < 1e-12);
            assert!(b.matrix().max_abs_diff(want.matrix()) < 1e-9);
        }
    }

    #[test]
    fn oracle_reduces_to_slot_average_for_small_noise() {
        let lambda = 1e-6;
        let p = depolarizing_decay_oracle(lambda);
        assert!(((1.0 - p) / lambda - 23.0 / 24.0).abs() < 1e-5);
        assert_eq!(depolarizing_decay_oracle(0.0), 1.0);
    }

    #[test]
    fn noise_model_rejects_bad_probabilities() {
        assert!(GateNoiseModel::depolarizing(1.5).is_err());
        assert!(ChannelBackend::new(GateNoiseModel::NOISELESS, 0.0).is_err());
    }
}
