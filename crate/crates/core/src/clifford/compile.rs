// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Primitive decompositions and virtual-Z compilation.
//!
//! The primitive set is {I, X_π, X_±π/2, Z_π, Z_±π/2}: X rotations are
//! microwave pulses and Z rotations are tracked in software as a phase of the
//! drive frame.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::OnceLock;

use rand::Rng;

use super::group::{CliffordGate, GROUP_ORDER};
use crate::qcore::{inplane_rotation, rotation_unit, rz, ComplexMatrix};

const MAX_DECOMPOSITION_LENGTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimitiveGate {
    I,
    XPi,
    XHalfPi,
    XMinusHalfPi,
    ZPi,
    ZHalfPi,
    ZMinusHalfPi,
}

impl PrimitiveGate {
    pub const ALL: [PrimitiveGate; 7] = [
        PrimitiveGate::I,
        PrimitiveGate::XPi,
        PrimitiveGate::XHalfPi,
        PrimitiveGate::XMinusHalfPi,
        PrimitiveGate::ZPi,
        PrimitiveGate::ZHalfPi,
        PrimitiveGate::ZMinusHalfPi,
    ];

    /// Signed rotation angle about the gate's axis.
    pub fn angle(self) -> f64 {
        match self {
            PrimitiveGate::I => 0.0,
            PrimitiveGate::XPi | PrimitiveGate::ZPi => PI,
            PrimitiveGate::XHalfPi | PrimitiveGate::ZHalfPi => FRAC_PI_2,
            PrimitiveGate::XMinusHalfPi | PrimitiveGate::ZMinusHalfPi => -FRAC_PI_2,
        }
    }

    pub fn is_microwave(self) -> bool {
        matches!(
            self,
            PrimitiveGate::XPi | PrimitiveGate::XHalfPi | PrimitiveGate::XMinusHalfPi
        )
    }

    pub fn is_virtual_z(self) -> bool {
        matches!(
            self,
            PrimitiveGate::ZPi | PrimitiveGate::ZHalfPi | PrimitiveGate::ZMinusHalfPi
        )
    }

    pub fn unitary(self) -> ComplexMatrix {
        if self.is_microwave() {
            rotation_unit([1.0, 0.0, 0.0], self.angle())
        } else if self.is_virtual_z() {
            rz(self.angle())
        } else {
            ComplexMatrix::identity(2)
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PrimitiveGate::I => "I",
            PrimitiveGate::XPi => "X_pi",
            PrimitiveGate::XHalfPi => "X_pi/2",
            PrimitiveGate::XMinusHalfPi => "X_-pi/2",
            PrimitiveGate::ZPi => "Z_pi",
            PrimitiveGate::ZHalfPi => "Z_pi/2",
            PrimitiveGate::ZMinusHalfPi => "Z_-pi/2",
        }
    }
}

/// Primitive gates applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrimitiveSequence {
    pub gates: Vec<PrimitiveGate>,
}

impl PrimitiveSequence {
    pub fn new(gates: Vec<PrimitiveGate>) -> Self {
        Self { gates }
    }

    pub fn unitary(&self) -> ComplexMatrix {
        self.gates
            .iter()
            .fold(ComplexMatrix::identity(2), |acc, g| &g.unitary() * &acc)
    }

    pub fn microwave_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_microwave()).count()
    }

    pub fn extend(&mut self, other: &PrimitiveSequence) {
        self.gates.extend_from_slice(&other.gates);
    }
}

impl fmt::Display for PrimitiveSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.gates.iter().map(|g| g.label()).collect();
        write!(f, "{}", labels.join(", "))
    }
}

/// All minimal-length decompositions of every Clifford, found by exhaustive
/// search over primitive strings of length ≤ 3. Strings longer than one that
/// contain the identity primitive are not minimal and are skipped.
pub fn decomposition_table() -> &'static [Vec<PrimitiveSequence>] {
    static TABLE: OnceLock<Vec<Vec<PrimitiveSequence>>> = OnceLock::new();
    TABLE.get_or_init(build_decomposition_table)
}

fn build_decomposition_table() -> Vec<Vec<PrimitiveSequence>> {
    let mut table: Vec<Vec<PrimitiveSequence>> = vec![Vec::new(); GROUP_ORDER];
    let mut strings: Vec<Vec<PrimitiveGate>> = vec![Vec::new()];
    for length in 1..=MAX_DECOMPOSITION_LENGTH {
        strings = strings
            .iter()
            .flat_map(|s| {
                PrimitiveGate::ALL.iter().map(move |&g| {
                    let mut next = s.clone();
                    next.push(g);
                    next
                })
            })
            .collect();
        for s in &strings {
            if length > 1 && s.contains(&PrimitiveGate::I) {
                continue;
            }
            let seq = PrimitiveSequence::new(s.clone());
            let target = CliffordGate::lookup(&seq.unitary())
                .expect("primitive strings stay inside the Clifford group");
            let slot = &mut table[target.index()];
            if slot.is_empty() || slot[0].gates.len() == length {
                slot.push(seq);
            }
        }
    }
    assert!(
        table.iter().all(|alts| !alts.is_empty()),
        "every Clifford has a decomposition of length <= {MAX_DECOMPOSITION_LENGTH}"
    );
    table
}

/// Pick one of the stored minimal decompositions of `c` uniformly at random.
pub fn decompose<R: Rng + ?Sized>(c: CliffordGate, rng: &mut R) -> PrimitiveSequence {
    let alternatives = &decomposition_table()[c.index()];
    let pick = if alternatives.len() == 1 {
        0
    } else {
        rng.random_range(0..alternatives.len())
    };
    alternatives[pick].clone()
}

/// Decompose each Clifford of `sequence` in turn and concatenate.
pub fn decompose_sequence<R: Rng + ?Sized>(
    sequence: &[CliffordGate],
    rng: &mut R,
) -> PrimitiveSequence {
    let mut out = PrimitiveSequence::default();
    for &c in sequence {
        out.extend(&decompose(c, rng));
    }
    out
}

/// A microwave pulse: `rotation` radians about the in-plane axis at
/// `axis_angle` from +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalPulse {
    pub rotation: f64,
    pub axis_angle: f64,
}

impl PhysicalPulse {
    pub fn unitary(&self) -> ComplexMatrix {
        inplane_rotation(self.axis_angle, self.rotation)
    }
}

/// One time slot of a compiled program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhysicalOp {
    Pulse(PhysicalPulse),
    /// An identity gate: the slot is spent idling for one pulse length.
    Idle,
}

/// Compiled program: microwave pulses only, with every Z rotation folded into
/// the pulse axes and a final frame phase.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhysicalPulseList {
    pub ops: Vec<PhysicalOp>,
    /// Accumulated virtual Z rotation still to be applied after the last pulse.
    pub frame_phase: f64,
}

impl PhysicalPulseList {
    pub fn pulses(&self) -> impl Iterator<Item = &PhysicalPulse> {
        self.ops.iter().filter_map(|op| match op {
            PhysicalOp::Pulse(p) => Some(p),
            PhysicalOp::Idle => None,
        })
    }

    pub fn pulse_count(&self) -> usize {
        self.pulses().count()
    }

    pub fn idle_count(&self) -> usize {
        self.ops.len() - self.pulse_count()
    }

    /// Number of pulse-length time slots, identity slots included.
    pub fn slot_count(&self) -> usize {
        self.ops.len()
    }

    /// Unitary realized by the pulses followed by the final frame rotation.
    pub fn unitary(&self) -> ComplexMatrix {
        let pulses = self
            .pulses()
            .fold(ComplexMatrix::identity(2), |acc, p| &p.unitary() * &acc);
        &rz(self.frame_phase) * &pulses
    }
}

/// Fold virtual Z rotations into the axes of the following pulses.
///
/// Moving Z_a past a later X_θ turns the pulse into a rotation about the axis
/// at angle −a, so each pulse's axis is minus the Z rotation accumulated
/// before it and the total is left over as the final frame phase.
pub fn compile_virtual_z(seq: &PrimitiveSequence) -> PhysicalPulseList {
    let mut frame = 0.0f64;
    let mut ops = Vec::with_capacity(seq.gates.len());
    for &g in &seq.gates {
        if g.is_virtual_z() {
            frame += g.angle();
        } else if g.is_microwave() {
            ops.push(PhysicalOp::Pulse(PhysicalPulse {
                rotation: g.angle(),
                axis_angle: wrap_angle(-frame),
            }));
        } else {
            ops.push(PhysicalOp::Idle);
        }
    }
    PhysicalPulseList {
        ops,
        frame_phase: wrap_angle(frame),
    }
}

/// Map an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let t = a.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::enumerate_cliffords;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    #[test]
    fn identity_and_z_pi_have_single_primitive_decompositions() {
        let table = decomposition_table();
        assert_eq!(table[0], vec![PrimitiveSequence::new(vec![PrimitiveGate::I])]);
        assert_eq!(table[3], vec![PrimitiveSequence::new(vec![PrimitiveGate::ZPi])]);
        let compiled = compile_virtual_z(&table[0][0]);
        assert_eq!(compiled.pulse_count(), 0);
        assert_eq!(compiled.idle_count(), 1);
    }

    #[test]
    fn every_stored_decomposition_reproduces_its_clifford() {
        for (idx, alts) in decomposition_table().iter().enumerate() {
            let c = CliffordGate::from_index(idx).unwrap();
            let len = alts[0].gates.len();
            for alt in alts {
                assert_eq!(alt.gates.len(), len, "mixed lengths for {c:?}");
                assert!(alt.unitary().eq_up_to_phase(c.unitary(), 1e-10), "{c:?}: {alt}");
            }
        }
    }

    #[test]
    fn decompose_round_trips_for_many_seeds() {
        for seed in 0..100 {
            let mut rng = rng_from_seed(seed);
            for c in enumerate_cliffords() {
                let seq = decompose(c, &mut rng);
                assert_eq!(CliffordGate::lookup(&seq.unitary()), Some(c));
            }
        }
    }

    #[test]
    fn z_half_pi_compiles_to_frame_only() {
        let compiled = compile_virtual_z(&PrimitiveSequence::new(vec![PrimitiveGate::ZHalfPi]));
        assert_eq!(compiled.pulse_count(), 0);
        assert!((compiled.frame_phase - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn hadamard_needs_two_pulses_with_quarter_turn_between_axes() {
        use PrimitiveGate::*;
        let seq = PrimitiveSequence::new(vec![XHalfPi, ZHalfPi, XHalfPi]);
        let compiled = compile_virtual_z(&seq);
        let pulses: Vec<_> = compiled.pulses().copied().collect();
        assert_eq!(pulses.len(), 2);
        let turn = wrap_angle(pulses[1].axis_angle - pulses[0].axis_angle).abs();
        assert!((turn - FRAC_PI_2).abs() < 1e-12);
        assert!(compiled.unitary().eq_up_to_phase(&seq.unitary(), 1e-12));
    }

    fn primitive() -> impl Strategy<Value = PrimitiveGate> {
        (0usize..7).prop_map(|i| PrimitiveGate::ALL[i])
    }

    proptest! {
        #[test]
        fn compilation_preserves_the_unitary(gates in proptest::collection::vec(primitive(), 50)) {
            let seq = PrimitiveSequence::new(gates);
            let compiled = compile_virtual_z(&seq);
            prop_assert!(compiled.unitary().phase_distance(&seq.unitary()) < 1e-8);
            prop_assert_eq!(compiled.pulse_count(), seq.microwave_count());
            prop_assert!(compiled.slot_count() <= seq.gates.len());
        }
    }
}
