// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::qcore::{bloch_rotation, ComplexMatrix};

pub const GROUP_ORDER: usize = 24;

/// Phase-aligned distance under which two unitaries are the same element.
const LOOKUP_TOL: f64 = 1e-8;

/// Axis-angle definitions in index order.
///
/// Indices follow the reading order of the usual exemplar table: the
/// identity, the three π rotations about the coordinate axes, the eight 2π/3
/// rotations about the cube diagonals, then the six ±π/2 rotations about the
/// coordinate axes and the six π rotations about the face diagonals.
/// Sequence files store these indices, so the order is fixed.
const DEFINITIONS: [([f64; 3], f64); GROUP_ORDER] = [
    ([1.0, 0.0, 0.0], 0.0),
    ([1.0, 0.0, 0.0], PI),
    ([0.0, 1.0, 0.0], PI),
    ([0.0, 0.0, 1.0], PI),
    ([1.0, 1.0, 1.0], 2.0 * PI / 3.0),
    ([1.0, 1.0, -1.0], 2.0 * PI / 3.0),
    ([1.0, -1.0, 1.0], 2.0 * PI / 3.0),
    ([1.0, -1.0, -1.0], 2.0 * PI / 3.0),
    ([-1.0, 1.0, 1.0], 2.0 * PI / 3.0),
    ([-1.0, 1.0, -1.0], 2.0 * PI / 3.0),
    ([-1.0, -1.0, 1.0], 2.0 * PI / 3.0),
    ([-1.0, -1.0, -1.0], 2.0 * PI / 3.0),
    ([1.0, 0.0, 0.0], PI / 2.0),
    ([-1.0, 0.0, 0.0], PI / 2.0),
    ([0.0, 1.0, 0.0], PI / 2.0),
    ([0.0, -1.0, 0.0], PI / 2.0),
    ([0.0, 0.0, 1.0], PI / 2.0),
    ([0.0, 0.0, -1.0], PI / 2.0),
    ([1.0, 0.0, 1.0], PI),
    ([1.0, 0.0, -1.0], PI),
    ([0.0, 1.0, 1.0], PI),
    ([0.0, 1.0, -1.0], PI),
    ([1.0, 1.0, 0.0], PI),
    ([-1.0, 1.0, 0.0], PI),
];

pub(crate) struct GroupTables {
    pub unitaries: Vec<ComplexMatrix>,
    /// `product[a][b]` is the element equal to U_b·U_a (a applied first).
    pub product: [[u8; GROUP_ORDER]; GROUP_ORDER],
    pub inverse: [u8; GROUP_ORDER],
}

pub(crate) fn tables() -> &'static GroupTables {
    static TABLES: OnceLock<GroupTables> = OnceLock::new();
    TABLES.get_or_init(|| build_tables().expect("Clifford group tables are consistent"))
}

fn build_tables() -> Result<GroupTables> {
    let unitaries: Vec<ComplexMatrix> = DEFINITIONS
        .iter()
        .map(|(axis, angle)| bloch_rotation(*axis, *angle))
        .collect::<Result<_>>()?;
    for a in 0..GROUP_ORDER {
        for b in (a + 1)..GROUP_ORDER {
            if unitaries[a].eq_up_to_phase(&unitaries[b], LOOKUP_TOL) {
                return Err(Error::Internal(format!("Clifford elements {a} and {b} coincide")));
            }
        }
    }
    let mut product = [[0u8; GROUP_ORDER]; GROUP_ORDER];
    let mut inverse = [u8::MAX; GROUP_ORDER];
    for a in 0..GROUP_ORDER {
        for b in 0..GROUP_ORDER {
            let u = &unitaries[b] * &unitaries[a];
            let idx = lookup_in(&unitaries, &u).ok_or_else(|| {
                Error::Internal(format!("product of Clifford {a} and {b} left the group"))
            })?;
            product[a][b] = idx as u8;
            if idx == 0 {
                inverse[a] = b as u8;
            }
        }
    }
    if inverse.contains(&u8::MAX) {
        return Err(Error::Internal("Clifford element without inverse".into()));
    }
    Ok(GroupTables {
        unitaries,
        product,
        inverse,
    })
}

fn lookup_in(unitaries: &[ComplexMatrix], u: &ComplexMatrix) -> Option<usize> {
    unitaries.iter().position(|v| v.eq_up_to_phase(u, LOOKUP_TOL))
}

/// One element of the single-qubit Clifford group, identified by its index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CliffordGate(u8);

impl CliffordGate {
    pub const IDENTITY: CliffordGate = CliffordGate(0);

    pub fn from_index(index: usize) -> Result<Self> {
        if index >= GROUP_ORDER {
            return Err(Error::invalid(format!("Clifford index {index} is not in 0..24")));
        }
        Ok(Self(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Rotation axis as listed in the definition table (not normalized).
    pub fn axis(self) -> [f64; 3] {
        DEFINITIONS[self.index()].0
    }

    pub fn angle(self) -> f64 {
        DEFINITIONS[self.index()].1
    }

    pub fn unitary(self) -> &'static ComplexMatrix {
        &tables().unitaries[self.index()]
    }

    pub fn inverse(self) -> Self {
        Self(tables().inverse[self.index()])
    }

    /// Find the element equal to `u` up to global phase.
    pub fn lookup(u: &ComplexMatrix) -> Option<Self> {
        lookup_in(&tables().unitaries, u).map(|i| Self(i as u8))
    }

    pub fn all() -> impl Iterator<Item = CliffordGate> {
        (0..GROUP_ORDER as u8).map(CliffordGate)
    }
}

impl fmt::Debug for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = self.axis();
        write!(
            f,
            "C{}[R({},{},{})({:.4})]",
            self.0, x as i32, y as i32, z as i32, self.angle()
        )
    }
}

/// All 24 elements in index order.
pub fn enumerate_cliffords() -> Vec<CliffordGate> {
    CliffordGate::all().collect()
}

/// The element equal to `b·a`, i.e. `a` applied first.
pub fn compose(a: CliffordGate, b: CliffordGate) -> CliffordGate {
    CliffordGate(tables().product[a.index()][b.index()])
}

/// Total of a sequence applied left to right.
pub fn sequence_product(sequence: &[CliffordGate]) -> CliffordGate {
    sequence
        .iter()
        .fold(CliffordGate::IDENTITY, |acc, &g| compose(acc, g))
}

/// The element that returns `sequence` (applied left to right) to the identity.
pub fn recovery_gate(sequence: &[CliffordGate]) -> CliffordGate {
    sequence_product(sequence).inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{pauli_x, pauli_y, pauli_z};

    #[test]
    fn there_are_24_and_identity_is_first() {
        let all = enumerate_cliffords();
        assert_eq!(all.len(), 24);
        assert!(all[0].unitary().eq_up_to_phase(&ComplexMatrix::identity(2), 1e-12));
    }

    #[test]
    fn every_element_maps_paulis_to_signed_paulis() {
        let paulis = [pauli_x(), pauli_y(), pauli_z()];
        for c in enumerate_cliffords() {
            let u = c.unitary();
            for p in &paulis {
                let image = &(u * p) * &u.adjoint();
                let hits = paulis
                    .iter()
                    .filter(|q| image.max_abs_diff(q) < 1e-12 || image.max_abs_diff(&q.scale_real(-1.0)) < 1e-12)
                    .count();
                assert_eq!(hits, 1, "{c:?} does not map a Pauli to a signed Pauli");
            }
        }
    }

    #[test]
    fn composition_identities() {
        let x_pi = CliffordGate::from_index(1).unwrap();
        let x_half = CliffordGate::from_index(12).unwrap();
        for c in enumerate_cliffords() {
            assert_eq!(compose(CliffordGate::IDENTITY, c), c);
        }
        assert_eq!(compose(x_pi, x_pi), CliffordGate::IDENTITY);
        assert_eq!(compose(x_half, x_half), x_pi);
    }

    #[test]
    fn closure_and_unique_inverses() {
        for a in enumerate_cliffords() {
            let mut seen = [false; GROUP_ORDER];
            for b in enumerate_cliffords() {
                let c = compose(a, b);
                let direct = b.unitary() * a.unitary();
                assert!(c.unitary().eq_up_to_phase(&direct, 1e-10));
                seen[c.index()] = true;
            }
            assert!(seen.iter().all(|&s| s), "row {a:?} is not a permutation");
            let inverses: Vec<_> = enumerate_cliffords()
                .into_iter()
                .filter(|&b| compose(a, b) == CliffordGate::IDENTITY)
                .collect();
            assert_eq!(inverses, vec![a.inverse()]);
        }
    }

    #[test]
    fn recovery_of_simple_sequences() {
        assert_eq!(recovery_gate(&[]), CliffordGate::IDENTITY);
        let x_half = CliffordGate::from_index(12).unwrap();
        let x_minus_half = CliffordGate::from_index(13).unwrap();
        assert_eq!(recovery_gate(&[x_half]), x_minus_half);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        assert!(CliffordGate::from_index(24).is_err());
    }
}
