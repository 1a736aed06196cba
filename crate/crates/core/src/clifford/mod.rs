// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! The one-qubit Clifford group, recovery gates, primitive decompositions
//! and virtual-Z compilation.
//!
//! Elements are indexed 0..24 in a fixed order (see [`CliffordGate`]):
//!
//! | index | rotation |
//! |---|---|
//! | 0 | identity |
//! | 1–3 | π about x, y, z |
//! | 4–11 | 2π/3 about (±1, ±1, ±1), sign pattern counting down from (1,1,1) |
//! | 12–17 | π/2 about x, −x, y, −y, z, −z |
//! | 18–23 | π about (1,0,1), (1,0,−1), (0,1,1), (0,1,−1), (1,1,0), (−1,1,0) |

mod compile;
mod group;

use std::fmt::Write as _;

pub use compile::{
    compile_virtual_z, decompose, decompose_sequence, decomposition_table, wrap_angle,
    PhysicalOp, PhysicalPulse, PhysicalPulseList, PrimitiveGate, PrimitiveSequence,
};
pub use group::{
    compose, enumerate_cliffords, recovery_gate, sequence_product, CliffordGate, GROUP_ORDER,
};

use rand::Rng;

use crate::error::{Error, Result};

/// A random Clifford sequence together with the gate that inverts it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordSequence {
    pub gates: Vec<CliffordGate>,
    pub recovery: CliffordGate,
}

impl CliffordSequence {
    /// Draw `length` uniformly random Cliffords and compute the recovery.
    pub fn random<R: Rng + ?Sized>(length: usize, rng: &mut R) -> Self {
        let gates: Vec<CliffordGate> = (0..length)
            .map(|_| CliffordGate::from_index(rng.random_range(0..GROUP_ORDER)).unwrap())
            .collect();
        let recovery = recovery_gate(&gates);
        Self { gates, recovery }
    }

    /// All gates including the recovery, in application order.
    pub fn full(&self) -> Vec<CliffordGate> {
        let mut all = self.gates.clone();
        all.push(self.recovery);
        all
    }

    pub fn is_consistent(&self) -> bool {
        sequence_product(&self.full()) == CliffordGate::IDENTITY
    }
}

/// Write sequences one per line: indices, then `|` and the recovery index.
pub fn write_sequences(sequences: &[CliffordSequence]) -> String {
    let mut out = String::new();
    for seq in sequences {
        for g in &seq.gates {
            write!(out, "{} ", g.index()).unwrap();
        }
        writeln!(out, "| {}", seq.recovery.index()).unwrap();
    }
    out
}

/// Parse the format written by [`write_sequences`]. Blank lines and lines
/// starting with `#` are skipped; the recovery index is checked.
pub fn parse_sequences(text: &str) -> Result<Vec<CliffordSequence>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
        let (body, rec) = line
            .split_once('|')
            .ok_or_else(|| err("missing '|' before the recovery index".into()))?;
        let parse_idx = |tok: &str| -> Result<CliffordGate> {
            let idx: usize = tok
                .parse()
                .map_err(|_| err(format!("'{tok}' is not a Clifford index")))?;
            CliffordGate::from_index(idx).map_err(|e| err(e.to_string()))
        };
        let gates = body
            .split_whitespace()
            .map(parse_idx)
            .collect::<Result<Vec<_>>>()?;
        let recovery = parse_idx(rec.trim())?;
        let seq = CliffordSequence { gates, recovery };
        if !seq.is_consistent() {
            return Err(err("recovery index does not invert the sequence".into()));
        }
        out.push(seq);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use PrimitiveGate::*;

    /// The usual exemplar decomposition table, row by row in index order.
    fn exemplar_rows() -> Vec<(usize, Vec<PrimitiveGate>)> {
        vec![
            (0, vec![I]),
            (1, vec![XPi]),
            (2, vec![XPi, ZPi]),
            (3, vec![ZPi]),
            (4, vec![XHalfPi, ZHalfPi]),
            (5, vec![ZMinusHalfPi, XHalfPi]),
            (6, vec![ZHalfPi, XHalfPi]),
            (7, vec![XHalfPi, ZMinusHalfPi]),
            (8, vec![ZHalfPi, XMinusHalfPi]),
            (9, vec![XMinusHalfPi, ZMinusHalfPi]),
            (10, vec![XMinusHalfPi, ZHalfPi]),
            (11, vec![ZMinusHalfPi, XMinusHalfPi]),
            (12, vec![XHalfPi]),
            (13, vec![XMinusHalfPi]),
            (14, vec![XHalfPi, ZHalfPi, XMinusHalfPi]),
            (15, vec![XHalfPi, ZMinusHalfPi, XMinusHalfPi]),
            (16, vec![ZHalfPi]),
            (17, vec![ZMinusHalfPi]),
            (18, vec![XHalfPi, ZHalfPi, XHalfPi]),
            (19, vec![XHalfPi, ZMinusHalfPi, XHalfPi]),
            // Printed as a second R_(0,1,-1)(π) row; the product is R_(0,1,1)(π).
            (20, vec![ZPi, XMinusHalfPi]),
            (21, vec![ZPi, XHalfPi]),
            (22, vec![XPi, ZHalfPi]),
            (23, vec![XPi, ZMinusHalfPi]),
        ]
    }

    #[test]
    fn exemplar_rows_reproduce_their_cliffords() {
        for (idx, gates) in exemplar_rows() {
            let seq = PrimitiveSequence::new(gates);
            let c = CliffordGate::from_index(idx).unwrap();
            assert!(
                seq.unitary().eq_up_to_phase(c.unitary(), 1e-10),
                "row {idx} ({seq}) is not {c:?}"
            );
        }
    }

    #[test]
    fn printed_duplicate_axis_row_is_not_that_axis() {
        let seq = PrimitiveSequence::new(vec![ZPi, XMinusHalfPi]);
        let c021 = CliffordGate::from_index(21).unwrap();
        assert!(!seq.unitary().eq_up_to_phase(c021.unitary(), 1e-6));
    }

    #[test]
    fn exemplar_rows_are_among_the_minimal_decompositions() {
        let table = decomposition_table();
        for (idx, gates) in exemplar_rows() {
            let seq = PrimitiveSequence::new(gates);
            assert_eq!(seq.gates.len(), table[idx][0].gates.len(), "row {idx}");
            assert!(table[idx].contains(&seq), "row {idx} missing from table");
        }
    }

    #[test]
    fn exemplar_rows_average_one_slot_short_of_one_pulse() {
        let pulses: usize = exemplar_rows()
            .into_iter()
            .map(|(_, g)| PrimitiveSequence::new(g).microwave_count())
            .sum();
        let slots: usize = exemplar_rows()
            .into_iter()
            .map(|(_, g)| compile_virtual_z(&PrimitiveSequence::new(g)).slot_count())
            .sum();
        assert_eq!(pulses, 24);
        assert_eq!(slots, 25);
    }

    #[test]
    fn minimal_table_time_slot_average_is_23_of_24() {
        let table = decomposition_table();
        let mut pulses = 0.0;
        let mut slots = 0.0;
        for alts in table {
            let n = alts.len() as f64;
            for alt in alts {
                let compiled = compile_virtual_z(alt);
                pulses += compiled.pulse_count() as f64 / n;
                slots += compiled.slot_count() as f64 / n;
            }
        }
        assert!((slots / 24.0 - 23.0 / 24.0).abs() < 1e-12, "slots {slots}");
        assert!((pulses / 24.0 - 22.0 / 24.0).abs() < 1e-12, "pulses {pulses}");
    }

    #[test]
    fn random_sequences_recover_to_identity() {
        let mut rng = rng_from_seed(11);
        for len in [0, 1, 2, 17, 100] {
            let seq = CliffordSequence::random(len, &mut rng);
            assert!(seq.is_consistent());
            let total = seq
                .full()
                .iter()
                .fold(crate::qcore::ComplexMatrix::identity(2), |acc, g| g.unitary() * &acc);
            assert!(total.eq_up_to_phase(&crate::qcore::ComplexMatrix::identity(2), 1e-8));
        }
    }

    #[test]
    fn sequence_file_round_trip() {
        let mut rng = rng_from_seed(5);
        let seqs: Vec<_> = (0..4).map(|l| CliffordSequence::random(l * 3, &mut rng)).collect();
        let text = write_sequences(&seqs);
        assert_eq!(parse_sequences(&text).unwrap(), seqs);
        assert!(parse_sequences("1 2 | 0\n").is_err());
        assert!(parse_sequences("1 2 3\n").is_err());
        assert_eq!(parse_sequences("# header\n\n| 0\n").unwrap().len(), 1);
    }
}
