// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! The 24 Cliffords, random sequences with their recovery gate, and the
//! primitive decomposition compiled with virtual Z gates.

use fluxgate::clifford::{compile_virtual_z, decompose, enumerate_cliffords, recovery_gate, sequence_product, CliffordSequence};
use fluxgate::rng::rng_from_seed;
use rand::Rng;

fn main() {
    let group = enumerate_cliffords();
    println!("{} elements", group.len());
    for c in group.iter().take(6) {
        println!("  #{:2} axis {:?} angle {:.4}", c.index(), c.axis(), c.angle());
    }

    let mut rng = rng_from_seed(7);
    let seq = CliffordSequence::random(20, &mut rng);
    let rec = recovery_gate(&seq.gates);
    println!("recovery of a 20-gate sequence: #{}", rec.index());
    println!("sequence plus recovery is the identity: {}", sequence_product(&seq.full()).index() == 0);

    let n = 100_000;
    let (mut pulses, mut slots) = (0, 0);
    for _ in 0..n {
        let c = group[rng.random_range(0..group.len())];
        let program = compile_virtual_z(&decompose(c, &mut rng));
        pulses += program.pulse_count();
        slots += program.slot_count();
    }
    println!("mean microwave pulses per Clifford {:.4}", pulses as f64 / n as f64);
    println!("mean time slots per Clifford      {:.4}", slots as f64 / n as f64);
}
