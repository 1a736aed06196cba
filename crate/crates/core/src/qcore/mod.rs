// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Complex linear algebra, qubit states, channels and fidelity metrics.

mod channel;
mod eigen;
mod matrix;
mod state;

pub use channel::{
    apply_choi, apply_choi_linear, average_gate_fidelity, choi_defects, choi_depolarizing,
    choi_from_unitary, process_fidelity, ChoiDefects, KrausChannel, CPTP_TOL,
};
pub use eigen::{hermitian_eigen, psd_sqrt, HermitianEigen};
pub use matrix::{parse_complex, pauli_x, pauli_y, pauli_z, ComplexMatrix, C64, I, ONE, ZERO};
pub use state::{
    bloch_from_density, bloch_rotation, density_from_bloch, inplane_rotation, purity, rz,
    BlochVector, DensityMatrix,
};

pub(crate) use state::rotation_unit;
