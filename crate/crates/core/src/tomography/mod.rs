// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Single-qubit process tomography.
//!
//! A record holds 36 probabilities: six axial input states
//! (+z, −z, +x, −x, +y, −y), each read out along the same six signed axes in
//! the same order. Entry `6·prep + meas` is the probability of finding the
//! output aligned with the signed measurement axis.

mod gates;
mod reconstruct;

use std::fmt::Write as _;

use rand::Rng;

pub use gates::{bundled_fidelities, report_fidelities, FidelityTable, TargetGate};
pub use reconstruct::{
    cost, linear_inversion, project_cptp, reconstruct, Reconstruction, ReconstructionOptions,
};

use crate::error::{Error, Result};
use crate::pulsesim::{observed_probability, sample_probability, Shots};
use crate::qcore::{apply_choi_linear, ComplexMatrix, DensityMatrix, C64};

pub const RECORD_LEN: usize = 36;

/// Signed Bloch axes, in record order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    PlusZ,
    MinusZ,
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::PlusZ, Axis::MinusZ, Axis::PlusX, Axis::MinusX, Axis::PlusY, Axis::MinusY];

    pub fn label(self) -> &'static str {
        match self {
            Axis::PlusZ => "+z",
            Axis::MinusZ => "-z",
            Axis::PlusX => "+x",
            Axis::MinusX => "-x",
            Axis::PlusY => "+y",
            Axis::MinusY => "-y",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.label() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown axis '{s}'")))
    }

    pub fn bloch(self) -> [f64; 3] {
        match self {
            Axis::PlusZ => [0.0, 0.0, 1.0],
            Axis::MinusZ => [0.0, 0.0, -1.0],
            Axis::PlusX => [1.0, 0.0, 0.0],
            Axis::MinusX => [-1.0, 0.0, 0.0],
            Axis::PlusY => [0.0, 1.0, 0.0],
            Axis::MinusY => [0.0, -1.0, 0.0],
        }
    }

    /// Pure state `(I + n·σ)/2`, which is also the projector onto the axis.
    pub fn projector(self) -> ComplexMatrix {
        let [x, y, z] = self.bloch();
        ComplexMatrix::from_rows([
            [C64::new(0.5 * (1.0 + z), 0.0), C64::new(0.5 * x, -0.5 * y)],
            [C64::new(0.5 * x, 0.5 * y), C64::new(0.5 * (1.0 - z), 0.0)],
        ])
    }

    pub fn state(self) -> DensityMatrix {
        DensityMatrix::new(self.projector()).expect("axial states are valid")
    }
}

/// (preparation, measurement) of record entry `index`.
pub fn entry_axes(index: usize) -> (Axis, Axis) {
    (Axis::ALL[index / 6], Axis::ALL[index % 6])
}

/// Hermitian operator `M` with `p = Tr(M·C)` for entry `index`:
/// `ρ_prepᵀ ⊗ Π_meas`.
pub(crate) fn entry_operator(index: usize) -> ComplexMatrix {
    let (prep, meas) = entry_axes(index);
    prep.projector().transpose().kron(&meas.projector())
}

/// Born probability of entry `index` under the (possibly unphysical) Choi `c`.
pub fn predict(c: &ComplexMatrix, index: usize) -> f64 {
    let (prep, meas) = entry_axes(index);
    let out = apply_choi_linear(c, &prep.projector());
    out.trace_product(&meas.projector()).re
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordEntry {
    pub prep: Axis,
    pub meas: Axis,
    pub probability: f64,
    pub shots: Shots,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    entries: Vec<RecordEntry>,
}

impl MeasurementRecord {
    /// Entries must come in canonical order with probabilities in [0, 1].
    pub fn new(entries: Vec<RecordEntry>) -> Result<Self> {
        if entries.len() != RECORD_LEN {
            return Err(Error::invalid(format!("a record has 36 entries, got {}", entries.len())));
        }
        for (k, e) in entries.iter().enumerate() {
            if (e.prep, e.meas) != entry_axes(k) {
                return Err(Error::invalid(format!("entry {k} is out of canonical order")));
            }
            if !(0.0..=1.0).contains(&e.probability) {
                return Err(Error::invalid(format!("entry {k} has probability {}", e.probability)));
            }
        }
        Ok(Self { entries })
    }

    /// Exact predictions of `c`, clamped to [0, 1].
    pub fn from_choi(c: &ComplexMatrix) -> Result<Self> {
        Self::new(
            (0..RECORD_LEN)
                .map(|k| {
                    let (prep, meas) = entry_axes(k);
                    RecordEntry { prep, meas, probability: predict(c, k).clamp(0.0, 1.0), shots: Shots::Infinite }
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[RecordEntry] {
        &self.entries
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }

    /// Undo a symmetric readout visibility: `(p − ½)/v + ½`, clamped.
    pub fn visibility_corrected(&self, visibility: f64) -> Result<Self> {
        if !(visibility > 0.0 && visibility <= 1.0) {
            return Err(Error::invalid(format!("visibility {visibility} is outside (0, 1]")));
        }
        let entries = self
            .entries
            .iter()
            .map(|e| RecordEntry { probability: ((e.probability - 0.5) / visibility + 0.5).clamp(0.0, 1.0), ..*e })
            .collect();
        Ok(Self { entries })
    }

    /// `prep,basis,probability,shots` with `inf` for infinite shots.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("prep,basis,probability,shots\n");
        for e in &self.entries {
            let shots = match e.shots {
                Shots::Infinite => "inf".to_string(),
                Shots::Finite(n) => n.to_string(),
            };
            writeln!(out, "{},{},{},{}", e.prep.label(), e.meas.label(), e.probability, shots).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .skip(1)
            .enumerate()
            .map(|(k, line)| {
                let f: Vec<&str> = line.split(',').map(str::trim).collect();
                if f.len() != 4 {
                    return Err(Error::Parse(format!("record line {}: expected 4 fields", k + 1)));
                }
                let shots = match f[3] {
                    "inf" => Shots::Infinite,
                    n => Shots::finite(n.parse().map_err(|e| Error::Parse(format!("record line {}: {e}", k + 1)))?)?,
                };
                Ok(RecordEntry {
                    prep: Axis::parse(f[0])?,
                    meas: Axis::parse(f[1])?,
                    probability: f[2].parse().map_err(|e| Error::Parse(format!("record line {}: {e}", k + 1)))?,
                    shots,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

/// Applies the gate under test to a prepared state.
pub trait GateExecutor: Sync {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix>;

    /// Readout visibility of the measurement.
    fn visibility(&self) -> f64 {
        1.0
    }
}

/// Ideal unitary gate.
#[derive(Debug, Clone)]
pub struct UnitaryExecutor(pub ComplexMatrix);

impl GateExecutor for UnitaryExecutor {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(rho.conjugate(&self.0))
    }
}

/// Channel given by a CPTP Choi matrix, read out with `visibility`.
#[derive(Debug, Clone)]
pub struct ChoiExecutor {
    pub choi: ComplexMatrix,
    pub visibility: f64,
}

impl GateExecutor for ChoiExecutor {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        crate::qcore::apply_choi(&self.choi, rho)
    }

    fn visibility(&self) -> f64 {
        self.visibility
    }
}

/// Run the 36 preparation/measurement pairs through `executor`.
pub fn qpt_record<E: GateExecutor + ?Sized, R: Rng + ?Sized>(executor: &E, shots: Shots, rng: &mut R) -> Result<MeasurementRecord> {
    let mut entries = Vec::with_capacity(RECORD_LEN);
    for prep in Axis::ALL {
        let out = executor.apply(&prep.state()).map_err(|e| e.context(format!("preparing {}", prep.label())))?;
        for meas in Axis::ALL {
            let p = out.matrix().trace_product(&meas.projector()).re.clamp(0.0, 1.0);
            let probability = sample_probability(observed_probability(p, executor.visibility()), shots, rng)?;
            entries.push(RecordEntry { prep, meas, probability, shots });
        }
    }
    MeasurementRecord::new(entries)
}
