// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::qcore::{average_gate_fidelity, inplane_rotation, ComplexMatrix, C64, I, ONE};

/// The five gates characterized by process tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetGate {
    XHalfPi,
    YMinusHalfPi,
    T,
    S,
    H,
}

impl TargetGate {
    pub const ALL: [TargetGate; 5] = [
        TargetGate::XHalfPi,
        TargetGate::YMinusHalfPi,
        TargetGate::T,
        TargetGate::S,
        TargetGate::H,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TargetGate::XHalfPi => "X_pi/2",
            TargetGate::YMinusHalfPi => "Y_-pi/2",
            TargetGate::T => "T",
            TargetGate::S => "S",
            TargetGate::H => "H",
        }
    }

    /// File-name style key, e.g. `x_half_pi`.
    pub fn key(self) -> &'static str {
        match self {
            TargetGate::XHalfPi => "x_half_pi",
            TargetGate::YMinusHalfPi => "y_minus_half_pi",
            TargetGate::T => "t",
            TargetGate::S => "s",
            TargetGate::H => "h",
        }
    }

    /// Accepts either the label or the key, case-insensitively.
    pub fn parse(name: &str) -> Result<Self> {
        let n = name.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|g| g.key() == n || g.label().to_ascii_lowercase() == n)
            .ok_or_else(|| Error::invalid(format!("unknown gate '{name}' (expected one of x_half_pi, y_minus_half_pi, t, s, h)")))
    }

    pub fn unitary(self) -> ComplexMatrix {
        match self {
            TargetGate::XHalfPi => inplane_rotation(0.0, FRAC_PI_2),
            TargetGate::YMinusHalfPi => inplane_rotation(FRAC_PI_2, -FRAC_PI_2),
            TargetGate::T => ComplexMatrix::diag(&[ONE, C64::from_polar(1.0, FRAC_PI_4)]),
            TargetGate::S => ComplexMatrix::diag(&[ONE, I]),
            TargetGate::H => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                ComplexMatrix::from_rows([[h, h], [h, -h]])
            }
        }
    }

    /// Measured Choi matrix shipped with the crate.
    pub fn bundled_choi(self) -> ComplexMatrix {
        let text = match self {
            TargetGate::XHalfPi => include_str!("../../data/choi/x_half_pi.txt"),
            TargetGate::YMinusHalfPi => include_str!("../../data/choi/y_minus_half_pi.txt"),
            TargetGate::T => include_str!("../../data/choi/t.txt"),
            TargetGate::S => include_str!("../../data/choi/s.txt"),
            TargetGate::H => include_str!("../../data/choi/h.txt"),
        };
        ComplexMatrix::parse_text(text).expect("bundled Choi matrices parse")
    }
}

/// Average gate fidelities, one row per gate.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTable {
    pub rows: Vec<(TargetGate, f64)>,
}

impl FidelityTable {
    pub fn get(&self, gate: TargetGate) -> Option<f64> {
        self.rows.iter().find(|(g, _)| *g == gate).map(|(_, f)| *f)
    }

    /// Two lines: gate labels, then F̄ in percent with three decimals.
    pub fn to_text(&self) -> String {
        let mut head = String::from("gate");
        let mut vals = String::from("F_avg_percent");
        for (g, f) in &self.rows {
            write!(head, ",{}", g.label()).unwrap();
            write!(vals, ",{:.3}", 100.0 * f).unwrap();
        }
        format!("{head}\n{vals}\n")
    }
}

/// F̄ of each Choi matrix against its ideal gate.
pub fn report_fidelities(chois: &[(TargetGate, ComplexMatrix)]) -> Result<FidelityTable> {
    let rows = chois
        .iter()
        .map(|(g, c)| Ok((*g, average_gate_fidelity(c, &g.unitary())?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityTable { rows })
}

/// Table of the bundled matrices.
pub fn bundled_fidelities() -> Result<FidelityTable> {
    let chois: Vec<_> = TargetGate::ALL.iter().map(|g| (*g, g.bundled_choi())).collect();
    report_fidelities(&chois)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{choi_depolarizing, choi_from_unitary};

    #[test]
    fn bundled_matrices_give_the_reference_fidelities() {
        let want = [95.65, 96.23, 93.75, 88.93, 91.36];
        let table = bundled_fidelities().unwrap();
        for ((g, f), w) in table.rows.iter().zip(want) {
            assert!((100.0 * f - w).abs() < 0.1, "{}: {}", g.label(), 100.0 * f);
        }
        assert!(table.to_text().starts_with("gate,X_pi/2,Y_-pi/2,T,S,H\nF_avg_percent,95.65"));
    }

    #[test]
    fn ideal_and_depolarized_references() {
        for g in TargetGate::ALL {
            assert!(g.unitary().is_unitary(1e-12));
            let ideal = report_fidelities(&[(g, choi_from_unitary(&g.unitary()))]).unwrap();
            assert!((ideal.rows[0].1 - 1.0).abs() < 1e-12);
            let mixed = report_fidelities(&[(g, choi_depolarizing())]).unwrap();
            assert!((mixed.rows[0].1 - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gate_names_parse() {
        assert_eq!(TargetGate::parse("Y_-pi/2").unwrap(), TargetGate::YMinusHalfPi);
        assert_eq!(TargetGate::parse("h").unwrap(), TargetGate::H);
        assert!(TargetGate::parse("cnot").is_err());
    }
}
