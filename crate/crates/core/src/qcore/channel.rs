// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quantum channels, Choi matrices and gate fidelity.
//!
//! Choi matrices use the column-stacking convention
//! `C = Σ_{jk} |j⟩⟨k| ⊗ Φ(|j⟩⟨k|)` (input factor first, output second), so
//! `Tr C = 2` and tracing out the output factor gives the identity for a
//! trace-preserving map.

use super::eigen::hermitian_eigen;
use super::matrix::{ComplexMatrix, C64, ZERO};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Tolerance used when checking a Choi matrix before applying it.
pub const CPTP_TOL: f64 = 1e-6;

/// Qubit channel given by Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        if ops.is_empty() || ops.iter().any(|k| k.dim() != 2) {
            return Err(Error::InvalidChannel("need at least one 2x2 Kraus operator".into()));
        }
        let mut sum = ComplexMatrix::zeros(2);
        for k in &ops {
            sum = &sum + &(&k.adjoint() * k);
        }
        let err = (&sum - &ComplexMatrix::identity(2)).frobenius_norm();
        if err > 1e-9 {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (error {err:.2e})"
            )));
        }
        Ok(Self { ops })
    }

    pub fn unitary(u: &ComplexMatrix) -> Self {
        Self { ops: vec![u.clone()] }
    }

    /// ρ → (1 − p)·ρ + p·I/2
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability(p, "depolarizing probability")?;
        let paulis = [
            super::matrix::pauli_x(),
            super::matrix::pauli_y(),
            super::matrix::pauli_z(),
        ];
        let mut ops = vec![ComplexMatrix::identity(2).scale_real((1.0 - 0.75 * p).sqrt())];
        ops.extend(paulis.iter().map(|s| s.scale_real((p / 4.0).sqrt())));
        Ok(Self { ops })
    }

    /// Relaxation |e⟩ → |g⟩ with probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        check_probability(gamma, "damping probability")?;
        let k0 = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::new((1.0 - gamma).sqrt(), 0.0)]);
        let mut k1 = ComplexMatrix::zeros(2);
        k1[(0, 1)] = C64::new(gamma.sqrt(), 0.0);
        Ok(Self { ops: vec![k0, k1] })
    }

    /// Off-diagonal elements scaled by `coherence` ∈ [0, 1].
    pub fn dephasing(coherence: f64) -> Result<Self> {
        check_probability(coherence, "coherence factor")?;
        let p = 0.5 * (1.0 - coherence);
        Ok(Self {
            ops: vec![
                ComplexMatrix::identity(2).scale_real((1.0 - p).sqrt()),
                super::matrix::pauli_z().scale_real(p.sqrt()),
            ],
        })
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let mut out = ComplexMatrix::zeros(2);
        for k in &self.ops {
            out = &out + &(&(k * rho.matrix()) * &k.adjoint());
        }
        DensityMatrix::new_unchecked(out)
    }

    /// Apply `self` then `next`.
    pub fn then(&self, next: &KrausChannel) -> KrausChannel {
        let mut ops = Vec::with_capacity(self.ops.len() * next.ops.len());
        for b in &next.ops {
            for a in &self.ops {
                ops.push(b * a);
            }
        }
        KrausChannel { ops }
    }

    pub fn choi(&self) -> ComplexMatrix {
        let mut c = ComplexMatrix::zeros(4);
        for k in &self.ops {
            let v = column_stack(k);
            c = &c + &ComplexMatrix::outer(&v, &v);
        }
        c
    }
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("{what} {p} is outside [0, 1]")));
    }
    Ok(())
}

/// vec(K) with entry index 2·j + i holding K[i][j].
fn column_stack(k: &ComplexMatrix) -> Vec<C64> {
    let mut v = vec![ZERO; 4];
    for j in 0..2 {
        for i in 0..2 {
            v[2 * j + i] = k[(i, j)];
        }
    }
    v
}

pub fn choi_from_unitary(u: &ComplexMatrix) -> ComplexMatrix {
    KrausChannel::unitary(u).choi()
}

/// Choi matrix of the fully depolarizing channel, I₄/2.
pub fn choi_depolarizing() -> ComplexMatrix {
    ComplexMatrix::identity(4).scale_real(0.5)
}

/// Diagnostics describing how far a 4x4 matrix is from a valid Choi matrix.
#[derive(Debug, Clone, Copy)]
pub struct ChoiDefects {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub trace_preservation: f64,
}

impl ChoiDefects {
    pub fn is_cptp(&self, tol: f64) -> bool {
        self.hermiticity <= tol
            && (self.trace - 2.0).abs() <= tol
            && self.min_eigenvalue >= -tol
            && self.trace_preservation <= tol
    }
}

pub fn choi_defects(c: &ComplexMatrix) -> Result<ChoiDefects> {
    if c.dim() != 4 {
        return Err(Error::invalid(format!("Choi matrix must be 4x4, got {}x{}", c.dim(), c.dim())));
    }
    let eig = hermitian_eigen(c)?;
    let tp = (&c.partial_trace_second(2)? - &ComplexMatrix::identity(2)).frobenius_norm();
    Ok(ChoiDefects {
        hermiticity: c.hermiticity_error(),
        trace: c.trace().re,
        min_eigenvalue: eig.values[0],
        trace_preservation: tp,
    })
}

/// Apply the channel whose Choi matrix is `c`:
/// `Φ(ρ)[a][b] = Σ_{jk} ρ[j][k]·C[2j+a][2k+b]`.
pub fn apply_choi(c: &ComplexMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let defects = choi_defects(c)?;
    if !defects.is_cptp(CPTP_TOL) {
        return Err(Error::InvalidChannel(format!("Choi matrix is not CPTP: {defects:?}")));
    }
    if rho.matrix().dim() != 2 {
        return Err(Error::invalid("apply_choi needs a qubit state"));
    }
    Ok(DensityMatrix::new_unchecked(apply_choi_linear(c, rho.matrix())))
}

/// The linear action of `c` on any 2x2 operator, without validation.
pub fn apply_choi_linear(c: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2);
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = ZERO;
            for j in 0..2 {
                for k in 0..2 {
                    acc += x[(j, k)] * c[(2 * j + a, 2 * k + b)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Process fidelity Tr(C·C_U)/d² of a trace-2 Choi matrix against unitary `u`.
pub fn process_fidelity(c: &ComplexMatrix, u: &ComplexMatrix) -> Result<f64> {
    if c.dim() != 4 || u.dim() != 2 {
        return Err(Error::invalid(format!(
            "process fidelity needs a 4x4 Choi matrix and a 2x2 unitary, got {} and {}",
            c.dim(),
            u.dim()
        )));
    }
    let cu = choi_from_unitary(u);
    Ok(c.trace_product(&cu).re / 4.0)
}

/// Average gate fidelity F̄ = (d·F_pro + 1)/(d + 1) with d = 2.
pub fn average_gate_fidelity(c: &ComplexMatrix, u: &ComplexMatrix) -> Result<f64> {
    let fpro = process_fidelity(c, u)?;
    Ok((2.0 * fpro + 1.0) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::{bloch_rotation, density_from_bloch, BlochVector};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_choi_applies_as_identity() {
        let c = choi_from_unitary(&ComplexMatrix::identity(2));
        let rho = density_from_bloch(BlochVector::new(0.3, -0.4, 0.5).unwrap()).unwrap();
        let out = apply_choi(&c, &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn x_pi_choi_flips_ground() {
        let c = choi_from_unitary(&bloch_rotation([1.0, 0.0, 0.0], PI).unwrap());
        let out = apply_choi(&c, &DensityMatrix::ground()).unwrap();
        assert!(out.matrix().max_abs_diff(DensityMatrix::excited().matrix()) < 1e-15);
    }

    #[test]
    fn depolarizing_choi_gives_mixed_state() {
        let out = apply_choi(&choi_depolarizing(), &DensityMatrix::ground()).unwrap();
        assert!(out
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed().matrix())
            < 1e-15);
        let kraus = KrausChannel::depolarizing(1.0).unwrap().choi();
        assert!(kraus.max_abs_diff(&choi_depolarizing()) < 1e-15);
    }

    #[test]
    fn non_cptp_choi_is_rejected() {
        let mut c = choi_depolarizing();
        c[(0, 0)] = C64::new(1.5, 0.0);
        assert!(matches!(
            apply_choi(&c, &DensityMatrix::ground()),
            Err(Error::InvalidChannel(_))
        ));
    }

    #[test]
    fn fidelity_of_ideal_and_depolarized_gates() {
        let u = bloch_rotation([1.0, 1.0, 0.0], 1.1).unwrap();
        let f = average_gate_fidelity(&choi_from_unitary(&u), &u).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let f = average_gate_fidelity(&choi_depolarizing(), &u).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        assert!(average_gate_fidelity(&ComplexMatrix::identity(2), &u).is_err());
    }

    #[test]
    fn damping_kraus_is_cptp() {
        let ch = KrausChannel::amplitude_damping(0.3)
            .unwrap()
            .then(&KrausChannel::dephasing(0.8).unwrap());
        assert!(choi_defects(&ch.choi()).unwrap().is_cptp(1e-12));
        assert!(KrausChannel::amplitude_damping(1.2).is_err());
    }

    proptest! {
        #[test]
        fn unitary_choi_matches_conjugation(
            ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0, angle in -4.0f64..4.0,
            x in -0.57f64..0.57, y in -0.57f64..0.57, z in -0.57f64..0.57,
        ) {
            let u = bloch_rotation([ax, ay, az], angle).unwrap();
            let rho = density_from_bloch(BlochVector::new(x, y, z).unwrap()).unwrap();
            let via_choi = apply_choi(&choi_from_unitary(&u), &rho).unwrap();
            prop_assert!(via_choi.matrix().max_abs_diff(rho.conjugate(&u).matrix()) < 1e-9);
        }

        #[test]
        fn fidelity_ignores_global_phase(phase in -3.2f64..3.2, angle in -4.0f64..4.0) {
            let u = bloch_rotation([0.2, -0.7, 0.4], angle).unwrap();
            let c = KrausChannel::unitary(&u).then(&KrausChannel::amplitude_damping(0.1).unwrap()).choi();
            let f1 = average_gate_fidelity(&c, &u).unwrap();
            let f2 = average_gate_fidelity(&c, &u.scale(C64::from_polar(1.0, phase))).unwrap();
            prop_assert!((f1 - f2).abs() < 1e-12);
        }
    }
}
