// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Qubit states and Bloch-sphere geometry.
//!
//! The basis is (|g⟩, |e⟩) and the Bloch z axis points at the ground state,
//! so `P_g = (1 + z) / 2` and `P_e = (1 − z) / 2`.

use super::eigen::hermitian_eigen;
use super::matrix::{pauli_x, pauli_y, pauli_z, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const TRACE_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const EIGEN_FLOOR: f64 = -1e-10;

/// Rotation exp(−i·angle·(n̂·σ⃗)/2) about a (not necessarily normalized) axis.
pub fn bloch_rotation(axis: [f64; 3], angle: f64) -> Result<ComplexMatrix> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::invalid(format!("rotation axis {axis:?} must be nonzero and finite")));
    }
    Ok(rotation_unit(
        [axis[0] / norm, axis[1] / norm, axis[2] / norm],
        angle,
    ))
}

/// Same as [`bloch_rotation`] for an axis already known to be a unit vector.
pub(crate) fn rotation_unit(n: [f64; 3], angle: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * angle).sin_cos();
    // c·I − i·s·(nx σx + ny σy + nz σz)
    ComplexMatrix::from_rows([
        [C64::new(c, -s * n[2]), C64::new(-s * n[1], -s * n[0])],
        [C64::new(s * n[1], -s * n[0]), C64::new(c, s * n[2])],
    ])
}

/// Rotation about an axis in the x-y plane at angle `phi` from +x.
pub fn inplane_rotation(phi: f64, angle: f64) -> ComplexMatrix {
    rotation_unit([phi.cos(), phi.sin(), 0.0], angle)
}

pub fn rz(angle: f64) -> ComplexMatrix {
    rotation_unit([0.0, 0.0, 1.0], angle)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const GROUND: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite Bloch vector {v:?}")));
        }
        if v.norm() > 1.0 + 1e-10 {
            return Err(Error::InvalidState(format!(
                "Bloch vector norm {} exceeds 1",
                v.norm()
            )));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn is_pure(&self) -> bool {
        (self.norm() - 1.0).abs() < 1e-9
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Validated qubit (or Choi-space) density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::check(&m)?;
        Ok(Self(m))
    }

    /// Wrap without eigenvalue checks. Used on hot paths where the caller's
    /// construction already guarantees validity (Kraus maps of valid states).
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    fn check(m: &ComplexMatrix) -> Result<()> {
        if m.dim() != 2 && m.dim() != 4 {
            return Err(Error::InvalidState(format!(
                "density matrices must be 2x2 or 4x4, got {}x{}",
                m.dim(),
                m.dim()
            )));
        }
        let herm = m.hermiticity_error();
        if herm >= HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:.2e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let eig = hermitian_eigen(m)?;
        if eig.values[0] < EIGEN_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:.3e}",
                eig.values[0]
            )));
        }
        Ok(())
    }

    pub fn ground() -> Self {
        Self(ComplexMatrix::diag(&[ONE, ZERO]))
    }

    pub fn excited() -> Self {
        Self(ComplexMatrix::diag(&[ZERO, ONE]))
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(2).scale_real(0.5))
    }

    pub fn from_pure(psi: [C64; 2]) -> Result<Self> {
        let n = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = [psi[0] / n, psi[1] / n];
        Ok(Self(ComplexMatrix::outer(&v, &v)))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Excited-state population ⟨e|ρ|e⟩.
    pub fn pe(&self) -> f64 {
        self.0[(1, 1)].re.clamp(0.0, 1.0)
    }

    pub fn pg(&self) -> f64 {
        self.0[(0, 0)].re.clamp(0.0, 1.0)
    }

    /// U·ρ·U†
    pub fn conjugate(&self, u: &ComplexMatrix) -> Self {
        Self(&(u * &self.0) * &u.adjoint())
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        self.0.trace_product(op).re
    }
}

pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.matrix().dim() != 2 {
        return Err(Error::InvalidState("Bloch vectors describe 2x2 states only".into()));
    }
    let m = rho.matrix();
    Ok(BlochVector {
        x: 2.0 * m[(0, 1)].re,
        y: -2.0 * m[(0, 1)].im,
        z: (m[(0, 0)] - m[(1, 1)]).re,
    })
}

pub fn density_from_bloch(v: BlochVector) -> Result<DensityMatrix> {
    let v = BlochVector::new(v.x, v.y, v.z)?;
    let m = ComplexMatrix::from_rows([
        [C64::new(0.5 * (1.0 + v.z), 0.0), C64::new(0.5 * v.x, -0.5 * v.y)],
        [C64::new(0.5 * v.x, 0.5 * v.y), C64::new(0.5 * (1.0 - v.z), 0.0)],
    ]);
    Ok(DensityMatrix(m))
}

/// Squared Bloch norm ⟨σx⟩² + ⟨σy⟩² + ⟨σz⟩², i.e. 2·Tr(ρ²) − 1.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let x = rho.expectation(&pauli_x());
    let y = rho.expectation(&pauli_y());
    let z = rho.expectation(&pauli_z());
    debug_assert_eq!(m.dim(), 2);
    x * x + y * y + z * z
}
