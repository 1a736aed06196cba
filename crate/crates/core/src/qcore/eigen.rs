// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Cyclic Jacobi eigendecomposition for small Hermitian matrices.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalues (ascending) and eigenvectors (columns of `vectors`).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// V·diag(f(λ))·V†
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Decompose a Hermitian matrix. The input is symmetrized first, so tiny
/// asymmetries from floating-point noise are tolerated.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    let mut converged = off_diagonal_norm(&a) <= OFF_DIAGONAL_TOL * scale;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b < 1e-300 {
                    continue;
                }
                let phase = apq / b;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * b).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                // columns p, q of the unitary D·R with D_qq = conj(phase)
                let vpp = C64::new(c, 0.0);
                let vqp = phase.conj() * s;
                let vpq = C64::new(-s, 0.0);
                let vqq = phase.conj() * c;
                rotate(&mut a, &mut v, p, q, [vpp, vqp, vpq, vqq]);
            }
        }
        converged = off_diagonal_norm(&a) <= OFF_DIAGONAL_TOL * scale;
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new_col)] = v[(r, old_col)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Apply A ← J†·A·J and V ← V·J for a unitary J acting on the (p, q) plane,
/// given as [J_pp, J_qp, J_pq, J_qq].
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, j: [C64; 4]) {
    let n = a.dim();
    let [jpp, jqp, jpq, jqq] = j;
    // A ← A·J (columns)
    for r in 0..n {
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        a[(r, p)] = arp * jpp + arq * jqp;
        a[(r, q)] = arp * jpq + arq * jqq;
    }
    // A ← J†·A (rows)
    for c in 0..n {
        let apc = a[(p, c)];
        let aqc = a[(q, c)];
        a[(p, c)] = jpp.conj() * apc + jqp.conj() * aqc;
        a[(q, c)] = jpq.conj() * apc + jqq.conj() * aqc;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp * jpp + vrq * jqp;
        v[(r, q)] = vrp * jpq + vrq * jqq;
    }
}

/// Hermitian matrix square root for positive semidefinite input.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = hermitian_eigen(m)?;
    Ok(e.reconstruct_with(|l| l.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Complex, DMatrix};
    use proptest::prelude::*;

    fn random_hermitian(n: usize, vals: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n);
        let mut k = 0;
        for i in 0..n {
            m[(i, i)] = C64::new(vals[k], 0.0);
            k += 1;
            for j in (i + 1)..n {
                let z = C64::new(vals[k], vals[k + 1]);
                k += 2;
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    proptest! {
        #[test]
        fn matches_nalgebra_on_random_4x4(vals in proptest::collection::vec(-1.0f64..1.0, 16)) {
            let m = random_hermitian(4, &vals);
            let ours = hermitian_eigen(&m).unwrap();
            let nm = DMatrix::from_fn(4, 4, |i, j| Complex::new(m[(i, j)].re, m[(i, j)].im));
            let mut theirs: Vec<f64> = nm.symmetric_eigen().eigenvalues.iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (a, b) in ours.values.iter().zip(&theirs) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let back = ours.reconstruct_with(|l| l);
            prop_assert!(back.max_abs_diff(&m) < 1e-10);
            prop_assert!(ours.vectors.is_unitary(1e-10));
        }
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let m = ComplexMatrix::diag(&[C64::new(3.0, 0.0), C64::new(-1.0, 0.0)]);
        let e = hermitian_eigen(&m).unwrap();
        assert_eq!(e.values, vec![-1.0, 3.0]);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = random_hermitian(2, &[2.0, 0.3, -0.4, 1.5]);
        let r = psd_sqrt(&m).unwrap();
        assert!((&r * &r).max_abs_diff(&m) < 1e-12);
    }
}
