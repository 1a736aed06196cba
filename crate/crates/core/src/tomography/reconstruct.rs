// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Least-squares Choi reconstruction over the CPTP set.

use nalgebra::{DMatrix, DVector};

use super::{entry_operator, MeasurementRecord, RECORD_LEN};
use crate::error::{Error, Result};
use crate::qcore::{hermitian_eigen, pauli_x, pauli_y, pauli_z, ComplexMatrix, C64};

const MAX_HALVINGS: usize = 40;
const SVD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionOptions {
    pub step_size: f64,
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this.
    pub tolerance: f64,
    pub projection_rounds: usize,
    /// Undo this readout visibility before fitting.
    pub visibility: Option<f64>,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self { step_size: 0.2, max_iterations: 5000, tolerance: 1e-12, projection_rounds: 50, visibility: None }
    }
}

impl ReconstructionOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || self.max_iterations == 0 || !(self.tolerance > 0.0) || self.projection_rounds == 0 {
            return Err(Error::invalid(format!("reconstruction options must all be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub choi: ComplexMatrix,
    /// Sum of squared probability residuals at `choi`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn operators() -> Vec<ComplexMatrix> {
    (0..RECORD_LEN).map(entry_operator).collect()
}

fn residuals(ops: &[ComplexMatrix], c: &ComplexMatrix, target: &[f64]) -> Vec<f64> {
    ops.iter().zip(target).map(|(m, r)| m.trace_product(c).re - r).collect()
}

fn cost_of(ops: &[ComplexMatrix], c: &ComplexMatrix, target: &[f64]) -> f64 {
    residuals(ops, c, target).iter().map(|r| r * r).sum()
}

/// Sum of squared residuals between the predictions of `c` and `record`.
pub fn cost(c: &ComplexMatrix, record: &MeasurementRecord) -> f64 {
    cost_of(&operators(), c, &record.probabilities())
}

fn project_psd(c: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(hermitian_eigen(c)?.reconstruct_with(|l| l.max(0.0)))
}

/// Orthogonal projection onto `Tr_out C = I`.
fn project_tp(c: &ComplexMatrix) -> Result<ComplexMatrix> {
    let defect = &c.partial_trace_second(2)? - &ComplexMatrix::identity(2);
    Ok(c - &defect.kron(&ComplexMatrix::identity(2)).scale_real(0.5))
}

/// Nearest CPTP Choi matrix, by Dykstra alternation between the PSD cone and
/// the trace-preserving subspace. Any eigenvalue still below zero afterwards
/// is removed by mixing with the completely depolarizing channel.
pub fn project_cptp(c: &ComplexMatrix, rounds: usize) -> Result<ComplexMatrix> {
    if c.dim() != 4 {
        return Err(Error::invalid(format!("Choi matrix must be 4x4, got {0}x{0}", c.dim())));
    }
    let mut x = project_tp(&c.hermitian_part())?;
    let mut p = ComplexMatrix::zeros(4);
    for _ in 0..rounds {
        let y = project_psd(&(&x + &p))?;
        p = &(&x + &p) - &y;
        // the TP set is affine, so its Dykstra correction vanishes
        x = project_tp(&y)?;
    }
    let lmin = hermitian_eigen(&x)?.values[0];
    if lmin < 0.0 {
        let t = -lmin / (0.5 - lmin);
        x = &x.scale_real(1.0 - t) + &ComplexMatrix::identity(4).scale_real(0.5 * t);
    }
    Ok(x.hermitian_part())
}

/// Projected gradient descent on the squared residuals, starting from the
/// completely depolarizing channel. A step that raises the cost is halved
/// until it does not.
pub fn reconstruct(record: &MeasurementRecord, opts: &ReconstructionOptions) -> Result<Reconstruction> {
    opts.validate()?;
    let record = match opts.visibility {
        Some(v) => record.visibility_corrected(v)?,
        None => record.clone(),
    };
    let target = record.probabilities();
    let ops = operators();
    let mut c = ComplexMatrix::identity(4).scale_real(0.5);
    let mut current = cost_of(&ops, &c, &target);
    for it in 1..=opts.max_iterations {
        let res = residuals(&ops, &c, &target);
        let mut grad = ComplexMatrix::zeros(4);
        for (m, r) in ops.iter().zip(&res) {
            grad = &grad + &m.scale_real(2.0 * r);
        }
        let mut eta = opts.step_size;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = project_cptp(&(&c - &grad.scale_real(eta)), opts.projection_rounds)?;
            let trial_cost = cost_of(&ops, &trial, &target);
            if trial_cost <= current {
                accepted = Some((trial, trial_cost));
                break;
            }
            eta *= 0.5;
        }
        let Some((next, next_cost)) = accepted else {
            return Ok(Reconstruction { choi: c, cost: current, iterations: it, converged: true });
        };
        let drop = current - next_cost;
        c = next;
        current = next_cost;
        if drop < opts.tolerance {
            return Ok(Reconstruction { choi: c, cost: current, iterations: it, converged: true });
        }
    }
    Ok(Reconstruction { choi: c, cost: current, iterations: opts.max_iterations, converged: false })
}

/// Orthonormal Hermitian basis `σ_a ⊗ σ_b / 2` of 4x4 operators.
fn hermitian_basis() -> Vec<ComplexMatrix> {
    let paulis = [ComplexMatrix::identity(2), pauli_x(), pauli_y(), pauli_z()];
    let mut out = Vec::with_capacity(16);
    for a in &paulis {
        for b in &paulis {
            out.push(a.kron(b).scale_real(0.5));
        }
    }
    out
}

/// Unconstrained least-squares Hermitian `C`; need not be physical.
pub fn linear_inversion(record: &MeasurementRecord) -> Result<ComplexMatrix> {
    let ops = operators();
    let basis = hermitian_basis();
    let a = DMatrix::from_fn(RECORD_LEN, basis.len(), |k, m| ops[k].trace_product(&basis[m]).re);
    let b = DVector::from_vec(record.probabilities());
    let x = a
        .svd(true, true)
        .solve(&b, SVD_EPS)
        .map_err(|e| Error::NumericalFailure(format!("linear inversion: {e}")))?;
    let mut c = ComplexMatrix::zeros(4);
    for (coef, bm) in x.iter().zip(&basis) {
        c = &c + &bm.scale(C64::new(*coef, 0.0));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulsesim::Shots;
    use crate::qcore::{
        average_gate_fidelity, bloch_rotation, choi_defects, choi_from_unitary, inplane_rotation, KrausChannel,
    };
    use crate::rng::rng_from_seed;
    use crate::tomography::{qpt_record, ChoiExecutor, TargetGate, UnitaryExecutor};
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_physical(c: &ComplexMatrix) {
        let d = choi_defects(c).unwrap();
        assert!(d.hermiticity < 1e-10, "{d:?}");
        assert!((d.trace - 2.0).abs() < 1e-8, "{d:?}");
        assert!(d.min_eigenvalue > -1e-8, "{d:?}");
        assert!(d.trace_preservation < 1e-8, "{d:?}");
    }

    fn exact(c: &ComplexMatrix) -> MeasurementRecord {
        MeasurementRecord::from_choi(c).unwrap()
    }

    #[test]
    fn identity_is_recovered() {
        let target = choi_from_unitary(&ComplexMatrix::identity(2));
        let rec = reconstruct(&exact(&target), &ReconstructionOptions::default()).unwrap();
        assert!(rec.converged);
        assert_physical(&rec.choi);
        assert!(rec.choi.max_abs_diff(&target) < 1e-6, "{:?}", rec.choi);
        assert!((&rec.choi - &target).frobenius_norm() < 1e-6);
    }

    #[test]
    fn bundled_t_matrix_round_trips() {
        let target = project_cptp(&TargetGate::T.bundled_choi(), 200).unwrap();
        let rec = reconstruct(&exact(&target), &ReconstructionOptions::default()).unwrap();
        assert_physical(&rec.choi);
        assert!((&rec.choi - &target).frobenius_norm() < 1e-3);
        let raw = TargetGate::T.bundled_choi();
        let rec = reconstruct(&exact(&raw), &ReconstructionOptions::default()).unwrap();
        assert!((&rec.choi - &raw).frobenius_norm() < 1e-3, "{}", (&rec.choi - &raw).frobenius_norm());
    }

    #[test]
    fn finite_shot_x_half_pi() {
        let u = inplane_rotation(0.0, FRAC_PI_2);
        let mut rng = rng_from_seed(11);
        let record = qpt_record(&UnitaryExecutor(u.clone()), Shots::Finite(10_000), &mut rng).unwrap();
        let rec = reconstruct(&record, &ReconstructionOptions::default()).unwrap();
        assert_physical(&rec.choi);
        assert!(average_gate_fidelity(&rec.choi, &u).unwrap() >= 0.995);
    }

    #[test]
    fn visibility_correction_restores_ideal_record() {
        let u = inplane_rotation(0.0, PI);
        let exec = ChoiExecutor { choi: choi_from_unitary(&u), visibility: 0.9 };
        let record = qpt_record(&exec, Shots::Infinite, &mut rng_from_seed(0)).unwrap();
        let opts = ReconstructionOptions { visibility: Some(0.9), ..Default::default() };
        let rec = reconstruct(&record, &opts).unwrap();
        assert!(average_gate_fidelity(&rec.choi, &u).unwrap() > 1.0 - 1e-6);
        let raw = reconstruct(&record, &ReconstructionOptions::default()).unwrap();
        assert!(average_gate_fidelity(&raw.choi, &u).unwrap() < 0.95);
    }

    #[test]
    fn linear_inversion_is_exact_on_exact_records() {
        let c = TargetGate::H.bundled_choi();
        assert!(linear_inversion(&exact(&c)).unwrap().max_abs_diff(&c) < 1e-6);
    }

    #[test]
    fn cost_beats_projected_least_squares() {
        let mut rng = rng_from_seed(3);
        for gate in TargetGate::ALL {
            let record = qpt_record(&UnitaryExecutor(gate.unitary()), Shots::Finite(500), &mut rng).unwrap();
            let rec = reconstruct(&record, &ReconstructionOptions::default()).unwrap();
            let baseline = project_cptp(&linear_inversion(&record).unwrap(), 50).unwrap();
            assert!(rec.cost <= cost(&baseline, &record) + 1e-12, "{gate:?}");
        }
    }

    fn conj(m: &ComplexMatrix) -> ComplexMatrix {
        m.adjoint().transpose()
    }

    #[test]
    fn unitarily_covariant() {
        let mut rng = rng_from_seed(21);
        let noise = KrausChannel::depolarizing(0.1).unwrap();
        let u = TargetGate::T.unitary();
        for _ in 0..10 {
            let axis = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
            let v = bloch_rotation(axis, rng.random::<f64>() * 2.0 * PI).unwrap();
            let base = KrausChannel::unitary(&u).then(&noise).choi();
            let rotated = KrausChannel::unitary(&(&(&v * &u) * &v.adjoint())).then(&noise).choi();
            let opts = ReconstructionOptions::default();
            let c0 = reconstruct(&exact(&base), &opts).unwrap().choi;
            let c1 = reconstruct(&exact(&rotated), &opts).unwrap().choi;
            let w = conj(&v).kron(&v);
            let expected = &(&w * &c0) * &w.adjoint();
            assert!((&c1 - &expected).frobenius_norm() < 1e-4);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn output_is_always_cptp(ps in proptest::collection::vec(0.0f64..1.0, RECORD_LEN)) {
            let entries = (0..RECORD_LEN)
                .map(|k| {
                    let (prep, meas) = crate::tomography::entry_axes(k);
                    crate::tomography::RecordEntry { prep, meas, probability: ps[k], shots: Shots::Infinite }
                })
                .collect();
            let record = MeasurementRecord::new(entries).unwrap();
            let rec = reconstruct(&record, &ReconstructionOptions { max_iterations: 300, ..Default::default() }).unwrap();
            let d = choi_defects(&rec.choi).unwrap();
            prop_assert!(d.hermiticity < 1e-10 && (d.trace - 2.0).abs() < 1e-8);
            prop_assert!(d.min_eigenvalue > -1e-8 && d.trace_preservation < 1e-8);
        }
    }
}
