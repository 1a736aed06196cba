// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Levenberg-Marquardt least squares with analytic Jacobians.

use nalgebra::{DMatrix, DVector};

/// Relative parameter change below which an accepted step ends the search.
const STEP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub rel_tolerance: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            rel_tolerance: 1e-12,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// Sum of squared (weighted) residuals at `params`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// JᵀJ at the optimum, for covariance estimates.
    pub normal_matrix: DMatrix<f64>,
    /// Cost after every accepted iteration, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

/// Minimize Σ r_i(x)² where `eval(x)` returns residuals and their Jacobian
/// (rows are residuals, columns parameters).
pub fn levenberg_marquardt<F>(mut eval: F, x0: &[f64], opts: &LmOptions) -> LmOutcome
where
    F: FnMut(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let (mut r, mut j) = eval(x.as_slice());
    let mut cost = r.norm_squared();
    let mut lambda = opts.initial_lambda;
    let mut history = vec![cost];
    let mut converged = false;
    let mut iterations = 0;
    let floor = f64::MIN_POSITIVE.sqrt();

    while iterations < opts.max_iterations {
        iterations += 1;
        if !cost.is_finite() {
            break;
        }
        if cost <= floor {
            converged = true;
            break;
        }
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for k in 0..n {
                let d = jtj[(k, k)].max(1e-30);
                a[(k, k)] += lambda * d;
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => match a.lu().solve(&(-&grad)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            let trial = &x + &step;
            let (rt, jt) = eval(trial.as_slice());
            let trial_cost = rt.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel = (cost - trial_cost) / cost.max(floor);
                let tiny_step = step.norm() <= STEP_TOLERANCE * (x.norm() + STEP_TOLERANCE);
                x = trial;
                r = rt;
                j = jt;
                cost = trial_cost;
                history.push(cost);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if rel < opts.rel_tolerance || tiny_step {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No downhill step at any damping: x is stationary to working precision.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    let normal_matrix = j.transpose() * &j;
    LmOutcome {
        params: x.as_slice().to_vec(),
        cost,
        iterations,
        converged,
        normal_matrix,
        cost_history: history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_linear_problem_in_few_steps() {
        // r = A x - b with exact solution (1, -2)
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_column_slice(&[1.0, -2.0, -1.0]);
        let out = levenberg_marquardt(
            |x| {
                let xv = DVector::from_column_slice(x);
                (&a * xv - &b, a.clone())
            },
            &[10.0, 10.0],
            &LmOptions::default(),
        );
        assert!(out.converged);
        assert!((out.params[0] - 1.0).abs() < 1e-10);
        assert!((out.params[1] + 2.0).abs() < 1e-10);
        assert!(out.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rosenbrock_valley() {
        let out = levenberg_marquardt(
            |x| {
                let r = DVector::from_column_slice(&[10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
                let j = DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0]);
                (r, j)
            },
            &[-1.2, 1.0],
            &LmOptions::default(),
        );
        assert!(out.converged);
        assert!((out.params[0] - 1.0).abs() < 1e-8);
        assert!((out.params[1] - 1.0).abs() < 1e-8);
    }
}
