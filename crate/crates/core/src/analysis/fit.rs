// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::lm::{levenberg_marquardt, LmOptions};
use crate::error::{Error, Result};

/// Curve models. Frequencies are in cycles per unit of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// `A·p^(x − x_offset) + B`, parameters `[A, p, B]`.
    ExpDecay { x_offset: f64 },
    /// `A·sin(2π f x + φ) + B`, parameters `[A, f, phi, B]`.
    Sinusoid,
    /// `A·exp(−x/τ)·sin(2π f x + φ) + B`, parameters `[A, f, phi, B, tau]`.
    DampedSinusoid,
    /// `A·cos(2π f x + φ) + B`, parameters `[A, f, phi, B]`.
    CosineFringe,
}

impl Model {
    pub const EXP_DECAY: Model = Model::ExpDecay { x_offset: 0.0 };

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Model::ExpDecay { .. } => &["A", "p", "B"],
            Model::Sinusoid | Model::CosineFringe => &["A", "f", "phi", "B"],
            Model::DampedSinusoid => &["A", "f", "phi", "B", "tau"],
        }
    }

    pub fn n_params(&self) -> usize {
        self.param_names().len()
    }

    pub fn eval(&self, params: &[f64], x: f64) -> f64 {
        match *self {
            Model::ExpDecay { x_offset } => params[0] * params[1].powf(x - x_offset) + params[2],
            Model::Sinusoid => params[0] * (TAU * params[1] * x + params[2]).sin() + params[3],
            Model::CosineFringe => params[0] * (TAU * params[1] * x + params[2]).cos() + params[3],
            Model::DampedSinusoid => {
                params[0] * (-x / params[4]).exp() * (TAU * params[1] * x + params[2]).sin()
                    + params[3]
            }
        }
    }

    /// Partial derivatives of the model value with respect to each parameter.
    fn gradient(&self, params: &[f64], x: f64, out: &mut [f64]) {
        match *self {
            Model::ExpDecay { x_offset } => {
                let e = x - x_offset;
                let pe = params[1].powf(e);
                out[0] = pe;
                out[1] = if e == 0.0 { 0.0 } else { params[0] * e * params[1].powf(e - 1.0) };
                out[2] = 1.0;
            }
            Model::Sinusoid | Model::CosineFringe => {
                let th = TAU * params[1] * x + params[2];
                let (s, c) = th.sin_cos();
                let (v, dv) = if *self == Model::Sinusoid { (s, c) } else { (c, -s) };
                out[0] = v;
                out[1] = params[0] * dv * TAU * x;
                out[2] = params[0] * dv;
                out[3] = 1.0;
            }
            Model::DampedSinusoid => {
                let th = TAU * params[1] * x + params[2];
                let (s, c) = th.sin_cos();
                let d = (-x / params[4]).exp();
                out[0] = d * s;
                out[1] = params[0] * d * c * TAU * x;
                out[2] = params[0] * d * c;
                out[3] = 1.0;
                out[4] = params[0] * d * s * x / (params[4] * params[4]);
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    pub initial: Option<Vec<f64>>,
    /// Relative weights (e.g. 1/σ²); unweighted when absent.
    pub weights: Option<Vec<f64>>,
    pub lm: LmOptions,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: Model,
    pub params: Vec<f64>,
    /// Standard errors from s²(JᵀJ)⁻¹; present only for converged fits.
    pub stderr: Option<Vec<f64>>,
    /// sqrt of the weighted residual sum of squares.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The data do not determine every parameter (e.g. constant data).
    pub degenerate: bool,
    pub cost_history: Vec<f64>,
}

impl FitResult {
    fn index(&self, name: &str) -> usize {
        self.model
            .param_names()
            .iter()
            .position(|n| *n == name)
            .unwrap_or_else(|| panic!("model {:?} has no parameter {name}", self.model))
    }

    pub fn get(&self, name: &str) -> f64 {
        self.params[self.index(name)]
    }

    pub fn stderr_of(&self, name: &str) -> Option<f64> {
        let i = self.index(name);
        self.stderr.as_ref().map(|s| s[i])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.model.eval(&self.params, x)
    }

    /// Key-value report: one `name value stderr` line per parameter.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.model.param_names().iter().enumerate() {
            let err = self
                .stderr
                .as_ref()
                .map_or("nan".to_string(), |s| format!("{:.9e}", s[i]));
            writeln!(out, "{name} {:.12e} {err}", self.params[i]).unwrap();
        }
        writeln!(out, "residual_norm {:.6e}", self.residual_norm).unwrap();
        writeln!(out, "converged {}", self.converged).unwrap();
        writeln!(out, "iterations {}", self.iterations).unwrap();
        if self.degenerate {
            writeln!(out, "degenerate true").unwrap();
        }
        out
    }
}

/// Fit `model` to `(xs, ys)` by damped Gauss-Newton.
pub fn fit_nlls(model: Model, xs: &[f64], ys: &[f64], opts: &FitOptions) -> Result<FitResult> {
    let k = model.n_params();
    if xs.len() != ys.len() {
        return Err(Error::invalid("x and y lengths differ"));
    }
    if xs.len() < k + 1 {
        return Err(Error::invalid(format!(
            "{} points cannot fit {k} parameters",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("data contain non-finite values"));
    }
    let weights: Vec<f64> = match &opts.weights {
        Some(w) if w.len() == xs.len() && w.iter().all(|v| *v > 0.0 && v.is_finite()) => {
            w.iter().map(|v| v.sqrt()).collect()
        }
        Some(_) => return Err(Error::invalid("weights must be positive, one per point")),
        None => vec![1.0; xs.len()],
    };

    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let spread = ys.iter().fold(0.0f64, |m, y| m.max((y - mean).abs()));
    if spread <= 1e-12 * mean.abs().max(1.0) {
        return Ok(degenerate_fit(model, mean, xs, ys));
    }

    let x0 = match &opts.initial {
        Some(p) if p.len() == k => p.clone(),
        Some(_) => return Err(Error::invalid(format!("initial guess needs {k} values"))),
        None => initial_guess(model, xs, ys)?,
    };

    let n = xs.len();
    let mut grad = vec![0.0; k];
    let outcome = levenberg_marquardt(
        |p| {
            let mut r = DVector::zeros(n);
            let mut j = DMatrix::zeros(n, k);
            for i in 0..n {
                r[i] = weights[i] * (model.eval(p, xs[i]) - ys[i]);
                model.gradient(p, xs[i], &mut grad);
                for c in 0..k {
                    j[(i, c)] = weights[i] * grad[c];
                }
            }
            (r, j)
        },
        &x0,
        &opts.lm,
    );

    let mut params = outcome.params.clone();
    normalize(model, &mut params);
    let residual_norm = outcome.cost.sqrt();
    let stderr = if outcome.converged {
        let dof = (n - k) as f64;
        let s2 = outcome.cost / dof;
        let cov = outcome.normal_matrix.clone().try_inverse().ok_or_else(|| Error::FitFailure {
            message: format!("singular Jacobian at the optimum of {model:?}"),
            residual_norm,
        })?;
        Some((0..k).map(|i| (s2 * cov[(i, i)]).max(0.0).sqrt()).collect())
    } else {
        None
    };
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::FitFailure {
            message: format!("{model:?} fit diverged"),
            residual_norm,
        });
    }
    Ok(FitResult {
        model,
        params,
        stderr,
        residual_norm,
        converged: outcome.converged,
        iterations: outcome.iterations,
        degenerate: false,
        cost_history: outcome.cost_history,
    })
}

fn degenerate_fit(model: Model, mean: f64, xs: &[f64], ys: &[f64]) -> FitResult {
    let params = match model {
        Model::ExpDecay { .. } => vec![0.0, 1.0, mean],
        Model::Sinusoid | Model::CosineFringe => vec![0.0, 0.0, 0.0, mean],
        Model::DampedSinusoid => {
            let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - xs.iter().cloned().fold(f64::INFINITY, f64::min);
            vec![0.0, 0.0, 0.0, mean, span.max(1.0)]
        }
    };
    let residual_norm = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>().sqrt();
    FitResult {
        model,
        params,
        stderr: None,
        residual_norm,
        converged: true,
        iterations: 0,
        degenerate: true,
        cost_history: vec![residual_norm * residual_norm],
    }
}

fn normalize(model: Model, params: &mut [f64]) {
    match model {
        Model::ExpDecay { .. } => {}
        Model::Sinusoid | Model::CosineFringe | Model::DampedSinusoid => {
            if params[0] < 0.0 {
                params[0] = -params[0];
                params[2] += PI;
            }
            if params[1] < 0.0 {
                // sin(−θ+φ) = sin(θ + π − φ); cos(−θ+φ) = cos(θ − φ)
                params[1] = -params[1];
                params[2] = if model == Model::CosineFringe {
                    -params[2]
                } else {
                    PI - params[2]
                };
            }
            params[2] = wrap(params[2]);
        }
    }
}

fn wrap(a: f64) -> f64 {
    let t = a.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

/// Automatic starting point for `model`.
pub fn initial_guess(model: Model, xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    match model {
        Model::ExpDecay { x_offset } => Ok(exp_guess(x_offset, xs, ys)),
        Model::Sinusoid | Model::CosineFringe | Model::DampedSinusoid => {
            let f = dominant_frequency(xs, ys);
            let (a, phi, b) = linear_phase_fit(model == Model::CosineFringe, f, xs, ys);
            let mut p = vec![a, f, phi, b];
            if model == Model::DampedSinusoid {
                let span = span(xs);
                p.push(span.max(f64::MIN_POSITIVE));
            }
            Ok(p)
        }
    }
}

fn span(xs: &[f64]) -> f64 {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Least-squares A and B for `y = A·g + B` with the basis `g` fixed.
fn linear_ab(g: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = g.len() as f64;
    let (sg, sy) = (g.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sgg: f64 = g.iter().map(|v| v * v).sum();
    let sgy: f64 = g.iter().zip(ys).map(|(a, b)| a * b).sum();
    let det = n * sgg - sg * sg;
    if det.abs() <= 1e-14 * (n * sgg).max(f64::MIN_POSITIVE) {
        return None;
    }
    let a = (n * sgy - sg * sy) / det;
    let b = (sy - a * sg) / n;
    let rss = g.iter().zip(ys).map(|(gi, y)| (a * gi + b - y).powi(2)).sum();
    Some((a, b, rss))
}

fn exp_guess(x_offset: f64, xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let n = xs.len();
    let tail = (n / 5).max(1);
    let b_tail = order[n - tail..].iter().map(|&i| ys[i]).sum::<f64>() / tail as f64;
    let a_head = ys[order[0]] - b_tail;

    let mut best: Option<(f64, f64, f64, f64)> = None;
    let mut consider = |p: f64| {
        if !(p > 0.0 && p.is_finite()) {
            return;
        }
        let g: Vec<f64> = xs.iter().map(|x| p.powf(x - x_offset)).collect();
        if let Some((a, b, rss)) = linear_ab(&g, ys) {
            if best.is_none_or(|(_, _, _, r)| rss < r) {
                best = Some((a, p, b, rss));
            }
        }
    };

    // log-linear regression of |y − B| against x
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| (*y - b_tail).abs() > 1e-3 * a_head.abs().max(1e-300))
        .map(|(x, y)| (*x - x_offset, (y - b_tail).abs().ln()))
        .collect();
    if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            consider((sxy / sxx).exp());
        }
    }
    // coarse scan of the decay rate
    let s = span(xs).max(f64::MIN_POSITIVE);
    let (lo, hi) = ((1e-3 / s).ln(), (1e2 / s).ln());
    for i in 0..=240 {
        let k = (lo + (hi - lo) * i as f64 / 240.0).exp();
        consider((-k).exp());
    }
    match best {
        Some((a, p, b, _)) => vec![a, p, b],
        None => vec![a_head, 0.99, b_tail],
    }
}

/// Peak of the discrete spectrum, by direct summation on a 4× oversampled grid.
pub fn dominant_frequency(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let mean = ys.iter().sum::<f64>() / n as f64;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min_dx = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let t = span(xs);
    if !(t > 0.0) || !min_dx.is_finite() {
        return 0.0;
    }
    let df = 1.0 / (4.0 * t);
    let nyquist = 0.5 / min_dx;
    let steps = ((nyquist / df).floor() as usize).clamp(1, 200_000);
    let mut best = (0.0, df);
    for s in 1..=steps {
        let f = s as f64 * df;
        let (mut re, mut im) = (0.0, 0.0);
        for (x, y) in xs.iter().zip(ys) {
            let (sn, cs) = (TAU * f * x).sin_cos();
            re += (y - mean) * cs;
            im -= (y - mean) * sn;
        }
        let power = re * re + im * im;
        if power > best.0 {
            best = (power, f);
        }
    }
    best.1
}

/// Amplitude, phase and offset at fixed frequency by linear least squares.
fn linear_phase_fit(cosine: bool, f: f64, xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len();
    let mut a = DMatrix::zeros(n, 3);
    for (i, x) in xs.iter().enumerate() {
        let (s, c) = (TAU * f * x).sin_cos();
        a[(i, 0)] = s;
        a[(i, 1)] = c;
        a[(i, 2)] = 1.0;
    }
    let b = DVector::from_column_slice(ys);
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::from_column_slice(&[0.0, 0.0, 0.0]));
    let (cs, cc, off) = (sol[0], sol[1], sol[2]);
    let amp = cs.hypot(cc);
    // A sin(θ+φ) = A cosφ sinθ + A sinφ cosθ; A cos(θ+φ) = A cosφ cosθ − A sinφ sinθ
    let phi = if cosine { (-cs).atan2(cc) } else { cc.atan2(cs) };
    (amp.max(1e-12), phi, off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, Normal};

    fn grid(n: usize, step: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * step).collect()
    }

    #[test]
    fn rabi_sinusoid_frequency_is_recovered() {
        // ns grid, GHz frequency
        let xs = grid(120, 1.0);
        let truth = [0.5, 0.01230, -PI / 2.0, 0.5];
        let ys: Vec<f64> = xs.iter().map(|x| Model::Sinusoid.eval(&truth, *x)).collect();
        let fit = fit_nlls(Model::Sinusoid, &xs, &ys, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.get("f") - 0.01230).abs() * 1e3 < 1e-6, "{}", fit.get("f"));
        assert!((fit.get("A") - 0.5).abs() < 1e-9);
    }

    #[test]
    fn ramsey_fringe_frequency_and_phase_are_recovered() {
        let xs = grid(80, 0.25);
        let truth = [0.45, 0.1010, 0.35, 0.5];
        let ys: Vec<f64> = xs.iter().map(|x| Model::CosineFringe.eval(&truth, *x)).collect();
        let fit = fit_nlls(Model::CosineFringe, &xs, &ys, &FitOptions::default()).unwrap();
        assert!((fit.get("f") - 0.1010).abs() < 1e-9);
        assert!((fit.get("phi") - 0.35).abs() < 1e-6);
    }

    #[test]
    fn damped_sinusoid_recovers_decay() {
        let xs = grid(200, 0.5);
        let truth = [0.4, 0.05, 0.3, 0.5, 40.0];
        let ys: Vec<f64> = xs.iter().map(|x| Model::DampedSinusoid.eval(&truth, *x)).collect();
        let fit = fit_nlls(Model::DampedSinusoid, &xs, &ys, &FitOptions::default()).unwrap();
        for (got, want) in fit.params.iter().zip(truth) {
            assert!((got - want).abs() < 1e-7, "{:?}", fit.params);
        }
    }

    #[test]
    fn exp_decay_recovers_benchmark_parameters() {
        let xs: Vec<f64> = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]
            .iter()
            .map(|&m| m as f64)
            .collect();
        let truth = [0.418, 0.99857, 0.558];
        let ys: Vec<f64> = xs.iter().map(|x| Model::EXP_DECAY.eval(&truth, *x)).collect();
        let fit = fit_nlls(Model::EXP_DECAY, &xs, &ys, &FitOptions::default()).unwrap();
        for (got, want) in fit.params.iter().zip(truth) {
            assert!((got - want).abs() < 1e-9, "{:?}", fit.params);
        }
        assert!(fit.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn constant_data_is_degenerate() {
        let xs = grid(10, 1.0);
        let ys = vec![0.7; 10];
        let fit = fit_nlls(Model::EXP_DECAY, &xs, &ys, &FitOptions::default()).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.get("A"), 0.0);
        assert!((fit.get("B") - 0.7).abs() < 1e-15);
        assert!(fit.stderr.is_none());
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(fit_nlls(Model::Sinusoid, &[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0], &FitOptions::default()).is_err());
    }

    #[test]
    fn noisy_fits_cover_the_truth_within_three_stderr() {
        let cases: [(Model, Vec<f64>, Vec<f64>); 3] = [
            (Model::EXP_DECAY, vec![0.45, 0.97, 0.5], (0..60).map(|i| i as f64 * 2.0).collect()),
            (Model::Sinusoid, vec![0.5, 0.0123, 0.4, 0.5], grid(100, 1.0)),
            (Model::CosineFringe, vec![0.5, 0.101, 0.35, 0.5], grid(100, 0.2)),
        ];
        for (model, truth, xs) in cases {
            let noise = Normal::new(0.0, 0.02).unwrap();
            let mut covered = 0;
            for seed in 0..100 {
                let mut rng = rng_from_seed(seed);
                let ys: Vec<f64> = xs
                    .iter()
                    .map(|x| model.eval(&truth, *x) + noise.sample(&mut rng))
                    .collect();
                let fit = fit_nlls(model, &xs, &ys, &FitOptions::default()).unwrap();
                let err = fit.stderr.clone().unwrap();
                if fit.params.iter().zip(&truth).zip(&err).all(|((g, t), e)| (g - t).abs() <= 3.0 * e) {
                    covered += 1;
                }
            }
            assert!(covered >= 95, "{model:?}: {covered}/100");
        }
    }
}
