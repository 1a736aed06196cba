// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Randomized and purity benchmarking against pluggable backends.
//!
//! A run draws `N` random Clifford sequences per length, appends the recovery
//! gate, decomposes every Clifford into primitive gates, folds Z rotations
//! into pulse axes and executes the resulting pulse list. Each sequence is
//! drawn from its own seeded stream, so records do not depend on thread
//! scheduling.

mod backend;
mod stability;

use std::fmt::Write as _;

use rayon::prelude::*;

pub use backend::{depolarizing_decay_oracle, Backend, ChannelBackend, GateNoiseModel, PulseBackend};
pub use stability::{refit_windows, temporal_stability, StabilityConfig, StabilitySeries};

use crate::analysis::{fit_nlls, FitOptions, FitResult, Model};
use crate::clifford::{compile_virtual_z, decompose, decompose_sequence, CliffordGate, CliffordSequence, PhysicalPulseList};
use crate::error::{Error, Result};
use crate::pulsesim::{observed_probability, sample_probability, Shots};
use crate::rng::{derive_seed, derived_rng, SimRng};

/// Clifford appended before readout to map ⟨σx⟩ onto ⟨σz⟩ (π/2 about −y).
const MEASURE_X: usize = 15;
/// Clifford appended before readout to map ⟨σy⟩ onto ⟨σz⟩ (π/2 about x).
const MEASURE_Y: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct RBConfig {
    pub lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub shots: Shots,
    pub seed: u64,
    /// Wall-clock time attributed to one sequence execution, seconds.
    pub sequence_period_s: f64,
}

impl RBConfig {
    pub fn new(lengths: Vec<usize>, sequences_per_length: usize, shots: Shots, seed: u64) -> Result<Self> {
        let c = Self { lengths, sequences_per_length, shots, seed, sequence_period_s: 1.0 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() || self.lengths[0] == 0 || self.lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sequence lengths must be positive and strictly increasing"));
        }
        if self.sequences_per_length == 0 {
            return Err(Error::invalid("need at least one sequence per length"));
        }
        if let Shots::Finite(0) = self.shots {
            return Err(Error::invalid("shot count must be at least 1"));
        }
        Ok(())
    }
}

/// `count` distinct integers log-spaced between `min` and `max`. A value that
/// rounds onto its predecessor is bumped up by one.
pub fn log_spaced_lengths(min: usize, max: usize, count: usize) -> Result<Vec<usize>> {
    if min == 0 || max < min || count == 0 {
        return Err(Error::invalid("length grid needs 1 <= min <= max and count >= 1"));
    }
    let (a, b) = ((min as f64).ln(), (max as f64).ln());
    if count > max - min + 1 {
        return Err(Error::invalid(format!("cannot fit {count} distinct lengths in [{min}, {max}]")));
    }
    let mut out: Vec<usize> = Vec::with_capacity(count);
    for k in 0..count {
        let f = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
        let v = (a + (b - a) * f).exp().round() as usize;
        out.push(match out.last() {
            Some(&last) if v <= last => last + 1,
            _ => v,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Ground-state probability after the recovery gate.
    SurvivalProbability,
    /// Squared Bloch-vector norm.
    Purity,
}

impl Quantity {
    fn column(self) -> &'static str {
        match self {
            Quantity::SurvivalProbability => "p_g",
            Quantity::Purity => "purity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEntry {
    pub length: usize,
    pub sequence: usize,
    pub value: f64,
    pub timestamp_s: f64,
}

/// Per-sequence values of a benchmarking run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRecord {
    pub quantity: Quantity,
    pub entries: Vec<DecayEntry>,
}

/// Mean and spread of the sequences at one length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthSummary {
    pub length: usize,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl DecayRecord {
    /// Summaries in increasing length order.
    pub fn by_length(&self) -> Vec<LengthSummary> {
        let mut lengths: Vec<usize> = self.entries.iter().map(|e| e.length).collect();
        lengths.sort_unstable();
        lengths.dedup();
        lengths
            .into_iter()
            .map(|m| {
                let vals: Vec<f64> = self.entries.iter().filter(|e| e.length == m).map(|e| e.value).collect();
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let var = if vals.len() > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
                LengthSummary { length: m, mean, std: var.sqrt(), count: vals.len() }
            })
            .collect()
    }

    /// Columns `m,sequence,<quantity>,timestamp_s`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("m,sequence,{},timestamp_s\n", self.quantity.column());
        for e in &self.entries {
            writeln!(out, "{},{},{},{}", e.length, e.sequence, e.value, e.timestamp_s).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty decay record".into()))?;
        let quantity = match header.split(',').nth(2) {
            Some("p_g") => Quantity::SurvivalProbability,
            Some("purity") => Quantity::Purity,
            _ => return Err(Error::Parse(format!("unrecognized decay-record header '{header}'"))),
        };
        let entries = lines
            .enumerate()
            .map(|(k, line)| {
                let f: Vec<&str> = line.split(',').map(str::trim).collect();
                let bad = |e: String| Error::Parse(format!("line {}: {e}", k + 2));
                if f.len() != 4 {
                    return Err(bad("expected 4 fields".into()));
                }
                Ok(DecayEntry {
                    length: f[0].parse().map_err(|e| bad(format!("{e}")))?,
                    sequence: f[1].parse().map_err(|e| bad(format!("{e}")))?,
                    value: f[2].parse().map_err(|e| bad(format!("{e}")))?,
                    timestamp_s: f[3].parse().map_err(|e| bad(format!("{e}")))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { quantity, entries })
    }
}

/// Random sequence `n` at length index `i`, compiled to pulses, with the
/// primitive string kept so that measurement gates can be appended.
fn draw_program(seed: u64, i: usize, n: usize, length: usize) -> Result<(crate::clifford::PrimitiveSequence, SimRng)> {
    let mut rng = derived_rng(seed, &[i as u64, n as u64]);
    let seq = CliffordSequence::random(length, &mut rng);
    if !seq.is_consistent() {
        return Err(Error::Internal(format!("sequence {n} at length {length} does not invert to the identity")));
    }
    let prim = decompose_sequence(&seq.full(), &mut rng);
    Ok((prim, rng))
}

/// Measured ground-state probability of `program`.
fn measure_pg<B: Backend + ?Sized>(backend: &B, program: &PhysicalPulseList, shots: Shots, rng: &mut SimRng) -> Result<f64> {
    let rho = backend.execute(program)?;
    Ok(1.0 - sample_probability(observed_probability(rho.pe(), backend.visibility()), shots, rng)?)
}

fn with_context<T>(r: Result<T>, length: usize, n: usize) -> Result<T> {
    r.map_err(|e| e.context(format!("sequence {n} at length {length}")))
}

/// Randomized benchmarking: P_g per sequence.
pub fn run_rb<B: Backend + ?Sized>(backend: &B, config: &RBConfig) -> Result<DecayRecord> {
    config.validate()?;
    let n_seq = config.sequences_per_length;
    let entries = (0..config.lengths.len() * n_seq)
        .into_par_iter()
        .map(|k| {
            let (i, n) = (k / n_seq, k % n_seq);
            let m = config.lengths[i];
            with_context(
                (|| {
                    let (prim, _) = draw_program(config.seed, i, n, m)?;
                    let mut ro = derived_rng(derive_seed(config.seed, &[i as u64, n as u64]), &[0]);
                    let value = measure_pg(backend, &compile_virtual_z(&prim), config.shots, &mut ro)?;
                    Ok(DecayEntry { length: m, sequence: n, value, timestamp_s: k as f64 * config.sequence_period_s })
                })(),
                m,
                n,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayRecord { quantity: Quantity::SurvivalProbability, entries })
}

/// How purity is estimated from measured Bloch components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PurityEstimator {
    /// Sum of squared measured components.
    #[default]
    PlugIn,
    /// Each squared component corrected for binomial shot noise,
    /// `(s² − 1/n)/(1 − 1/n)`; identical to plug-in for infinite shots.
    BiasCorrected,
}

/// Purity-benchmarking output: purity per sequence plus the P_g of the
/// unmodified sequence, so both decays come from the same data.
#[derive(Debug, Clone, PartialEq)]
pub struct PbRecord {
    pub purity: DecayRecord,
    pub survival: DecayRecord,
}

/// Purity benchmarking: every sequence runs three times, unchanged and with
/// a final π/2 pulse about −y or x, to measure ⟨σz⟩, ⟨σx⟩ and ⟨σy⟩.
pub fn run_pb<B: Backend + ?Sized>(backend: &B, config: &RBConfig, estimator: PurityEstimator) -> Result<PbRecord> {
    config.validate()?;
    let n_seq = config.sequences_per_length;
    let rows = (0..config.lengths.len() * n_seq)
        .into_par_iter()
        .map(|k| {
            let (i, n) = (k / n_seq, k % n_seq);
            let m = config.lengths[i];
            with_context(
                (|| {
                    let (prim, mut rng) = draw_program(config.seed, i, n, m)?;
                    let base = derive_seed(config.seed, &[i as u64, n as u64]);
                    let mut components = [0.0; 3];
                    let mut pg_z = 0.0;
                    for (c, extra) in [None, Some(MEASURE_X), Some(MEASURE_Y)].into_iter().enumerate() {
                        let mut full = prim.clone();
                        if let Some(idx) = extra {
                            full.extend(&decompose(CliffordGate::from_index(idx)?, &mut rng));
                        }
                        let mut ro = derived_rng(base, &[c as u64]);
                        let pg = measure_pg(backend, &compile_virtual_z(&full), config.shots, &mut ro)?;
                        if c == 0 {
                            pg_z = pg;
                        }
                        components[c] = 2.0 * pg - 1.0;
                    }
                    let purity = match (estimator, config.shots) {
                        (PurityEstimator::BiasCorrected, Shots::Finite(s)) if s > 1 => {
                            let inv = 1.0 / s as f64;
                            components.iter().map(|v| (v * v - inv) / (1.0 - inv)).sum()
                        }
                        _ => components.iter().map(|v| v * v).sum::<f64>(),
                    };
                    let t = 3.0 * k as f64 * config.sequence_period_s;
                    Ok((
                        DecayEntry { length: m, sequence: n, value: purity, timestamp_s: t },
                        DecayEntry { length: m, sequence: n, value: pg_z, timestamp_s: t },
                    ))
                })(),
                m,
                n,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let (p, s): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(PbRecord {
        purity: DecayRecord { quantity: Quantity::Purity, entries: p },
        survival: DecayRecord { quantity: Quantity::SurvivalProbability, entries: s },
    })
}

/// Average gate fidelity `1/d + p(1 − 1/d)` for one qubit.
pub fn fidelity_from_decay(p: f64) -> f64 {
    0.5 + 0.5 * p
}

/// Incoherent error `(1 − √u)/2`.
pub fn incoherent_error(u: f64) -> f64 {
    0.5 * (1.0 - u.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitWeighting {
    /// Plain least squares on the per-length means.
    #[default]
    Unweighted,
    /// Weights `count/variance` per length.
    InverseVariance,
}

fn fit_decay(record: &DecayRecord, x_offset: f64, weighting: FitWeighting) -> Result<FitResult> {
    let summary = record.by_length();
    if summary.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 distinct lengths, got {}", summary.len())));
    }
    let xs: Vec<f64> = summary.iter().map(|s| s.length as f64).collect();
    let ys: Vec<f64> = summary.iter().map(|s| s.mean).collect();
    let weights = match weighting {
        FitWeighting::Unweighted => None,
        FitWeighting::InverseVariance => {
            let floor = summary.iter().map(|s| s.std * s.std).fold(0.0, f64::max).max(1e-12) * 1e-6;
            Some(summary.iter().map(|s| s.count as f64 / (s.std * s.std).max(floor)).collect())
        }
    };
    let opts = FitOptions { weights, ..Default::default() };
    let fit = fit_nlls(Model::ExpDecay { x_offset }, &xs, &ys, &opts)?;
    if !fit.converged {
        return Err(Error::FitFailure {
            message: format!("decay fit did not converge in {} iterations", fit.iterations),
            residual_norm: fit.residual_norm,
        });
    }
    Ok(fit)
}

#[derive(Debug, Clone)]
pub struct RbFit {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub fidelity: f64,
    pub p_stderr: Option<f64>,
    pub fidelity_stderr: Option<f64>,
    pub fit: FitResult,
}

impl RbFit {
    /// Average error per Clifford, `1 − F̄`.
    pub fn error(&self) -> f64 {
        1.0 - self.fidelity
    }

    pub fn report(&self) -> String {
        let mut out = self.fit.report();
        let err = self.fidelity_stderr.map_or("nan".into(), |e| format!("{e:.9e}"));
        writeln!(out, "fidelity {:.12e} {err}", self.fidelity).unwrap();
        out
    }
}

/// Fit `A·p^m + B` to the mean P_g per length.
pub fn fit_rb(record: &DecayRecord) -> Result<RbFit> {
    fit_rb_with(record, FitWeighting::Unweighted)
}

pub fn fit_rb_with(record: &DecayRecord, weighting: FitWeighting) -> Result<RbFit> {
    let fit = fit_decay(record, 0.0, weighting)?;
    let p = fit.get("p");
    let p_stderr = fit.stderr_of("p");
    Ok(RbFit {
        a: fit.get("A"),
        p,
        b: fit.get("B"),
        fidelity: fidelity_from_decay(p),
        p_stderr,
        fidelity_stderr: p_stderr.map(|e| 0.5 * e),
        fit,
    })
}

#[derive(Debug, Clone)]
pub struct PbFit {
    pub a: f64,
    pub u: f64,
    pub b: f64,
    pub eps_inc: f64,
    pub u_stderr: Option<f64>,
    pub eps_inc_stderr: Option<f64>,
    pub fit: FitResult,
}

impl PbFit {
    pub fn report(&self) -> String {
        let mut out = self.fit.report().replacen("p ", "u ", 1);
        let err = self.eps_inc_stderr.map_or("nan".into(), |e| format!("{e:.9e}"));
        writeln!(out, "eps_inc {:.12e} {err}", self.eps_inc).unwrap();
        out
    }
}

/// Fit `A′·u^(m−1) + B′` to the mean purity per length.
pub fn fit_pb(record: &DecayRecord) -> Result<PbFit> {
    fit_pb_with(record, FitWeighting::Unweighted)
}

pub fn fit_pb_with(record: &DecayRecord, weighting: FitWeighting) -> Result<PbFit> {
    let fit = fit_decay(record, 1.0, weighting)?;
    let u = fit.get("p");
    let u_stderr = fit.stderr_of("p");
    Ok(PbFit {
        a: fit.get("A"),
        u,
        b: fit.get("B"),
        eps_inc: incoherent_error(u),
        // d(ε_inc)/du = −1/(4√u)
        u_stderr,
        eps_inc_stderr: u_stderr.map(|e| e / (4.0 * u.max(f64::MIN_POSITIVE).sqrt())),
        fit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentError {
    pub eps_coh: f64,
    /// Set when the incoherent error exceeds the total.
    pub warning: Option<String>,
}

/// `ε_coh = ε − ε_inc`.
pub fn coherent_error(epsilon: f64, epsilon_inc: f64) -> Result<CoherentError> {
    if !(epsilon >= 0.0) || !(epsilon_inc >= 0.0) {
        return Err(Error::invalid("error rates must be non-negative"));
    }
    let eps_coh = epsilon - epsilon_inc;
    let warning = (eps_coh < 0.0).then(|| {
        format!("incoherent error {epsilon_inc} exceeds total error {epsilon}; the two fits disagree")
    });
    Ok(CoherentError { eps_coh, warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(quantity: Quantity, lengths: &[usize], f: impl Fn(f64) -> f64) -> DecayRecord {
        let entries = lengths
            .iter()
            .map(|&m| DecayEntry { length: m, sequence: 0, value: f(m as f64), timestamp_s: 0.0 })
            .collect();
        DecayRecord { quantity, entries }
    }

    #[test]
    fn reference_rb_and_pb_numbers() {
        assert!((fidelity_from_decay(0.99857) - 0.999285).abs() < 1e-12);
        assert!((incoherent_error(0.99798) - 5.05e-4).abs() < 1e-5);
        assert_eq!(incoherent_error(1.0), 0.0);
        let c = coherent_error(0.00094, 0.00050).unwrap();
        assert!((c.eps_coh - 0.00044).abs() < 1e-15 && c.warning.is_none());
        assert_eq!(coherent_error(0.3, 0.3).unwrap().eps_coh, 0.0);
        let neg = coherent_error(0.001, 0.0012).unwrap();
        assert!((neg.eps_coh + 0.0002).abs() < 1e-15 && neg.warning.is_some());
    }

    #[test]
    fn exact_synthetic_data_is_recovered() {
        let lengths = log_spaced_lengths(1, 5000, 28).unwrap();
        let rb = synthetic(Quantity::SurvivalProbability, &lengths, |m| 0.418 * 0.99857f64.powf(m) + 0.558);
        let fit = fit_rb(&rb).unwrap();
        assert!((fit.p - 0.99857).abs() < 1e-9 && (fit.a - 0.418).abs() < 1e-9 && (fit.b - 0.558).abs() < 1e-9);
        let pb = synthetic(Quantity::Purity, &lengths, |m| 0.85 * 0.99798f64.powf(m - 1.0) + 0.09);
        let fit = fit_pb(&pb).unwrap();
        assert!((fit.u - 0.99798).abs() < 1e-9 && (fit.a - 0.85).abs() < 1e-9 && (fit.b - 0.09).abs() < 1e-9);
        let flat = synthetic(Quantity::SurvivalProbability, &lengths, |_| 1.0);
        assert_eq!(fit_rb(&flat).unwrap().fidelity, 1.0);
    }

    #[test]
    fn noiseless_backend_gives_unit_survival_and_purity() {
        let cfg = RBConfig::new(vec![1, 5, 20, 50], 4, Shots::Infinite, 3).unwrap();
        let b = ChannelBackend::noiseless();
        let rb = run_rb(&b, &cfg).unwrap();
        assert!(rb.entries.iter().all(|e| (e.value - 1.0).abs() < 1e-12));
        let pb = run_pb(&b, &cfg, PurityEstimator::PlugIn).unwrap();
        assert!(pb.purity.entries.iter().all(|e| (e.value - 1.0).abs() < 1e-12));
    }

    #[test]
    fn coherent_noise_preserves_purity() {
        let noise = GateNoiseModel { overrotation: 0.02, axis_error: 0.01, ..GateNoiseModel::NOISELESS };
        let b = ChannelBackend::new(noise, 1.0).unwrap();
        let cfg = RBConfig::new(vec![1, 10, 40, 100], 5, Shots::Infinite, 8).unwrap();
        let pb = run_pb(&b, &cfg, PurityEstimator::PlugIn).unwrap();
        // the miscalibrated measurement pulses distort each purity value
        // slightly, but nothing decays with length (so u is not identifiable
        // beyond being 1)
        let means: Vec<f64> = pb.purity.by_length().iter().map(|s| s.mean).collect();
        assert!(means.iter().all(|m| (m - 1.0).abs() < 2e-3), "{means:?}");
        assert!((means[3] - means[0]).abs() < 1e-3);
        let rb = run_rb(&b, &cfg).unwrap();
        assert!(rb.entries.iter().any(|e| e.value < 0.999));
    }

    #[test]
    fn purity_decays_twice_as_fast_under_depolarizing_noise() {
        let lambda = 2e-3;
        let b = ChannelBackend::new(GateNoiseModel::depolarizing(lambda).unwrap(), 1.0).unwrap();
        let cfg = RBConfig::new(log_spaced_lengths(1, 400, 10).unwrap(), 20, Shots::Infinite, 5).unwrap();
        let pb = run_pb(&b, &cfg, PurityEstimator::PlugIn).unwrap();
        let rb_rate = 1.0 - fit_rb(&pb.survival).unwrap().p;
        let pb_rate = 1.0 - fit_pb(&pb.purity).unwrap().u;
        assert!((pb_rate / rb_rate - 2.0).abs() < 0.1, "{pb_rate} vs {rb_rate}");
    }

    #[test]
    fn records_are_reproducible_and_round_trip() {
        let cfg = RBConfig::new(vec![1, 3, 9], 3, Shots::Finite(200), 11).unwrap();
        let b = ChannelBackend::new(GateNoiseModel::depolarizing(0.01).unwrap(), 0.9).unwrap();
        let a = run_rb(&b, &cfg).unwrap();
        assert_eq!(a, run_rb(&b, &cfg).unwrap());
        assert_eq!(DecayRecord::from_csv(&a.to_csv()).unwrap(), a);
    }

    #[test]
    fn config_validation() {
        assert!(RBConfig::new(vec![3, 2], 1, Shots::Infinite, 0).is_err());
        assert!(RBConfig::new(vec![1, 2], 0, Shots::Infinite, 0).is_err());
        let grid = log_spaced_lengths(1, 5000, 28).unwrap();
        assert_eq!(grid.len(), 28);
        assert_eq!((grid[0], grid[27]), (1, 5000));
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        let short = synthetic(Quantity::SurvivalProbability, &[1, 2], |_| 0.5);
        assert!(fit_rb(&short).is_err());
    }
}
