// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reproducible experiment runs driven by a [`Config`].
//!
//! Each experiment is prepared in two phases. [`prepare`] validates the
//! configuration and returns a [`Job`] whose plan can be printed without
//! computing anything; [`Job::run`] then produces CSV and text files.
//! [`write_outputs`] prefixes every file with a [`Header`] recording the
//! crate version, seed and configuration hash.
//!
//! ```
//! use fluxgate::experiments::{prepare, Config, Experiment};
//!
//! let job = prepare(Experiment::Verify, &Config::default()).unwrap();
//! let out = job.run().unwrap();
//! assert!(out.summary.iter().any(|l| l.starts_with("T ")));
//! ```

mod config;

pub use config::{
    linspace, AllanSection, BackendSection, BandConfig, CalibrateSection, ChevronSection, Config, IdleScanConfig,
    OnOffSection, QptSection, RamseyAxisSection, RbConfigSection, StabilitySection, SwapSpecConfig,
};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::{allan_csv, allan_deviation, log_log_slope, log_spaced_taus, TimeSeries};
use crate::benchmarking::{
    coherent_error, fit_pb_with, fit_rb_with, log_spaced_lengths, run_pb, run_rb, temporal_stability,
    Backend, ChannelBackend, FitWeighting, GateNoiseModel, PulseBackend, PurityEstimator, RBConfig, StabilityConfig,
    StabilitySeries,
};
use crate::demuxyz::{
    calibrate, qpt_pipeline, Calibration, CalibrationPlan, CompileOptions, FluxDistortion, Gate, QptOptions,
};
use crate::error::{Error, Result};
use crate::pulsesim::{
    chevron_asymmetry, idle_scan, mirrored_delta_i_grid, on_off_scan, on_off_stats, rabi_chevron, ramsey_axis_scan,
    swap_spectroscopy, DeviceParams, Prepared, RamseySetup, Readout, ReadoutBand, SettlingTail, Shots,
};
use crate::rng::derive_seed;
use crate::tomography::{bundled_fidelities, ReconstructionOptions, TargetGate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_CALIBRATION: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

/// Reference average gate fidelities (percent) of the bundled Choi
/// matrices, in [`TargetGate::ALL`] order.
pub const REFERENCE_FIDELITIES: [f64; 5] = [95.65, 96.23, 93.75, 88.93, 91.36];

/// Largest accepted deviation from [`REFERENCE_FIDELITIES`], percentage points.
pub const REFERENCE_TOLERANCE: f64 = 0.1;

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Config(_) | Error::Parse(_) | Error::InvalidArgument(_) | Error::Io(_) => EXIT_CONFIG,
        Error::FitFailure { .. } | Error::NumericalFailure(_) => EXIT_NOT_CONVERGED,
        Error::Calibration(_) => EXIT_CALIBRATION,
        Error::Internal(_) | Error::InvalidState(_) | Error::InvalidChannel(_) | Error::Context { .. } => EXIT_INTERNAL,
    }
}

/// The runnable experiments, one per subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    SwapSpec,
    IdleScan,
    Rb,
    Pb,
    RbStability,
    Allan,
    Chevron,
    OnOff,
    RamseyAxis,
    Calibrate,
    Qpt,
    Verify,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::SwapSpec,
        Experiment::IdleScan,
        Experiment::Rb,
        Experiment::Pb,
        Experiment::RbStability,
        Experiment::Allan,
        Experiment::Chevron,
        Experiment::OnOff,
        Experiment::RamseyAxis,
        Experiment::Calibrate,
        Experiment::Qpt,
        Experiment::Verify,
    ];

    /// Subcommand name.
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SwapSpec => "swap-spec",
            Experiment::IdleScan => "idle-scan",
            Experiment::Rb => "rb",
            Experiment::Pb => "pb",
            Experiment::RbStability => "rb-stability",
            Experiment::Allan => "allan",
            Experiment::Chevron => "chevron",
            Experiment::OnOff => "onoff",
            Experiment::RamseyAxis => "ramsey-axis",
            Experiment::Calibrate => "calibrate",
            Experiment::Qpt => "qpt",
            Experiment::Verify => "verify",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{name}'")))
    }

    /// Device preset used when the config names none.
    pub fn default_device(self) -> &'static str {
        match self {
            Experiment::Chevron | Experiment::OnOff => "demux-chevron",
            Experiment::RamseyAxis => "demux-ramsey",
            Experiment::Calibrate | Experiment::Qpt => "demux-qpt",
            _ => "socket",
        }
    }
}

/// One output file before the header is added.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub body: String,
}

impl OutputFile {
    fn new(name: impl Into<String>, body: String) -> Self {
        Self { name: name.into(), body }
    }
}

/// Result of a run. `failure` is set when the data were produced but a
/// fit or reconstruction did not converge; the files are still written.
#[derive(Debug)]
pub struct RunOutput {
    pub files: Vec<OutputFile>,
    pub summary: Vec<String>,
    pub failure: Option<Error>,
}

impl RunOutput {
    fn ok(files: Vec<OutputFile>, summary: Vec<String>) -> Self {
        Self { files, summary, failure: None }
    }

    pub fn file(&self, name: &str) -> Option<&OutputFile> {
        self.files.iter().find(|f| f.name == name)
    }

    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(EXIT_OK, exit_code)
    }
}

type Runner = Box<dyn FnOnce() -> Result<RunOutput> + Send>;

/// A validated experiment ready to run.
pub struct Job {
    pub experiment: Experiment,
    pub seed: u64,
    pub plan: Vec<String>,
    runner: Runner,
}

impl Job {
    pub fn plan_text(&self) -> String {
        let mut out = format!("experiment {}\nseed {}\n", self.experiment.name(), self.seed);
        for line in &self.plan {
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    pub fn run(self) -> Result<RunOutput> {
        (self.runner)()
    }
}

/// Comment block at the top of every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub experiment: Experiment,
    pub seed: u64,
    pub config_sha256: String,
    /// Seconds since the Unix epoch; omitted for byte-reproducible output.
    pub timestamp: Option<u64>,
}

impl Header {
    pub fn new(experiment: Experiment, config: &Config) -> Self {
        Self { experiment, seed: config.seed, config_sha256: config.sha256(), timestamp: None }
    }

    pub fn with_current_time(mut self) -> Self {
        self.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# fluxgate {}\n# experiment {}\n# seed {}\n# config_sha256 {}\n",
            env!("CARGO_PKG_VERSION"),
            self.experiment.name(),
            self.seed,
            self.config_sha256
        );
        if let Some(t) = self.timestamp {
            writeln!(out, "# generated_unix_s {t}").unwrap();
        }
        out
    }
}

/// Write every file of `output` into `dir` behind `header`.
pub fn write_outputs(dir: &Path, header: &Header, output: &RunOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
    let head = header.to_text();
    output
        .files
        .iter()
        .map(|f| {
            let path = dir.join(&f.name);
            std::fs::write(&path, format!("{head}{}", f.body))?;
            Ok(path)
        })
        .collect()
}

/// Validate `config` for `experiment` and build its job.
pub fn prepare(experiment: Experiment, config: &Config) -> Result<Job> {
    if let Some(name) = &config.experiment {
        if name != experiment.name() {
            return Err(Error::Config(format!(
                "config is for experiment '{name}' but '{}' was requested",
                experiment.name()
            )));
        }
    }
    let (plan, runner) = match experiment {
        Experiment::SwapSpec => swap_spec(config)?,
        Experiment::IdleScan => idle(config)?,
        Experiment::Rb => rb(config)?,
        Experiment::Pb => pb(config)?,
        Experiment::RbStability => stability(config)?,
        Experiment::Allan => allan(config)?,
        Experiment::Chevron => chevron(config)?,
        Experiment::OnOff => onoff(config)?,
        Experiment::RamseyAxis => ramsey(config)?,
        Experiment::Calibrate => calibration(config)?,
        Experiment::Qpt => qpt(config)?,
        Experiment::Verify => verify()?,
    };
    Ok(Job { experiment, seed: config.seed, plan, runner })
}

type JobParts = (Vec<String>, Runner);

fn config_err(section: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Config(_) => e,
        other => Error::Config(format!("[{section}] {other}")),
    }
}

fn device_line(p: &DeviceParams) -> String {
    format!(
        "device f_cw {} GHz, idle {:.4} GHz, T1 {} us, T2 {} us, visibility {}",
        p.f_cw_ghz,
        p.idle_freq(),
        p.t1_us,
        p.t2_us,
        p.visibility
    )
}

fn shots_text(shots: u64) -> String {
    if shots == 0 { "exact probabilities".into() } else { format!("{shots} shots") }
}

fn detuning_grid(p: &DeviceParams, section: &str, half_mhz: f64, points: usize) -> Result<Vec<f64>> {
    let det = linspace(&format!("{section}.detuning"), -1e-3 * half_mhz, 1e-3 * half_mhz, points)?;
    mirrored_delta_i_grid(p, &det).map_err(config_err(section))
}

fn swap_spec(cfg: &Config) -> Result<JobParts> {
    let s = &cfg.swap_spec;
    let p = cfg.device_params(Experiment::SwapSpec.default_device())?;
    let prepared = match s.prepared.as_str() {
        "excited" => Prepared::Excited,
        "ground" => Prepared::Ground,
        other => return Err(Error::Config(format!("[swap_spec] prepared must be excited or ground, got '{other}'"))),
    };
    let freqs = linspace("swap_spec.f", s.f_min_ghz, s.f_max_ghz, s.f_points)?;
    let times = linspace("swap_spec.t", 0.0, s.t_max_ns, s.t_points)?;
    for f in &freqs {
        p.delta_i_for_freq(*f).map_err(config_err("swap_spec"))?;
    }
    let readout = Readout { shots: Shots::from_config(s.shots), seed: cfg.seed };
    let plan = vec![
        device_line(&p),
        format!("prepared {}", s.prepared),
        format!("grid {} frequencies x {} times = {} cells", freqs.len(), times.len(), freqs.len() * times.len()),
        format!("readout {}", shots_text(s.shots)),
    ];
    let run = move || {
        let scan = swap_spectroscopy(&p, prepared, &freqs, &times, readout)?;
        Ok(RunOutput::ok(
            vec![
                OutputFile::new("swap_spec_pe.csv", scan.pe.to_csv()),
                OutputFile::new("swap_spec_prepared.csv", scan.prepared_prob.to_csv()),
            ],
            vec![format!("cells {}", freqs.len() * times.len())],
        ))
    };
    Ok((plan, Box::new(run)))
}

fn idle(cfg: &Config) -> Result<JobParts> {
    let s = &cfg.idle_scan;
    let p = cfg.device_params(Experiment::IdleScan.default_device())?;
    let freqs = linspace("idle_scan.f", s.f_min_ghz, s.f_max_ghz, s.f_points)?;
    for f in &freqs {
        p.delta_i_for_freq(*f).map_err(config_err("idle_scan"))?;
    }
    for b in &s.bands {
        if !(b.lo_ghz < b.hi_ghz) || !(0.0..=1.0).contains(&b.excess_pe) {
            return Err(Error::Config(format!("[idle_scan] bad readout band {b:?}")));
        }
    }
    if !(0.0..=1.0).contains(&s.thermal_pe) {
        return Err(Error::Config("[idle_scan] thermal_pe must be a probability".into()));
    }
    let bands: Vec<ReadoutBand> = s.bands.iter().copied().map(Into::into).collect();
    let thermal = s.thermal_pe;
    let readout = Readout { shots: Shots::from_config(s.shots), seed: cfg.seed };
    let plan = vec![
        device_line(&p),
        format!("{} idle frequencies, {} readout bands, thermal P_e {}", freqs.len(), bands.len(), thermal),
        format!("readout {}", shots_text(s.shots)),
    ];
    let run = move || {
        let scan = idle_scan(&p, &freqs, thermal, &bands, readout)?;
        Ok(RunOutput::ok(
            vec![OutputFile::new("idle_scan.csv", scan.to_csv())],
            vec![format!("p90 {:.6}", scan.p90)],
        ))
    };
    Ok((plan, Box::new(run)))
}

type SharedBackend = Box<dyn Backend + Send>;

fn build_backend(cfg: &Config, section: &str, b: &BackendSection) -> Result<(SharedBackend, String)> {
    let noise = GateNoiseModel {
        depolarizing_prob: b.depolarizing_prob,
        amplitude_damping_prob: b.amplitude_damping_prob,
        overrotation: b.overrotation_rad,
        axis_error: b.axis_error_rad,
    };
    match b.kind.as_str() {
        "channel" => {
            let backend = ChannelBackend::new(noise, b.visibility).map_err(config_err(section))?;
            let line = format!(
                "backend channel: depolarizing {}, amplitude damping {}, overrotation {} rad, axis error {} rad, visibility {}",
                noise.depolarizing_prob, noise.amplitude_damping_prob, noise.overrotation, noise.axis_error, b.visibility
            );
            Ok((Box::new(backend), line))
        }
        "pulse" => {
            let p = cfg.device_params(Experiment::Rb.default_device())?;
            let line = format!("backend pulse: {} ns slots; {}", b.slot_ns, device_line(&p));
            Ok((Box::new(PulseBackend::new(p, b.slot_ns).map_err(config_err(section))?), line))
        }
        other => Err(Error::Config(format!("[{section}.backend] kind must be channel or pulse, got '{other}'"))),
    }
}

fn lengths(section: &str, explicit: &[usize], min: usize, max: usize, count: usize) -> Result<Vec<usize>> {
    if explicit.is_empty() {
        return log_spaced_lengths(min, max, count).map_err(config_err(section));
    }
    if explicit[0] == 0 || explicit.windows(2).any(|w| w[1] <= w[0]) || explicit.len() < 3 {
        return Err(Error::Config(format!("[{section}] lengths must be at least 3 increasing positive values")));
    }
    Ok(explicit.to_vec())
}

fn weighting(section: &str, name: &str) -> Result<FitWeighting> {
    match name {
        "unweighted" => Ok(FitWeighting::Unweighted),
        "inverse-variance" => Ok(FitWeighting::InverseVariance),
        other => Err(Error::Config(format!("[{section}] weighting must be unweighted or inverse-variance, got '{other}'"))),
    }
}

fn rb_config(cfg: &Config, section: &str, s: &RbConfigSection) -> Result<RBConfig> {
    let lengths = lengths(section, &s.lengths, s.min_length, s.max_length, s.length_count)?;
    RBConfig::new(lengths, s.sequences_per_length, Shots::from_config(s.shots), cfg.seed).map_err(config_err(section))
}

fn rb_plan(rc: &RBConfig, backend_line: String, shots: u64) -> Vec<String> {
    vec![
        backend_line,
        format!("lengths {:?}", rc.lengths),
        format!("{} sequences per length", rc.sequences_per_length),
        format!("readout {}", shots_text(shots)),
    ]
}

fn rb(cfg: &Config) -> Result<JobParts> {
    let s = &cfg.rb;
    let (backend, line) = build_backend(cfg, "rb", &s.backend)?;
    let rc = rb_config(cfg, "rb", s)?;
    let w = weighting("rb", &s.weighting)?;
    let plan = rb_plan(&rc, line, s.shots);
    let run = move || {
        let record = run_rb(backend.as_ref(), &rc)?;
        let mut files = vec![OutputFile::new("rb_decay.csv", record.to_csv())];
        match fit_rb_with(&record, w) {
            Ok(fit) => {
                files.push(OutputFile::new("rb_fit.txt", fit.report()));
                let err = fit.fidelity_stderr.map_or(String::new(), |e| format!(" +- {e:.6}"));
                Ok(RunOutput::ok(files, vec![format!("F_avg = {:.6}{err}", fit.fidelity), format!("p = {:.6}", fit.p)]))
            }
            Err(e) => Ok(RunOutput { files, summary: vec![format!("fit failed: {e}")], failure: Some(e) }),
        }
    };
    Ok((plan, Box::new(run)))
}

fn pb(cfg: &Config) -> Result<JobParts> {
    let s = &cfg.pb;
    let (backend, line) = build_backend(cfg, "pb", &s.backend)?;
    let rc = rb_config(cfg, "pb", s)?;
    let w = weighting("pb", &s.weighting)?;
    let estimator = match s.purity_estimator.as_str() {
        "plug-in" => PurityEstimator::PlugIn,
        "bias-corrected" => PurityEstimator::BiasCorrected,
        other => {
            return Err(Error::Config(format!("[pb] purity_estimator must be plug-in or bias-corrected, got '{other}'")))
        }
    };
    let mut plan = rb_plan(&rc, line, s.shots);
    plan.push(format!("purity estimator {}", s.purity_estimator));
    let run = move || {
        let record = run_pb(backend.as_ref(), &rc, estimator)?;
        let mut files = vec![
            OutputFile::new("pb_purity.csv", record.purity.to_csv()),
            OutputFile::new("pb_survival.csv", record.survival.to_csv()),
        ];
        let fits = fit_pb_with(&record.purity, w).and_then(|pf| Ok((pf, fit_rb_with(&record.survival, w)?)));
        let (pf, rf) = match fits {
            Ok(f) => f,
            Err(e) => return Ok(RunOutput { files, summary: vec![format!("fit failed: {e}")], failure: Some(e) }),
        };
        let coh = coherent_error(rf.error().max(0.0), pf.eps_inc.max(0.0))?;
        let mut report = format!("[purity]\n{}[survival]\n{}", pf.report(), rf.report());
        writeln!(report, "eps_coh {:.12e}", coh.eps_coh).unwrap();
        files.push(OutputFile::new("pb_fit.txt", report));
        let mut summary = vec![
            format!("u = {:.6}", pf.u),
            format!("eps_inc = {:.6e}", pf.eps_inc),
            format!("F_avg = {:.6}", rf.fidelity),
            format!("eps_coh = {:.6e}", coh.eps_coh),
        ];
        summary.extend(coh.warning.map(|w| format!("warning: {w}")));
        Ok(RunOutput::ok(files, summary))
    };
    Ok((plan, Box::new(run)))
}

fn stability_config(cfg: &Config) -> Result<(StabilityConfig, SharedBackend, Vec<String>)> {
    let s = &cfg.rb_stability;
    let (backend, line) = build_backend(cfg, "rb_stability", &s.backend)?;
    let sc = StabilityConfig {
        lengths: lengths("rb_stability", &s.lengths, s.min_length, s.max_length, s.length_count)?,
        iterations: s.iterations,
        window: s.window,
        shots: Shots::from_config(s.shots),
        seed: cfg.seed,
        iteration_period_s: s.iteration_period_s,
    };
    if sc.window == 0 || sc.iterations < sc.window || !(sc.iteration_period_s > 0.0) {
        return Err(Error::Config(format!(
            "[rb_stability] need 0 < window <= iterations and a positive period, got window {} of {} iterations",
            sc.window, sc.iterations
        )));
    }
    let plan = vec![
        line,
        format!("lengths {:?}", sc.lengths),
        format!("{} iterations every {} s, one sequence per length each", sc.iterations, sc.iteration_period_s),
        format!("readout {}", shots_text(s.shots)),
    ];
    Ok((sc, backend, plan))
}

fn series_stats(series: &StabilitySeries) -> (f64, f64) {
    let n = series.fidelity.len() as f64;
    let mean = series.fidelity.iter().sum::<f64>() / n;
    let var = series.fidelity.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

fn stability(cfg: &Config) -> Result<JobParts> {
    let (sc, backend, mut plan) = stability_config(cfg)?;
    plan.push(format!("moving window {} iterations", sc.window));
    let run = move || {
        let series = temporal_stability(backend.as_ref(), &sc)?;
        let (mean, std) = series_stats(&series);
        Ok(RunOutput::ok(
            vec![OutputFile::new("rb_stability.csv", series.to_csv())],
            vec![format!("F_avg mean {mean:.6}"), format!("F_avg std {std:.3e}")],
        ))
    };
    Ok((plan, Box::new(run)))
}

/// Centers of non-overlapping windows of `window` iterations.
fn block_centers(n: usize, window: usize) -> Vec<usize> {
    let back = window / 2;
    (0..n / window).map(|k| k * window + back).collect()
}

fn allan(cfg: &Config) -> Result<JobParts> {
    let (mut sc, backend, mut plan) = stability_config(cfg)?;
    let a = cfg.allan.clone();
    if a.window == 0 || sc.iterations / a.window < 4 || a.taus_per_decade == 0 {
        return Err(Error::Config(format!(
            "[allan] window {} leaves fewer than 4 blocks of {} iterations",
            a.window, sc.iterations
        )));
    }
    sc.window = a.window;
    plan.push(format!("fidelity refit over {} blocks of {} iterations", sc.iterations / a.window, a.window));
    plan.push(format!("{} averaging times per decade", a.taus_per_decade));
    let run = move || {
        let series = temporal_stability(backend.as_ref(), &sc)?;
        let centers = block_centers(series.fidelity.len(), a.window);
        // the centered window at a block center spans exactly that block
        let values: Vec<f64> = centers.iter().map(|&j| series.fidelity[j]).collect();
        let times: Vec<f64> = centers.iter().map(|&j| series.times_s[j]).collect();
        let ts = TimeSeries::new(times.clone(), values.clone())?;
        let taus = log_spaced_taus(&ts, a.taus_per_decade)?;
        let points = allan_deviation(&ts, &taus)?;
        let slope = log_log_slope(&points);
        let mut series_csv = String::from("t_s,fidelity\n");
        for (t, v) in times.iter().zip(&values) {
            writeln!(series_csv, "{t},{v}").unwrap();
        }
        Ok(RunOutput::ok(
            vec![OutputFile::new("allan_series.csv", series_csv), OutputFile::new("allan.csv", allan_csv(&points))],
            vec![format!("blocks {}", values.len()), format!("log-log slope {slope:.4}")],
        ))
    };
    Ok((plan, Box::new(run)))
}

fn chevron(cfg: &Config) -> Result<JobParts> {
    let s = &cfg.chevron;
    let p = cfg.device_params(Experiment::Chevron.default_device())?;
    let delta_is = detuning_grid(&p, "chevron", s.detuning_mhz, s.detuning_points)?;
    let times = linspace("chevron.t", 0.0, s.t_max_ns, s.t_points)?;
    let readout = Readout { shots: Shots::from_config(s.shots), seed: cfg.seed };
    let plan = vec![
        device_line(&p),
        format!("{} flux amplitudes over +-{} MHz x {} durations", delta_is.len(), s.detuning_mhz, times.len()),
        format!("readout {}", shots_text(s.shots)),
    ];
    let run = move || {
        let map = rabi_chevron(&p, &delta_is, &times, readout)?;
        let asym = chevron_asymmetry(&map);
        Ok(RunOutput::ok(vec![OutputFile::new("chevron.csv", map.to_csv())], vec![format!("asymmetry {asym:.6}")]))
    };
    Ok((plan, Box::new(run)))
}

fn onoff(cfg: &Config) -> Result<JobParts> {
    let s = &cfg.onoff;
    let p = cfg.device_params(Experiment::OnOff.default_device())?;
    let v_dr = if s.v_dr.is_empty() {
        vec![0.0, 0.5 * p.drive_voltage_v, p.drive_voltage_v]
    } else {
        s.v_dr.clone()
    };
    if v_dr.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Config("[onoff] drive amplitudes must be finite and non-negative".into()));
    }
    if s.t_points < 10 {
        return Err(Error::Config("[onoff] need at least 10 durations per column".into()));
    }
    let delta_is = detuning_grid(&p, "onoff", s.detuning_mhz, s.detuning_points)?;
    let times = linspace("onoff.t", 0.0, s.t_max_ns, s.t_points)?;
    let readout = Readout { shots: Shots::from_config(s.shots), seed: cfg.seed };
    let plan = vec![
        device_line(&p),
        format!("drive amplitudes {v_dr:?} V"),
        format!("{} flux amplitudes x {} durations each", delta_is.len(), times.len()),
        format!("readout {}", shots_text(s.shots)),
    ];
    let run = move || {
        let maps = on_off_scan(&p, &v_dr, &delta_is, &times, readout)?;
        let stats = on_off_stats(&maps, &v_dr)?;
        let mut files: Vec<OutputFile> =
            maps.iter().enumerate().map(|(k, m)| OutputFile::new(format!("onoff_chevron_{k}.csv"), m.to_csv())).collect();
        files.push(OutputFile::new("onoff_delta_pe5.csv", stats.delta_pe5.to_csv()));
        Ok(RunOutput::ok(files, vec![format!("on-off ratio {:.3}", stats.ratio)]))
    };
    Ok((plan, Box::new(run)))
}

fn ramsey(cfg: &Config) -> Result<JobParts> {
    let s = &cfg.ramsey_axis;
    let p = cfg.device_params(Experiment::RamseyAxis.default_device())?;
    let dt_min = s.dt_min_ns.unwrap_or(p.rise_time_ns);
    if dt_min < p.rise_time_ns {
        return Err(Error::Config(format!("[ramsey_axis] dt_min_ns {dt_min} is below the rise time {}", p.rise_time_ns)));
    }
    let dis = linspace("ramsey_axis.di", s.di_min_ua, s.di_max_ua, s.di_points)?;
    let dts = linspace("ramsey_axis.dt", dt_min, s.dt_max_ns, s.dt_points)?;
    let readout = Readout { shots: Shots::from_config(s.shots), seed: cfg.seed };
    let plan = vec![
        device_line(&p),
        format!("{} middle amplitudes x {} gaps from {dt_min} ns", dis.len(), dts.len()),
        format!("readout {}", shots_text(s.shots)),
    ];
    let run = move || {
        let setup = RamseySetup::calibrated(&p)?;
        let map = ramsey_axis_scan(&p, &setup, &dis, &dts, readout)?;
        Ok(RunOutput::ok(
            vec![OutputFile::new("ramsey_axis.csv", map.to_csv())],
            vec![format!("half-pi pulse {:.4} ns at {:.4} uA", setup.t_half_pi, setup.delta_i_res)],
        ))
    };
    Ok((plan, Box::new(run)))
}

fn calibration_plan(p: &DeviceParams, s: &CalibrateSection, seed: u64) -> Result<CalibrationPlan> {
    let r = p.rise_time_ns;
    Ok(CalibrationPlan {
        delta_is: detuning_grid(p, "calibrate", s.detuning_mhz, s.detuning_points)?,
        chevron_times: linspace("calibrate.chevron_t", 0.0, s.chevron_t_max_ns, s.chevron_t_points)?,
        rabi_times: linspace("calibrate.rabi_t", 0.0, s.rabi_t_max_ns, s.rabi_t_points)?,
        ramsey_delays: linspace("calibrate.ramsey", r, r + s.ramsey_span_ns, s.ramsey_points)?,
        readout: Readout { shots: Shots::from_config(s.shots), seed },
    })
}

fn xy_csv(x_name: &str, y_name: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut out = format!("{x_name},{y_name}\n");
    for (x, y) in xs.iter().zip(ys) {
        writeln!(out, "{x},{y}").unwrap();
    }
    out
}

fn calibration_summary(c: &Calibration) -> Vec<String> {
    vec![
        format!("delta_i_res {:.4} uA", c.delta_i_res),
        format!("t_pi {:.4} ns", c.t_pi),
        format!("axis_period {:.4} ns", c.axis_period),
        format!("phase_offset {:.4} rad", c.phase_offset),
    ]
}

fn calibration(cfg: &Config) -> Result<JobParts> {
    let p = cfg.device_params(Experiment::Calibrate.default_device())?;
    let cp = calibration_plan(&p, &cfg.calibrate, cfg.seed)?;
    let plan = vec![
        device_line(&p),
        format!("step 1: chevron {} amplitudes x {} durations", cp.delta_is.len(), cp.chevron_times.len()),
        format!("step 2: resonant Rabi over {} durations", cp.rabi_times.len()),
        format!("step 3: Ramsey over {} delays", cp.ramsey_delays.len()),
        format!("readout {}", shots_text(cfg.calibrate.shots)),
    ];
    let run = move || {
        let run = calibrate(&p, &cp)?;
        let a = &run.amplitude;
        let mut fits = format!("[rabi]\n{}[ramsey]\n{}", run.duration.fit.report(), run.timing.fit.report());
        writeln!(fits, "axis_period_stderr {:.6e}", run.timing.axis_period_stderr).unwrap();
        Ok(RunOutput::ok(
            vec![
                OutputFile::new("calibration_chevron.csv", a.chevron.to_csv()),
                OutputFile::new("calibration_contrast.csv", xy_csv("delta_i_uA", "contrast", &a.chevron.cols, &a.contrast)),
                OutputFile::new("calibration_rabi.csv", xy_csv("t_ns", "pe", &run.duration.times, &run.duration.pe)),
                OutputFile::new("calibration_ramsey.csv", xy_csv("delay_ns", "pe", &run.timing.delays, &run.timing.pe)),
                OutputFile::new("calibration_fits.txt", fits),
                OutputFile::new("calibration.toml", run.calibration.to_text()),
            ],
            calibration_summary(&run.calibration),
        ))
    };
    Ok((plan, Box::new(run)))
}

enum CalibrationSource {
    Fixed(Calibration, String),
    Run(CalibrationPlan),
}

fn file_key(gate: &Gate) -> String {
    match gate.target() {
        Some(t) => t.key().to_string(),
        None => gate
            .label()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
            .collect(),
    }
}

fn qpt(cfg: &Config) -> Result<JobParts> {
    let s = &cfg.qpt;
    let p = cfg.device_params(Experiment::Qpt.default_device())?;
    if s.gates.is_empty() {
        return Err(Error::Config("[qpt] gates is empty".into()));
    }
    let gates = s.gates.iter().map(|g| Gate::parse(g)).collect::<Result<Vec<_>>>().map_err(config_err("qpt"))?;
    let mut keys: Vec<String> = gates.iter().map(file_key).collect();
    keys.sort();
    keys.dedup();
    if keys.len() != gates.len() {
        return Err(Error::Config("[qpt] gates must be distinct".into()));
    }
    let source = match s.calibration.as_str() {
        "nominal" => CalibrationSource::Fixed(Calibration::nominal(&p)?, "nominal (from device parameters)".into()),
        "calibrate" => CalibrationSource::Run(calibration_plan(&p, &cfg.calibrate, derive_seed(cfg.seed, &[1]))?),
        file => {
            let path = cfg.base_dir.join(file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read calibration file {}: {e}", path.display())))?;
            let cal = Calibration::from_text(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            CalibrationSource::Fixed(cal, format!("file {}", path.display()))
        }
    };
    let reconstruction = ReconstructionOptions {
        step_size: s.step_size,
        max_iterations: s.max_iterations,
        tolerance: s.tolerance,
        projection_rounds: s.projection_rounds,
        visibility: s.visibility_correction.then_some(p.visibility),
    };
    reconstruction.validate().map_err(config_err("qpt"))?;
    if !(s.delay_resolution_ns >= 0.0) || !(s.min_gap_ns >= 0.0) || !(s.settling_fraction >= 0.0) || !(s.settling_tau_ns > 0.0) {
        return Err(Error::Config("[qpt] timing parameters must be non-negative".into()));
    }
    let opts = QptOptions {
        shots: Shots::from_config(s.shots),
        seed: cfg.seed,
        compile: CompileOptions {
            min_gap_ns: s.min_gap_ns,
            delay_resolution_ns: (s.delay_resolution_ns > 0.0).then_some(s.delay_resolution_ns),
            ..CompileOptions::default()
        },
        distortion: FluxDistortion {
            amplitude_error: s.amplitude_error,
            timing_jitter_ns: s.timing_jitter_ns,
            settling: (s.settling_fraction > 0.0)
                .then_some(SettlingTail { fraction: s.settling_fraction, tau_ns: s.settling_tau_ns }),
        },
        reconstruction,
    };
    let mut plan = vec![
        device_line(&p),
        format!("gates {}", gates.iter().map(Gate::label).collect::<Vec<_>>().join(", ")),
        match &source {
            CalibrationSource::Fixed(_, what) => format!("calibration {what}"),
            CalibrationSource::Run(_) => "calibration measured first with the [calibrate] grids".into(),
        },
        format!("36 programs per gate, readout {}", shots_text(s.shots)),
    ];
    if !opts.distortion.is_ideal() {
        plan.push(format!("flux distortion {:?}", opts.distortion));
    }
    let run = move || {
        let cal = match source {
            CalibrationSource::Fixed(c, _) => c,
            CalibrationSource::Run(cp) => calibrate(&p, &cp)?.calibration,
        };
        let report = qpt_pipeline(&p, &cal, &gates, &opts)?;
        let mut files = vec![OutputFile::new("qpt_calibration.toml", cal.to_text())];
        let mut summary = Vec::new();
        for g in &report.gates {
            let key = file_key(&g.gate);
            files.push(OutputFile::new(format!("qpt_record_{key}.csv"), g.record.to_csv()));
            files.push(OutputFile::new(format!("qpt_choi_{key}.txt"), g.reconstruction.choi.to_text()));
            summary.push(format!(
                "{} F_avg {:.3} % ({} iterations{})",
                g.gate.label(),
                100.0 * g.fidelity,
                g.reconstruction.iterations,
                if g.reconstruction.converged { "" } else { ", not converged" }
            ));
        }
        files.push(OutputFile::new("qpt_fidelities.csv", report.to_text()));
        let failure = report.gates.iter().find(|g| !g.reconstruction.converged).map(|g| Error::FitFailure {
            message: format!("reconstruction of {} did not converge", g.gate.label()),
            residual_norm: g.reconstruction.cost.sqrt(),
        });
        Ok(RunOutput { files, summary, failure })
    };
    Ok((plan, Box::new(run)))
}

fn verify() -> Result<JobParts> {
    let plan = vec![
        "score the five bundled Choi matrices against their ideal gates".into(),
        format!("accept within {REFERENCE_TOLERANCE} points of the reference values"),
    ];
    let run = || {
        let table = bundled_fidelities()?;
        let mut summary = Vec::new();
        let mut worst: Option<(TargetGate, f64)> = None;
        for (gate, reference) in TargetGate::ALL.into_iter().zip(REFERENCE_FIDELITIES) {
            let f = 100.0 * table.get(gate).ok_or_else(|| Error::Internal(format!("{} missing", gate.label())))?;
            summary.push(format!("{} {f:.3} % (reference {reference:.2} %)", gate.label()));
            let dev = (f - reference).abs();
            if dev > REFERENCE_TOLERANCE && worst.is_none_or(|(_, d)| dev > d) {
                worst = Some((gate, dev));
            }
        }
        let failure = worst.map(|(g, d)| Error::Internal(format!("{} deviates {d:.3} points from its reference", g.label())));
        Ok(RunOutput { files: vec![OutputFile::new("verify_fidelities.csv", table.to_text())], summary, failure })
    };
    Ok((plan, Box::new(run)))
}
