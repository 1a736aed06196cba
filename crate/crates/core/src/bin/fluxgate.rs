// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: one subcommand per experiment.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fluxgate::experiments::{exit_code, prepare, write_outputs, Config, Experiment, Header, EXIT_CONFIG};
use fluxgate::{Error, Result};

const OUT_DIR_ENV: &str = "FLUXGATE_OUT_DIR";

#[derive(Parser)]
#[command(name = "fluxgate", version, about = "Single-qubit benchmarking, DemuXYZ and tomography simulations")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides FLUXGATE_OUT_DIR and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Validate the config and print the plan without computing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Maximum worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Leave the timestamp out of file headers.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Swap-spectroscopy maps of P_e vs idle frequency and time.
    SwapSpec,
    /// Residual excitation vs idle frequency with its 90th percentile.
    IdleScan,
    /// Randomized benchmarking decay and fit report.
    Rb,
    /// Purity benchmarking decay and incoherent error.
    Pb,
    /// Moving-window fidelity over repeated RB iterations.
    RbStability,
    /// Allan deviation of the repeated-RB fidelity.
    Allan,
    /// Rabi chevron under a flux-pulsed drive.
    Chevron,
    /// Chevrons at several drive amplitudes and the on-off ratio.
    Onoff,
    /// Axis angle vs middle flux pulse amplitude and gap.
    RamseyAxis,
    /// Three-step DemuXYZ calibration and calibration file.
    Calibrate,
    /// Process tomography of DemuXYZ gates.
    Qpt,
    /// Score the bundled Choi matrices against their reference fidelities.
    Verify,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::SwapSpec => Experiment::SwapSpec,
            Command::IdleScan => Experiment::IdleScan,
            Command::Rb => Experiment::Rb,
            Command::Pb => Experiment::Pb,
            Command::RbStability => Experiment::RbStability,
            Command::Allan => Experiment::Allan,
            Command::Chevron => Experiment::Chevron,
            Command::Onoff => Experiment::OnOff,
            Command::RamseyAxis => Experiment::RamseyAxis,
            Command::Calibrate => Experiment::Calibrate,
            Command::Qpt => Experiment::Qpt,
            Command::Verify => Experiment::Verify,
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let experiment = cli.command.experiment();
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("fluxgate-out"));
    let job = prepare(experiment, &config)?;
    if cli.dry_run {
        print!("{}", job.plan_text());
        println!("output {}", out_dir.display());
        return Ok(0);
    }
    println!("{} seed {}", experiment.name(), config.seed);
    let output = match cli.jobs {
        Some(0) => return Err(Error::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(|| job.run())?,
        None => job.run()?,
    };
    let mut header = Header::new(experiment, &config);
    if !cli.no_timestamp {
        header = header.with_current_time();
    }
    let paths = write_outputs(&out_dir, &header, &output)?;
    for line in &output.summary {
        println!("{line}");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    if let Some(e) = &output.failure {
        eprintln!("error: {e}");
    }
    Ok(output.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = execute(&cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    });
    debug_assert!(code == 0 || code >= EXIT_CONFIG);
    ExitCode::from(code as u8)
}
