// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-level simulation and characterization of a single flux-tunable qubit.
//!
//! The crate covers four workflows:
//!
//! * randomized and purity benchmarking over the one-qubit Clifford group
//!   with virtual-Z compilation ([`benchmarking`], [`clifford`]);
//! * time-domain simulation of a flux-pulsed qubit under a continuous drive
//!   ([`pulsesim`]) and the DemuXYZ calibration and gate compiler built on it
//!   ([`demuxyz`]);
//! * process tomography with CPTP-constrained Choi reconstruction
//!   ([`tomography`]);
//! * curve fitting and Allan-deviation analysis ([`analysis`]).
//!
//! [`experiments`] ties these together into reproducible runs that write
//! plot-ready CSV files; the `fluxgate` binary is a thin front end over it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod benchmarking;
pub mod clifford;
pub mod demuxyz;
pub mod error;
pub mod experiments;
pub mod pulsesim;
pub mod qcore;
pub mod rng;
pub mod tomography;

pub use error::{Error, Result};
