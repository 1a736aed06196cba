// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::device::DeviceParams;
use crate::error::{Error, Result};
use crate::qcore::DensityMatrix;

/// Number of single-shot measurements behind one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Finite(u64),
    /// Return the observed probability without sampling noise.
    Infinite,
}

impl Shots {
    pub fn finite(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("shot count must be at least 1"));
        }
        Ok(Self::Finite(n))
    }

    /// `0` maps to [`Shots::Infinite`], as in config files.
    pub fn from_config(n: u64) -> Self {
        if n == 0 {
            Self::Infinite
        } else {
            Self::Finite(n)
        }
    }
}

/// Visibility-compressed excited-state probability `½ + v(P_e − ½)`.
pub fn observed_probability(pe: f64, visibility: f64) -> f64 {
    0.5 + visibility * (pe.clamp(0.0, 1.0) - 0.5)
}

/// Estimate of the observed probability from `shots` binary outcomes.
pub fn sample_probability<R: Rng + ?Sized>(p_obs: f64, shots: Shots, rng: &mut R) -> Result<f64> {
    match shots {
        Shots::Infinite => Ok(p_obs),
        Shots::Finite(0) => Err(Error::invalid("shot count must be at least 1")),
        Shots::Finite(n) => {
            let dist = Binomial::new(n, p_obs.clamp(0.0, 1.0))
                .map_err(|e| Error::Internal(format!("binomial sampler: {e}")))?;
            Ok(dist.sample(rng) as f64 / n as f64)
        }
    }
}

/// Measured P_e of `rho` through the device readout.
pub fn measure<R: Rng + ?Sized>(rho: &DensityMatrix, p: &DeviceParams, shots: Shots, rng: &mut R) -> Result<f64> {
    sample_probability(observed_probability(rho.pe(), p.visibility), shots, rng)
}
