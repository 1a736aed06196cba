// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};

const EDGE_TOL: f64 = 1e-9;

/// A trapezoidal flux pulse. `start` and `duration` refer to the ramp
/// midpoints, so the current reaches half height at `start` and at
/// `start + duration`; each ramp lasts `rise_time` and is centred on its edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPulse {
    pub delta_i: f64,
    pub start: f64,
    pub duration: f64,
    pub rise_time: f64,
}

impl FluxPulse {
    pub fn new(delta_i: f64, start: f64, duration: f64, rise_time: f64) -> Result<Self> {
        if !(duration >= 0.0) || !(rise_time >= 0.0) || !start.is_finite() || !delta_i.is_finite() {
            return Err(Error::invalid(format!(
                "flux pulse needs finite start/amplitude and non-negative duration and rise time \
                 (start {start}, duration {duration}, rise {rise_time})"
            )));
        }
        Ok(Self { delta_i, start, duration, rise_time })
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// First instant the current departs from zero.
    pub fn occupied_start(&self) -> f64 {
        self.start - 0.5 * self.rise_time
    }

    /// Last instant the current is nonzero.
    pub fn occupied_end(&self) -> f64 {
        self.end() + 0.5 * self.rise_time
    }

    /// Fraction of full amplitude at time `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        if self.rise_time == 0.0 {
            return if t >= self.start && t < self.end() { 1.0 } else { 0.0 };
        }
        let up = (t - self.occupied_start()) / self.rise_time;
        let down = (self.occupied_end() - t) / self.rise_time;
        up.min(down).clamp(0.0, 1.0)
    }

    /// Times where the envelope changes slope.
    pub(crate) fn breakpoints(&self) -> [f64; 4] {
        let h = 0.5 * self.rise_time;
        [self.start - h, self.start + h, self.end() - h, self.end() + h]
    }
}

/// When the continuous drive acts on the qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveMode {
    Off,
    Continuous,
    /// Only while a flux pulse is applied, ramps included. Between pulses the
    /// idling qubit is treated as decoupled from the far-detuned drive.
    DuringFluxPulses,
}

/// First-order settling of the flux line: every edge of height `h` leaves a
/// transient `−fraction·h·exp(−(t − t_edge)/tau_ns)` after the ramp ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettlingTail {
    pub fraction: f64,
    pub tau_ns: f64,
}

/// Time-ordered flux pulses under a fixed-frequency drive. Times in ns.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pulses: Vec<FluxPulse>,
    pub total_duration: f64,
    pub drive_amplitude: f64,
    pub drive_mode: DriveMode,
    /// Phase of the drive in the rotating frame; 0 drives about +x.
    pub drive_phase: f64,
    pub settling: Option<SettlingTail>,
}

impl PulseSchedule {
    pub fn new(
        pulses: Vec<FluxPulse>,
        total_duration: f64,
        drive_amplitude: f64,
        drive_mode: DriveMode,
    ) -> Result<Self> {
        let s = Self {
            pulses,
            total_duration,
            drive_amplitude,
            drive_mode,
            drive_phase: 0.0,
            settling: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// Schedule ending right after its last pulse.
    pub fn tight(pulses: Vec<FluxPulse>, drive_amplitude: f64, drive_mode: DriveMode) -> Result<Self> {
        let end = pulses.iter().map(|p| p.occupied_end()).fold(0.0, f64::max);
        Self::new(pulses, end, drive_amplitude, drive_mode)
    }

    pub fn with_settling(mut self, tail: SettlingTail) -> Result<Self> {
        if !(tail.tau_ns > 0.0) || !tail.fraction.is_finite() {
            return Err(Error::invalid("settling tail needs a positive time constant"));
        }
        self.settling = Some(tail);
        Ok(self)
    }

    pub fn pulses(&self) -> &[FluxPulse] {
        &self.pulses
    }

    fn validate(&self) -> Result<()> {
        if !(self.total_duration >= 0.0) || !self.drive_amplitude.is_finite() {
            return Err(Error::invalid("schedule needs a non-negative duration and finite drive"));
        }
        for w in self.pulses.windows(2) {
            if w[1].occupied_start() < w[0].occupied_end() - EDGE_TOL {
                return Err(Error::invalid(format!(
                    "flux pulses at {} ns and {} ns overlap (ramps included)",
                    w[0].start, w[1].start
                )));
            }
        }
        if let Some(first) = self.pulses.first() {
            if first.occupied_start() < -EDGE_TOL {
                return Err(Error::invalid("first flux pulse ramps up before t = 0"));
            }
        }
        if let Some(last) = self.pulses.last() {
            if last.occupied_end() > self.total_duration + EDGE_TOL {
                return Err(Error::invalid("total duration does not cover the last pulse"));
            }
        }
        Ok(())
    }

    /// Flux-pulse current at time `t`, µA, including settling transients.
    pub fn current(&self, t: f64) -> f64 {
        let mut i = 0.0;
        for p in &self.pulses {
            i += p.delta_i * p.envelope(t);
            if let Some(tail) = self.settling {
                let [_, up_end, _, down_end] = p.breakpoints();
                if t > up_end {
                    i -= tail.fraction * p.delta_i * (-(t - up_end) / tail.tau_ns).exp();
                }
                if t > down_end {
                    i += tail.fraction * p.delta_i * (-(t - down_end) / tail.tau_ns).exp();
                }
            }
        }
        i
    }

    pub fn drive_on(&self, t: f64) -> bool {
        match self.drive_mode {
            DriveMode::Off => false,
            DriveMode::Continuous => true,
            DriveMode::DuringFluxPulses => self
                .pulses
                .iter()
                .any(|p| t >= p.occupied_start() && t < p.occupied_end().max(p.occupied_start() + f64::MIN_POSITIVE)),
        }
    }

    /// Sorted distinct times in [0, total] where the Hamiltonian changes form.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.total_duration];
        for p in &self.pulses {
            pts.extend(p.breakpoints().iter().filter(|t| **t > 0.0 && **t < self.total_duration));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }

    /// Leading-edge times at which the device frame phase origin applies.
    pub(crate) fn leading_edges(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.occupied_start().max(0.0)).collect()
    }

    /// Whether the current is constant on (a, b): no ramp or settling inside.
    pub(crate) fn is_flat(&self, a: f64, b: f64) -> bool {
        if let Some(first) = self.pulses.first() {
            if self.settling.is_some() && b > first.breakpoints()[1] {
                return false;
            }
        }
        let mid = 0.5 * (a + b);
        self.pulses.iter().all(|p| {
            if p.rise_time == 0.0 {
                return true;
            }
            let [s0, s1, e0, e1] = p.breakpoints();
            !((mid > s0 && mid < s1) || (mid > e0 && mid < e1))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_reaches_half_height_at_nominal_edges() {
        let p = FluxPulse::new(10.0, 5.0, 20.0, 2.0).unwrap();
        assert!((p.envelope(5.0) - 0.5).abs() < 1e-12);
        assert!((p.envelope(25.0) - 0.5).abs() < 1e-12);
        assert_eq!(p.envelope(10.0), 1.0);
        assert_eq!(p.envelope(3.9), 0.0);
        assert_eq!(p.envelope(26.1), 0.0);
    }

    #[test]
    fn overlapping_ramps_are_rejected() {
        let a = FluxPulse::new(1.0, 1.0, 10.0, 2.0).unwrap();
        let b = FluxPulse::new(1.0, 12.5, 10.0, 2.0).unwrap();
        assert!(PulseSchedule::tight(vec![a, b], 0.0, DriveMode::Off).is_err());
        let c = FluxPulse::new(1.0, 13.0, 10.0, 2.0).unwrap();
        assert!(PulseSchedule::tight(vec![a, c], 0.0, DriveMode::Off).is_ok());
    }

    #[test]
    fn drive_gating_follows_pulses() {
        let a = FluxPulse::new(1.0, 1.0, 10.0, 2.0).unwrap();
        let s = PulseSchedule::new(vec![a], 20.0, 0.7, DriveMode::DuringFluxPulses).unwrap();
        assert!(s.drive_on(0.5));
        assert!(s.drive_on(11.9));
        assert!(!s.drive_on(12.1));
    }
}
