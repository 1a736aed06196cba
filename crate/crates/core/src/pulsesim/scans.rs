// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use rayon::prelude::*;

use super::device::{current_from_freq, DeviceParams};
use super::evolve::{auto_dt, evolve_final};
use super::readout::{observed_probability, sample_probability, Shots};
use super::schedule::{DriveMode, FluxPulse, PulseSchedule};
use crate::analysis::percentile;
use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix, C64};
use crate::rng::derived_rng;

/// Values on a rectangular grid, `values[row][col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMap {
    pub row_name: String,
    pub col_name: String,
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl HeatMap {
    pub fn new(row_name: &str, col_name: &str, rows: Vec<f64>, cols: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != rows.len() || values.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::invalid("heat-map values do not match the grid"));
        }
        Ok(Self { row_name: row_name.into(), col_name: col_name.into(), rows, cols, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row][col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[col]).collect()
    }

    /// Header `row\col,c0,c1,...`, then one line per row starting with its coordinate.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\\{}", self.row_name, self.col_name);
        for c in &self.cols {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
        for (r, row) in self.rows.iter().zip(&self.values) {
            write!(out, "{r}").unwrap();
            for v in row {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`to_csv`](Self::to_csv); `#` comment lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty heat-map CSV".into()))?;
        let mut cells = header.split(',');
        let names = cells.next().unwrap_or_default();
        let (row_name, col_name) = names.split_once('\\').unwrap_or((names, ""));
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}")));
        let cols = cells.map(parse).collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let mut cells = line.split(',');
            rows.push(parse(cells.next().unwrap_or_default())?);
            values.push(cells.map(parse).collect::<Result<Vec<_>>>()?);
        }
        Self::new(row_name, col_name, rows, cols, values)
    }
}

/// Shot count and seed for simulated readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub shots: Shots,
    pub seed: u64,
}

impl Readout {
    pub const EXACT: Readout = Readout { shots: Shots::Infinite, seed: 0 };
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{name} grid must be non-empty and finite")));
    }
    Ok(())
}

/// Evaluates `cell(row index, col index)` on every grid point in parallel and samples the
/// readout from a stream derived from the cell coordinates.
fn scan_cells<F>(rows: &[f64], cols: &[f64], p: &DeviceParams, readout: Readout, cell: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let flat: Vec<f64> = (0..rows.len() * cols.len())
        .into_par_iter()
        .map(|k| {
            let (r, c) = (k / cols.len(), k % cols.len());
            let pe = cell(r, c)?;
            let mut rng = derived_rng(readout.seed, &[r as u64, c as u64]);
            sample_probability(observed_probability(pe, p.visibility), readout.shots, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(flat.chunks(cols.len()).map(<[f64]>::to_vec).collect())
}

fn single_pulse_pe(p: &DeviceParams, delta_i: f64, duration: f64) -> Result<f64> {
    let r = p.rise_time_ns;
    let pulse = FluxPulse::new(delta_i, 0.5 * r, duration, r)?;
    let s = PulseSchedule::tight(vec![pulse], p.drive_voltage_v, DriveMode::DuringFluxPulses)?;
    Ok(evolve_final(p, &s, auto_dt(p, &s), &DensityMatrix::ground())?.pe())
}

/// Rabi chevron: rows are pulse durations (ns), columns flux amplitudes (µA).
pub fn rabi_chevron(p: &DeviceParams, delta_is: &[f64], times: &[f64], readout: Readout) -> Result<HeatMap> {
    check_grid("delta_i", delta_is)?;
    check_grid("time", times)?;
    let values = scan_cells(times, delta_is, p, readout, |r, c| single_pulse_pe(p, delta_is[c], times[r]))?;
    HeatMap::new("t_ns", "delta_i_uA", times.to_vec(), delta_is.to_vec(), values)
}

/// Flux amplitudes whose static frequencies sit at `f_CW + d` for each
/// detuning `d` (GHz). Symmetric detunings give a grid mirrored about resonance.
pub fn mirrored_delta_i_grid(p: &DeviceParams, detunings_ghz: &[f64]) -> Result<Vec<f64>> {
    detunings_ghz.iter().map(|d| p.delta_i_for_freq(p.f_cw_ghz + d)).collect()
}

/// Mean |P(col j) − P(col n−1−j)| over all rows, for a chevron sampled on a
/// grid mirrored about resonance.
pub fn chevron_asymmetry(map: &HeatMap) -> f64 {
    let n = map.cols.len();
    let mut acc = 0.0;
    let mut count = 0usize;
    for row in &map.values {
        for j in 0..n / 2 {
            acc += (row[j] - row[n - 1 - j]).abs();
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        acc / count as f64
    }
}

/// Flux amplitude and duration of the outer π/2 pulses of a Ramsey scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseySetup {
    pub delta_i_res: f64,
    pub t_half_pi: f64,
}

impl RamseySetup {
    /// Static resonance amplitude and the rectangular-pulse duration `1/(4Ω)`.
    pub fn nominal(p: &DeviceParams) -> Result<Self> {
        Ok(Self {
            delta_i_res: p.delta_i_for_freq(p.f_cw_ghz)?,
            t_half_pi: 0.25 / p.rabi_ghz(p.drive_voltage_v),
        })
    }

    /// Resonance amplitude with the duration bisected so that one pulse,
    /// ramps included, leaves P_e = ½ in the noiseless device.
    pub fn calibrated(p: &DeviceParams) -> Result<Self> {
        let nominal = Self::nominal(p)?;
        let ideal = p.clone().noiseless();
        let (mut lo, mut hi) = (0.0, 2.0 * nominal.t_half_pi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if single_pulse_pe(&ideal, nominal.delta_i_res, mid)? < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self { t_half_pi: 0.5 * (lo + hi), ..nominal })
    }
}

/// Pulse sequence of one Ramsey cell. `delta_t_mid` is the gap between the
/// nominal falling edge of the first π/2 pulse and the rising edge of the
/// second; the middle pulse fills the gap leaving one rise time at each end.
pub fn ramsey_schedule(p: &DeviceParams, setup: &RamseySetup, delta_i_mid: f64, delta_t_mid: f64) -> Result<PulseSchedule> {
    let r = p.rise_time_ns;
    if delta_t_mid < r - 1e-9 {
        return Err(Error::invalid(format!(
            "delay {delta_t_mid} ns is shorter than the {r} ns rise time; the ramps would overlap"
        )));
    }
    let first = FluxPulse::new(setup.delta_i_res, 0.5 * r, setup.t_half_pi, r)?;
    let second = FluxPulse::new(setup.delta_i_res, first.end() + delta_t_mid, setup.t_half_pi, r)?;
    let mut pulses = vec![first];
    let mid_len = delta_t_mid - 2.0 * r;
    if delta_i_mid != 0.0 && mid_len > 0.0 {
        pulses.push(FluxPulse::new(delta_i_mid, first.end() + r, mid_len, r)?);
    }
    pulses.push(second);
    PulseSchedule::tight(pulses, p.drive_voltage_v, DriveMode::DuringFluxPulses)
}

/// Ramsey axis-control map: rows are `delta_t_mid` (ns), columns `delta_i_mid` (µA).
pub fn ramsey_axis_scan(
    p: &DeviceParams,
    setup: &RamseySetup,
    delta_i_mids: &[f64],
    delta_t_mids: &[f64],
    readout: Readout,
) -> Result<HeatMap> {
    check_grid("delta_i_mid", delta_i_mids)?;
    check_grid("delta_t_mid", delta_t_mids)?;
    let values = scan_cells(delta_t_mids, delta_i_mids, p, readout, |r, c| {
        let s = ramsey_schedule(p, setup, delta_i_mids[c], delta_t_mids[r])?;
        Ok(evolve_final(p, &s, auto_dt(p, &s), &DensityMatrix::ground())?.pe())
    })?;
    HeatMap::new("delta_t_mid_ns", "delta_i_mid_uA", delta_t_mids.to_vec(), delta_i_mids.to_vec(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prepared {
    Ground,
    Excited,
}

/// Both readings of a swap-spectroscopy run.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapSpectroscopy {
    pub prepared: Prepared,
    /// Measured P_e.
    pub pe: HeatMap,
    /// Measured probability of finding the prepared state.
    pub prepared_prob: HeatMap,
}

/// Prepare `prepared`, park the qubit at each frequency for each time with
/// the drive off, and read out. Rows are times (ns), columns frequencies (GHz).
/// The flux pulses are rectangular; the short ramps do not affect populations.
pub fn swap_spectroscopy(
    p: &DeviceParams,
    prepared: Prepared,
    freqs: &[f64],
    times: &[f64],
    readout: Readout,
) -> Result<SwapSpectroscopy> {
    check_grid("frequency", freqs)?;
    check_grid("time", times)?;
    let delta_is = freqs.iter().map(|f| p.delta_i_for_freq(*f)).collect::<Result<Vec<_>>>()?;
    let rho0 = match prepared {
        Prepared::Ground => DensityMatrix::ground(),
        Prepared::Excited => DensityMatrix::excited(),
    };
    let values = scan_cells(times, freqs, p, readout, |r, c| {
        let pulse = FluxPulse::new(delta_is[c], 0.0, times[r], 0.0)?;
        let s = PulseSchedule::tight(vec![pulse], 0.0, DriveMode::Off)?;
        Ok(evolve_final(p, &s, 0.1, &rho0)?.pe())
    })?;
    let pe = HeatMap::new("t_ns", "f_q_ghz", times.to_vec(), freqs.to_vec(), values)?;
    let prepared_values = match prepared {
        Prepared::Excited => pe.values.clone(),
        Prepared::Ground => pe.values.iter().map(|r| r.iter().map(|v| 1.0 - v).collect()).collect(),
    };
    let prepared_prob = HeatMap { values: prepared_values, ..pe.clone() };
    Ok(SwapSpectroscopy { prepared, pe, prepared_prob })
}

/// A frequency band where the readout itself reports excess P_e.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutBand {
    pub lo_ghz: f64,
    pub hi_ghz: f64,
    pub excess_pe: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdleScan {
    pub freqs: Vec<f64>,
    pub i_net: Vec<f64>,
    pub pe: Vec<f64>,
    /// Points inside an anomalous readout band.
    pub excluded: Vec<bool>,
    pub p90: f64,
}

impl IdleScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_q_ghz,i_net_ua,pe,excluded\n");
        for k in 0..self.freqs.len() {
            writeln!(out, "{},{},{},{}", self.freqs[k], self.i_net[k], self.pe[k], u8::from(self.excluded[k])).unwrap();
        }
        out
    }
}

/// P_e of a qubit prepared in |g⟩ and biased to each idle frequency. The
/// residual excitation `thermal_pe` is flux independent; readout bands add
/// their excess on top of the visibility-limited probability. The 90th
/// percentile excludes points inside the bands.
pub fn idle_scan(
    p: &DeviceParams,
    freqs: &[f64],
    thermal_pe: f64,
    bands: &[ReadoutBand],
    readout: Readout,
) -> Result<IdleScan> {
    check_grid("frequency", freqs)?;
    if !(0.0..=1.0).contains(&thermal_pe) {
        return Err(Error::invalid("thermal excitation must be a probability"));
    }
    let rho = DensityMatrix::from_pure([C64::new((1.0 - thermal_pe).sqrt(), 0.0), C64::new(thermal_pe.sqrt(), 0.0)])?;
    let i_net = freqs.iter().map(|f| current_from_freq(p, *f)).collect::<Result<Vec<_>>>()?;
    let mut pe = Vec::with_capacity(freqs.len());
    let mut excluded = Vec::with_capacity(freqs.len());
    for (k, f) in freqs.iter().enumerate() {
        let band = bands.iter().find(|b| *f >= b.lo_ghz && *f <= b.hi_ghz);
        let p_obs = (observed_probability(rho.pe(), p.visibility) + band.map_or(0.0, |b| b.excess_pe)).clamp(0.0, 1.0);
        let mut rng = derived_rng(readout.seed, &[k as u64]);
        pe.push(sample_probability(p_obs, readout.shots, &mut rng)?);
        excluded.push(band.is_some());
    }
    let p90 = percentile(&pe, 90.0, Some(&excluded))?;
    Ok(IdleScan { freqs: freqs.to_vec(), i_net, pe, excluded, p90 })
}

/// Mean of the five highest minus mean of the five lowest values.
pub fn delta_pe5(column: &[f64]) -> Result<f64> {
    if column.len() < 10 {
        return Err(Error::invalid(format!("need at least 10 rows per column, got {}", column.len())));
    }
    let mut v = column.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok((v[n - 5..].iter().sum::<f64>() - v[..5].iter().sum::<f64>()) / 5.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnOffStats {
    /// ⟨ΔP_e⟩₅ with rows V_dr and columns δi.
    pub delta_pe5: HeatMap,
    pub ratio: f64,
}

/// ⟨ΔP_e⟩₅ of every chevron column, one chevron per drive amplitude, and the
/// ratio of the largest to the smallest value.
pub fn on_off_stats(chevrons: &[HeatMap], v_dr: &[f64]) -> Result<OnOffStats> {
    if chevrons.len() != v_dr.len() || chevrons.is_empty() {
        return Err(Error::invalid("need one chevron per drive amplitude"));
    }
    let cols = chevrons[0].cols.clone();
    let mut values = Vec::with_capacity(chevrons.len());
    for map in chevrons {
        if map.cols.len() != cols.len() {
            return Err(Error::invalid("chevrons use different flux grids"));
        }
        values.push((0..cols.len()).map(|c| delta_pe5(&map.column(c))).collect::<Result<Vec<_>>>()?);
    }
    let max = values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let ratio = max / min.max(f64::EPSILON);
    Ok(OnOffStats { delta_pe5: HeatMap::new("v_dr", "delta_i_uA", v_dr.to_vec(), cols, values)?, ratio })
}

/// Chevrons at each drive amplitude in `v_dr`, seeded per amplitude.
pub fn on_off_scan(p: &DeviceParams, v_dr: &[f64], delta_is: &[f64], times: &[f64], readout: Readout) -> Result<Vec<HeatMap>> {
    v_dr.iter()
        .enumerate()
        .map(|(k, v)| {
            let dev = DeviceParams { drive_voltage_v: *v, ..p.clone() };
            let seed = crate::rng::derive_seed(readout.seed, &[k as u64]);
            rabi_chevron(&dev, delta_is, times, Readout { seed, ..readout })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn heat_map_csv_round_trip() {
        let m = HeatMap::new("t", "x", vec![0.0, 1.5], vec![-1.0, 2.0, 3.25], vec![vec![0.1, 0.2, 0.3], vec![1.0, 0.0, 1e-17]]).unwrap();
        let text = m.to_csv();
        assert!(text.starts_with("t\\x,-1,2,3.25\n0,0.1,"));
        assert_eq!(HeatMap::from_csv(&format!("# comment\n{text}")).unwrap(), m);
    }

    #[test]
    fn resonant_column_is_slowest_with_full_contrast() {
        let p = DeviceParams::demux_qpt().noiseless();
        let dis = mirrored_delta_i_grid(&p, &[-0.02, 0.0, 0.02]).unwrap();
        let times = linspace(0.0, 120.0, 121);
        let m = rabi_chevron(&p, &dis, &times, Readout::EXACT).unwrap();
        let center = m.column(1);
        assert!(center.iter().copied().fold(0.0, f64::max) > 0.999);
        for side in [0, 2] {
            let col = m.column(side);
            assert!(col.iter().copied().fold(0.0, f64::max) < 0.3);
        }
        // first maximum of the resonant column comes last
        let first_peak = |c: &[f64]| c.windows(3).position(|w| w[1] >= w[0] && w[1] > w[2]).unwrap();
        assert!(first_peak(&center) > first_peak(&m.column(0)));
    }

    #[test]
    fn ramp_asymmetry_vanishes_with_sharp_edges() {
        let dets = linspace(-0.04, 0.04, 9);
        let times = linspace(0.0, 60.0, 31);
        let asym = |rise: f64| {
            let p = DeviceParams { rise_time_ns: rise, ..DeviceParams::demux_chevron().noiseless() };
            let dis = mirrored_delta_i_grid(&p, &dets).unwrap();
            chevron_asymmetry(&rabi_chevron(&p, &dis, &times, Readout::EXACT).unwrap())
        };
        let a2 = asym(2.0);
        let a0 = asym(0.0);
        assert!(a2 > 1e-3, "2 ns asymmetry {a2}");
        assert!(a0 < 0.1 * a2, "{a0} vs {a2}");
    }

    #[test]
    fn ramsey_quarter_points_and_period() {
        let p = DeviceParams::demux_ramsey().noiseless();
        let setup = RamseySetup::calibrated(&p).unwrap();
        let times = [1.0, 10.5, 20.0];
        let m = ramsey_axis_scan(&p, &setup, &[0.0], &times, Readout::EXACT).unwrap();
        let later = ramsey_axis_scan(&p, &setup, &[0.0], &times.map(|t| t + 0.2), Readout::EXACT).unwrap();
        for r in 0..3 {
            // P_e crosses one half on the way up: relative axis angle +90 degrees
            assert!((m.get(r, 0) - 0.5).abs() < 0.02, "{}: {}", times[r], m.get(r, 0));
            assert!(later.get(r, 0) > m.get(r, 0));
        }
        let grid: Vec<f64> = (0..400).map(|k| 1.0 + 0.05 * k as f64).collect();
        let fringe = ramsey_axis_scan(&p, &setup, &[0.0], &grid, Readout::EXACT).unwrap().column(0);
        let fit = crate::analysis::fit_nlls(crate::analysis::Model::Sinusoid, &grid, &fringe, &Default::default()).unwrap();
        let period = 1.0 / fit.get("f");
        assert!((period - 1.0 / 0.105).abs() < 1e-3, "period {period}");
        let max = fringe.iter().copied().fold(0.0, f64::max);
        let min = fringe.iter().copied().fold(1.0, f64::min);
        assert!(max > 0.999 && min < 1e-3);
    }

    #[test]
    fn ramsey_rejects_overlapping_ramps() {
        let p = DeviceParams::demux_ramsey();
        let setup = RamseySetup::nominal(&p).unwrap();
        assert!(ramsey_schedule(&p, &setup, 0.0, 0.5).is_err());
        assert_eq!(ramsey_schedule(&p, &setup, 5.0, 1.5).unwrap().pulses().len(), 2);
        assert_eq!(ramsey_schedule(&p, &setup, 5.0, 8.0).unwrap().pulses().len(), 3);
    }

    #[test]
    fn swap_spectroscopy_oracles() {
        let p = DeviceParams { tls_dips: vec![], ..DeviceParams::socket_qubit() }.noiseless();
        let freqs = [4.1, 4.4, 4.7];
        let times = linspace(0.0, 2000.0, 5);
        let g = swap_spectroscopy(&p, Prepared::Ground, &freqs, &times, Readout::EXACT).unwrap();
        assert!(g.pe.values.iter().flatten().all(|v| *v == 0.0));
        let decaying = DeviceParams { tls_dips: vec![], visibility: 1.0, ..DeviceParams::socket_qubit() };
        let e = swap_spectroscopy(&decaying, Prepared::Excited, &freqs, &times, Readout::EXACT).unwrap();
        for (r, t) in times.iter().enumerate() {
            for c in 0..freqs.len() {
                assert!((e.pe.get(r, c) - (-t / 20_000.0).exp()).abs() < 1e-6);
            }
        }
        let dipped = DeviceParams { visibility: 1.0, ..DeviceParams::socket_qubit() };
        let e = swap_spectroscopy(&dipped, Prepared::Excited, &[4.2, 4.25, 4.3], &[1000.0], Readout::EXACT).unwrap();
        assert!(e.prepared_prob.get(0, 1) < 0.5 * e.prepared_prob.get(0, 0));
    }

    #[test]
    fn delta_pe5_and_ratio_basics() {
        let alternating: Vec<f64> = (0..12).map(|k| (k % 2) as f64).collect();
        assert_eq!(delta_pe5(&alternating).unwrap(), 1.0);
        assert!(delta_pe5(&[0.0; 9]).is_err());
        let flat = HeatMap::new("t", "x", linspace(0.0, 1.0, 10), vec![0.0, 1.0], vec![vec![0.3, 0.3]; 10]).unwrap();
        let stats = on_off_stats(&[flat.clone(), flat], &[0.1, 0.2]).unwrap();
        assert_eq!(stats.delta_pe5.values, vec![vec![0.0, 0.0]; 2]);
        assert_eq!(stats.ratio, 0.0);
        let half = HeatMap { values: vec![vec![0.3, 0.5]; 5].into_iter().chain(vec![vec![0.4, 0.6]; 5]).collect(), ..HeatMap::new("t", "x", linspace(0.0, 1.0, 10), vec![0.0, 1.0], vec![vec![0.0; 2]; 10]).unwrap() };
        let stats = on_off_stats(&[half], &[0.1]).unwrap();
        assert!((stats.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn idle_scan_percentile_excludes_bands() {
        let p = DeviceParams::socket_qubit();
        let freqs = linspace(4.05, 4.8, 76);
        let bands = [ReadoutBand { lo_ghz: 4.08, hi_ghz: 4.12, excess_pe: 0.2 }];
        let scan = idle_scan(&p, &freqs, 0.0, &bands, Readout::EXACT).unwrap();
        assert!((scan.p90 - 0.05).abs() < 1e-12);
        assert_eq!(scan.excluded.iter().filter(|e| **e).count(), 5);
        assert!((scan.i_net[0] - (-25.8)).abs() < 2.0);
    }

    #[test]
    fn scans_are_reproducible_with_shots() {
        let p = DeviceParams::demux_chevron();
        let dis = mirrored_delta_i_grid(&p, &[-0.01, 0.0, 0.01]).unwrap();
        let ro = Readout { shots: Shots::Finite(500), seed: 17 };
        let a = rabi_chevron(&p, &dis, &[10.0, 20.0, 30.0], ro).unwrap();
        let b = rabi_chevron(&p, &dis, &[10.0, 20.0, 30.0], ro).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }
}
