//! Autocorrelation-corrected standard errors, malfunction filtering and the
//! split of observed power scatter into power and phase contributions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::analysis::group_cycles;
use crate::error::{Error, Result};
use crate::forward::{MeasurementLog, ShutterConfig};
use crate::peres::subtract_background;
use crate::phase::PhasePoint;

/// Mean of a series with naive and autocorrelation-corrected standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n − 1`).
    pub std: f64,
    pub naive_sem: f64,
    pub corrected_sem: f64,
    pub n_effective: f64,
    /// Number of autocorrelation lags included in the correction.
    pub autocorr_cutoff_lag: usize,
}

pub const MIN_SERIES_LEN: usize = 8;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with `n − 1` normalization; 0 below two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Standard error of the mean inflated by `√(1 + 2 Σ_k (1 − k/n) ρ_k)`.
///
/// The sum runs over the initial positive sequence of the sample
/// autocorrelation `ρ_k` and stops before the first lag with `ρ_k ≤ 0`,
/// or at `n / 2`.
pub fn autocorr_sem(series: &[f64]) -> Result<SeriesStats> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_SERIES_LEN,
            got: n,
        });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("series contains non-finite values".into()));
    }
    let m = mean(series);
    let dev: Vec<f64> = series.iter().map(|x| x - m).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    let std = sample_std(series);
    let naive_sem = std / (n as f64).sqrt();
    let mut tail = 0.0;
    let mut lags = 0;
    if c0 > 0.0 {
        for k in 1..=n / 2 {
            let ck = dev[..n - k]
                .iter()
                .zip(&dev[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64;
            let rho = ck / c0;
            if rho <= 0.0 {
                break;
            }
            tail += (1.0 - k as f64 / n as f64) * rho;
            lags = k;
        }
    }
    let factor = 1.0 + 2.0 * tail;
    Ok(SeriesStats {
        n,
        mean: m,
        std,
        naive_sem,
        corrected_sem: naive_sem * factor.sqrt(),
        n_effective: n as f64 / factor,
        autocorr_cutoff_lag: lags,
    })
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// A cycle removed by [`filter_malfunctions`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DroppedCycle {
    pub cycle_index: usize,
    pub config: ShutterConfig,
    pub value: f64,
    pub median: f64,
    pub mad: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MalfunctionReport {
    pub dropped: Vec<DroppedCycle>,
    pub passes: usize,
}

pub const DEFAULT_MAD_THRESHOLD: f64 = 5.0;

/// Drops every cycle holding a record further than `threshold` median
/// absolute deviations from the median of its configuration.
///
/// Medians and deviations are recomputed after each pass until no further
/// cycle is dropped, so the result is a fixed point. Configurations whose
/// deviation is zero never trigger.
pub fn filter_malfunctions(
    log: &MeasurementLog,
    threshold: f64,
) -> Result<(MeasurementLog, MalfunctionReport)> {
    if !(threshold > 0.0) {
        return Err(Error::Usage(format!(
            "malfunction threshold must be > 0, got {threshold}"
        )));
    }
    let mut kept = log.clone();
    let mut report = MalfunctionReport::default();
    loop {
        report.passes += 1;
        let mut by_config: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for r in &kept.records {
            by_config
                .entry(r.config.index())
                .or_default()
                .push(r.mean_power);
        }
        let mut scale = BTreeMap::new();
        for (c, mut values) in by_config {
            let med = median(&mut values);
            let mut dev: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
            scale.insert(c, (med, median(&mut dev)));
        }
        let mut drop = BTreeSet::new();
        for r in &kept.records {
            let (med, mad) = scale[&r.config.index()];
            if mad > 0.0 && (r.mean_power - med).abs() > threshold * mad
                && drop.insert(r.cycle_index)
            {
                report.dropped.push(DroppedCycle {
                    cycle_index: r.cycle_index,
                    config: r.config,
                    value: r.mean_power,
                    median: med,
                    mad,
                    reason: format!(
                        "P_{} = {:e} W deviates from the median {:e} W by more than {threshold} MAD ({:e} W)",
                        r.config, r.mean_power, med, mad
                    ),
                });
            }
        }
        if drop.is_empty() {
            return Ok((kept, report));
        }
        kept.records.retain(|r| !drop.contains(&r.cycle_index));
    }
}

/// Fluctuation scales separated into input-power and phase contributions.
///
/// Pair arrays follow the `(BC, CA, AB)` order of the interference terms.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluctuationEstimates {
    /// Mean background-subtracted single-path powers, W.
    pub mean_power: [f64; 3],
    /// Standard deviation of `P_A, P_B, P_C`, W.
    pub sigma_power: [f64; 3],
    /// Observed standard deviation of `P_ij`, W.
    pub sigma_pair_measured: [f64; 3],
    /// Part of `sigma_pair_measured` explained by single-path power scatter, W.
    pub sigma_pair_power: [f64; 3],
    /// Remainder attributed to phase fluctuations, W.
    pub sigma_pair_phase: [f64; 3],
    /// The same remainder expressed as a phase, rad; `None` where the
    /// pair sits at a fringe extremum and the conversion is singular.
    pub sigma_phase: [Option<f64>; 3],
    /// Set where sampling noise made the phase variance negative.
    pub clamped: [bool; 3],
}

const PAIRS: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

/// Splits the cycle-to-cycle scatter of two-path powers into the part
/// propagated from the single-path powers and a phase remainder, assuming
/// independent power and phase fluctuations. Standard deviations are taken
/// over the whole log.
pub fn decompose_fluctuations(
    log: &MeasurementLog,
    phases: &PhasePoint,
) -> Result<FluctuationEstimates> {
    decompose_fluctuations_windowed(log, phases, None)
}

/// As [`decompose_fluctuations`]; with `window = Some(w)` variances are
/// computed within consecutive blocks of `w` cycles and averaged, which
/// removes drift slower than the window.
pub fn decompose_fluctuations_windowed(
    log: &MeasurementLog,
    phases: &PhasePoint,
    window: Option<usize>,
) -> Result<FluctuationEstimates> {
    let cycles = group_cycles(log)?;
    if cycles.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: cycles.len(),
        });
    }
    let w = window.unwrap_or(cycles.len());
    if w < 2 {
        return Err(Error::Usage("fluctuation window must span ≥ 2 cycles".into()));
    }
    let mut series: [Vec<f64>; 6] = Default::default();
    for c in &cycles {
        let p = subtract_background(c.raw)?;
        for (s, v) in series.iter_mut().zip([p.pa, p.pb, p.pc, p.pbc, p.pca, p.pab]) {
            s.push(v);
        }
    }
    let std_of = |xs: &[f64]| -> f64 {
        let mut total = 0.0;
        let mut dof = 0.0;
        for block in xs.chunks(w) {
            if block.len() >= 2 {
                total += sample_std(block).powi(2) * (block.len() - 1) as f64;
                dof += (block.len() - 1) as f64;
            }
        }
        if dof > 0.0 {
            (total / dof).sqrt()
        } else {
            0.0
        }
    };
    let mean_power = [mean(&series[0]), mean(&series[1]), mean(&series[2])];
    let sigma_power = [std_of(&series[0]), std_of(&series[1]), std_of(&series[2])];
    let cosines = phases.cosines().as_array();
    let sines = phases.as_array().map(|x| x.sin());
    let mut out = FluctuationEstimates {
        mean_power,
        sigma_power,
        sigma_pair_measured: [0.0; 3],
        sigma_pair_power: [0.0; 3],
        sigma_pair_phase: [0.0; 3],
        sigma_phase: [None; 3],
        clamped: [false; 3],
    };
    for (q, (i, j)) in PAIRS.into_iter().enumerate() {
        let (pi, pj) = (mean_power[i], mean_power[j]);
        if !(pi > 0.0 && pj > 0.0) {
            return Err(Error::DegenerateData(format!(
                "mean single-path power of pair {q} is not positive"
            )));
        }
        let measured = std_of(&series[3 + q]);
        let di = (pj / pi).sqrt() * cosines[q] + 1.0;
        let dj = (pi / pj).sqrt() * cosines[q] + 1.0;
        let pow2 = di * di * sigma_power[i].powi(2) + dj * dj * sigma_power[j].powi(2);
        let ph2 = measured * measured - pow2;
        out.sigma_pair_measured[q] = measured;
        out.sigma_pair_power[q] = pow2.sqrt();
        out.clamped[q] = ph2 < 0.0;
        let ph = ph2.max(0.0).sqrt();
        out.sigma_pair_phase[q] = ph;
        let slope = 2.0 * (pi * pj).sqrt() * sines[q].abs();
        out.sigma_phase[q] = if slope > 1e-12 * (pi + pj) {
            Some(ph / slope)
        } else {
            None
        };
    }
    Ok(out)
}
