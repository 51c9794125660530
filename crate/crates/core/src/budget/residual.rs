use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::analysis::cycle_peres;
use crate::error::{Error, Result};
use crate::forward::{cycle_powers, ImperfectionSpec, SourceSpec};
use crate::peres::{CyclePowers, InterferenceTerms};
use crate::phase::PhasePoint;
use crate::stats::{autocorr_sem, mean, sample_std, SeriesStats, MIN_SERIES_LEN};

pub const DEFAULT_SWEEP_POINTS: usize = 721;

/// `n` equally spaced points on `[−π, π]`.
pub fn default_phi_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => (0..n)
            .map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    /// Grid index of the sampled extremum.
    pub index: usize,
}

/// `ΔF` sampled along one parameter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepCurve {
    pub x: Vec<f64>,
    pub delta_f: Vec<f64>,
    /// Extrema refined by a parabola through the sampled extremum and its
    /// two neighbours.
    pub min: Extremum,
    pub max: Extremum,
}

fn refine(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= x.len() {
        return (x[i], y[i]);
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a == 0.0 || !a.is_finite() {
        return (x1, y1);
    }
    let b = d01 - a * (x0 + x1);
    let xv = (-b / (2.0 * a)).clamp(x0, x2);
    let yv = y0 + (xv - x0) * (d01 + a * (xv - x1));
    (xv, yv)
}

impl SweepCurve {
    pub fn from_samples(x: Vec<f64>, delta_f: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.len() != delta_f.len() {
            return Err(Error::Usage("sweep needs matching, non-empty samples".into()));
        }
        let imin = (0..x.len())
            .min_by(|&a, &b| delta_f[a].total_cmp(&delta_f[b]))
            .unwrap_or(0);
        let imax = (0..x.len())
            .max_by(|&a, &b| delta_f[a].total_cmp(&delta_f[b]))
            .unwrap_or(0);
        let (xmin, ymin) = refine(&x, &delta_f, imin);
        let (xmax, ymax) = refine(&x, &delta_f, imax);
        Ok(Self {
            min: Extremum {
                x: xmin,
                value: ymin.min(delta_f[imin]),
                index: imin,
            },
            max: Extremum {
                x: xmax,
                value: ymax.max(delta_f[imax]),
                index: imax,
            },
            x,
            delta_f,
        })
    }
}

fn source_residual(source: &SourceSpec, tau: f64) -> Result<()> {
    source.validate()?;
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::Configuration(format!(
            "residual.tau must be ≥ 0 and < 1, got {tau}"
        )));
    }
    Ok(())
}

fn residual_f(phases: &PhasePoint, source: &SourceSpec, tau: f64, phi_sh: f64) -> Result<f64> {
    let spec = ImperfectionSpec::residual_only(tau, phi_sh);
    Ok(cycle_peres(cycle_powers(source, phases, &spec)?)?.f)
}

/// `ΔF` from light leaking through closed shutters with transmissivity
/// `tau` and phase `phi_sh`, evaluated through background subtraction,
/// interference terms and `F`.
pub fn residual_light_delta_f(
    phases: &PhasePoint,
    source: &SourceSpec,
    tau: f64,
    phi_sh: f64,
) -> Result<f64> {
    source_residual(source, tau)?;
    Ok(residual_f(phases, source, tau, phi_sh)? - residual_f(phases, source, 0.0, 0.0)?)
}

/// [`residual_light_delta_f`] over a grid of `φ_Sh`.
pub fn residual_light_sweep(
    phases: &PhasePoint,
    source: &SourceSpec,
    tau: f64,
    grid: &[f64],
) -> Result<SweepCurve> {
    source_residual(source, tau)?;
    let baseline = residual_f(phases, source, 0.0, 0.0)?;
    let mut values = Vec::with_capacity(grid.len());
    for &phi in grid {
        values.push(residual_f(phases, source, tau, phi)? - baseline);
    }
    SweepCurve::from_samples(grid.to_vec(), values)
}

/// Closed-shutter transmissivity recovered from the all-closed background.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TauEstimate {
    /// Per-cycle values of the cycles that were used.
    pub per_cycle: Vec<f64>,
    pub mean: f64,
    /// Autocorrelation-corrected from eight cycles on, naive below.
    pub sem: f64,
    pub stats: Option<SeriesStats>,
    /// Positions in the input of cycles with a non-positive denominator.
    pub excluded: Vec<usize>,
}

/// `τ = (P_0 − P_dark) / (P̄_A + P̄_B + P̄_C + 2√(P̄_A P̄_B) γ + 2√(P̄_A P̄_C) β + 2√(P̄_B P̄_C) α)`
/// per cycle, with `P̄_i = P_i − P_dark` and the terms of the corrected point.
pub fn estimate_tau(
    cycles: &[CyclePowers],
    corrected: InterferenceTerms,
    p_dark: f64,
) -> Result<TauEstimate> {
    let InterferenceTerms { alpha, beta, gamma } = corrected;
    let mut per_cycle = Vec::with_capacity(cycles.len());
    let mut excluded = Vec::new();
    for (i, c) in cycles.iter().enumerate() {
        if c.background_subtracted {
            return Err(Error::Usage(
                "τ estimation needs raw powers including P_0".into(),
            ));
        }
        let (a, b, cc) = (c.pa - p_dark, c.pb - p_dark, c.pc - p_dark);
        if !(a > 0.0 && b > 0.0 && cc > 0.0) {
            excluded.push(i);
            continue;
        }
        let den = a + b + cc
            + 2.0 * (a * b).sqrt() * gamma
            + 2.0 * (a * cc).sqrt() * beta
            + 2.0 * (b * cc).sqrt() * alpha;
        if !(den > 0.0) {
            excluded.push(i);
            continue;
        }
        per_cycle.push((c.p0 - p_dark) / den);
    }
    if per_cycle.is_empty() {
        return Err(Error::DegenerateData(
            "no cycle has a positive τ denominator".into(),
        ));
    }
    let stats = if per_cycle.len() >= MIN_SERIES_LEN {
        Some(autocorr_sem(&per_cycle)?)
    } else {
        None
    };
    let sem = match &stats {
        Some(s) => s.corrected_sem,
        None => sample_std(&per_cycle) / (per_cycle.len() as f64).sqrt(),
    };
    Ok(TauEstimate {
        mean: mean(&per_cycle),
        sem,
        stats,
        per_cycle,
        excluded,
    })
}
