use alloc::vec::Vec;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use super::contrast::contrast_deviation;
use super::crosstalk::crosstalk_delta_f;
use super::fluctuation::{mc_phase_fluctuations, mc_power_fluctuations, DEFAULT_MC_SAMPLES};
use super::nonlinearity::correct_nonlinearity;
use super::residual::{default_phi_grid, residual_light_sweep, SweepCurve, DEFAULT_SWEEP_POINTS};
use crate::analysis::analyze_log;
use crate::error::Result;
use crate::forward::{ImperfectionSpec, MeasurementLog, SourceSpec};
use crate::reconstruct::CorrectedPoint;
use crate::reference::ReferenceDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BudgetModel {
    Nonlinearity,
    PowerFluctuations,
    PhaseFluctuations,
    Contrast,
    Crosstalk,
    ResidualLight,
}

impl BudgetModel {
    pub const ALL: [Self; 6] = [
        Self::Nonlinearity,
        Self::PowerFluctuations,
        Self::PhaseFluctuations,
        Self::Contrast,
        Self::Crosstalk,
        Self::ResidualLight,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Nonlinearity => "nonlinearity",
            Self::PowerFluctuations => "power_fluct",
            Self::PhaseFluctuations => "phase_fluct",
            Self::Contrast => "contrast",
            Self::Crosstalk => "crosstalk",
            Self::ResidualLight => "residual_light",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BudgetEntry {
    pub model: BudgetModel,
    /// Deviation at the configured imperfection parameters.
    pub delta_f: f64,
    pub lower: f64,
    pub upper: f64,
    /// Spread of `F` for the Monte Carlo entries.
    pub sigma_f: Option<f64>,
}

impl BudgetEntry {
    fn point(model: BudgetModel, delta_f: f64) -> Self {
        Self {
            model,
            delta_f,
            lower: delta_f,
            upper: delta_f,
            sigma_f: None,
        }
    }

    /// A Monte Carlo mean bounds the deviation on one side of zero only.
    fn one_sided(model: BudgetModel, delta_f: f64, sigma_f: f64) -> Self {
        Self {
            model,
            delta_f,
            lower: delta_f.min(0.0),
            upper: delta_f.max(0.0),
            sigma_f: Some(sigma_f),
        }
    }
}

/// `⟨F⟩ − 1` of the analysed log.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasuredDeviation {
    pub delta_f: f64,
    /// Autocorrelation-corrected from eight cycles on, naive below.
    pub sem: f64,
    pub naive_sem: f64,
    pub n_cycles: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BudgetInputs {
    pub source: SourceSpec,
    pub imperfections: ImperfectionSpec,
    /// Contrast reduction; `1 − exp(−σ_fast²/2)` when absent.
    pub delta_c: Option<f64>,
    pub mc_samples: u64,
    pub seed: u64,
    pub sweep_points: usize,
    /// Published values printed next to the computed ones.
    pub reference: Option<ReferenceDataset>,
}

impl BudgetInputs {
    pub fn new(source: SourceSpec, imperfections: ImperfectionSpec, seed: u64) -> Self {
        Self {
            source,
            imperfections,
            delta_c: None,
            mc_samples: DEFAULT_MC_SAMPLES,
            seed,
            sweep_points: DEFAULT_SWEEP_POINTS,
            reference: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BudgetReport {
    /// One entry per model, in the order of [`BudgetModel::ALL`].
    pub entries: Vec<BudgetEntry>,
    pub total_lower: f64,
    pub total_upper: f64,
    pub measured: MeasuredDeviation,
    /// `ΔF` against `φ_Sh` behind the residual-light bounds.
    pub residual_curve: SweepCurve,
    pub reference: Option<ReferenceDataset>,
}

impl BudgetReport {
    pub fn entry(&self, model: BudgetModel) -> Option<&BudgetEntry> {
        self.entries.iter().find(|e| e.model == model)
    }
}

/// Evaluates every imperfection model at the corrected phase point and
/// compares the summed bounds with the deviation measured in `log`.
///
/// The power and phase Monte Carlo runs draw from seeds `seed` and
/// `seed + 1`.
pub fn full_budget(
    log: &MeasurementLog,
    inputs: &BudgetInputs,
    corrected: &CorrectedPoint,
) -> Result<BudgetReport> {
    let spec = &inputs.imperfections;
    spec.validate()?;
    inputs.source.validate()?;
    let point = &corrected.point;
    let fl = &spec.fluctuations;

    let (_, nl) = correct_nonlinearity(log, &spec.nonlinearity)?;
    let power = mc_power_fluctuations(
        point,
        &inputs.source,
        fl.sigma_pin_rel,
        inputs.mc_samples,
        inputs.seed,
    )?;
    let phase = mc_phase_fluctuations(
        point,
        &inputs.source,
        fl.sigma_phase,
        inputs.mc_samples,
        inputs.seed.wrapping_add(1),
    )?;
    let delta_c = inputs.delta_c.unwrap_or(1.0 - fl.contrast());
    let contrast = contrast_deviation(corrected.corrected_terms, delta_c)?;
    let crosstalk = crosstalk_delta_f(point, &spec.crosstalk)?;

    let grid = default_phi_grid(inputs.sweep_points.max(3));
    let curve = residual_light_sweep(point, &inputs.source, spec.residual.tau, &grid)?;
    let at_phi = super::residual::residual_light_delta_f(
        point,
        &inputs.source,
        spec.residual.tau,
        spec.residual.phi_sh,
    )?;
    let residual = BudgetEntry {
        model: BudgetModel::ResidualLight,
        delta_f: at_phi,
        lower: curve.min.value.min(0.0),
        upper: curve.max.value.max(0.0),
        sigma_f: None,
    };

    let entries = alloc::vec![
        BudgetEntry::point(BudgetModel::Nonlinearity, nl),
        BudgetEntry::one_sided(BudgetModel::PowerFluctuations, power.delta_f, power.sigma_f),
        BudgetEntry::one_sided(BudgetModel::PhaseFluctuations, phase.delta_f, phase.sigma_f),
        BudgetEntry::point(BudgetModel::Contrast, contrast),
        BudgetEntry::point(BudgetModel::Crosstalk, crosstalk),
        residual,
    ];
    let total_lower = entries.iter().map(|e| e.lower).sum();
    let total_upper = entries.iter().map(|e| e.upper).sum();

    let analysis = analyze_log(log)?;
    let n = analysis.cycles.len();
    let fs: Vec<f64> = analysis.cycles.iter().map(|c| c.f).collect();
    let naive_sem = if n > 1 {
        crate::stats::sample_std(&fs) / (n as f64).sqrt()
    } else {
        0.0
    };
    let measured = MeasuredDeviation {
        delta_f: analysis.delta_f(),
        sem: analysis.f_stats.map_or(naive_sem, |s| s.corrected_sem),
        naive_sem,
        n_cycles: n,
    };

    Ok(BudgetReport {
        entries,
        total_lower,
        total_upper,
        measured,
        residual_curve: curve,
        reference: inputs.reference,
    })
}
