//! Per-cycle evaluation of measurement logs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forward::{MeasurementLog, ShutterConfig};
use crate::peres::{
    interference_terms, peres_parameter, sorkin_epsilon, sorkin_kappa, subtract_background,
    CyclePowers, InterferenceTerms, PeresResult, SorkinResult,
};
use crate::stats::{autocorr_sem, mean, SeriesStats, MIN_SERIES_LEN};

/// The eight raw powers of one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawCycle {
    pub cycle_index: usize,
    pub raw: CyclePowers,
    /// Mean housing temperature over the cycle's records, °C.
    pub housing_temp: f64,
}

/// Collects the records of each cycle, in ascending cycle order.
///
/// Every cycle must contain each configuration exactly once.
pub fn group_cycles(log: &MeasurementLog) -> Result<Vec<RawCycle>> {
    let mut cycles: BTreeMap<usize, ([Option<f64>; 8], f64)> = BTreeMap::new();
    for (index, r) in log.records.iter().enumerate() {
        let entry = cycles.entry(r.cycle_index).or_insert(([None; 8], 0.0));
        let slot = &mut entry.0[r.config.index()];
        if slot.is_some() {
            return Err(Error::Record {
                index,
                reason: format!(
                    "duplicate configuration {} in cycle {}",
                    r.config, r.cycle_index
                ),
            });
        }
        *slot = Some(r.mean_power);
        entry.1 += r.housing_temp;
    }
    let mut out = Vec::with_capacity(cycles.len());
    for (cycle_index, (values, temp_sum)) in cycles {
        let mut raw = [0.0; 8];
        for (k, v) in values.iter().enumerate() {
            raw[k] = v.ok_or_else(|| {
                Error::MissingData(format!(
                    "cycle {cycle_index} lacks configuration {}",
                    ShutterConfig::ALL[k]
                ))
            })?;
        }
        out.push(RawCycle {
            cycle_index,
            raw: CyclePowers::raw(raw),
            housing_temp: temp_sum / 8.0,
        });
    }
    Ok(out)
}

/// Background subtraction, interference terms and Peres parameter of one cycle.
pub fn cycle_peres(raw: CyclePowers) -> Result<PeresResult> {
    peres_parameter(interference_terms(&subtract_background(raw)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CycleAnalysis {
    pub cycle_index: usize,
    pub powers: CyclePowers,
    pub terms: InterferenceTerms,
    pub f: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogAnalysis {
    pub cycles: Vec<CycleAnalysis>,
    /// Cycle-averaged interference terms.
    pub mean_terms: InterferenceTerms,
    pub mean_f: f64,
    /// Available from eight cycles on.
    pub f_stats: Option<SeriesStats>,
    pub epsilon_stats: Option<SeriesStats>,
    pub sorkin: SorkinResult,
}

impl LogAnalysis {
    pub fn delta_f(&self) -> f64 {
        self.mean_f - 1.0
    }
}

pub fn analyze_cycles(cycles: &[RawCycle]) -> Result<LogAnalysis> {
    if cycles.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut out = Vec::with_capacity(cycles.len());
    for c in cycles {
        let powers = subtract_background(c.raw)?;
        let terms = interference_terms(&powers).map_err(|e| {
            Error::Analysis(format!("cycle {}: {e}", c.cycle_index))
        })?;
        out.push(CycleAnalysis {
            cycle_index: c.cycle_index,
            powers,
            terms,
            f: peres_parameter(terms)?.f,
            epsilon: sorkin_epsilon(&powers)?,
        });
    }
    let column = |f: &dyn Fn(&CycleAnalysis) -> f64| out.iter().map(f).collect::<Vec<_>>();
    let fs = column(&|c| c.f);
    let eps = column(&|c| c.epsilon);
    let mean_terms = InterferenceTerms::new(
        mean(&column(&|c| c.terms.alpha)),
        mean(&column(&|c| c.terms.beta)),
        mean(&column(&|c| c.terms.gamma)),
    );
    let stats = |xs: &[f64]| {
        if xs.len() >= MIN_SERIES_LEN {
            autocorr_sem(xs).ok()
        } else {
            None
        }
    };
    let powers: Vec<CyclePowers> = out.iter().map(|c| c.powers).collect();
    Ok(LogAnalysis {
        mean_terms,
        mean_f: mean(&fs),
        f_stats: stats(&fs),
        epsilon_stats: stats(&eps),
        sorkin: sorkin_kappa(&powers)?,
        cycles: out,
    })
}

/// Groups a log into cycles and evaluates every one of them.
pub fn analyze_log(log: &MeasurementLog) -> Result<LogAnalysis> {
    analyze_cycles(&group_cycles(log)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{simulate_measurement, ImperfectionSpec, Protocol, SourceSpec};
    use crate::phase::PhasePoint;

    fn log() -> MeasurementLog {
        simulate_measurement(
            &SourceSpec::new(1e-6, [0.26, 0.52, 0.22]),
            &PhasePoint::new(2.50861677, -0.27844392, -2.23017285),
            &ImperfectionSpec::default(),
            &Protocol::new(12, 1),
            0,
        )
        .unwrap()
    }

    #[test]
    fn ideal_log_is_unbiased() {
        let a = analyze_log(&log()).unwrap();
        assert_eq!(a.cycles.len(), 12);
        for c in &a.cycles {
            assert!((c.f - 1.0).abs() < 1e-12);
            assert!(c.epsilon.abs() < 1e-12 * 1e-6);
        }
        assert!(a.f_stats.is_some());
    }

    #[test]
    fn duplicate_record_is_named() {
        let mut l = log();
        let dup = l.records[3];
        l.records.push(dup);
        match group_cycles(&l) {
            Err(Error::Record { index, .. }) => assert_eq!(index, l.records.len() - 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_config_is_reported() {
        let mut l = log();
        l.records.remove(5);
        assert!(matches!(group_cycles(&l), Err(Error::MissingData(_))));
    }
}
