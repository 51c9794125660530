use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;
use rand::seq::SliceRandom;

use super::{imperfect_powers, ImperfectionSpec, NoiseDraw, ShutterConfig, SourceSpec};
use crate::error::{Error, Result};
use crate::mc::{self, Moments};
use crate::phase::PhasePoint;

/// Repetition scheme of a simulated measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct Protocol {
    pub n_cycles: usize,
    pub samples_per_setting: usize,
    /// Duration of one shutter setting; only used for timestamps.
    pub setting_duration_s: f64,
    /// Recorded housing temperature, °C.
    pub housing_temp_c: f64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            n_cycles: 100,
            samples_per_setting: 10,
            setting_duration_s: 13.0,
            housing_temp_c: 23.0,
        }
    }
}

impl Protocol {
    pub fn new(n_cycles: usize, samples_per_setting: usize) -> Self {
        Self {
            n_cycles,
            samples_per_setting,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cycles == 0 {
            return Err(Error::Configuration("protocol.n_cycles must be ≥ 1".into()));
        }
        if self.samples_per_setting == 0 {
            return Err(Error::Configuration(
                "protocol.samples_per_setting must be ≥ 1".into(),
            ));
        }
        if !(self.setting_duration_s >= 0.0 && self.setting_duration_s.is_finite()) {
            return Err(Error::Configuration(format!(
                "protocol.setting_duration_s must be ≥ 0, got {}",
                self.setting_duration_s
            )));
        }
        if !self.housing_temp_c.is_finite() {
            return Err(Error::Configuration(
                "protocol.housing_temp_c must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// One shutter setting of one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasurementRecord {
    pub cycle_index: usize,
    pub config: ShutterConfig,
    /// W
    pub mean_power: f64,
    /// Sample standard deviation within the setting, W.
    pub std_power: f64,
    pub n_samples: usize,
    /// °C
    pub housing_temp: f64,
    /// W
    pub input_power: f64,
    /// s
    pub timestamp: f64,
}

/// Everything needed to regenerate a simulated log.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SimulationSnapshot {
    pub source: SourceSpec,
    pub phases: PhasePoint,
    pub imperfections: ImperfectionSpec,
    pub protocol: Protocol,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogMetadata {
    pub seed: Option<u64>,
    pub snapshot: Option<SimulationSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurementLog {
    pub records: Vec<MeasurementRecord>,
    pub metadata: LogMetadata,
}

impl MeasurementLog {
    pub fn new(records: Vec<MeasurementRecord>) -> Self {
        Self {
            records,
            metadata: LogMetadata::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Simulates `protocol.n_cycles` cycles, each measuring the eight shutter
/// configurations in an independently shuffled order.
///
/// Each setting draws its input-power and slow phase noise once, then
/// `samples_per_setting` readings scattered by
/// `fluctuations.sigma_sample_rel`; the record holds their mean and sample
/// standard deviation. The log depends only on the arguments and `seed`.
pub fn simulate_measurement(
    source: &SourceSpec,
    phases: &PhasePoint,
    spec: &ImperfectionSpec,
    protocol: &Protocol,
    seed: u64,
) -> Result<MeasurementLog> {
    source.validate()?;
    spec.validate()?;
    protocol.validate()?;
    let fl = &spec.fluctuations;
    let mut records = Vec::with_capacity(protocol.n_cycles * 8);
    for cycle in 0..protocol.n_cycles {
        let mut order = ShutterConfig::ALL;
        order.shuffle(&mut mc::substream(seed, mc::permutation_stream(cycle)));
        for (slot, config) in order.into_iter().enumerate() {
            let mut rng = mc::substream(seed, mc::setting_stream(cycle, config.index()));
            let mut z = [0.0; NoiseDraw::ARITY];
            for v in z.iter_mut() {
                *v = mc::standard_normal(&mut rng);
            }
            let noise = NoiseDraw::from_slice(&z)?;
            let reading = imperfect_powers(source, phases, spec, config, &noise)?;
            let mut m = Moments::default();
            for _ in 0..protocol.samples_per_setting {
                let x = if fl.sigma_sample_rel > 0.0 {
                    reading * (1.0 + fl.sigma_sample_rel * mc::standard_normal(&mut rng))
                } else {
                    reading
                };
                m.push(x);
            }
            records.push(MeasurementRecord {
                cycle_index: cycle,
                config,
                mean_power: m.mean,
                std_power: m.variance().sqrt(),
                n_samples: protocol.samples_per_setting,
                housing_temp: protocol.housing_temp_c,
                input_power: source.p_in * (1.0 + fl.sigma_pin_rel * noise.power),
                timestamp: (cycle * 8 + slot) as f64 * protocol.setting_duration_s,
            });
        }
    }
    Ok(MeasurementLog {
        records,
        metadata: LogMetadata {
            seed: Some(seed),
            snapshot: Some(SimulationSnapshot {
                source: *source,
                phases: *phases,
                imperfections: *spec,
                protocol: *protocol,
            }),
        },
    })
}
