use alloc::format;

use crate::analysis::cycle_peres;
use crate::error::{Error, Result};
use crate::forward::{ideal_cycle_powers, ideal_powers, ShutterConfig, SourceSpec};
use crate::mc::{self, McSample, McSummary, MonteCarloModel};
use crate::peres::CyclePowers;
use crate::phase::PhasePoint;

pub const DEFAULT_MC_SAMPLES: u64 = 100_000;

/// Result of a fluctuation Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluctuationMc {
    /// Mean deviation of `F` from the noise-free value.
    pub delta_f: f64,
    /// Standard deviation of `F`.
    pub sigma_f: f64,
    /// Monte Carlo standard error of `delta_f`.
    pub std_error: f64,
    pub n_samples: u64,
    /// Input-power draws rejected for being non-positive.
    pub rejected: u64,
}

impl From<McSummary> for FluctuationMc {
    fn from(s: McSummary) -> Self {
        Self {
            delta_f: s.mean,
            sigma_f: s.std,
            std_error: s.std_error,
            n_samples: s.n,
            rejected: s.rejected,
        }
    }
}

fn f_of(powers: [f64; 8]) -> f64 {
    cycle_peres(CyclePowers::raw(powers)).map_or(f64::NAN, |r| r.f)
}

/// Each configuration is measured with its own input power
/// `P_in (1 + σ z)`, `z` standard normal; draws giving `P_in ≤ 0` are
/// redrawn and counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFluctuationModel {
    powers: [f64; 8],
    sigma_rel: f64,
    seed: u64,
    baseline: f64,
}

impl PowerFluctuationModel {
    pub fn new(phases: &PhasePoint, source: &SourceSpec, sigma_rel: f64, seed: u64) -> Result<Self> {
        source.validate()?;
        if !(sigma_rel >= 0.0 && sigma_rel.is_finite()) {
            return Err(Error::Configuration(format!(
                "relative power σ must be ≥ 0, got {sigma_rel}"
            )));
        }
        let powers = ideal_cycle_powers(source, phases).values();
        Ok(Self {
            powers,
            sigma_rel,
            seed,
            baseline: f_of(powers),
        })
    }
}

impl MonteCarloModel for PowerFluctuationModel {
    fn sample(&self, index: u64) -> McSample {
        let mut rng = mc::substream(self.seed, index);
        let mut rejected = 0;
        let mut powers = self.powers;
        for p in powers.iter_mut() {
            let scale = loop {
                let s = 1.0 + self.sigma_rel * mc::standard_normal(&mut rng);
                if s > 0.0 {
                    break s;
                }
                rejected += 1;
            };
            *p *= scale;
        }
        McSample {
            value: f_of(powers) - self.baseline,
            rejected,
        }
    }
}

/// Each two-path configuration sees its pairwise phase perturbed by an
/// independent `N(0, σ²)` draw; the input power is stable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFluctuationModel {
    source: SourceSpec,
    phases: PhasePoint,
    sigma_phase: f64,
    seed: u64,
    baseline: f64,
}

impl PhaseFluctuationModel {
    pub fn new(
        phases: &PhasePoint,
        source: &SourceSpec,
        sigma_phase: f64,
        seed: u64,
    ) -> Result<Self> {
        source.validate()?;
        if !(sigma_phase >= 0.0 && sigma_phase.is_finite()) {
            return Err(Error::Configuration(format!(
                "phase σ must be ≥ 0, got {sigma_phase}"
            )));
        }
        Ok(Self {
            source: *source,
            phases: *phases,
            sigma_phase,
            seed,
            baseline: f_of(ideal_cycle_powers(source, phases).values()),
        })
    }
}

impl MonteCarloModel for PhaseFluctuationModel {
    fn sample(&self, index: u64) -> McSample {
        let mut rng = mc::substream(self.seed, index);
        let mut powers = [0.0; 8];
        for (p, config) in powers.iter_mut().zip(ShutterConfig::ALL) {
            let mut z = [0.0; 3];
            for v in z.iter_mut() {
                *v = mc::standard_normal(&mut rng);
            }
            let s = self.sigma_phase;
            let perturbed = PhasePoint::new(
                self.phases.dphi_bc + s * z[0],
                self.phases.dphi_ca + s * z[1],
                self.phases.dphi_ab + s * z[2],
            );
            *p = ideal_powers(&self.source, &perturbed, config);
        }
        McSample::accepted(f_of(powers) - self.baseline)
    }
}

fn require_samples(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: n as usize,
        });
    }
    Ok(())
}

/// Monte Carlo of `F` under per-setting input-power fluctuations.
pub fn mc_power_fluctuations(
    phases: &PhasePoint,
    source: &SourceSpec,
    sigma_rel: f64,
    n_samples: u64,
    seed: u64,
) -> Result<FluctuationMc> {
    require_samples(n_samples)?;
    let model = PowerFluctuationModel::new(phases, source, sigma_rel, seed)?;
    Ok(mc::run(&model, n_samples).into())
}

/// Monte Carlo of `F` under per-setting phase fluctuations.
pub fn mc_phase_fluctuations(
    phases: &PhasePoint,
    source: &SourceSpec,
    sigma_phase: f64,
    n_samples: u64,
    seed: u64,
) -> Result<FluctuationMc> {
    require_samples(n_samples)?;
    let model = PhaseFluctuationModel::new(phases, source, sigma_phase, seed)?;
    Ok(mc::run(&model, n_samples).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (PhasePoint, SourceSpec) {
        (
            PhasePoint::new(2.50861677, -0.27844392, -2.23017285),
            SourceSpec::new(1e-6, [0.26, 0.52, 0.22]),
        )
    }

    #[test]
    fn zero_sigma_is_exact() {
        let (p, s) = setup();
        let a = mc_power_fluctuations(&p, &s, 0.0, 1000, 1).unwrap();
        assert_eq!((a.delta_f, a.sigma_f), (0.0, 0.0));
        let b = mc_phase_fluctuations(&p, &s, 0.0, 1000, 1).unwrap();
        assert_eq!((b.delta_f, b.sigma_f), (0.0, 0.0));
    }

    #[test]
    fn sigma_f_is_linear_for_small_noise() {
        let (p, s) = setup();
        let a = mc_power_fluctuations(&p, &s, 0.001, 20_000, 3).unwrap();
        let b = mc_power_fluctuations(&p, &s, 0.002, 20_000, 3).unwrap();
        let ratio = b.sigma_f / a.sigma_f;
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn phase_noise_vanishes_with_sigma() {
        let (p, s) = setup();
        let big = mc_phase_fluctuations(&p, &s, 1e-2, 20_000, 5).unwrap();
        let small = mc_phase_fluctuations(&p, &s, 1e-4, 20_000, 5).unwrap();
        assert!(small.sigma_f < 2e-2 * big.sigma_f);
        assert!(small.delta_f.abs() < 1e-6);
    }

    #[test]
    fn rejections_are_counted() {
        let (p, s) = setup();
        let r = mc_power_fluctuations(&p, &s, 0.8, 2000, 9).unwrap();
        assert!(r.rejected > 0);
        assert!(r.delta_f.is_finite());
    }
}
