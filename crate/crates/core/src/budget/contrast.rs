use alloc::format;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::mc::{self, McSample, McSummary, MonteCarloModel};
use crate::peres::InterferenceTerms;

/// `ΔF` when every interference term is reduced by the factor `1 − ΔC`,
/// for terms on the physical plane:
/// `2(αβγ − 1)ΔC − (4αβγ − 1)ΔC² + 2αβγ ΔC³`.
pub fn contrast_deviation(terms: InterferenceTerms, delta_c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta_c) {
        return Err(Error::Domain(format!(
            "contrast reduction must lie in [0, 1], got {delta_c}"
        )));
    }
    let p = terms.product();
    let d = delta_c;
    Ok(2.0 * (p - 1.0) * d - (4.0 * p - 1.0) * d * d + 2.0 * p * d * d * d)
}

/// `cos δ` with `δ ~ N(0, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastNoiseModel {
    pub sigma_fast: f64,
    pub seed: u64,
}

impl MonteCarloModel for ContrastNoiseModel {
    fn sample(&self, index: u64) -> McSample {
        let z = mc::standard_normal(&mut mc::substream(self.seed, index));
        McSample::accepted((self.sigma_fast * z).cos())
    }
}

/// Monte Carlo estimate of the interference contrast left by fast phase
/// noise; `mean` converges to `e^{−σ²/2}`.
pub fn contrast_from_phase_noise(sigma_fast: f64, n_samples: u64, seed: u64) -> Result<McSummary> {
    if !(sigma_fast >= 0.0 && sigma_fast.is_finite()) {
        return Err(Error::Configuration(format!(
            "fast phase σ must be ≥ 0, got {sigma_fast}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(mc::run(&ContrastNoiseModel { sigma_fast, seed }, n_samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peres::peres_parameter;
    use crate::phase::PhasePoint;

    #[test]
    fn no_reduction() {
        let t = InterferenceTerms::new(-0.806, 0.961, -0.612);
        assert_eq!(contrast_deviation(t, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn full_decoherence() {
        let t = PhasePoint::new(0.4, 1.1, -1.5).cosines();
        assert!((contrast_deviation(t, 1.0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_scaled_terms() {
        let t = PhasePoint::new(2.50861677, -0.27844392, -2.23017285).cosines();
        for d in [1e-3, 0.1, 0.5] {
            let direct = peres_parameter(t.scaled(1.0 - d)).unwrap().f - peres_parameter(t).unwrap().f;
            assert!((direct - contrast_deviation(t, d).unwrap()).abs() < 1e-12);
        }
        let small = contrast_deviation(t, 2e-6).unwrap();
        assert!((small + 2.1e-6).abs() < 0.05e-6, "{small}");
    }

    #[test]
    fn analytic_contrast() {
        let c = contrast_from_phase_noise(0.0, 10, 0).unwrap();
        assert_eq!(c.mean, 1.0);
        let c = contrast_from_phase_noise(0.002, 1000, 0).unwrap();
        assert!((c.mean - 0.999998).abs() < 4e-7);
        for s in [0.01, 0.1, 1.0] {
            let c = contrast_from_phase_noise(s, 100_000, 7).unwrap();
            let exact = (-0.5 * s * s).exp();
            assert!((c.mean - exact).abs() < 3.0 * c.std_error, "{s}: {} vs {exact}", c.mean);
        }
    }
}
