#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use super::{detector_response, CrosstalkSpec, ImperfectionSpec, ShutterConfig, SourceSpec};
use crate::error::{Error, Result};
use crate::peres::CyclePowers;
use crate::phase::PhasePoint;

/// Path pairs `(k, l)` in the order AB, BC, CA.
const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Standard-normal variates perturbing one shutter setting.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseDraw {
    /// Scales `FluctuationSpec::sigma_pin_rel`.
    pub power: f64,
    /// Scale `FluctuationSpec::sigma_phase` for `(Δφ_BC, Δφ_CA, Δφ_AB)`.
    pub phase: [f64; 3],
}

impl NoiseDraw {
    pub const ARITY: usize = 4;

    pub const fn zero() -> Self {
        Self {
            power: 0.0,
            phase: [0.0; 3],
        }
    }

    /// Builds a draw from `[power, phase_bc, phase_ca, phase_ab]`.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        match *values {
            [power, bc, ca, ab] => Ok(Self {
                power,
                phase: [bc, ca, ab],
            }),
            _ => Err(Error::Usage(alloc::format!(
                "noise draw needs {} variates, got {}",
                Self::ARITY,
                values.len()
            ))),
        }
    }
}

/// Sum over the three paths with pairwise interference:
/// `Σ_k w_k m_k² + 2 C Σ_(k,l) √(w_k w_l) m_k m_l cos(Δφ_kl + e_k − e_l)`.
fn coherent_sum(
    magnitudes: [f64; 3],
    extra: [f64; 3],
    phases: &PhasePoint,
    weights: [f64; 3],
    contrast: f64,
) -> f64 {
    let mut total = 0.0;
    for k in 0..3 {
        total += weights[k] * magnitudes[k] * magnitudes[k];
    }
    for (k, l) in PAIRS {
        let amp = (weights[k] * weights[l]).sqrt() * magnitudes[k] * magnitudes[l];
        total += 2.0 * contrast * amp * (phases.pair(k, l) + extra[k] - extra[l]).cos();
    }
    total
}

/// Coherent power `P_in |Σ_open √T_k e^{iφ_k}|²` for an ideal instrument.
pub fn ideal_powers(source: &SourceSpec, phases: &PhasePoint, config: ShutterConfig) -> f64 {
    let t = source.transmissions();
    let open = config.open();
    let mags = [0, 1, 2].map(|k| if open[k] { t[k].sqrt() } else { 0.0 });
    source.p_in * coherent_sum(mags, [0.0; 3], phases, [1.0; 3], 1.0)
}

/// All eight ideal powers of one cycle; `P_0 = 0`, so no subtraction is needed.
pub fn ideal_cycle_powers(source: &SourceSpec, phases: &PhasePoint) -> CyclePowers {
    let mut powers =
        CyclePowers::raw(ShutterConfig::ALL.map(|c| ideal_powers(source, phases, c)));
    powers.background_subtracted = true;
    powers
}

/// Phase shifts `[e_A, e_B, e_C]` that closed shutters impose on the paths.
///
/// A closed shutter C shifts `Δφ_AB` by `s_γ Δφ_DH`, a closed shutter A
/// shifts `Δφ_BC` by `s_α Δφ_DH`. In the cancelling convention a closed
/// shutter B shifts A and C equally, leaving `Δφ_CA` unchanged; the
/// co-moving conventions leave a closed B without effect.
pub fn crosstalk_path_shifts(ct: &CrosstalkSpec, config: ShutterConfig) -> [f64; 3] {
    let d = ct.dphi_dh;
    let (s_alpha, s_gamma) = ct.convention.signs();
    let mut shifts = [0.0; 3];
    if d == 0.0 {
        return shifts;
    }
    let [open_a, open_b, open_c] = config.open();
    if !open_c {
        if s_gamma > 0.0 {
            shifts[0] += d;
        } else {
            shifts[1] += d;
        }
    }
    if !open_a {
        if s_alpha > 0.0 {
            shifts[1] += d;
        } else {
            shifts[2] += d;
        }
    }
    if !open_b && ct.convention == super::CrosstalkConvention::Cancelling {
        shifts[0] += d;
        shifts[2] += d;
    }
    shifts
}

/// Light power at the detector before its response is applied, dark
/// background included.
pub fn optical_power(
    source: &SourceSpec,
    phases: &PhasePoint,
    spec: &ImperfectionSpec,
    config: ShutterConfig,
    noise: &NoiseDraw,
) -> f64 {
    let fl = &spec.fluctuations;
    let p_in = (source.p_in * (1.0 + fl.sigma_pin_rel * noise.power)).max(0.0);
    let perturb = |p: &PhasePoint| {
        PhasePoint::new(
            p.dphi_bc + fl.sigma_phase * noise.phase[0],
            p.dphi_ca + fl.sigma_phase * noise.phase[1],
            p.dphi_ab + fl.sigma_phase * noise.phase[2],
        )
    };
    let phases_h = perturb(phases);
    let phases_v = perturb(&spec.polarization.phases_v);

    let t = source.transmissions();
    let tau = spec.residual.tau;
    let open = config.open();
    let shifts = crosstalk_path_shifts(&spec.crosstalk, config);
    let mut mags = [0.0; 3];
    let mut extra = [0.0; 3];
    for k in 0..3 {
        if open[k] {
            mags[k] = t[k].sqrt();
            extra[k] = shifts[k];
        } else {
            mags[k] = (tau * t[k]).sqrt();
            extra[k] = shifts[k] - spec.residual.phi_sh;
        }
    }
    let contrast = fl.contrast();
    let [w_h, w_v] = spec.polarization.weights();
    let h = coherent_sum(mags, extra, &phases_h, w_h, contrast);
    let light = if w_v.iter().all(|&w| w == 0.0) {
        h
    } else {
        h + coherent_sum(mags, extra, &phases_v, w_v, contrast)
    };
    p_in * light + source.p_dark
}

/// Detector reading for one shutter setting of the imperfect instrument.
///
/// With every imperfection disabled and a zero noise draw this equals
/// `ideal_powers + p_dark` exactly.
pub fn imperfect_powers(
    source: &SourceSpec,
    phases: &PhasePoint,
    spec: &ImperfectionSpec,
    config: ShutterConfig,
    noise: &NoiseDraw,
) -> Result<f64> {
    detector_response(
        optical_power(source, phases, spec, config, noise),
        &spec.nonlinearity,
    )
}

/// Noise-free readings of all eight configurations, not background-subtracted.
pub fn cycle_powers(
    source: &SourceSpec,
    phases: &PhasePoint,
    spec: &ImperfectionSpec,
) -> Result<CyclePowers> {
    let mut values = [0.0; 8];
    for (v, c) in values.iter_mut().zip(ShutterConfig::ALL) {
        *v = imperfect_powers(source, phases, spec, c, &NoiseDraw::zero())?;
    }
    Ok(CyclePowers::raw(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{CrosstalkConvention, ResidualLightSpec};
    use crate::peres::{interference_terms, peres_parameter, sorkin_epsilon, subtract_background};
    use proptest::prelude::*;

    const T: [f64; 3] = [0.26, 0.52, 0.22];

    fn source() -> SourceSpec {
        SourceSpec::new(1.0, T)
    }

    #[test]
    fn single_path_power_is_transmission() {
        let p = ideal_powers(&source(), &PhasePoint::default(), ShutterConfig::A);
        assert_eq!(p, 0.26);
        assert_eq!(ideal_powers(&source(), &PhasePoint::default(), ShutterConfig::NONE), 0.0);
    }

    #[test]
    fn two_paths_in_phase() {
        let src = SourceSpec::new(1.0, [0.25, 0.25, 0.5]);
        let p = ideal_powers(&src, &PhasePoint::default(), ShutterConfig::AB);
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn born_rule_identity() {
        let phases = PhasePoint::new(0.7, -2.0, 1.3);
        let p = ideal_cycle_powers(&source(), &phases);
        let rhs = p.pab + p.pbc + p.pca - p.pa - p.pb - p.pc;
        assert!((p.pabc - rhs).abs() < 1e-12);
    }

    #[test]
    fn noise_draw_arity() {
        assert!(NoiseDraw::from_slice(&[0.0; 4]).is_ok());
        assert!(matches!(NoiseDraw::from_slice(&[0.0; 3]), Err(Error::Usage(_))));
    }

    #[test]
    fn disabled_spec_reduces_to_ideal_plus_dark() {
        let src = source().with_dark(3e-3);
        let phases = PhasePoint::new(0.4, 1.9, -2.3);
        for c in ShutterConfig::ALL {
            let got =
                imperfect_powers(&src, &phases, &ImperfectionSpec::default(), c, &NoiseDraw::zero())
                    .unwrap();
            assert_eq!(got, ideal_powers(&src, &phases, c) + 3e-3, "{c}");
        }
    }

    #[test]
    fn all_closed_residual_light() {
        let tau = 2.2e-4;
        let phases = PhasePoint::new(2.5, -0.3, -2.2);
        let src = source().with_dark(1e-6);
        let spec = ImperfectionSpec::residual_only(tau, 0.9);
        let p0 = imperfect_powers(&src, &phases, &spec, ShutterConfig::NONE, &NoiseDraw::zero())
            .unwrap();
        let sum_t: f64 = T.iter().sum();
        let cross = (T[1] * T[2]).sqrt() * phases.dphi_bc.cos()
            + (T[2] * T[0]).sqrt() * phases.dphi_ca.cos()
            + (T[0] * T[1]).sqrt() * phases.dphi_ab.cos();
        let expected = tau * (sum_t + 2.0 * cross);
        assert!(((p0 - 1e-6) - expected).abs() <= 1e-15 * expected.abs().max(1.0));
    }

    #[test]
    fn cancelling_crosstalk_keeps_f_on_plane() {
        let phases = PhasePoint::new(2.5086, -0.2784, -2.2302);
        for d in [-0.5, -0.017, 0.01, 0.3] {
            let spec =
                ImperfectionSpec::crosstalk_only(CrosstalkSpec::new(d, CrosstalkConvention::Cancelling));
            let powers = subtract_background(cycle_powers(&source(), &phases, &spec).unwrap()).unwrap();
            let f = peres_parameter(interference_terms(&powers).unwrap()).unwrap().f;
            assert!((f - 1.0).abs() < 1e-12, "{d}: {f}");
        }
    }

    #[test]
    fn crosstalk_shifts_the_right_pairs() {
        let phases = PhasePoint::new(0.9, -1.6, 0.7);
        let d = 0.05;
        for conv in CrosstalkConvention::ALL {
            let (sa, sg) = conv.signs();
            let spec = ImperfectionSpec::crosstalk_only(CrosstalkSpec::new(d, conv));
            let p = subtract_background(cycle_powers(&source(), &phases, &spec).unwrap()).unwrap();
            let t = interference_terms(&p).unwrap();
            assert!((t.alpha - (phases.dphi_bc + sa * d).cos()).abs() < 1e-12);
            assert!((t.beta - phases.dphi_ca.cos()).abs() < 1e-12);
            assert!((t.gamma - (phases.dphi_ab + sg * d).cos()).abs() < 1e-12);
        }
    }

    fn residual_formulas(t: [f64; 3], p_in: f64, p_dark: f64, tau: f64, phi_sh: f64, ph: &PhasePoint) -> [f64; 8] {
        // Closed-form residual-light powers written pair by pair.
        let d = |i: usize, j: usize| ph.pair(i, j);
        let p0 = p_dark
            + p_in
                * tau
                * (t[0] + t[1] + t[2]
                    + 2.0 * (t[1] * t[2]).sqrt() * d(1, 2).cos()
                    + 2.0 * (t[2] * t[0]).sqrt() * d(2, 0).cos()
                    + 2.0 * (t[0] * t[1]).sqrt() * d(0, 1).cos());
        let single = |i: usize| {
            let others: [usize; 2] = match i {
                0 => [1, 2],
                1 => [0, 2],
                _ => [0, 1],
            };
            let [k, l] = others;
            let mut s = t[i] + tau * (t[k] + t[l]);
            for j in others {
                s += 2.0 * (tau * t[i]).sqrt() * t[j].sqrt() * (d(i, j) + phi_sh).cos();
            }
            s += 2.0 * tau * (t[k] * t[l]).sqrt() * d(k, l).cos();
            p_dark + p_in * s
        };
        let double = |i: usize, j: usize| {
            let k = 3 - i - j;
            p_dark
                + p_in
                    * (t[i] + t[j] + tau * t[k]
                        + 2.0 * (t[i] * t[j]).sqrt() * d(i, j).cos()
                        + 2.0 * (tau * t[i] * t[k]).sqrt() * (d(i, k) + phi_sh).cos()
                        + 2.0 * (tau * t[j] * t[k]).sqrt() * (d(j, k) + phi_sh).cos())
        };
        [p0, single(0), single(1), single(2), double(0, 1), double(1, 2), double(2, 0), f64::NAN]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn amplitude_model_matches_residual_light_formulas(
            ta in 0.01..1.0f64, tb in 0.01..1.0f64, tc in 0.01..1.0f64,
            p_in in 1e-9..1e-3f64, dark in 0.0..1e-9f64,
            tau in 0.0..0.01f64, phi_sh in -4.0..4.0f64,
            bc in -3.0..3.0f64, ca in -3.0..3.0f64, ab in -3.0..3.0f64,
        ) {
            let t = [ta, tb, tc];
            let src = SourceSpec::new(p_in, t).with_dark(dark);
            let phases = PhasePoint::new(bc, ca, ab);
            let spec = ImperfectionSpec { residual: ResidualLightSpec { tau, phi_sh }, ..Default::default() };
            let model = cycle_powers(&src, &phases, &spec).unwrap().values();
            let formulas = residual_formulas(t, p_in, dark, tau, phi_sh, &phases);
            for i in 0..7 {
                prop_assert!((model[i] - formulas[i]).abs() <= 1e-11 * p_in,
                    "config {}: {} vs {}", i, model[i], formulas[i]);
            }
        }
    }

    proptest! {
        #[test]
        fn ideal_terms_recover_cosines(
            ta in 0.01..1.0f64, tb in 0.01..1.0f64, tc in 0.01..1.0f64,
            bc in -3.1..3.1f64, ab in -3.1..3.1f64,
        ) {
            let phases = PhasePoint::new(bc, -bc - ab, ab);
            let p = ideal_cycle_powers(&SourceSpec::new(1.0, [ta, tb, tc]), &phases);
            let t = interference_terms(&p).unwrap();
            let c = phases.cosines();
            prop_assert!((t.alpha - c.alpha).abs() < 1e-12);
            prop_assert!((t.beta - c.beta).abs() < 1e-12);
            prop_assert!((t.gamma - c.gamma).abs() < 1e-12);
        }

        #[test]
        fn ideal_epsilon_vanishes(
            ta in 0.01..1.0f64, tb in 0.01..1.0f64, tc in 0.01..1.0f64,
            bc in -9.0..9.0f64, ca in -9.0..9.0f64, ab in -9.0..9.0f64,
        ) {
            let p = ideal_cycle_powers(&SourceSpec::new(1.0, [ta, tb, tc]), &PhasePoint::new(bc, ca, ab));
            let total: f64 = p.values().iter().map(|v| v.abs()).sum();
            prop_assert!(sorkin_epsilon(&p).unwrap().abs() <= 1e-12 * total);
        }
    }
}
