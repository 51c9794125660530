use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::forward::{CrosstalkConvention, CrosstalkSpec, SourceSpec};
use crate::peres::{peres_parameter, InterferenceTerms};
use crate::phase::PhasePoint;

/// Interference terms seen through phase crosstalk:
/// `α = cos(Δφ_BC + s_α Δφ_DH)`, `β = cos Δφ_CA`, `γ = cos(Δφ_AB + s_γ Δφ_DH)`.
pub fn apply_crosstalk(phases: &PhasePoint, ct: &CrosstalkSpec) -> InterferenceTerms {
    let (sa, sg) = ct.convention.signs();
    InterferenceTerms::new(
        (phases.dphi_bc + sa * ct.dphi_dh).cos(),
        phases.dphi_ca.cos(),
        (phases.dphi_ab + sg * ct.dphi_dh).cos(),
    )
}

/// `F` with crosstalk minus `F` without.
pub fn crosstalk_delta_f(phases: &PhasePoint, ct: &CrosstalkSpec) -> Result<f64> {
    Ok(peres_parameter(apply_crosstalk(phases, ct))?.f - peres_parameter(phases.cosines())?.f)
}

/// Sorkin `ε` produced by crosstalk alone:
/// `2 P_in (√(T_A T_B)(cos Δφ_AB − γ') + √(T_B T_C)(cos Δφ_BC − α'))`
/// with the shifted terms `α'`, `γ'` of [`apply_crosstalk`].
pub fn epsilon_from_crosstalk(phases: &PhasePoint, source: &SourceSpec, ct: &CrosstalkSpec) -> f64 {
    let shifted = apply_crosstalk(phases, ct);
    let [ta, tb, tc] = source.transmissions();
    2.0 * source.p_in
        * ((ta * tb).sqrt() * (phases.dphi_ab.cos() - shifted.gamma)
            + (tb * tc).sqrt() * (phases.dphi_bc.cos() - shifted.alpha))
}

/// Crosstalk strength reproducing a measured `ε`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrosstalkInversion {
    /// The root of smallest magnitude.
    pub dphi_dh: f64,
    /// All roots on `(−π, π)` in ascending order.
    pub roots: Vec<f64>,
}

/// Grid spacing of the root scan, rad.
pub const ROOT_SCAN_STEP: f64 = 1e-3;

/// Solves [`epsilon_from_crosstalk`] for `Δφ_DH` by a sign-change scan on
/// `(−π, π)` followed by bisection. Tangential roots without a sign change
/// are not found.
pub fn crosstalk_from_epsilon(
    epsilon: f64,
    phases: &PhasePoint,
    source: &SourceSpec,
    convention: CrosstalkConvention,
) -> Result<CrosstalkInversion> {
    if !epsilon.is_finite() {
        return Err(Error::Domain("ε must be finite".into()));
    }
    let g = |d: f64| epsilon_from_crosstalk(phases, source, &CrosstalkSpec::new(d, convention)) - epsilon;
    let k_max = ((PI / ROOT_SCAN_STEP).ceil() as i64) - 1;
    let mut roots = Vec::new();
    let mut prev_x = -(k_max as f64) * ROOT_SCAN_STEP;
    let mut prev = g(prev_x);
    if prev == 0.0 {
        roots.push(prev_x);
    }
    for k in (-k_max + 1)..=k_max {
        let x = k as f64 * ROOT_SCAN_STEP;
        let y = g(x);
        if y == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && prev.signum() != y.signum() {
            let (mut lo, mut hi, mut glo) = (prev_x, x, prev);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm.signum() == glo.signum() {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_x = x;
        prev = y;
    }
    let dphi_dh = roots
        .iter()
        .copied()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or_else(|| {
            Error::Analysis(alloc::format!(
                "no real crosstalk phase reproduces ε = {epsilon:e} W"
            ))
        })?;
    Ok(CrosstalkInversion { dphi_dh, roots })
}
