#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::error::Result;
use crate::forward::{PolarizationSpec, SourceSpec};
use crate::peres::{interference_terms, peres_parameter, CyclePowers, InterferenceTerms, PeresResult};

/// `F` of detector powers summed incoherently over two polarizations.
///
/// Path `i` carries the fraction `h_i` of its power in H and `1 − h_i` in
/// V (none with the polarizer enabled); each polarization interferes with
/// its own terms.
pub fn polarization_f(
    terms_h: InterferenceTerms,
    terms_v: InterferenceTerms,
    splits: &PolarizationSpec,
    source: &SourceSpec,
) -> Result<PeresResult> {
    let t = source.transmissions();
    let [w_h, w_v] = splits.weights();
    let single = |i: usize| source.p_in * t[i] * (w_h[i] + w_v[i]);
    let pair = |i: usize, j: usize, h: f64, v: f64| {
        single(i)
            + single(j)
            + 2.0 * source.p_in * (t[i] * t[j]).sqrt()
                * ((w_h[i] * w_h[j]).sqrt() * h + (w_v[i] * w_v[j]).sqrt() * v)
    };
    let mut powers = CyclePowers::raw([
        0.0,
        single(0),
        single(1),
        single(2),
        pair(0, 1, terms_h.gamma, terms_v.gamma),
        pair(1, 2, terms_h.alpha, terms_v.alpha),
        pair(2, 0, terms_h.beta, terms_v.beta),
        0.0,
    ]);
    powers.background_subtracted = true;
    peres_parameter(interference_terms(&powers)?)
}

/// `F` for equal H/V power on every path and on-plane H and V terms:
/// `½(1 + α^Hα^V + β^Hβ^V + γ^Hγ^V − ½ Σ α^i β^j γ^k + α^Hβ^Hγ^H + α^Vβ^Vγ^V)`,
/// the sum running over all eight polarization assignments.
pub fn equal_split_closed_form(h: InterferenceTerms, v: InterferenceTerms) -> f64 {
    let mut triple = 0.0;
    for a in [h.alpha, v.alpha] {
        for b in [h.beta, v.beta] {
            for g in [h.gamma, v.gamma] {
                triple += a * b * g;
            }
        }
    }
    0.5 * (1.0 + h.alpha * v.alpha + h.beta * v.beta + h.gamma * v.gamma - 0.5 * triple
        + h.product()
        + v.product())
}
