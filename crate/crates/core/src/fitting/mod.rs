//! Least-squares fits of the housing thermalization and of the interference
//! contrast recorded while the housing settles.
//!
//! Both models are indexed by the cycle number `k`:
//!
//! * thermalization `T(k) = T_0 + ΔT e^{−κk}`
//! * contrast `α(k) = C cos(Δφ_0 + η ΔT e^{−κk})` with `ΔT` fixed from
//!   the temperature fit. `κ` is fitted again, since the sensor and the
//!   chip need not share a time constant.

mod lm;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::error::{Error, Result};

pub use lm::{invert, nlls_minimize, solve, LmOptions, NllsResult};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThermalizationFit {
    /// °C
    pub t0: f64,
    /// °C
    pub delta_t: f64,
    /// per cycle
    pub kappa_th: f64,
    pub residual_norm: f64,
    /// One standard deviation of `(t0, delta_t, kappa_th)`.
    pub parameter_uncertainties: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContrastFit {
    pub c_alpha: f64,
    /// rad, in `[0, 2π)`
    pub dphi0: f64,
    /// rad/°C
    pub eta: f64,
    /// per cycle
    pub kappa_th: f64,
    /// The fixed temperature step the fit used, °C.
    pub delta_t: f64,
    pub residual_norm: f64,
    /// One standard deviation of `(c_alpha, dphi0, eta, kappa_th)`.
    pub parameter_uncertainties: Option<[f64; 4]>,
}

pub fn thermalization_model(k: f64, p: &[f64]) -> f64 {
    p[0] + p[1] * (-p[2] * k).exp()
}

fn array<const N: usize>(v: Option<Vec<f64>>) -> Option<[f64; N]> {
    v.and_then(|v| v.try_into().ok())
}

fn indices(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64).collect()
}

/// Fits `T_0 + ΔT e^{−κk}` to temperatures sampled once per cycle.
///
/// Starts from `T_0` = last value, `ΔT` = first − last and `κ` from a
/// straight-line fit of `ln((T − T_0)/ΔT)`. A constant series yields
/// `ΔT = 0`, `T_0` = mean and `κ = 0`.
pub fn fit_thermalization(temps: &[f64]) -> Result<ThermalizationFit> {
    let n = temps.len();
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    if temps.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("non-finite temperature".into()));
    }
    let mean = temps.iter().sum::<f64>() / n as f64;
    let spread = temps.iter().fold(0.0f64, |m, t| m.max((t - mean).abs()));
    if spread <= 1e-12 * mean.abs().max(1.0) {
        return Ok(ThermalizationFit {
            t0: mean,
            delta_t: 0.0,
            kappa_th: 0.0,
            residual_norm: temps.iter().map(|t| (t - mean).powi(2)).sum::<f64>().sqrt(),
            parameter_uncertainties: None,
        });
    }
    let t0 = temps[n - 1];
    let dt = temps[0] - t0;
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, t) in temps.iter().enumerate() {
        let ratio = (t - t0) / dt;
        if ratio > 0.0 && ratio.is_finite() {
            let (x, y) = (k as f64, ratio.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            m += 1.0;
        }
    }
    let slope = if m >= 2.0 {
        (m * sxy - sx * sy) / (m * sxx - sx * sx)
    } else {
        f64::NAN
    };
    let kappa = if slope.is_finite() && slope < 0.0 {
        -slope
    } else {
        1.0 / (n - 1) as f64
    };
    let x = indices(n);
    let r = nlls_minimize(
        &thermalization_model,
        &x,
        temps,
        &[t0, dt, kappa],
        &LmOptions::default(),
    )?;
    Ok(ThermalizationFit {
        t0: r.params[0],
        delta_t: r.params[1],
        kappa_th: r.params[2],
        residual_norm: r.residual_norm,
        parameter_uncertainties: array(r.uncertainties()),
    })
}

/// `C cos(Δφ_0 + η ΔT e^{−κk})` with parameters `[C, Δφ_0, η, κ]`.
pub fn contrast_model(k: f64, delta_t: f64, p: &[f64]) -> f64 {
    p[0] * (p[1] + p[2] * delta_t * (-p[3] * k).exp()).cos()
}

/// Starting points tried by [`fit_contrast`]; the eight with the lowest
/// residual (after solving for `C` linearly) seed the minimizer.
const SEEDS_REFINED: usize = 8;

/// Fits the contrast model to a per-cycle series of interference terms.
///
/// The model is multimodal in `(Δφ_0, η)`. Starting points span 16 values
/// of `Δφ_0` in `[0, 2π)`, both signs of `η`, total phase excursions
/// `|η ΔT| ∈ {π/2, π, 2π, 4π}` and `κ ∈ {1, 3}/(n − 1)`. The result is
/// reported with `C > 0`, `η ≥ 0` and `Δφ_0 ∈ [0, 2π)`, using
/// `C cos x = −C cos(x + π)` and `cos x = cos(−x)`.
pub fn fit_contrast(alphas: &[f64], delta_t: f64) -> Result<ContrastFit> {
    let n = alphas.len();
    if n < 5 {
        return Err(Error::InsufficientData { needed: 5, got: n });
    }
    if alphas.iter().any(|a| !a.is_finite()) || !delta_t.is_finite() {
        return Err(Error::Domain("non-finite contrast fit input".into()));
    }
    if delta_t == 0.0 {
        return Err(Error::Unidentifiable(
            "η cannot be determined with ΔT = 0".into(),
        ));
    }
    let mean = alphas.iter().sum::<f64>() / n as f64;
    let spread = alphas.iter().fold(0.0f64, |m, a| m.max((a - mean).abs()));
    if spread <= 1e-12 * mean.abs().max(1e-300) {
        return Err(Error::Unidentifiable(format!(
            "flat series (all values {mean}) does not constrain phase, η and κ"
        )));
    }
    let x = indices(n);
    let model = |k: f64, p: &[f64]| contrast_model(k, delta_t, p);
    let rss_with_c = |p: &mut [f64]| {
        let (mut num, mut den) = (0.0, 0.0);
        for (&k, &a) in x.iter().zip(alphas) {
            let c = (p[1] + p[2] * delta_t * (-p[3] * k).exp()).cos();
            num += a * c;
            den += c * c;
        }
        p[0] = if den > 0.0 { num / den } else { 0.0 };
        x.iter()
            .zip(alphas)
            .map(|(&k, &a)| (a - model(k, p)).powi(2))
            .sum::<f64>()
    };
    let mut seeds: Vec<([f64; 4], f64)> = Vec::new();
    for i in 0..16 {
        let phi0 = TAU * i as f64 / 16.0;
        for sign in [1.0, -1.0] {
            for excursion in [0.5 * PI, PI, TAU, 2.0 * TAU] {
                for kk in [1.0, 3.0] {
                    let mut p = [
                        1.0,
                        phi0,
                        sign * excursion / delta_t.abs(),
                        kk / (n - 1) as f64,
                    ];
                    let cost = rss_with_c(&mut p);
                    seeds.push((p, cost));
                }
            }
        }
    }
    seeds.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best: Option<NllsResult> = None;
    let mut last_err = None;
    for (p, _) in seeds.iter().take(SEEDS_REFINED) {
        match nlls_minimize(&model, &x, alphas, p, &LmOptions::default()) {
            Ok(r) => {
                if best.as_ref().map_or(true, |b| r.residual_norm < b.residual_norm) {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let r = match (best, last_err) {
        (Some(r), _) => r,
        (None, Some(e)) => return Err(e),
        (None, None) => unreachable!("at least one seed is refined"),
    };
    let [mut c, mut phi0, mut eta, kappa] = [r.params[0], r.params[1], r.params[2], r.params[3]];
    if c < 0.0 {
        c = -c;
        phi0 += PI;
    }
    if eta < 0.0 {
        eta = -eta;
        phi0 = -phi0;
    }
    let mut phi0 = phi0 - TAU * (phi0 / TAU).floor();
    if phi0 >= TAU {
        phi0 -= TAU;
    }
    Ok(ContrastFit {
        c_alpha: c,
        dphi0: phi0,
        eta,
        kappa_th: kappa,
        delta_t,
        residual_norm: r.residual_norm,
        parameter_uncertainties: array(r.uncertainties()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn thermalization_noise_free() {
        let p = [22.04, 13.269, 0.02055];
        let temps: Vec<f64> = (0..150).map(|k| thermalization_model(k as f64, &p)).collect();
        let fit = fit_thermalization(&temps).unwrap();
        assert!(rel(fit.t0, p[0]) < 1e-6);
        assert!(rel(fit.delta_t, p[1]) < 1e-6);
        assert!(rel(fit.kappa_th, p[2]) < 1e-6);
    }

    #[test]
    fn thermalization_constant() {
        let fit = fit_thermalization(&[23.0; 10]).unwrap();
        assert_eq!((fit.t0, fit.delta_t), (23.0, 0.0));
    }

    #[test]
    fn contrast_noise_free() {
        let p = [1.0, 3.44, 0.203, 0.0415];
        let dt = 13.269;
        let alphas: Vec<f64> = (0..72).map(|k| contrast_model(k as f64, dt, &p)).collect();
        let fit = fit_contrast(&alphas, dt).unwrap();
        assert!(rel(fit.c_alpha, p[0]) < 1e-6);
        assert!(rel(fit.dphi0, p[1]) < 1e-6);
        assert!(rel(fit.eta, p[2]) < 1e-6);
        assert!(rel(fit.kappa_th, p[3]) < 1e-6);

        let doubled: Vec<f64> = alphas.iter().map(|a| 2.0 * a).collect();
        let fit2 = fit_contrast(&doubled, dt).unwrap();
        assert!(rel(fit2.c_alpha, 2.0) < 1e-6);
        assert!(rel(fit2.eta, fit.eta) < 1e-6);
        assert!(rel(fit2.dphi0, fit.dphi0) < 1e-6);
    }

    #[test]
    fn flat_contrast_is_unidentifiable() {
        assert!(matches!(
            fit_contrast(&[0.3; 20], 13.0),
            Err(Error::Unidentifiable(_))
        ));
    }
}
