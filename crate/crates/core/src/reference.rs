//! Published values of the two reference datasets (housing at 23 °C and
//! 30 °C). They come from laboratory logs that are not part of this crate
//! and serve as comparison values only.

use crate::peres::InterferenceTerms;

/// A value with its one-standard-error uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Measured {
    pub value: f64,
    pub uncertainty: f64,
}

impl Measured {
    pub const fn new(value: f64, uncertainty: f64) -> Self {
        Self { value, uncertainty }
    }
}

/// Published `ΔF` bounds of one budget entry.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PublishedBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReferenceDataset {
    pub housing_temp_c: f64,
    /// Cycle-averaged terms computed directly from the powers.
    pub reconstructed_terms: InterferenceTerms,
    /// Their projection onto the physical plane.
    pub corrected_terms: InterferenceTerms,
    pub mean_f: Measured,
    pub measured_delta_f: Measured,
    /// W
    pub epsilon: Measured,
    pub kappa: Measured,
    pub tau: Measured,
    pub crosstalk_dphi_dh: f64,
    pub crosstalk_delta_f: f64,
    /// `(ΔF, σ_F)` of the input-power Monte Carlo.
    pub power_fluctuations: (f64, f64),
    /// `(ΔF, σ_F)` of the phase Monte Carlo.
    pub phase_fluctuations: (f64, f64),
    pub nonlinearity: PublishedBounds,
    pub power_bound: PublishedBounds,
    pub phase_bound: PublishedBounds,
    pub contrast: PublishedBounds,
    pub crosstalk: PublishedBounds,
    pub residual_light: PublishedBounds,
    pub total: PublishedBounds,
}

const fn point(v: f64) -> PublishedBounds {
    PublishedBounds { lower: v, upper: v }
}

const fn bounds(lower: f64, upper: f64) -> PublishedBounds {
    PublishedBounds { lower, upper }
}

/// Path transmissions `(T_A, T_B, T_C)`.
pub const TRANSMISSIONS: [f64; 3] = [0.26, 0.52, 0.22];

/// Relative standard deviation of the laser power.
pub const POWER_STABILITY_REL: f64 = 0.0032;

pub const HOUSING_23C: ReferenceDataset = ReferenceDataset {
    housing_temp_c: 23.0,
    reconstructed_terms: InterferenceTerms::new(-0.765, 0.941, -0.664),
    corrected_terms: InterferenceTerms::new(-0.806, 0.961, -0.612),
    mean_f: Measured::new(0.9553, 0.0004),
    measured_delta_f: Measured::new(-4.47e-2, 0.04e-2),
    epsilon: Measured::new(-2.58e-9, 0.16e-9),
    kappa: Measured::new(-14.0e-4, 0.8e-4),
    tau: Measured::new(2.20e-4, 0.02e-4),
    crosstalk_dphi_dh: -1.7e-2,
    crosstalk_delta_f: -9.0e-3,
    power_fluctuations: (5.1e-4, 1.8e-2),
    phase_fluctuations: (0.8e-4, 1.0e-2),
    nonlinearity: point(-4.7e-5),
    power_bound: bounds(0.0, 4.1e-4),
    phase_bound: bounds(0.0, 1.8e-4),
    contrast: point(-2.5e-6),
    crosstalk: point(-6.4e-3),
    residual_light: bounds(-2.7e-2, 2.8e-2),
    total: bounds(-3.3e-2, 2.2e-2),
};

pub const HOUSING_30C: ReferenceDataset = ReferenceDataset {
    housing_temp_c: 30.0,
    reconstructed_terms: InterferenceTerms::new(-0.405, 0.980, -0.355),
    corrected_terms: InterferenceTerms::new(-0.449, 0.989, -0.310),
    mean_f: Measured::new(0.9683, 0.0009),
    measured_delta_f: Measured::new(-3.16e-2, 0.09e-2),
    epsilon: Measured::new(1.5e-9, 0.5e-9),
    kappa: Measured::new(11e-4, 4e-4),
    tau: Measured::new(2.707e-4, 0.004e-4),
    crosstalk_dphi_dh: -1.4e-2,
    crosstalk_delta_f: 6.6e-3,
    power_fluctuations: (1.4e-4, 1.4e-2),
    phase_fluctuations: (-8.1e-4, 1.4e-2),
    nonlinearity: point(-9.4e-5),
    power_bound: bounds(0.0, 1.4e-4),
    phase_bound: bounds(-8.1e-4, 0.0),
    contrast: point(-4.2e-6),
    crosstalk: point(6.6e-3),
    residual_light: bounds(-8.7e-2, 9.6e-2),
    total: bounds(-8.1e-2, 10.2e-2),
};

/// Housing-temperature fit of the contrast measurement: `(T_0, ΔT, κ)`.
pub const THERMALIZATION_FIT: [f64; 3] = [22.04, 13.269, 0.02055];

/// Contrast fit of the same measurement: `(C_α, Δφ_0, η, κ)`.
pub const CONTRAST_FIT: [f64; 4] = [1.000, 3.44, 0.203, 0.0415];

/// One-standard-deviation uncertainty of the fitted `C_α`.
pub const CONTRAST_FIT_C_UNCERTAINTY: f64 = 0.029;

/// Interference contrast used for the contrast entry of the budget.
pub const CONTRAST_REDUCTION: f64 = 2e-6;
