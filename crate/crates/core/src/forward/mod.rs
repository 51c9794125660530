//! Forward model of the three-path interferometer.
//!
//! Powers are computed as a pairwise coherent sum over the three paths.
//! Each path contributes an amplitude of magnitude `√T_k` when its shutter
//! is open and `√(τ T_k)` when it is closed, and every pair `(k, l)`
//! interferes with phase `Δφ_kl + e_k − e_l`. The extra phases `e_k` collect
//! the crosstalk shift imposed by closed shutters on path `k` and, for a
//! closed path, the residual-light phase `−φ_Sh`. On the `n = 0` plane this
//! is exactly `P_in |Σ_k a_k|²`. Off-plane points (measured or perturbed
//! phase differences) keep each pairwise phase as given.

mod amplitude;
mod detector;
mod simulate;

use alloc::format;

use core::f64::consts::PI;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::phase::PhasePoint;

pub use amplitude::{
    crosstalk_path_shifts, cycle_powers, ideal_cycle_powers, ideal_powers, imperfect_powers,
    optical_power, NoiseDraw,
};
pub use detector::{detector_response, invert_response};
pub use simulate::{
    simulate_measurement, LogMetadata, MeasurementLog, MeasurementRecord, Protocol,
    SimulationSnapshot,
};

/// Input power, path transmissions and the detector dark background.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SourceSpec {
    /// Input power in watts, coupling efficiencies included.
    pub p_in: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub t_c: f64,
    /// Shutter-independent incoherent background in watts.
    #[cfg_attr(feature = "serde", serde(default))]
    pub p_dark: f64,
}

impl SourceSpec {
    pub fn new(p_in: f64, transmissions: [f64; 3]) -> Self {
        Self {
            p_in,
            t_a: transmissions[0],
            t_b: transmissions[1],
            t_c: transmissions[2],
            p_dark: 0.0,
        }
    }

    pub fn with_dark(mut self, p_dark: f64) -> Self {
        self.p_dark = p_dark;
        self
    }

    pub fn transmissions(&self) -> [f64; 3] {
        [self.t_a, self.t_b, self.t_c]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_in > 0.0 && self.p_in.is_finite()) {
            return Err(Error::Configuration(format!(
                "source.p_in must be > 0, got {}",
                self.p_in
            )));
        }
        for (name, t) in [("t_a", self.t_a), ("t_b", self.t_b), ("t_c", self.t_c)] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Configuration(format!(
                    "source.{name} must lie in (0, 1], got {t}"
                )));
            }
        }
        if !(self.p_dark >= 0.0 && self.p_dark.is_finite()) {
            return Err(Error::Configuration(format!(
                "source.p_dark must be ≥ 0, got {}",
                self.p_dark
            )));
        }
        Ok(())
    }
}

/// Open/closed state of the three path shutters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShutterConfig {
    pub open_a: bool,
    pub open_b: bool,
    pub open_c: bool,
}

impl ShutterConfig {
    pub const fn new(open_a: bool, open_b: bool, open_c: bool) -> Self {
        Self {
            open_a,
            open_b,
            open_c,
        }
    }

    pub const NONE: Self = Self::new(false, false, false);
    pub const A: Self = Self::new(true, false, false);
    pub const B: Self = Self::new(false, true, false);
    pub const C: Self = Self::new(false, false, true);
    pub const AB: Self = Self::new(true, true, false);
    pub const BC: Self = Self::new(false, true, true);
    pub const CA: Self = Self::new(true, false, true);
    pub const ABC: Self = Self::new(true, true, true);

    /// The eight configurations in canonical order `0, A, B, C, AB, BC, CA, ABC`.
    pub const ALL: [Self; 8] = [
        Self::NONE,
        Self::A,
        Self::B,
        Self::C,
        Self::AB,
        Self::BC,
        Self::CA,
        Self::ABC,
    ];

    pub fn open(&self) -> [bool; 3] {
        [self.open_a, self.open_b, self.open_c]
    }

    /// Position in [`ShutterConfig::ALL`].
    pub fn index(&self) -> usize {
        match self.open() {
            [false, false, false] => 0,
            [true, false, false] => 1,
            [false, true, false] => 2,
            [false, false, true] => 3,
            [true, true, false] => 4,
            [false, true, true] => 5,
            [true, false, true] => 6,
            [true, true, true] => 7,
        }
    }

    pub fn label(&self) -> &'static str {
        ["0", "A", "B", "C", "AB", "BC", "CA", "ABC"][self.index()]
    }

    pub fn from_label(label: &str) -> Option<Self> {
        ShutterConfig::ALL
            .iter()
            .copied()
            .find(|c| c.label() == label)
    }
}

impl core::fmt::Display for ShutterConfig {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ShutterConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for ShutterConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let label = <alloc::string::String as serde::Deserialize>::deserialize(d)?;
        ShutterConfig::from_label(&label).ok_or_else(|| {
            serde::de::Error::custom(format!("unknown shutter configuration {label:?}"))
        })
    }
}

/// Light leaking through closed shutters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ResidualLightSpec {
    /// Closed-state power transmissivity, identical for all shutters.
    pub tau: f64,
    /// Phase of the residual light relative to the open state, in radians.
    pub phi_sh: f64,
}

/// How the crosstalk phase `Δφ_DH` enters the pairwise phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CrosstalkConvention {
    /// `Δφ_BC + Δφ_DH` and `Δφ_AB − Δφ_DH`; the phase sum is preserved.
    #[default]
    Cancelling,
    /// `Δφ_BC + Δφ_DH` and `Δφ_AB + Δφ_DH`.
    ComovingPlus,
    /// `Δφ_BC − Δφ_DH` and `Δφ_AB − Δφ_DH`.
    ComovingMinus,
}

impl CrosstalkConvention {
    pub const ALL: [Self; 3] = [Self::Cancelling, Self::ComovingPlus, Self::ComovingMinus];

    /// Signs `(s_α, s_γ)` multiplying `Δφ_DH` in the shifted `Δφ_BC` and `Δφ_AB`.
    pub fn signs(&self) -> (f64, f64) {
        match self {
            Self::Cancelling => (1.0, -1.0),
            Self::ComovingPlus => (1.0, 1.0),
            Self::ComovingMinus => (-1.0, -1.0),
        }
    }
}

/// Phase crosstalk between shutters and neighbouring paths.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct CrosstalkSpec {
    /// `Δφ_DH = Δφ_D − Δφ_H`, in radians.
    pub dphi_dh: f64,
    pub convention: CrosstalkConvention,
}

impl CrosstalkSpec {
    pub fn new(dphi_dh: f64, convention: CrosstalkConvention) -> Self {
        Self {
            dphi_dh,
            convention,
        }
    }
}

/// Power and phase fluctuations on the timescales of a shutter setting.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct FluctuationSpec {
    /// Relative standard deviation of the input power, drawn once per setting.
    pub sigma_pin_rel: f64,
    /// Standard deviation of each pairwise phase, drawn once per setting.
    pub sigma_phase: f64,
    /// Phase noise within a setting; reduces the interference contrast by
    /// `exp(−σ²/2)`.
    pub sigma_phase_fast: f64,
    /// Relative per-sample scatter of the detected light within a setting.
    /// Only shapes the recorded sample standard deviation.
    pub sigma_sample_rel: f64,
}

impl FluctuationSpec {
    pub fn contrast(&self) -> f64 {
        (-0.5 * self.sigma_phase_fast * self.sigma_phase_fast).exp()
    }
}

/// Detector response `r(P) = P (1 + c2 P + c3 P²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct NonlinearitySpec {
    /// 1/W
    pub c2: f64,
    /// 1/W²
    pub c3: f64,
    /// Upper end of the power range over which the response must be monotone.
    pub max_power_w: f64,
}

impl Default for NonlinearitySpec {
    fn default() -> Self {
        Self {
            c2: 0.0,
            c3: 0.0,
            max_power_w: 10.0,
        }
    }
}

impl NonlinearitySpec {
    pub fn new(c2: f64, c3: f64) -> Self {
        Self {
            c2,
            c3,
            ..Self::default()
        }
    }

    pub fn is_linear(&self) -> bool {
        self.c2 == 0.0 && self.c3 == 0.0
    }

    /// `dr/dP = 1 + 2 c2 P + 3 c3 P²`.
    pub fn slope(&self, p: f64) -> f64 {
        1.0 + 2.0 * self.c2 * p + 3.0 * self.c3 * p * p
    }

    /// Checks that the response is strictly increasing on `[0, max_power_w]`.
    pub fn validate(&self) -> Result<()> {
        if !(self.c2.is_finite() && self.c3.is_finite()) {
            return Err(Error::Configuration(
                "nonlinearity coefficients must be finite".into(),
            ));
        }
        if !(self.max_power_w > 0.0 && self.max_power_w.is_finite()) {
            return Err(Error::Configuration(format!(
                "nonlinearity.max_power_w must be > 0, got {}",
                self.max_power_w
            )));
        }
        let mut min_slope = self.slope(0.0).min(self.slope(self.max_power_w));
        if self.c3 != 0.0 {
            let vertex = -self.c2 / (3.0 * self.c3);
            if vertex > 0.0 && vertex < self.max_power_w {
                min_slope = min_slope.min(self.slope(vertex));
            }
        }
        if min_slope <= 0.0 {
            return Err(Error::Configuration(format!(
                "detector response is not strictly increasing on [0, {}] W (min slope {min_slope})",
                self.max_power_w
            )));
        }
        Ok(())
    }
}

/// Incoherent mixing of two orthogonal polarizations at the detector.
///
/// The H component carries the interferometer's main phase point, the V
/// component `phases_v`. A polarizer in front of the detector passes H only.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct PolarizationSpec {
    pub h_fraction_a: f64,
    pub h_fraction_b: f64,
    pub h_fraction_c: f64,
    pub phases_v: PhasePoint,
    pub polarizer_enabled: bool,
}

impl Default for PolarizationSpec {
    fn default() -> Self {
        Self {
            h_fraction_a: 1.0,
            h_fraction_b: 1.0,
            h_fraction_c: 1.0,
            phases_v: PhasePoint::default(),
            polarizer_enabled: false,
        }
    }
}

impl PolarizationSpec {
    pub fn h_fractions(&self) -> [f64; 3] {
        [self.h_fraction_a, self.h_fraction_b, self.h_fraction_c]
    }

    /// Equal power in both polarizations on every path.
    pub fn equal_split(phases_v: PhasePoint) -> Self {
        Self {
            h_fraction_a: 0.5,
            h_fraction_b: 0.5,
            h_fraction_c: 0.5,
            phases_v,
            polarizer_enabled: false,
        }
    }

    /// Per-path power fractions `(H, V)` reaching the detector.
    pub fn weights(&self) -> [[f64; 3]; 2] {
        let h = self.h_fractions();
        if self.polarizer_enabled {
            [h, [0.0; 3]]
        } else {
            [h, h.map(|x| 1.0 - x)]
        }
    }
}

/// All instrument imperfections; the default disables every one of them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ImperfectionSpec {
    pub residual: ResidualLightSpec,
    pub crosstalk: CrosstalkSpec,
    pub fluctuations: FluctuationSpec,
    pub nonlinearity: NonlinearitySpec,
    pub polarization: PolarizationSpec,
}

impl ImperfectionSpec {
    pub fn residual_only(tau: f64, phi_sh: f64) -> Self {
        Self {
            residual: ResidualLightSpec { tau, phi_sh },
            ..Self::default()
        }
    }

    pub fn crosstalk_only(crosstalk: CrosstalkSpec) -> Self {
        Self {
            crosstalk,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.residual;
        if !(r.tau >= 0.0 && r.tau < 1.0) {
            return Err(Error::Configuration(format!(
                "residual.tau must be ≥ 0 and < 1, got {}",
                r.tau
            )));
        }
        if !r.phi_sh.is_finite() {
            return Err(Error::Configuration("residual.phi_sh must be finite".into()));
        }
        if !(self.crosstalk.dphi_dh.abs() < PI) {
            return Err(Error::Configuration(format!(
                "crosstalk.dphi_dh must satisfy |Δφ_DH| < π, got {}",
                self.crosstalk.dphi_dh
            )));
        }
        let f = &self.fluctuations;
        for (name, v) in [
            ("sigma_pin_rel", f.sigma_pin_rel),
            ("sigma_phase", f.sigma_phase),
            ("sigma_phase_fast", f.sigma_phase_fast),
            ("sigma_sample_rel", f.sigma_sample_rel),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Configuration(format!(
                    "fluctuations.{name} must be ≥ 0, got {v}"
                )));
            }
        }
        self.nonlinearity.validate()?;
        let pol = &self.polarization;
        for (name, h) in [
            ("h_fraction_a", pol.h_fraction_a),
            ("h_fraction_b", pol.h_fraction_b),
            ("h_fraction_c", pol.h_fraction_c),
        ] {
            if !(0.0..=1.0).contains(&h) {
                return Err(Error::Configuration(format!(
                    "polarization.{name} must lie in [0, 1], got {h}"
                )));
            }
        }
        if !pol.phases_v.is_finite() {
            return Err(Error::Configuration(
                "polarization.phases_v must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_canonical_and_distinct() {
        let labels: alloc::vec::Vec<_> = ShutterConfig::ALL.iter().map(|c| c.label()).collect();
        assert_eq!(labels, ["0", "A", "B", "C", "AB", "BC", "CA", "ABC"]);
        for (i, c) in ShutterConfig::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(ShutterConfig::from_label(c.label()), Some(*c));
        }
        assert_eq!(ShutterConfig::from_label("BA"), None);
    }

    #[test]
    fn monotonicity_check() {
        assert!(NonlinearitySpec::new(1e-3, 0.0).validate().is_ok());
        assert!(NonlinearitySpec::new(-0.2, 0.0).validate().is_err());
        // slope dips below zero between the endpoints
        let spec = NonlinearitySpec {
            c2: -0.5,
            c3: 0.05,
            max_power_w: 10.0,
        };
        assert!(spec.slope(0.0) > 0.0 && spec.slope(10.0) > 0.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn negative_tau_is_rejected() {
        let spec = ImperfectionSpec::residual_only(-1.0, 0.0);
        let err = spec.validate().unwrap_err();
        assert!(format!("{err}").contains("residual.tau must be ≥ 0"));
    }

    #[test]
    fn source_validation() {
        assert!(SourceSpec::new(1.0, [0.26, 0.52, 0.22]).validate().is_ok());
        assert!(SourceSpec::new(0.0, [0.26, 0.52, 0.22]).validate().is_err());
        assert!(SourceSpec::new(1.0, [0.0, 0.52, 0.22]).validate().is_err());
        assert!(SourceSpec::new(1.0, [0.26, 1.2, 0.22]).validate().is_err());
    }
}
