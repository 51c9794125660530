//! Points in the three-dimensional phase space of a three-path interferometer.

use core::f64::consts::{PI, TAU};
use core::ops::Neg;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::peres::InterferenceTerms;

/// The three pairwise phase differences `(Δφ_BC, Δφ_CA, Δφ_AB)` in radians,
/// with `Δφ_ij = φ_i − φ_j`.
///
/// Physical points satisfy `Δφ_BC + Δφ_CA + Δφ_AB = 2πn`. Off-plane points
/// are representable since measured phase differences need not close.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PhasePoint {
    pub dphi_bc: f64,
    pub dphi_ca: f64,
    pub dphi_ab: f64,
}

impl PhasePoint {
    pub const fn new(dphi_bc: f64, dphi_ca: f64, dphi_ab: f64) -> Self {
        Self {
            dphi_bc,
            dphi_ca,
            dphi_ab,
        }
    }

    /// Builds the (on-plane) point realized by absolute path phases `[φ_A, φ_B, φ_C]`.
    pub fn from_path_phases(phases: [f64; 3]) -> Self {
        let [a, b, c] = phases;
        Self::new(b - c, c - a, a - b)
    }

    /// Path phases `[φ_A, φ_B, φ_C]` with `φ_B = 0`, `φ_A = Δφ_AB`,
    /// `φ_C = −Δφ_BC`. They reproduce `Δφ_CA` only for points on the
    /// `n = 0` plane.
    pub fn path_phases(&self) -> [f64; 3] {
        [self.dphi_ab, 0.0, -self.dphi_bc]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.dphi_bc, self.dphi_ca, self.dphi_ab]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn sum(&self) -> f64 {
        self.dphi_bc + self.dphi_ca + self.dphi_ab
    }

    /// `Σφ − 2πn`, the signed offset from the plane with index `n`.
    pub fn plane_residual(&self, n: i32) -> f64 {
        self.sum() - TAU * f64::from(n)
    }

    /// Index of the plane `Σφ = 2πn` closest to this point.
    pub fn nearest_plane(&self) -> i32 {
        (self.sum() / TAU).round() as i32
    }

    pub fn is_finite(&self) -> bool {
        self.dphi_bc.is_finite() && self.dphi_ca.is_finite() && self.dphi_ab.is_finite()
    }

    /// Pairwise phase difference `Δφ_ij` for path indices `0 = A, 1 = B, 2 = C`.
    ///
    /// # Panics
    ///
    /// Panics if `i == j` or an index exceeds 2.
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 1) => self.dphi_ab,
            (1, 0) => -self.dphi_ab,
            (1, 2) => self.dphi_bc,
            (2, 1) => -self.dphi_bc,
            (2, 0) => self.dphi_ca,
            (0, 2) => -self.dphi_ca,
            _ => panic!("invalid path pair ({i}, {j})"),
        }
    }

    /// The cosines `(α, β, γ)` of the three phase differences.
    pub fn cosines(&self) -> InterferenceTerms {
        InterferenceTerms::new(self.dphi_bc.cos(), self.dphi_ca.cos(), self.dphi_ab.cos())
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let d = [
            self.dphi_bc - other.dphi_bc,
            self.dphi_ca - other.dphi_ca,
            self.dphi_ab - other.dphi_ab,
        ];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn normalized(&self) -> Self {
        normalize_phase(*self)
    }
}

impl Neg for PhasePoint {
    type Output = PhasePoint;

    fn neg(self) -> Self::Output {
        PhasePoint::new(-self.dphi_bc, -self.dphi_ca, -self.dphi_ab)
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut r = x % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// Maps every component into `(−π, π]`; cosines are unchanged.
pub fn normalize_phase(p: PhasePoint) -> PhasePoint {
    PhasePoint::new(
        wrap_angle(p.dphi_bc),
        wrap_angle(p.dphi_ca),
        wrap_angle(p.dphi_ab),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_turn_maps_to_zero() {
        assert_eq!(
            normalize_phase(PhasePoint::new(TAU, 0.0, 0.0)),
            PhasePoint::new(0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn minus_pi_maps_to_pi() {
        assert_eq!(
            normalize_phase(PhasePoint::new(PI, -PI, 0.0)),
            PhasePoint::new(PI, PI, 0.0)
        );
    }

    #[test]
    fn path_phase_round_trip() {
        let p = PhasePoint::new(0.4, -1.1, 0.7);
        let q = PhasePoint::from_path_phases(p.path_phases());
        assert!((q.dphi_bc - p.dphi_bc).abs() < 1e-15);
        assert!((q.dphi_ab - p.dphi_ab).abs() < 1e-15);
        assert!((q.dphi_ca - p.dphi_ca).abs() < 1e-15);
    }

    #[test]
    fn pair_is_antisymmetric() {
        let p = PhasePoint::new(0.3, -0.5, 0.2);
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            assert_eq!(p.pair(i, j), -p.pair(j, i));
        }
    }

    proptest! {
        #[test]
        fn normalization_preserves_cosines(a in -50.0..50.0f64, b in -50.0..50.0f64, c in -50.0..50.0f64) {
            let p = PhasePoint::new(a, b, c);
            let q = normalize_phase(p);
            for (x, y) in p.as_array().iter().zip(q.as_array()) {
                prop_assert!(y > -PI && y <= PI);
                prop_assert!((x.cos() - y.cos()).abs() < 1e-12);
            }
        }
    }
}
