//! Peres and Sorkin test statistics and the detector-power algebra behind them.

use alloc::format;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::error::{Error, Result};

/// Normalized interference terms `(α, β, γ)` for the path pairs BC, CA and AB.
///
/// Measured terms can leave `[−1, 1]` through noise; they are kept as they
/// are and [`InterferenceTerms::out_of_range`] reports it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterferenceTerms {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl InterferenceTerms {
    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// True if any term has magnitude above one.
    pub fn out_of_range(&self) -> bool {
        self.as_array().iter().any(|t| t.abs() > 1.0)
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|t| t.is_finite())
    }

    pub fn product(&self) -> f64 {
        self.alpha * self.beta * self.gamma
    }

    /// Every term multiplied by a common contrast factor.
    pub fn scaled(&self, contrast: f64) -> Self {
        Self::new(
            self.alpha * contrast,
            self.beta * contrast,
            self.gamma * contrast,
        )
    }
}

/// Background-referenced detector powers of one shutter cycle, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CyclePowers {
    pub p0: f64,
    pub pa: f64,
    pub pb: f64,
    pub pc: f64,
    pub pab: f64,
    pub pbc: f64,
    pub pca: f64,
    pub pabc: f64,
    pub background_subtracted: bool,
}

impl CyclePowers {
    /// Raw (not background-subtracted) powers in the order
    /// `[P_0, P_A, P_B, P_C, P_AB, P_BC, P_CA, P_ABC]`.
    pub fn raw(values: [f64; 8]) -> Self {
        let [p0, pa, pb, pc, pab, pbc, pca, pabc] = values;
        Self {
            p0,
            pa,
            pb,
            pc,
            pab,
            pbc,
            pca,
            pabc,
            background_subtracted: false,
        }
    }

    pub fn values(&self) -> [f64; 8] {
        [
            self.p0, self.pa, self.pb, self.pc, self.pab, self.pbc, self.pca, self.pabc,
        ]
    }

    /// Multiplies every power by `factor`, keeping the subtraction flag.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::raw(self.values().map(|v| v * factor));
        out.background_subtracted = self.background_subtracted;
        out
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    /// Pairwise interference sums `(P_BC − P_B − P_C, P_CA − P_C − P_A, P_AB − P_A − P_B)`.
    pub fn interference_sums(&self) -> [f64; 3] {
        [
            self.pbc - self.pb - self.pc,
            self.pca - self.pc - self.pa,
            self.pab - self.pa - self.pb,
        ]
    }
}

/// The Peres parameter of one set of interference terms.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeresResult {
    pub f: f64,
    pub terms: InterferenceTerms,
}

impl PeresResult {
    pub fn deviation(&self) -> f64 {
        self.f - 1.0
    }
}

/// Aggregate Sorkin statistics over a set of cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SorkinResult {
    /// Mean of the per-cycle `ε`, in watts.
    pub epsilon: f64,
    pub kappa: f64,
    /// Mean of the summed absolute pairwise interference terms, in watts.
    pub denominator: f64,
}

/// Subtracts the all-closed power `P_0` from every configuration of the cycle.
pub fn subtract_background(raw: CyclePowers) -> Result<CyclePowers> {
    if raw.background_subtracted {
        return Err(Error::Usage(
            "background has already been subtracted from these powers".into(),
        ));
    }
    let bg = raw.p0;
    let mut out = CyclePowers::raw(raw.values().map(|v| v - bg));
    out.p0 = 0.0;
    out.background_subtracted = true;
    Ok(out)
}

fn require_subtracted(powers: &CyclePowers) -> Result<()> {
    if powers.background_subtracted {
        Ok(())
    } else {
        Err(Error::Usage(
            "powers must be background-subtracted first".into(),
        ))
    }
}

/// `(P_ij − P_i − P_j) / (2 √(P_i P_j))`.
pub fn normalized_term(pij: f64, pi: f64, pj: f64) -> f64 {
    (pij - pi - pj) / (2.0 * (pi * pj).sqrt())
}

/// Normalized interference terms from background-subtracted powers.
pub fn interference_terms(powers: &CyclePowers) -> Result<InterferenceTerms> {
    require_subtracted(powers)?;
    for (path, value) in [('A', powers.pa), ('B', powers.pb), ('C', powers.pc)] {
        if !(value > 0.0) {
            return Err(Error::NonPositivePower { path, value });
        }
    }
    Ok(InterferenceTerms::new(
        normalized_term(powers.pbc, powers.pb, powers.pc),
        normalized_term(powers.pca, powers.pa, powers.pc),
        normalized_term(powers.pab, powers.pa, powers.pb),
    ))
}

/// `F = α² + β² + γ² − 2αβγ`.
pub fn peres_parameter(terms: InterferenceTerms) -> Result<PeresResult> {
    if !terms.is_finite() {
        return Err(Error::Domain(format!(
            "non-finite interference terms {:?}",
            terms.as_array()
        )));
    }
    let InterferenceTerms { alpha, beta, gamma } = terms;
    let f = alpha * alpha + beta * beta + gamma * gamma - 2.0 * alpha * beta * gamma;
    Ok(PeresResult { f, terms })
}

/// `ε = P_ABC + P_A + P_B + P_C − P_AB − P_BC − P_CA`.
pub fn sorkin_epsilon(powers: &CyclePowers) -> Result<f64> {
    require_subtracted(powers)?;
    Ok(powers.pabc + powers.pa + powers.pb + powers.pc - powers.pab - powers.pbc - powers.pca)
}

/// `κ = ⟨ε⟩ / ⟨|P_AB − P_A − P_B| + |P_BC − P_B − P_C| + |P_CA − P_A − P_C|⟩`.
pub fn sorkin_kappa(cycles: &[CyclePowers]) -> Result<SorkinResult> {
    if cycles.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut eps_sum = 0.0;
    let mut den_sum = 0.0;
    for c in cycles {
        eps_sum += sorkin_epsilon(c)?;
        den_sum += c.interference_sums().iter().map(|s| s.abs()).sum::<f64>();
    }
    let n = cycles.len() as f64;
    let epsilon = eps_sum / n;
    let denominator = den_sum / n;
    if !(denominator > 0.0) {
        return Err(Error::DegenerateData(
            "summed pairwise interference terms vanish".into(),
        ));
    }
    Ok(SorkinResult {
        epsilon,
        kappa: epsilon / denominator,
        denominator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::PhasePoint;
    use proptest::prelude::*;

    fn subtracted(values: [f64; 8]) -> CyclePowers {
        let mut p = CyclePowers::raw(values);
        p.background_subtracted = true;
        p
    }

    #[test]
    fn uniform_background_vanishes() {
        let out = subtract_background(CyclePowers::raw([5e-9; 8])).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
        assert!(out.background_subtracted);
    }

    #[test]
    fn zero_background_is_identity() {
        let raw = CyclePowers::raw([0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let out = subtract_background(raw).unwrap();
        assert_eq!(&out.values()[1..], &raw.values()[1..]);
    }

    #[test]
    fn background_shift_is_linear() {
        let raw = CyclePowers::raw([1.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let out = subtract_background(raw).unwrap();
        assert_eq!(out.pa, 2.0);
        assert_eq!(out.values(), [0.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn double_subtraction_is_rejected() {
        let once = subtract_background(CyclePowers::raw([1.0; 8])).unwrap();
        assert!(matches!(subtract_background(once), Err(Error::Usage(_))));
    }

    #[test]
    fn extreme_two_path_terms() {
        let constructive = subtracted([0.0, 1.0, 1.0, 1.0, 4.0, 4.0, 4.0, 9.0]);
        assert_eq!(interference_terms(&constructive).unwrap().gamma, 1.0);
        let destructive = subtracted([0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(interference_terms(&destructive).unwrap().gamma, -1.0);
    }

    #[test]
    fn nonpositive_single_path_names_the_path() {
        let p = subtracted([0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            interference_terms(&p),
            Err(Error::NonPositivePower {
                path: 'B',
                value: 0.0
            })
        );
    }

    #[test]
    fn terms_require_background_subtraction() {
        let p = CyclePowers::raw([0.0, 1.0, 1.0, 1.0, 4.0, 4.0, 4.0, 9.0]);
        assert!(matches!(interference_terms(&p), Err(Error::Usage(_))));
        assert!(matches!(sorkin_epsilon(&p), Err(Error::Usage(_))));
    }

    #[test]
    fn out_of_range_terms_are_kept() {
        let p = subtracted([0.0, 1.0, 1.0, 1.0, 4.2, 4.0, 4.0, 9.0]);
        let t = interference_terms(&p).unwrap();
        assert!(t.gamma > 1.0);
        assert!(t.out_of_range());
    }

    #[test]
    fn peres_trivial_values() {
        assert_eq!(peres_parameter(InterferenceTerms::new(1.0, 1.0, 1.0)).unwrap().f, 1.0);
        assert_eq!(peres_parameter(InterferenceTerms::new(0.0, 0.0, 0.0)).unwrap().f, 0.0);
        assert!(peres_parameter(InterferenceTerms::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn published_reconstructed_sets() {
        let f23 = peres_parameter(InterferenceTerms::new(-0.765, 0.941, -0.664)).unwrap().f;
        let f30 = peres_parameter(InterferenceTerms::new(-0.405, 0.980, -0.355)).unwrap().f;
        assert!((f23 - 0.95562128).abs() < 1e-12, "{f23}");
        assert!((f30 - 0.968651).abs() < 1e-12, "{f30}");
    }

    #[test]
    fn epsilon_is_linear() {
        let p = subtracted([0.0, 1.0, 2.0, 0.5, 4.0, 2.5, 1.0, 3.0]);
        let e = sorkin_epsilon(&p).unwrap();
        assert_eq!(sorkin_epsilon(&p.scaled(2.0)).unwrap(), 2.0 * e);
    }

    #[test]
    fn kappa_rejects_degenerate_denominator() {
        let p = subtracted([0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0]);
        assert!(matches!(sorkin_kappa(&[p]), Err(Error::DegenerateData(_))));
        assert!(matches!(sorkin_kappa(&[]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn kappa_is_scale_invariant() {
        let a = subtracted([0.0, 1.0, 2.0, 0.5, 4.0, 2.5, 1.0, 3.0]);
        let b = subtracted([0.0, 1.1, 2.1, 0.4, 4.2, 2.4, 1.2, 3.3]);
        let k1 = sorkin_kappa(&[a, b]).unwrap().kappa;
        let k2 = sorkin_kappa(&[a.scaled(7.5), b.scaled(7.5)]).unwrap().kappa;
        assert!((k1 - k2).abs() <= 1e-15 * k1.abs().max(1.0));
    }

    proptest! {
        #[test]
        fn on_plane_points_have_unit_f(a in -10.0..10.0f64, b in -10.0..10.0f64, n in -2i32..=2) {
            let c = core::f64::consts::TAU * f64::from(n) - a - b;
            let f = peres_parameter(PhasePoint::new(a, b, c).cosines()).unwrap().f;
            prop_assert!((f - 1.0).abs() < 1e-12);
        }

        #[test]
        fn global_sign_flip_is_bit_identical(a in -4.0..4.0f64, b in -4.0..4.0f64, c in -4.0..4.0f64) {
            let p = PhasePoint::new(a, b, c);
            let f1 = peres_parameter(p.cosines()).unwrap();
            let f2 = peres_parameter((-p).cosines()).unwrap();
            prop_assert_eq!(f1, f2);
        }

        #[test]
        fn subtraction_commutes_with_scaling(v in proptest::array::uniform8(0.0..10.0f64), s in 0.1..10.0f64) {
            let raw = CyclePowers::raw(v);
            let a = subtract_background(raw.scaled(s)).unwrap();
            let b = subtract_background(raw).unwrap().scaled(s);
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
    }
}
