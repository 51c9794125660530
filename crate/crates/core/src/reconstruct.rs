//! Recovery of the physical point in phase space closest to a set of
//! measured interference terms.
//!
//! Each term fixes its phase difference only up to sign, so a measured set
//! `(α, β, γ)` corresponds to eight points, four up to a global sign flip.
//! Physical points lie on the planes `Σφ = 2πn`. Candidates whose nearest
//! plane is `n = ±1` are discarded; of the remaining ones the candidate with
//! the shortest normal distance to the `n = 0` plane is projected onto it.

use alloc::vec::Vec;

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::peres::InterferenceTerms;
use crate::phase::PhasePoint;

/// Terms this far beyond `±1` are clamped instead of rejected.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CandidateSet {
    /// Sign patterns `(+, ±, ±)` of the arc cosines, duplicates removed.
    pub candidates: Vec<PhasePoint>,
    pub source_terms: InterferenceTerms,
    /// Set when a term was marginally outside `[−1, 1]` and clamped.
    pub clamped: bool,
}

/// A candidate other than the selected one that also lies nearest to `n = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Alternative {
    pub candidate: usize,
    pub point: PhasePoint,
    pub distance: f64,
    pub corrected_terms: InterferenceTerms,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrectedPoint {
    /// Projected point, on the plane `Σφ = 2πn`.
    pub point: PhasePoint,
    pub plane_index: i32,
    /// Euclidean distance between the chosen candidate and `point`.
    pub distance: f64,
    /// Index into `candidates.candidates`.
    pub chosen_candidate: usize,
    pub corrected_terms: InterferenceTerms,
    pub candidates: CandidateSet,
    /// The next-closest surviving candidate, if any.
    pub runner_up: Option<Alternative>,
}

fn clamp_term(t: f64) -> Result<(f64, bool)> {
    if !t.is_finite() || t.abs() > 1.0 + CLAMP_TOLERANCE {
        return Err(Error::Domain(alloc::format!(
            "interference term {t} outside [−1, 1]"
        )));
    }
    if t.abs() > 1.0 {
        Ok((t.signum(), true))
    } else {
        Ok((t, false))
    }
}

/// All phase points whose component cosines equal the given terms.
pub fn candidate_phase_points(terms: InterferenceTerms) -> Result<CandidateSet> {
    let mut clamped = false;
    let mut acos = [0.0; 3];
    for (a, t) in acos.iter_mut().zip(terms.as_array()) {
        let (t, c) = clamp_term(t)?;
        clamped |= c;
        *a = t.acos();
    }
    let mut candidates: Vec<PhasePoint> = Vec::with_capacity(4);
    for (sb, sc) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let p = PhasePoint::new(acos[0], sb * acos[1], sc * acos[2]);
        if !candidates.iter().any(|q| *q == p || *q == -p) {
            candidates.push(p);
        }
    }
    Ok(CandidateSet {
        candidates,
        source_terms: terms,
        clamped,
    })
}

/// Normal projection of `p` onto the plane `Σφ = 2πn`.
pub fn project_to_plane(p: PhasePoint, n: i32) -> PhasePoint {
    let shift = p.plane_residual(n) / 3.0;
    let mut q = PhasePoint::new(p.dphi_bc - shift, p.dphi_ca - shift, p.dphi_ab - shift);
    // absorb the rounding left in the sum into one component
    let left = q.plane_residual(n);
    q.dphi_ab -= left;
    q
}

/// Euclidean distance from `p` to the plane `Σφ = 2πn`.
pub fn plane_distance(p: &PhasePoint, n: i32) -> f64 {
    p.plane_residual(n).abs() / 3.0.sqrt()
}

fn positive_components(p: &PhasePoint) -> usize {
    p.as_array().iter().filter(|&&x| x > 0.0).count()
}

/// Selects and projects the most probable physical point.
pub fn correct_phase_point(terms: InterferenceTerms) -> Result<CorrectedPoint> {
    let set = candidate_phase_points(terms)?;
    let mut surviving: Vec<(usize, f64)> = set
        .candidates
        .iter()
        .enumerate()
        .filter(|(_, p)| p.nearest_plane() == 0)
        .map(|(i, p)| (i, plane_distance(p, 0)))
        .collect();
    if surviving.is_empty() {
        return Err(Error::AmbiguousReconstruction {
            candidates: set.candidates,
        });
    }
    surviving.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then_with(|| {
                positive_components(&set.candidates[b.0])
                    .cmp(&positive_components(&set.candidates[a.0]))
            })
            .then_with(|| a.0.cmp(&b.0))
    });
    let build = |(i, d): (usize, f64)| {
        let point = project_to_plane(set.candidates[i], 0);
        Alternative {
            candidate: i,
            point,
            distance: d,
            corrected_terms: point.cosines(),
        }
    };
    let best = build(surviving[0]);
    let runner_up = surviving.get(1).copied().map(build);
    Ok(CorrectedPoint {
        point: best.point,
        plane_index: 0,
        distance: best.distance,
        chosen_candidate: best.candidate,
        corrected_terms: best.corrected_terms,
        candidates: set,
        runner_up,
    })
}
