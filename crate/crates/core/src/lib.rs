//! Simulation and analysis of three-path interferometric Peres tests.
//!
//! The crate is organised bottom-up:
//!
//! * [`phase`] and [`peres`] hold the fundamental quantities: points in
//!   phase space, normalized interference terms, per-cycle detector powers
//!   and the Peres and Sorkin test statistics.
//! * [`forward`] is the complex-amplitude model of the interferometer under
//!   instrument imperfections (residual light through closed shutters, phase
//!   crosstalk, fluctuations, detector nonlinearity, polarization mixing) and
//!   a randomized shutter-cycle simulator producing measurement logs.
//! * [`reconstruct`] projects measured interference terms onto the physical
//!   planes of phase space.
//! * [`budget`] evaluates the deviation of the Peres parameter caused by each
//!   imperfection and assembles them into an error budget.
//! * [`stats`] and [`fitting`] provide the statistical and least-squares
//!   machinery the analyses rely on.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and thread-parallel Monte Carlo drivers live in the `peres-bench`
//! companion crate.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod budget;
pub mod error;
pub mod fitting;
pub mod forward;
pub mod mc;
pub mod peres;
pub mod phase;
pub mod reconstruct;
pub mod reference;
pub mod stats;

pub use error::{Error, Result};
pub use peres::{
    interference_terms, peres_parameter, sorkin_epsilon, sorkin_kappa, subtract_background,
    CyclePowers, InterferenceTerms, PeresResult, SorkinResult,
};
pub use phase::{normalize_phase, PhasePoint};
