//! Deviation of the Peres parameter caused by each instrument imperfection.
//!
//! Every calculator reports `ΔF` relative to the same evaluation without the
//! imperfection, so a disabled imperfection gives exactly zero even where
//! the unperturbed point is only on the physical plane to rounding.

mod contrast;
mod crosstalk;
mod fluctuation;
mod nonlinearity;
mod polarization;
mod report;
mod residual;

pub use contrast::{contrast_deviation, contrast_from_phase_noise, ContrastNoiseModel};
pub use crosstalk::{
    apply_crosstalk, crosstalk_delta_f, crosstalk_from_epsilon, epsilon_from_crosstalk,
    CrosstalkInversion, ROOT_SCAN_STEP,
};
pub use fluctuation::{
    mc_phase_fluctuations, mc_power_fluctuations, FluctuationMc, PhaseFluctuationModel,
    PowerFluctuationModel, DEFAULT_MC_SAMPLES,
};
pub use nonlinearity::correct_nonlinearity;
pub use polarization::{equal_split_closed_form, polarization_f};
pub use report::{full_budget, BudgetEntry, BudgetInputs, BudgetModel, BudgetReport, MeasuredDeviation};
pub use residual::{
    default_phi_grid, estimate_tau, residual_light_delta_f, residual_light_sweep, Extremum,
    SweepCurve, TauEstimate, DEFAULT_SWEEP_POINTS,
};
