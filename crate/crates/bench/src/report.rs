//! Text, JSON and CSV renderings of analysis results.

use std::fmt::Write as _;

use peres_core::analysis::LogAnalysis;
use peres_core::budget::{BudgetModel, BudgetReport, FluctuationMc, SweepCurve};
use peres_core::fitting::{ContrastFit, ThermalizationFit};
use peres_core::reconstruct::CorrectedPoint;
use peres_core::reference::{PublishedBounds, ReferenceDataset};
use peres_core::stats::MalfunctionReport;
use peres_core::InterferenceTerms;
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleRow {
    pub cycle: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub f: f64,
    pub epsilon_w: f64,
}

/// Everything `analyze` reports about a log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n_cycles: usize,
    pub mean_terms: InterferenceTerms,
    pub mean_f: f64,
    pub delta_f: f64,
    /// Autocorrelation-corrected SEM of `F`, if enough cycles.
    pub f_sem: Option<f64>,
    pub f_naive_sem: Option<f64>,
    pub epsilon_w: f64,
    pub epsilon_sem_w: Option<f64>,
    pub kappa: f64,
    pub kappa_denominator_w: f64,
    pub malfunctions: Option<MalfunctionReport>,
    pub cycles: Vec<CycleRow>,
}

impl AnalysisReport {
    pub fn new(a: &LogAnalysis, malfunctions: Option<MalfunctionReport>) -> Self {
        Self {
            n_cycles: a.cycles.len(),
            mean_terms: a.mean_terms,
            mean_f: a.mean_f,
            delta_f: a.delta_f(),
            f_sem: a.f_stats.map(|s| s.corrected_sem),
            f_naive_sem: a.f_stats.map(|s| s.naive_sem),
            epsilon_w: a.sorkin.epsilon,
            epsilon_sem_w: a.epsilon_stats.map(|s| s.corrected_sem),
            kappa: a.sorkin.kappa,
            kappa_denominator_w: a.sorkin.denominator,
            malfunctions,
            cycles: a
                .cycles
                .iter()
                .map(|c| CycleRow {
                    cycle: c.cycle_index,
                    alpha: c.terms.alpha,
                    beta: c.terms.beta,
                    gamma: c.terms.gamma,
                    f: c.f,
                    epsilon_w: c.epsilon,
                })
                .collect(),
        }
    }

    pub fn text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.2e}"));
        let t = self.mean_terms;
        let mut s = String::new();
        let _ = writeln!(s, "cycles           {}", self.n_cycles);
        if let Some(m) = &self.malfunctions {
            let _ = writeln!(s, "dropped cycles   {}", m.dropped.len());
        }
        let _ = writeln!(s, "mean terms       α = {:+.6}  β = {:+.6}  γ = {:+.6}", t.alpha, t.beta, t.gamma);
        let _ = writeln!(s, "mean F           {:.6}", self.mean_f);
        let _ = writeln!(
            s,
            "ΔF               {:+.3e} ± {} (naive {})",
            self.delta_f,
            opt(self.f_sem),
            opt(self.f_naive_sem)
        );
        let _ = writeln!(s, "ε                {:+.3e} W ± {}", self.epsilon_w, opt(self.epsilon_sem_w));
        let _ = writeln!(s, "κ                {:+.3e}", self.kappa);
        s
    }

    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["cycle", "alpha", "beta", "gamma", "f", "epsilon_w"])?;
        for c in &self.cycles {
            w.write_record([
                c.cycle.to_string(),
                format!("{:.16e}", c.alpha),
                format!("{:.16e}", c.beta),
                format!("{:.16e}", c.gamma),
                format!("{:.16e}", c.f),
                format!("{:.16e}", c.epsilon_w),
            ])?;
        }
        Ok(into_string(w))
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

fn published(reference: &ReferenceDataset, model: BudgetModel) -> PublishedBounds {
    match model {
        BudgetModel::Nonlinearity => reference.nonlinearity,
        BudgetModel::PowerFluctuations => reference.power_bound,
        BudgetModel::PhaseFluctuations => reference.phase_bound,
        BudgetModel::Contrast => reference.contrast,
        BudgetModel::Crosstalk => reference.crosstalk,
        BudgetModel::ResidualLight => reference.residual_light,
    }
}

fn bounds_text(b: PublishedBounds) -> String {
    if b.lower == b.upper {
        format!("{:+.1e}", b.lower)
    } else {
        format!("[{:+.1e}, {:+.1e}]", b.lower, b.upper)
    }
}

pub fn budget_text(r: &BudgetReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16}{:>12}{:>12}{:>12}{:>12}  published",
        "model", "ΔF", "lower", "upper", "σ_F"
    );
    for e in &r.entries {
        let sigma = e.sigma_f.map_or(String::new(), |v| format!("{v:.2e}"));
        let reference = r.reference.map_or(String::new(), |d| bounds_text(published(&d, e.model)));
        let _ = writeln!(
            s,
            "{:<16}{:>12.2e}{:>12.2e}{:>12.2e}{:>12}  {reference}",
            e.model.label(),
            e.delta_f,
            e.lower,
            e.upper,
            sigma
        );
    }
    let total_ref = r.reference.map_or(String::new(), |d| bounds_text(d.total));
    let _ = writeln!(
        s,
        "{:<16}{:>12}{:>12.2e}{:>12.2e}{:>12}  {total_ref}",
        "total", "", r.total_lower, r.total_upper, ""
    );
    let m = r.measured;
    let measured_ref = r.reference.map_or(String::new(), |d| {
        format!("{:+.2e} ± {:.0e}", d.measured_delta_f.value, d.measured_delta_f.uncertainty)
    });
    let _ = writeln!(
        s,
        "{:<16}{:>12.2e}  ± {:.1e} (naive {:.1e}, {} cycles)  {measured_ref}",
        "measured", m.delta_f, m.sem, m.naive_sem, m.n_cycles
    );
    let c = &r.residual_curve;
    let _ = writeln!(
        s,
        "residual light extrema: {:+.3e} at φ_Sh = {:+.3}, {:+.3e} at φ_Sh = {:+.3}",
        c.max.value, c.max.x, c.min.value, c.min.x
    );
    s
}

pub fn budget_csv(r: &BudgetReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "delta_f", "lower", "upper", "sigma_f", "published_lower", "published_upper"])?;
    let f = |v: f64| format!("{v:.16e}");
    let pub_cols = |b: Option<PublishedBounds>| match b {
        Some(b) => [f(b.lower), f(b.upper)],
        None => [String::new(), String::new()],
    };
    for e in &r.entries {
        let [pl, pu] = pub_cols(r.reference.map(|d| published(&d, e.model)));
        w.write_record([
            e.model.label().to_string(),
            f(e.delta_f),
            f(e.lower),
            f(e.upper),
            e.sigma_f.map(f).unwrap_or_default(),
            pl,
            pu,
        ])?;
    }
    let [pl, pu] = pub_cols(r.reference.map(|d| d.total));
    w.write_record(["total".into(), String::new(), f(r.total_lower), f(r.total_upper), String::new(), pl, pu])?;
    let measured = r.reference.map(|d| PublishedBounds {
        lower: d.measured_delta_f.value,
        upper: d.measured_delta_f.value,
    });
    let [pl, pu] = pub_cols(measured);
    w.write_record([
        "measured".into(),
        f(r.measured.delta_f),
        f(r.measured.delta_f - r.measured.sem),
        f(r.measured.delta_f + r.measured.sem),
        String::new(),
        pl,
        pu,
    ])?;
    Ok(into_string(w))
}

pub fn sweep_csv(c: &SweepCurve) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["phi_sh_rad", "delta_f"])?;
    for (x, y) in c.x.iter().zip(&c.delta_f) {
        w.write_record([format!("{x:.16e}"), format!("{y:.16e}")])?;
    }
    Ok(into_string(w))
}

pub fn corrected_text(c: &CorrectedPoint) -> String {
    let mut s = String::new();
    let p = c.point;
    let t = c.corrected_terms;
    let _ = writeln!(
        s,
        "corrected phases  Δφ_BC = {:+.6}  Δφ_CA = {:+.6}  Δφ_AB = {:+.6} rad",
        p.dphi_bc, p.dphi_ca, p.dphi_ab
    );
    let _ = writeln!(s, "corrected terms   α = {:+.6}  β = {:+.6}  γ = {:+.6}", t.alpha, t.beta, t.gamma);
    let _ = writeln!(s, "distance          {:.3e} rad (plane n = {})", c.distance, c.plane_index);
    if let Some(r) = &c.runner_up {
        let t = r.corrected_terms;
        let _ = writeln!(
            s,
            "runner-up         α = {:+.6}  β = {:+.6}  γ = {:+.6}  distance {:.3e} rad",
            t.alpha, t.beta, t.gamma, r.distance
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub thermalization: Option<ThermalizationFit>,
    pub contrast: ContrastFit,
}

impl FitReport {
    pub fn text(&self) -> String {
        let mut s = String::new();
        let unc = |u: Option<f64>| u.map_or(String::new(), |u| format!(" ± {u:.2e}"));
        if let Some(t) = &self.thermalization {
            let u = t.parameter_uncertainties;
            let _ = writeln!(s, "T_0      {:.4}{} °C", t.t0, unc(u.map(|u| u[0])));
            let _ = writeln!(s, "ΔT       {:.4}{} °C", t.delta_t, unc(u.map(|u| u[1])));
            let _ = writeln!(s, "κ_T      {:.5}{} per cycle", t.kappa_th, unc(u.map(|u| u[2])));
        }
        let c = &self.contrast;
        let u = c.parameter_uncertainties;
        let _ = writeln!(s, "C_α      {:.4}{}", c.c_alpha, unc(u.map(|u| u[0])));
        let _ = writeln!(s, "Δφ_0     {:.4}{} rad", c.dphi0, unc(u.map(|u| u[1])));
        let _ = writeln!(s, "η        {:.4}{} rad/°C", c.eta, unc(u.map(|u| u[2])));
        let _ = writeln!(s, "κ        {:.5}{} per cycle", c.kappa_th, unc(u.map(|u| u[3])));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationReport {
    pub power: Option<FluctuationMc>,
    pub phase: Option<FluctuationMc>,
}

impl FluctuationReport {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for (name, m) in [("power", &self.power), ("phase", &self.phase)] {
            if let Some(m) = m {
                let _ = writeln!(
                    s,
                    "{name:<6} ΔF = {:+.3e} ± {:.1e}  σ_F = {:.3e}  ({} samples, {} rejected)",
                    m.delta_f, m.std_error, m.sigma_f, m.n_samples, m.rejected
                );
            }
        }
        s
    }
}
