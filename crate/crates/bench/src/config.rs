//! JSON run configuration.
//!
//! Every section except `source` and `phases` may be omitted and then
//! disables its imperfection. Unknown keys are rejected at every level.

use std::fs;
use std::path::Path;

use peres_core::budget::{BudgetInputs, DEFAULT_MC_SAMPLES, DEFAULT_SWEEP_POINTS};
use peres_core::forward::{
    CrosstalkSpec, FluctuationSpec, ImperfectionSpec, NonlinearitySpec, PolarizationSpec, Protocol,
    ResidualLightSpec, SimulationSnapshot, SourceSpec,
};
use peres_core::reference::{ReferenceDataset, HOUSING_23C, HOUSING_30C};
use peres_core::stats::DEFAULT_MAD_THRESHOLD;
use peres_core::PhasePoint;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const DEFAULT_P_IN_W: f64 = 1e-6;

fn default_p_in() -> f64 {
    DEFAULT_P_IN_W
}

/// [`SourceSpec`] with a default input power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default = "default_p_in")]
    pub p_in: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub t_c: f64,
    #[serde(default)]
    pub p_dark: f64,
}

impl From<SourceConfig> for SourceSpec {
    fn from(s: SourceConfig) -> Self {
        SourceSpec::new(s.p_in, [s.t_a, s.t_b, s.t_c]).with_dark(s.p_dark)
    }
}

impl From<SourceSpec> for SourceConfig {
    fn from(s: SourceSpec) -> Self {
        Self {
            p_in: s.p_in,
            t_a: s.t_a,
            t_b: s.t_b,
            t_c: s.t_c,
            p_dark: s.p_dark,
        }
    }
}

/// Published dataset printed next to a budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceChoice {
    #[serde(rename = "23c")]
    Housing23c,
    #[serde(rename = "30c")]
    Housing30c,
}

impl ReferenceChoice {
    pub fn dataset(&self) -> ReferenceDataset {
        match self {
            Self::Housing23c => HOUSING_23C,
            Self::Housing30c => HOUSING_30C,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub mc_samples: u64,
    pub sweep_points: usize,
    /// Contrast reduction for the budget; derived from
    /// `fluctuations.sigma_phase_fast` when absent.
    pub delta_c: Option<f64>,
    pub filter_malfunctions: bool,
    pub malfunction_threshold: f64,
    pub reference: Option<ReferenceChoice>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            mc_samples: DEFAULT_MC_SAMPLES,
            sweep_points: DEFAULT_SWEEP_POINTS,
            delta_c: None,
            filter_malfunctions: false,
            malfunction_threshold: DEFAULT_MAD_THRESHOLD,
            reference: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceConfig,
    /// True or corrected phase point of the interferometer.
    pub phases: PhasePoint,
    #[serde(default)]
    pub residual: ResidualLightSpec,
    #[serde(default)]
    pub crosstalk: CrosstalkSpec,
    #[serde(default)]
    pub fluctuations: FluctuationSpec,
    #[serde(default)]
    pub nonlinearity: NonlinearitySpec,
    #[serde(default)]
    pub polarization: PolarizationSpec,
    #[serde(default)]
    pub protocol: Protocol,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

/// Splits `"residual.tau must be …"` into key path and message.
fn split_key_path(message: &str) -> (String, String) {
    if let Some((head, _)) = message.split_once(' ') {
        let is_path = head.contains('.')
            && head
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.');
        if is_path {
            return (head.to_string(), message.to_string());
        }
    }
    (String::new(), message.to_string())
}

fn invalid(path: &str, message: String) -> BenchError {
    BenchError::Config {
        path: path.to_string(),
        message,
    }
}

impl RunConfig {
    pub fn new(source: SourceSpec, phases: PhasePoint) -> Self {
        Self {
            source: source.into(),
            phases,
            residual: Default::default(),
            crosstalk: Default::default(),
            fluctuations: Default::default(),
            nonlinearity: Default::default(),
            polarization: Default::default(),
            protocol: Default::default(),
            seed: 0,
            analysis: Default::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(if path == "." { "" } else { &path }, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn source_spec(&self) -> SourceSpec {
        self.source.into()
    }

    pub fn imperfections(&self) -> ImperfectionSpec {
        ImperfectionSpec {
            residual: self.residual,
            crosstalk: self.crosstalk,
            fluctuations: self.fluctuations,
            nonlinearity: self.nonlinearity,
            polarization: self.polarization,
        }
    }

    pub fn snapshot(&self) -> SimulationSnapshot {
        SimulationSnapshot {
            source: self.source_spec(),
            phases: self.phases,
            imperfections: self.imperfections(),
            protocol: self.protocol,
        }
    }

    pub fn budget_inputs(&self) -> BudgetInputs {
        let mut inputs = BudgetInputs::new(self.source_spec(), self.imperfections(), self.seed);
        inputs.delta_c = self.analysis.delta_c;
        inputs.mc_samples = self.analysis.mc_samples;
        inputs.sweep_points = self.analysis.sweep_points;
        inputs.reference = self.analysis.reference.map(|r| r.dataset());
        inputs
    }

    /// Checks every section; messages name the offending key.
    pub fn validate(&self) -> Result<()> {
        let core = |e: peres_core::Error| match e {
            peres_core::Error::Configuration(m) => {
                let (path, message) = split_key_path(&m);
                BenchError::Config { path, message }
            }
            other => BenchError::Core(other),
        };
        self.source_spec().validate().map_err(core)?;
        for (name, v) in [
            ("dphi_bc", self.phases.dphi_bc),
            ("dphi_ca", self.phases.dphi_ca),
            ("dphi_ab", self.phases.dphi_ab),
        ] {
            if !v.is_finite() {
                let path = format!("phases.{name}");
                return Err(invalid(&path, format!("{path} must be finite")));
            }
        }
        self.imperfections().validate().map_err(core)?;
        self.protocol.validate().map_err(core)?;
        let a = &self.analysis;
        if a.mc_samples < 2 {
            return Err(invalid(
                "analysis.mc_samples",
                format!("analysis.mc_samples must be ≥ 2, got {}", a.mc_samples),
            ));
        }
        if a.sweep_points < 3 {
            return Err(invalid(
                "analysis.sweep_points",
                format!("analysis.sweep_points must be ≥ 3, got {}", a.sweep_points),
            ));
        }
        if let Some(d) = a.delta_c {
            if !(0.0..=1.0).contains(&d) {
                return Err(invalid(
                    "analysis.delta_c",
                    format!("analysis.delta_c must lie in [0, 1], got {d}"),
                ));
            }
        }
        if !(a.malfunction_threshold > 0.0 && a.malfunction_threshold.is_finite()) {
            return Err(invalid(
                "analysis.malfunction_threshold",
                format!(
                    "analysis.malfunction_threshold must be > 0, got {}",
                    a.malfunction_threshold
                ),
            ));
        }
        Ok(())
    }
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    RunConfig::from_json(&text)
}
