//! JSON run configuration shared by every CLI subcommand.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "plant": { "type": "detuned_ndpa", "kappa": 1.0, "lambda": 5.0 },
//!   "controller": { "type": "beam_splitter", "beta": 0.1 },
//!   "grid": { "omega_min": -1.0, "omega_max": 1.0, "n_points": 201 }
//! }
//! ```
//!
//! Unknown keys are rejected at every level. The JSON Schema lives in
//! `docs/config.schema.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::FrequencyGrid;
use crate::error::{Error, Result};
use crate::experiments::{MonteCarloConfig, NominalPlant, PerturbationSpec, SweepAxis};
use crate::interconnect::FeedbackLoopConfig;
use crate::models::{
    build_beam_splitter, build_detuned_ndpa, build_ndpa, ControllerModel, PlantModel,
};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

fn schema_version_default() -> u32 {
    CONFIG_SCHEMA_VERSION
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantSpec {
    /// General NDPA with detunings and signal loss.
    Ndpa {
        #[serde(default = "one")]
        kappa: f64,
        lambda: f64,
        #[serde(default)]
        delta1: f64,
        #[serde(default)]
        delta2: f64,
        #[serde(default)]
        gamma: f64,
    },
    /// NDPA with `Δ1 = Δ2 = λ`; a positive `gamma` adds signal loss.
    DetunedNdpa {
        #[serde(default = "one")]
        kappa: f64,
        lambda: f64,
        #[serde(default)]
        gamma: f64,
    },
}

impl PlantSpec {
    pub fn build(&self) -> Result<PlantModel> {
        match *self {
            PlantSpec::Ndpa {
                kappa,
                lambda,
                delta1,
                delta2,
                gamma,
            } => build_ndpa(kappa, lambda, delta1, delta2, gamma),
            PlantSpec::DetunedNdpa {
                kappa,
                lambda,
                gamma,
            } => {
                if gamma == 0.0 {
                    build_detuned_ndpa(kappa, lambda)
                } else {
                    build_ndpa(kappa, lambda, lambda, lambda, gamma)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerSpec {
    BeamSplitter { beta: f64 },
}

impl ControllerSpec {
    pub fn build(&self) -> Result<ControllerModel> {
        match *self {
            ControllerSpec::BeamSplitter { beta } => build_beam_splitter(beta),
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            ControllerSpec::BeamSplitter { beta } => beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Robustness,
    Noise,
}

/// Monte Carlo settings; the plant, controller and lines come from the
/// rest of the run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
    #[serde(default)]
    pub omega_eval: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_grid: Option<FrequencyGrid>,
}

fn default_samples() -> usize {
    50
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kind: None,
            seed: None,
            n_samples: default_samples(),
            perturbation: PerturbationSpec::default(),
            sweep: None,
            omega_eval: 0.0,
            curve_grid: None,
        }
    }
}

impl ExperimentSpec {
    /// Robustness unless a sweep is configured.
    pub fn effective_kind(&self) -> ExperimentKind {
        self.kind.unwrap_or(if self.sweep.is_some() {
            ExperimentKind::Noise
        } else {
            ExperimentKind::Robustness
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version_default")]
    pub schema_version: u32,
    pub plant: PlantSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerSpec>,
    #[serde(default)]
    pub feedback: FeedbackLoopConfig,
    #[serde(default)]
    pub grid: FrequencyGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked without running a computation.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.plant.build().map_err(config_err)?;
        if let Some(c) = &self.controller {
            c.build().map_err(config_err)?;
        }
        self.feedback.validate().map_err(config_err)?;
        self.grid.validate().map_err(config_err)?;
        if let Some(exp) = &self.experiment {
            exp.perturbation.validate().map_err(config_err)?;
            if let Some(g) = &exp.curve_grid {
                g.validate().map_err(config_err)?;
            }
        }
        Ok(())
    }

    /// Monte Carlo config for this run. The plant must be a detuned NDPA
    /// and a controller must be present.
    pub fn monte_carlo(&self, seed: u64) -> Result<MonteCarloConfig> {
        let PlantSpec::DetunedNdpa {
            kappa,
            lambda,
            gamma,
        } = self.plant
        else {
            return Err(Error::Config(
                "montecarlo needs a detuned_ndpa plant".into(),
            ));
        };
        let controller = self
            .controller
            .as_ref()
            .ok_or_else(|| Error::Config("montecarlo needs a controller".into()))?;
        let exp = self.experiment.clone().unwrap_or_default();
        let cfg = MonteCarloConfig {
            seed,
            n_samples: exp.n_samples,
            nominal: NominalPlant {
                kappa,
                lambda0: lambda,
                gamma,
            },
            beta: controller.beta(),
            feedback: self.feedback,
            perturbation: exp.perturbation,
            sweep: exp.sweep,
            omega_eval: exp.omega_eval,
            curve_grid: exp.curve_grid,
        };
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg =
            RunConfig::from_json(r#"{"plant": {"type": "detuned_ndpa", "lambda": 5}}"#).unwrap();
        assert_eq!(cfg.schema_version, 1);
        assert_eq!(cfg.feedback, FeedbackLoopConfig::ideal());
        assert!(cfg.controller.is_none());
    }

    #[test]
    fn unknown_keys_rejected() {
        for bad in [
            r#"{"plant": {"type": "detuned_ndpa", "lambda": 5}, "colour": 1}"#,
            r#"{"plant": {"type": "detuned_ndpa", "lambda": 5, "lamda": 2}}"#,
            r#"{"plant": {"type": "detuned_ndpa", "lambda": 5}, "grid": {"omega_min": 0, "omega_max": 1, "n_points": 3, "x": 0}}"#,
            r#"{"plant": {"type": "detuned_ndpa", "lambda": 5}, "experiment": {"samples": 3}}"#,
        ] {
            assert!(
                matches!(RunConfig::from_json(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn invalid_values_rejected() {
        for bad in [
            r#"{"schema_version": 2, "plant": {"type": "detuned_ndpa", "lambda": 5}}"#,
            r#"{"plant": {"type": "detuned_ndpa", "lambda": 5, "kappa": -1}}"#,
            r#"{"plant": {"type": "detuned_ndpa", "lambda": 5}, "controller": {"type": "beam_splitter", "beta": 2}}"#,
            r#"{"plant": {"type": "detuned_ndpa", "lambda": 5}, "feedback": {"alpha1": 0, "alpha2": 1}}"#,
            r#"{"plant": {"type": "detuned_ndpa", "lambda": 5}, "grid": {"omega_min": 1, "omega_max": 0, "n_points": 3}}"#,
        ] {
            assert!(
                matches!(RunConfig::from_json(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn lossy_detuned_plant_matches_general() {
        let spec = PlantSpec::DetunedNdpa {
            kappa: 1.0,
            lambda: 5.0,
            gamma: 0.02,
        };
        let p = spec.build().unwrap();
        assert!(p.has_loss_port());
        assert_eq!((p.delta1, p.delta2), (5.0, 5.0));
    }

    #[test]
    fn monte_carlo_needs_detuned_plant() {
        let cfg = RunConfig::from_json(
            r#"{"plant": {"type": "ndpa", "lambda": 0.3}, "controller": {"type": "beam_splitter", "beta": 0.1}}"#,
        )
        .unwrap();
        assert!(matches!(cfg.monte_carlo(0), Err(Error::Config(_))));
    }
}
