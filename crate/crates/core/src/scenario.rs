//! Scenario configuration: the TOML-serializable description of one run.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::ai_dynamics::AiScenario;
use crate::error::{Error, Result};
use crate::exact_dynamics::GridSpec;
use crate::kibble_zurek::{RampSpec, RegimeLabel};

/// Physical parameters; exactly one of `t0` / `b0` must be given, the other
/// is derived through B0 = δ·t0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of microscopic constituents N.
    pub n: f64,
    /// Ramp rate δ in B(t) = δ·t.
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub lattice_const: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// Sampling grid for time series, in units of the freeze-out time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographySpec {
    pub angles: usize,
    pub samples_per_angle: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub directory: PathBuf,
    #[serde(default = "csv_only")]
    pub formats: Vec<String>,
}

fn csv_only() -> Vec<String> {
    vec!["csv".to_string()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub model: ModelParams,
    pub time_grid: TimeGridSpec,
    pub grid: GridSpec,
    pub tomography: TomographySpec,
    pub outputs: OutputSpec,
}

impl Default for ScenarioConfig {
    /// The documented default scenario: N = 1e4, δ = 1e-3, t0 = 1e-3·t̂
    /// (project conventions, chosen for the strongly non-adiabatic regime).
    fn default() -> Self {
        Self {
            model: ModelParams {
                n: 1e4,
                delta: 1e-3,
                t0: Some(0.01),
                b0: None,
                kappa: 1.0,
                mass: 1.0,
                lattice_const: 1.0,
            },
            time_grid: TimeGridSpec {
                t_start: 1e-3,
                t_end: 8.0,
                n_samples: 2000,
                spacing: Spacing::Linear,
            },
            grid: GridSpec::default(),
            tomography: TomographySpec { angles: 180, samples_per_angle: 0, seed: 7 },
            outputs: OutputSpec { directory: PathBuf::from("out"), formats: csv_only() },
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidParameter(format!("config serialize error: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let ramp = self.ramp()?;
        let t_hat = ramp.freeze_out_time();
        let tg = &self.time_grid;
        if tg.n_samples == 0 {
            return Err(Error::InvalidParameter("time_grid.n_samples must be at least 1".into()));
        }
        if tg.t_end <= tg.t_start && tg.n_samples > 1 {
            return Err(Error::InvalidParameter(format!(
                "time_grid.t_end = {} must exceed t_start = {}",
                tg.t_end, tg.t_start
            )));
        }
        if tg.t_start * t_hat < ramp.t0() * (1.0 - 1e-9) {
            return Err(Error::InvalidParameter(format!(
                "time_grid.t_start = {} (units of t_hat) precedes t0/t_hat = {}",
                tg.t_start,
                ramp.t0() / t_hat
            )));
        }
        if tg.spacing == Spacing::Log && tg.t_start <= 0.0 {
            return Err(Error::InvalidParameter("log spacing needs t_start > 0".into()));
        }
        if self.grid.n_points < 16 || self.grid.window_sigmas < 6.0 {
            return Err(Error::InvalidParameter(
                "grid needs n_points >= 16 and window_sigmas >= 6".into(),
            ));
        }
        if self.tomography.angles < 2 {
            return Err(Error::InvalidParameter("tomography.angles must be at least 2".into()));
        }
        for f in &self.outputs.formats {
            if f != "csv" {
                return Err(Error::InvalidParameter(format!("unsupported output format {f:?}")));
            }
        }
        Ok(())
    }

    /// The ramp, resolving the t0/b0 pair.
    pub fn ramp(&self) -> Result<RampSpec> {
        match (self.model.t0, self.model.b0) {
            (Some(t0), None) => RampSpec::from_initial_time(self.model.delta, t0),
            (None, Some(b0)) => RampSpec::from_initial_field(self.model.delta, b0),
            (Some(t0), Some(b0)) => {
                let ramp = RampSpec::from_initial_time(self.model.delta, t0)?;
                if (ramp.b0() - b0).abs() > 1e-12 * b0.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "model.t0 and model.b0 are both set but inconsistent: delta*t0 = {}, b0 = {b0}",
                        ramp.b0()
                    )));
                }
                Ok(ramp)
            }
            (None, None) => Err(Error::InvalidParameter(
                "exactly one of model.t0 / model.b0 must be set".into(),
            )),
        }
    }

    pub fn scenario(&self) -> Result<AiScenario> {
        AiScenario::new(self.model.n, self.ramp()?)
    }

    /// Sample times in units of t̂, per the configured spacing.
    pub fn times_over_that(&self) -> Vec<f64> {
        let tg = &self.time_grid;
        if tg.n_samples == 1 {
            return vec![tg.t_start];
        }
        match tg.spacing {
            Spacing::Linear => crate::exact_dynamics::linspace(tg.t_start, tg.t_end, tg.n_samples),
            Spacing::Log => {
                let (a, b) = (tg.t_start.ln(), tg.t_end.ln());
                crate::exact_dynamics::linspace(a, b, tg.n_samples)
                    .into_iter()
                    .map(f64::exp)
                    .collect()
            }
        }
    }
}

/// Everything needed to reproduce a run, written next to its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub t_hat: f64,
    pub omega0: f64,
    pub regime_at_start: RegimeLabel,
    pub absolute_times: bool,
    /// Largest Airy-vs-ODE envelope disagreement observed at the checkpoint
    /// times, when the run evaluates the envelope.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_method_max_discrepancy: Option<f64>,
    pub version: String,
    pub unix_timestamp: u64,
    pub checksums: BTreeMap<String, String>,
}
