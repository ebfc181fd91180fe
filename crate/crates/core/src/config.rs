//! Run configuration read from TOML (or from the `config` field of a JSON
//! report written by an earlier run).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::EvolveOptions;
use crate::error::{Error, Result};
use crate::generators::SystemParams;
use crate::numerics::QuadConfig;
use crate::spectral::{DqdSincParams, DrudeParams, SpectralDensity};
use crate::steadystate::BlochVector;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathModel {
    Drude,
    DqdSinc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub model: BathModel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_cut: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    #[serde(default)]
    pub coupling_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub t_max: f64,
    pub dt_out: f64,
    #[serde(default = "origin")]
    pub v_init: [f64; 3],
}

fn origin() -> [f64; 3] {
    [0.0; 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_ode_rel_tol")]
    pub ode_rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    QuadConfig::default().rel_tol
}

fn default_abs_tol() -> f64 {
    QuadConfig::default().abs_tol
}

fn default_ode_rel_tol() -> f64 {
    1e-8
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self { rel_tol: default_rel_tol(), abs_tol: default_abs_tol(), ode_rel_tol: default_ode_rel_tol() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path of the swept value, e.g. `bath.beta`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub bath: BathSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSection>,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Deserialize)]
struct EmbeddedConfig {
    config: RunConfig,
}

fn required(value: Option<f64>, field: &str) -> Result<f64> {
    value.ok_or_else(|| Error::validation(field, "missing"))
}

fn absent(value: Option<f64>, field: &str, model: &str) -> Result<()> {
    match value {
        Some(_) => Err(Error::validation(field, format!("not a parameter of the {model} model"))),
        None => Ok(()),
    }
}

/// Names accepted by [`RunConfig::with_override`].
pub const SWEEPABLE: [&str; 11] = [
    "system.omega",
    "system.a1",
    "system.a3",
    "system.epsilon",
    "system.t_c",
    "bath.gamma",
    "bath.lambda_cut",
    "bath.omega_c",
    "bath.omega_max",
    "bath.beta",
    "coupling.coupling_sq",
];

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation("config", e.message().to_string()))
    }

    /// Read a `.toml` file, or the embedded config of a `.json` report.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            let parsed: EmbeddedConfig =
                serde_json::from_str(&text).map_err(|e| Error::validation("config", e.to_string()))?;
            Ok(parsed.config)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        let s = &self.system;
        let direct = s.omega.is_some() || s.a1.is_some() || s.a3.is_some();
        let dqd = s.epsilon.is_some() || s.t_c.is_some();
        let beta = required(self.bath.beta, "bath.beta")?;
        let lam = self.coupling.coupling_sq;
        match (direct, dqd) {
            (true, true) => Err(Error::validation(
                "system",
                "give either {omega, a1, a3} or {epsilon, t_c}, not both",
            )),
            (false, false) => Err(Error::validation("system", "missing {omega, a1, a3} or {epsilon, t_c}")),
            (true, false) => SystemParams::new(
                required(s.omega, "system.omega")?,
                required(s.a1, "system.a1")?,
                required(s.a3, "system.a3")?,
                beta,
                lam,
            ),
            (false, true) => {
                SystemParams::from_dqd(required(s.epsilon, "system.epsilon")?, required(s.t_c, "system.t_c")?, beta, lam)
            }
        }
    }

    pub fn spectral_density(&self) -> Result<Box<dyn SpectralDensity>> {
        let b = &self.bath;
        let gamma = required(b.gamma, "bath.gamma")?;
        match b.model {
            BathModel::Drude => {
                absent(b.omega_c, "bath.omega_c", "drude")?;
                absent(b.omega_max, "bath.omega_max", "drude")?;
                Ok(Box::new(DrudeParams::new(gamma, required(b.lambda_cut, "bath.lambda_cut")?)?))
            }
            BathModel::DqdSinc => {
                absent(b.lambda_cut, "bath.lambda_cut", "dqd_sinc")?;
                Ok(Box::new(DqdSincParams::new(
                    gamma,
                    required(b.omega_c, "bath.omega_c")?,
                    required(b.omega_max, "bath.omega_max")?,
                )?))
            }
        }
    }

    pub fn quad_config(&self) -> Result<QuadConfig> {
        let cfg = QuadConfig { rel_tol: self.numerics.rel_tol, abs_tol: self.numerics.abs_tol, ..QuadConfig::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn evolve_options(&self) -> Result<(BlochVector, EvolveOptions)> {
        let d = self.dynamics.as_ref().ok_or_else(|| Error::validation("dynamics", "missing section"))?;
        let mut opts = EvolveOptions::new(d.t_max, d.dt_out).with_rel_tol(self.numerics.ode_rel_tol);
        opts.abs_tol = opts.abs_tol.min(self.numerics.abs_tol);
        opts.validate()?;
        let v = BlochVector::new(d.v_init[0], d.v_init[1], d.v_init[2]);
        crate::dynamics::check_physical(&v)?;
        Ok((v, opts))
    }

    /// Validate everything a steady-state run needs.
    pub fn validate(&self) -> Result<()> {
        self.system_params()?;
        self.spectral_density()?;
        self.quad_config()?;
        Ok(())
    }

    /// Copy of `self` with the value at `path` replaced.
    pub fn with_override(&self, path: &str, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let slot = match path {
            "system.omega" => &mut c.system.omega,
            "system.a1" => &mut c.system.a1,
            "system.a3" => &mut c.system.a3,
            "system.epsilon" => &mut c.system.epsilon,
            "system.t_c" => &mut c.system.t_c,
            "bath.gamma" => &mut c.bath.gamma,
            "bath.lambda_cut" => &mut c.bath.lambda_cut,
            "bath.omega_c" => &mut c.bath.omega_c,
            "bath.omega_max" => &mut c.bath.omega_max,
            "bath.beta" => &mut c.bath.beta,
            "coupling.coupling_sq" => {
                c.coupling.coupling_sq = value;
                return Ok(c);
            }
            other => {
                return Err(Error::validation(
                    "sweep.parameter",
                    format!("unknown parameter `{other}`; expected one of {}", SWEEPABLE.join(", ")),
                ))
            }
        };
        if slot.is_none() {
            return Err(Error::validation("sweep.parameter", format!("`{path}` is not set in the base config")));
        }
        *slot = Some(value);
        Ok(c)
    }
}
