//! Run configuration files.

use std::path::Path;

use dickecool::{Method, OccupationBasis};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Schema revision understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SpinMaster,
    SpinCavity,
    AverageDissipator,
    Analytic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    #[default]
    MaximallyMixed,
    Ground,
    AllUp,
}

impl InitialState {
    pub fn jz(self, n_qubits: usize) -> f64 {
        match self {
            InitialState::MaximallyMixed => 0.0,
            InitialState::Ground => -(n_qubits as f64) / 2.0,
            InitialState::AllUp => n_qubits as f64 / 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    #[default]
    Log,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n_qubits: usize,
    /// Collective rate Γ. Derived from the cavity for `spin-cavity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_cc: Option<f64>,
    /// Dephasing rate γ; mutually exclusive with `lambda` and `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_t2: Option<f64>,
    /// γ = λNΓ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub nbar: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub g: f64,
    pub kappa: f64,
    pub n_levels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityConfig>,
    #[serde(default)]
    pub initial_state: InitialState,
    pub t_max: f64,
    pub n_samples: usize,
    #[serde(default)]
    pub grid: GridKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<f64>>,
    /// Path prefix for every file the run writes.
    pub output: String,
    /// Reserved; nothing in the pipeline is stochastic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default)]
    pub gnuplot: bool,
}

/// One propagation of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub lambda: Option<f64>,
    pub gamma_t2: f64,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_rate(name: &str, v: f64) -> Result<(), CliError> {
    if !v.is_finite() || v < 0.0 {
        return Err(bad(format!("{name} must be finite and non-negative, got {v}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        let m = &self.model;
        if m.n_qubits == 0 {
            return Err(bad("model.n_qubits must be positive"));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(bad(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.n_samples < 2 {
            return Err(bad("n_samples must be at least 2"));
        }
        if self.output.is_empty() {
            return Err(bad("output prefix must not be empty"));
        }
        check_rate("model.nbar", m.nbar)?;
        for (name, v) in [("model.gamma_t2", m.gamma_t2), ("model.lambda", m.lambda)] {
            if let Some(v) = v {
                check_rate(name, v)?;
            }
        }
        if m.gamma_t2.is_some() && m.lambda.is_some() {
            return Err(bad("set at most one of model.gamma_t2 and model.lambda"));
        }
        match self.scenario {
            Scenario::SpinCavity => {
                let c = self.cavity.as_ref().ok_or_else(|| bad("scenario spin-cavity needs a cavity section"))?;
                if m.gamma_cc.is_some() {
                    return Err(bad("model.gamma_cc is derived from cavity g and kappa for spin-cavity"));
                }
                if !(c.g.is_finite() && c.g > 0.0 && c.kappa.is_finite() && c.kappa > 0.0) {
                    return Err(bad("cavity.g and cavity.kappa must be positive"));
                }
                if c.n_levels < 2 {
                    return Err(bad("cavity.n_levels must be at least 2"));
                }
            }
            _ => {
                if self.cavity.is_some() {
                    return Err(bad("a cavity section is only allowed for scenario spin-cavity"));
                }
                match m.gamma_cc {
                    Some(g) if g.is_finite() && g > 0.0 => {}
                    Some(g) => return Err(bad(format!("model.gamma_cc must be positive, got {g}"))),
                    None => return Err(bad("model.gamma_cc is required")),
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if !matches!(self.scenario, Scenario::SpinMaster | Scenario::SpinCavity) {
                return Err(bad("a lambda sweep is only allowed for spin-master and spin-cavity"));
            }
            if sweep.is_empty() {
                return Err(bad("sweep must list at least one lambda"));
            }
            if m.gamma_t2.is_some() || m.lambda.is_some() {
                return Err(bad("sweep cannot be combined with model.gamma_t2 or model.lambda"));
            }
            for &l in sweep {
                check_rate("sweep entry", l)?;
            }
            let mut names: Vec<String> = sweep.iter().map(|l| format!("{l}")).collect();
            names.sort();
            names.dedup();
            if names.len() != sweep.len() {
                return Err(bad("sweep entries must be distinct"));
            }
        }
        if self.scenario == Scenario::AverageDissipator && self.sweep_points().iter().any(|p| p.gamma_t2 <= 0.0) {
            return Err(bad("average-dissipator needs a positive dephasing rate"));
        }
        Ok(())
    }

    /// Γ used by the run: given directly, or `4g²/κ` for the cavity.
    pub fn gamma_cc(&self) -> f64 {
        match (&self.cavity, self.model.gamma_cc) {
            (Some(c), _) => 4.0 * c.g * c.g / c.kappa,
            (None, Some(g)) => g,
            (None, None) => f64::NAN,
        }
    }

    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let n = self.model.n_qubits as f64;
        let gamma = self.gamma_cc();
        match &self.sweep {
            Some(ls) => ls.iter().map(|&l| SweepPoint { lambda: Some(l), gamma_t2: l * n * gamma }).collect(),
            None => {
                let (lambda, gamma_t2) = match (self.model.lambda, self.model.gamma_t2) {
                    (Some(l), _) => (Some(l), l * n * gamma),
                    (None, Some(g)) => (None, g),
                    (None, None) => (None, 0.0),
                };
                vec![SweepPoint { lambda, gamma_t2 }]
            }
        }
    }

    /// Dimension of the largest operator the run builds.
    pub fn operator_dim(&self) -> usize {
        let spin = OccupationBasis::count(self.model.n_qubits);
        match (&self.scenario, &self.cavity) {
            (Scenario::Analytic, _) => 0,
            (Scenario::SpinCavity, Some(c)) => spin.saturating_mul(c.n_levels * c.n_levels),
            _ => spin,
        }
    }

    pub fn time_grid(&self) -> Vec<f64> {
        match self.grid {
            GridKind::Log => dickecool::propagate::log_grid(self.t_max, self.n_samples),
            GridKind::Linear => dickecool::propagate::linear_grid(self.t_max, self.n_samples),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "scenario": "spin-master",
            "model": {"n_qubits": 4, "gamma_cc": 1.0},
            "t_max": 5.0,
            "n_samples": 20,
            "sweep": [0.0, 1.0],
            "output": "out/run"
        })
    }

    fn parse(v: serde_json::Value) -> Result<RunConfig, CliError> {
        RunConfig::from_json(&v.to_string())
    }

    #[test]
    fn defaults_and_points() {
        let cfg = parse(base()).unwrap();
        assert_eq!(cfg.grid, GridKind::Log);
        assert_eq!(cfg.initial_state, InitialState::MaximallyMixed);
        let pts = cfg.sweep_points();
        assert_eq!(pts[1], SweepPoint { lambda: Some(1.0), gamma_t2: 4.0 });
        assert_eq!(cfg.operator_dim(), 35);
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut v = base();
        v["schema_version"] = 2.into();
        assert!(parse(v).is_err());

        let mut v = base();
        v["scenario"] = "analytic".into();
        assert!(parse(v).is_err(), "sweep with analytic");

        let mut v = base();
        v["model"]["gamma_t2"] = 1.0.into();
        assert!(parse(v).is_err(), "sweep plus gamma_t2");

        let mut v = base();
        v["bogus"] = 1.into();
        assert!(parse(v).is_err());

        let mut v = base();
        v["scenario"] = "spin-cavity".into();
        assert!(parse(v).is_err(), "missing cavity");

        let mut v = base();
        v.as_object_mut().unwrap().remove("sweep");
        v["scenario"] = "average-dissipator".into();
        assert!(parse(v).is_err(), "zero dephasing");
    }

    #[test]
    fn cavity_rate_is_derived() {
        let mut v = base();
        v["scenario"] = "spin-cavity".into();
        v["model"].as_object_mut().unwrap().remove("gamma_cc");
        v["cavity"] = serde_json::json!({"g": 100.0, "kappa": 4e4, "n_levels": 4});
        let cfg = parse(v).unwrap();
        assert_eq!(cfg.gamma_cc(), 1.0);
        assert_eq!(cfg.operator_dim(), 35 * 16);
    }
}
