//! JSON run configuration shared by the command-line tool and bindings.
//!
//! ```json
//! {
//!   "seed": 0,
//!   "output_dir": "out/rate_sweep",
//!   "toy_model": {"n": 4, "depth": 2, "e0": 1.0, "e1": 51.0, "emax": 100.0},
//!   "sweep": {"variable": "rate", "values": [1e-5, 1e-4, 1e-3], "seeds": [0, 1, 2]},
//!   "noise": {"q1": 1e-4, "q2": 1e-3, "q_readout": 1e-3},
//!   "mitigation": {"point": "theta_opt", "noise_on_shift": false}
//! }
//! ```
//!
//! Unknown keys are rejected at every level. Serializing a parsed config
//! writes every default explicitly.

use serde::{Deserialize, Serialize};

use crate::bounds::VarianceMapping;
use crate::error::{Error, Result};
use crate::evaluator::EvalMode;
use crate::harness::{SweepConfig, ToyModelSpec};
use crate::noise::NoiseSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPoint {
    /// The exact optimum built into the toy model.
    #[default]
    ThetaOpt,
    /// The optimum of the noisy cost.
    Optimized,
    /// Uniformly random parameters drawn from the master seed.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MitigationConfig {
    pub point: EvalPoint,
    /// Attach depolarizing noise to virtual rotations inserted by pi shifts.
    pub noise_on_shift: bool,
    /// Use `-2 ln(1 - 2p)` or `4p` as the channel variance.
    pub variance_mapping: VarianceMapping,
    /// Warn when the residual ceiling exceeds this precision.
    pub target_precision: Option<f64>,
    pub mode: EvalMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "RunConfig::default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub toy_model: ToyModelSpec,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub mitigation: MitigationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: Self::default_output_dir(),
            toy_model: ToyModelSpec::default(),
            sweep: None,
            noise: NoiseSpec::default(),
            mitigation: MitigationConfig::default(),
        }
    }
}

impl RunConfig {
    fn default_output_dir() -> String {
        "out".into()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.toy_model.validate()?;
        self.noise.validate()?;
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        if let EvalMode::Trajectory { samples: 0, .. } = self.mitigation.mode {
            return Err(Error::Config("trajectory mode needs samples > 0".into()));
        }
        if let Some(t) = self.mitigation.target_precision {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::Config(format!("target_precision must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_materialized() {
        let cfg = RunConfig::from_json("{}").unwrap();
        let text = cfg.to_json();
        for key in ["seed", "output_dir", "toy_model", "noise", "mitigation", "circuit_seed", "q_readout"] {
            assert!(text.contains(key), "{key}");
        }
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_json(r#"{"sed": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"toy_model": {"qubits": 3}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"sweep": {"variable": "rate", "values": [1e-4], "x": 1}}"#).is_err());
    }

    #[test]
    fn sweep_round_trip() {
        let text = r#"{"sweep": {"variable": "gap", "values": [5, 10],
            "mode": {"mode": "trajectory", "samples": 100, "seed": 4}}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert!(RunConfig::from_json(r#"{"sweep": {"variable": "rate", "values": [2e-4, 1e-4]}}"#).is_err());
    }
}
