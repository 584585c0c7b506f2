use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::bounds::{bound_report, BoundReport, VarianceMapping};
use crate::config::{EvalPoint, RunConfig};
use crate::error::Result;
use crate::evaluator::NoisyEvaluator;
use crate::mitigation::{mitigate, mitigate_stochastic, MitigationReport};
use crate::noise::{insert_noise, NoiseSpec, NoisyCircuit};
use crate::optimize::OptimizerConfig;

use super::sweep::optimize_noisy;
use super::toy::{build_toy_hamiltonian, ToyModel};

fn noisy_evaluator(model: &ToyModel, cfg: &RunConfig) -> Result<NoisyEvaluator> {
    let mut noisy: NoisyCircuit = insert_noise(&model.circuit, &cfg.noise)?;
    if cfg.mitigation.noise_on_shift {
        noisy = noisy.with_shift_noise(cfg.noise.q1, cfg.noise.q2);
    }
    NoisyEvaluator::new(model.cost_function(), noisy, cfg.mitigation.mode)
}

fn evaluation_point(model: &ToyModel, ev: &NoisyEvaluator, cfg: &RunConfig) -> Result<Vec<f64>> {
    Ok(match cfg.mitigation.point {
        EvalPoint::ThetaOpt => model.theta_opt.clone(),
        EvalPoint::Optimized => optimize_noisy(ev, &OptimizerConfig::default(), cfg.seed)?.best.theta,
        EvalPoint::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..ev.n_params()).map(|_| rng.random_range(0.0..TAU)).collect()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitigationDemo {
    pub noise: NoiseSpec,
    pub theta: Vec<f64>,
    /// Noiseless reference, computed outside the mitigation procedure.
    pub noiseless: f64,
    pub raw_error: f64,
    pub mitigated_error: f64,
    pub within_remainder_bound: bool,
    pub warning: Option<String>,
    pub report: MitigationReport,
}

/// Leading-order mitigation on the toy model at the configured point.
pub fn mitigation_demo(cfg: &RunConfig) -> Result<MitigationDemo> {
    cfg.validate()?;
    let model = build_toy_hamiltonian(&cfg.toy_model)?;
    let ev = noisy_evaluator(&model, cfg)?;
    let theta = evaluation_point(&model, &ev, cfg)?;
    ev.reset_evaluations();
    let report = match cfg.mitigation.variance_mapping {
        VarianceMapping::Exact => mitigate(&ev, &theta)?,
        mapping => {
            let probs: Vec<f64> = ev.noisy_circuit().registry().entries().iter().map(|e| e.p).collect();
            mitigate_stochastic(&ev, &theta, &probs, mapping)?
        }
    };
    let noiseless = ev.cost().eval(&theta)?;
    let mitigated_error = report.mitigated - noiseless;
    let warning = cfg
        .mitigation
        .target_precision
        .filter(|t| report.remainder_bound > *t)
        .map(|t| {
            format!(
                "residual ceiling {:.3e} exceeds target precision {t:.3e}; lower the noise or accept a larger error",
                report.remainder_bound
            )
        });
    Ok(MitigationDemo {
        noise: cfg.noise,
        theta,
        noiseless,
        raw_error: report.raw_noisy - noiseless,
        mitigated_error,
        within_remainder_bound: mitigated_error.abs() <= report.remainder_bound + 4.0 * report.raw_std_error,
        warning,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub noise: NoiseSpec,
    pub theta: Vec<f64>,
    pub bounds: BoundReport,
}

/// Error estimates and bounds on the toy model at the configured point.
pub fn predict_bounds(cfg: &RunConfig) -> Result<Prediction> {
    cfg.validate()?;
    let model = build_toy_hamiltonian(&cfg.toy_model)?;
    let ev = noisy_evaluator(&model, cfg)?;
    let theta = evaluation_point(&model, &ev, cfg)?;
    let noisy_value = ev.eval(&theta)?.value;
    let bounds = bound_report(ev.cost(), ev.noisy_circuit(), &theta, noisy_value)?;
    Ok(Prediction {
        noise: cfg.noise,
        theta,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MitigationConfig;
    use crate::evaluator::EvalMode;

    fn small(noise: NoiseSpec) -> RunConfig {
        RunConfig {
            toy_model: crate::harness::ToyModelSpec {
                n: 3,
                ..Default::default()
            },
            noise,
            ..RunConfig::default()
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let demo = mitigation_demo(&small(NoiseSpec::none())).unwrap();
        assert_eq!(demo.report.raw_noisy, demo.report.mitigated);
        assert_eq!(demo.report.evaluations, 1);
        assert!(demo.raw_error.abs() < 1e-12);
    }

    #[test]
    fn residual_below_ceiling() {
        let mut cfg = small(NoiseSpec::depolarizing(1e-3, 1e-2, 1e-2));
        cfg.mitigation.target_precision = Some(1e-9);
        let demo = mitigation_demo(&cfg).unwrap();
        assert!(demo.within_remainder_bound, "{demo:?}");
        assert!(demo.mitigated_error.abs() < demo.raw_error.abs());
        assert!(demo.warning.is_some());
        let four_p = mitigation_demo(&RunConfig {
            mitigation: MitigationConfig {
                variance_mapping: VarianceMapping::FourP,
                ..cfg.mitigation
            },
            ..cfg.clone()
        })
        .unwrap();
        assert!((four_p.mitigated_error - demo.mitigated_error).abs() < 1e-2 * demo.raw_error.abs());
    }

    #[test]
    fn prediction_matches_demo_point() {
        let cfg = small(NoiseSpec::depolarizing(1e-4, 1e-3, 1e-3));
        let p = predict_bounds(&cfg).unwrap();
        let d = mitigation_demo(&cfg).unwrap();
        assert!((p.bounds.epsilon - d.raw_error).abs() < 1e-12);
        assert!(p.bounds.remainder_bound >= (p.bounds.epsilon - p.bounds.leading).abs());
        let traj = RunConfig {
            mitigation: MitigationConfig {
                mode: EvalMode::Trajectory { samples: 0, seed: 0 },
                ..cfg.mitigation
            },
            ..cfg
        };
        assert!(predict_bounds(&traj).is_err());
    }
}
