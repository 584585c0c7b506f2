use std::io::Write;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{log_log_fit, spearman, LinearFit};
use super::toy::{build_toy_hamiltonian, ToyModelSpec};
use crate::bounds::bound_report;
use crate::cost::{gradient, CostFunction};
use crate::error::{Error, Result};
use crate::evaluator::{EvalMode, NoisyEvaluator};
use crate::noise::{insert_noise, NoiseSpec};
use crate::optimize::{minimize_with_restarts, OptimizeResult, OptimizerConfig};

/// BFGS with restarts on the noisy cost, using parameter-shift gradients.
pub fn optimize_noisy(ev: &NoisyEvaluator, cfg: &OptimizerConfig, seed: u64) -> Result<OptimizeResult> {
    let f = |t: &[f64]| ev.eval(t).map(|e| e.value);
    let g = |t: &[f64]| ev.gradient(t);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    minimize_with_restarts(&f, &g, ev.n_params(), cfg, &mut rng)
}

pub fn optimize_noiseless(cf: &CostFunction, cfg: &OptimizerConfig, seed: u64) -> Result<OptimizeResult> {
    let f = |t: &[f64]| cf.eval(t);
    let g = |t: &[f64]| gradient(cf, t);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    minimize_with_restarts(&f, &g, cf.n_params(), cfg, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Single-qubit error probability `q`; the others follow `ratios`.
    Rate,
    /// Ground gap `E1 - E0` at fixed noise.
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseRatios {
    pub two_qubit: f64,
    pub readout: f64,
}

impl Default for NoiseRatios {
    fn default() -> Self {
        Self {
            two_qubit: 10.0,
            readout: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    #[serde(default)]
    pub ratios: NoiseRatios,
    /// Noise used by gap sweeps.
    #[serde(default = "SweepConfig::default_gap_noise")]
    pub gap_noise: NoiseSpec,
    #[serde(default)]
    pub mode: EvalMode,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// One repetition per seed; each draws its own ansatz, spectrum and
    /// starting points.
    #[serde(default = "SweepConfig::default_seeds")]
    pub seeds: Vec<u64>,
}

impl SweepConfig {
    fn default_gap_noise() -> NoiseSpec {
        NoiseSpec::depolarizing(1e-4, 1e-3, 1e-3)
    }

    fn default_seeds() -> Vec<u64> {
        vec![0, 1, 2]
    }

    pub fn rate(values: Vec<f64>) -> Self {
        Self {
            variable: SweepVariable::Rate,
            values,
            ratios: NoiseRatios::default(),
            gap_noise: Self::default_gap_noise(),
            mode: EvalMode::Exact,
            optimizer: OptimizerConfig::default(),
            seeds: Self::default_seeds(),
        }
    }

    pub fn gap(values: Vec<f64>) -> Self {
        Self {
            variable: SweepVariable::Gap,
            ..Self::rate(values)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("sweep needs at least one value and one seed".into()));
        }
        if self.values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Config("sweep values must be finite and non-negative".into()));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        if self.variable == SweepVariable::Gap && self.values[0] <= 0.0 {
            return Err(Error::Config("gaps must be positive".into()));
        }
        Ok(())
    }

    fn noise_for(&self, value: f64) -> Result<NoiseSpec> {
        let spec = match self.variable {
            SweepVariable::Rate => NoiseSpec {
                param_variance: 0.0,
                ..NoiseSpec::depolarizing(value, self.ratios.two_qubit * value, self.ratios.readout * value)
            },
            SweepVariable::Gap => self.gap_noise,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub sweep_value: f64,
    pub seed: u64,
    pub epsilon: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "Rmax")]
    pub rmax: f64,
    pub rough_lower: f64,
    pub rough_upper: f64,
    pub thm1_leading: f64,
    pub thm1_remainder: f64,
    #[serde(rename = "C_noisy_opt")]
    pub c_noisy_opt: f64,
    #[serde(rename = "C_noiseless_opt")]
    pub c_noiseless_opt: f64,
    pub evals: u64,
    pub wall_ms: u64,
    pub total_variance: f64,
    pub thm2_lower: Option<f64>,
    pub thm2_upper: Option<f64>,
    pub std_error: f64,
    pub grad_norm: f64,
    pub converged: bool,
    pub theta_star: Vec<f64>,
    pub model: ToyModelSpec,
    pub error: Option<String>,
}

impl PointResult {
    pub fn bracketed(&self) -> bool {
        self.error.is_none() && self.rough_lower <= self.epsilon && self.epsilon <= self.rough_upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub failures: usize,
    pub bracketed: usize,
    /// Fit of mean `ln eps` against `ln value` (rate sweeps).
    pub log_log: Option<LinearFit>,
    /// Rank correlation between the sweep value and mean `eps`.
    pub spearman: Option<f64>,
    /// Largest ratio between `R1` and `sum sigma^2 / 4`, either way round.
    pub max_r1_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub spec: ToyModelSpec,
    pub config: SweepConfig,
    pub master_seed: u64,
    pub points: Vec<PointResult>,
    pub summary: SweepSummary,
}

/// Seeds of repetition `seed`: (model seed, optimizer seed).
fn derive_seeds(master: u64, seed: u64) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(seed);
    (rng.next_u64(), rng.next_u64())
}

fn run_point(
    base: &ToyModelSpec,
    config: &SweepConfig,
    master: u64,
    value: f64,
    seed: u64,
) -> Result<PointResult> {
    let start = Instant::now();
    let (model_seed, opt_seed) = derive_seeds(master, seed);
    let mut spec = base.reseeded(model_seed);
    if config.variable == SweepVariable::Gap {
        spec.e1 = spec.e0 + value;
    }
    let model = build_toy_hamiltonian(&spec)?;
    let cf = model.cost_function();
    let noisy = insert_noise(&model.circuit, &config.noise_for(value)?)?;
    let ev = NoisyEvaluator::new(cf.clone(), noisy.clone(), config.mode)?;
    let opt = optimize_noisy(&ev, &config.optimizer, opt_seed)?;
    let theta = opt.best.theta.clone();
    let noisy_value = ev.eval(&theta)?;
    let report = bound_report(&cf, &noisy, &theta, noisy_value.value)?;
    Ok(PointResult {
        sweep_value: value,
        seed,
        epsilon: report.epsilon,
        r1: report.r1,
        rmax: report.rmax,
        rough_lower: report.rough_lower,
        rough_upper: report.rough_upper,
        thm1_leading: report.leading,
        thm1_remainder: report.remainder_bound,
        c_noisy_opt: noisy_value.value,
        c_noiseless_opt: report.noiseless,
        evals: ev.evaluations(),
        wall_ms: start.elapsed().as_millis() as u64,
        total_variance: report.total_variance,
        thm2_lower: report.thm2_lower,
        thm2_upper: report.thm2_upper,
        std_error: noisy_value.std_error,
        grad_norm: opt.best.grad_norm,
        converged: opt.best.converged,
        theta_star: theta,
        model: spec,
        error: None,
    })
}

fn failed_point(base: &ToyModelSpec, value: f64, seed: u64, err: Error) -> PointResult {
    PointResult {
        sweep_value: value,
        seed,
        epsilon: f64::NAN,
        r1: f64::NAN,
        rmax: f64::NAN,
        rough_lower: f64::NAN,
        rough_upper: f64::NAN,
        thm1_leading: f64::NAN,
        thm1_remainder: f64::NAN,
        c_noisy_opt: f64::NAN,
        c_noiseless_opt: f64::NAN,
        evals: 0,
        wall_ms: 0,
        total_variance: f64::NAN,
        thm2_lower: None,
        thm2_upper: None,
        std_error: f64::NAN,
        grad_norm: f64::NAN,
        converged: false,
        theta_star: Vec::new(),
        model: *base,
        error: Some(err.to_string()),
    }
}

fn summarize(config: &SweepConfig, points: &[PointResult]) -> SweepSummary {
    let ok: Vec<&PointResult> = points.iter().filter(|p| p.error.is_none()).collect();
    let mut xs = Vec::new();
    let mut means = Vec::new();
    for &v in &config.values {
        let at: Vec<f64> = ok.iter().filter(|p| p.sweep_value == v).map(|p| p.epsilon).collect();
        if !at.is_empty() {
            xs.push(v);
            means.push(at.iter().sum::<f64>() / at.len() as f64);
        }
    }
    let max_r1_ratio = ok
        .iter()
        .filter(|p| p.total_variance > 0.0 && p.r1 > 0.0)
        .map(|p| {
            let ratio = p.r1 / (p.total_variance / 4.0);
            ratio.max(1.0 / ratio)
        })
        .reduce(f64::max);
    SweepSummary {
        points: points.len(),
        failures: points.len() - ok.len(),
        bracketed: ok.iter().filter(|p| p.bracketed()).count(),
        log_log: match config.variable {
            SweepVariable::Rate => log_log_fit(&xs, &means),
            SweepVariable::Gap => None,
        },
        spearman: spearman(&xs, &means),
        max_r1_ratio,
    }
}

/// Optimizes the noisy toy model at every (value, seed) pair. Points are
/// independent and run concurrently; the record is ordered by value, then
/// seed. A failing point is recorded and the sweep continues.
pub fn run_sweep(spec: &ToyModelSpec, config: &SweepConfig, master_seed: u64) -> Result<RunRecord> {
    spec.validate()?;
    config.validate()?;
    let jobs: Vec<(f64, u64)> = config
        .values
        .iter()
        .flat_map(|&v| config.seeds.iter().map(move |&s| (v, s)))
        .collect();
    let points: Vec<PointResult> = jobs
        .par_iter()
        .map(|&(v, s)| {
            run_point(spec, config, master_seed, v, s).unwrap_or_else(|e| {
                log::warn!("sweep point {v} (seed {s}) failed: {e}");
                failed_point(spec, v, s, e)
            })
        })
        .collect();
    let summary = summarize(config, &points);
    Ok(RunRecord {
        spec: *spec,
        config: config.clone(),
        master_seed,
        points,
        summary,
    })
}

pub const CSV_COLUMNS: [&str; 13] = [
    "sweep_value",
    "seed",
    "epsilon",
    "R1",
    "Rmax",
    "rough_lower",
    "rough_upper",
    "thm1_leading",
    "thm1_remainder",
    "C_noisy_opt",
    "C_noiseless_opt",
    "evals",
    "wall_ms",
];

impl RunRecord {
    /// One row per (value, seed) with the columns of [`CSV_COLUMNS`].
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for p in &self.points {
            w.write_record([
                p.sweep_value.to_string(),
                p.seed.to_string(),
                p.epsilon.to_string(),
                p.r1.to_string(),
                p.rmax.to_string(),
                p.rough_lower.to_string(),
                p.rough_upper.to_string(),
                p.thm1_leading.to_string(),
                p.thm1_remainder.to_string(),
                p.c_noisy_opt.to_string(),
                p.c_noiseless_opt.to_string(),
                p.evals.to_string(),
                p.wall_ms.to_string(),
            ])?;
        }
        w.flush()
    }
}
