//! BFGS minimization with random restarts.

use std::cell::RefCell;
use std::rc::Rc;
use std::f64::consts::TAU;

use argmin::core::{CostFunction as ArgminCost, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::BFGS;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: u64,
    pub grad_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_iters: 500,
            grad_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeRun {
    pub initial: Vec<f64>,
    pub theta: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: u64,
    pub converged: bool,
    pub termination: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub best: OptimizeRun,
    pub runs: Vec<OptimizeRun>,
}

type BestPoint = Rc<RefCell<Option<(Vec<f64>, f64)>>>;

struct Problem<'a, F, G> {
    f: &'a F,
    g: &'a G,
    best: BestPoint,
}

impl<F, G> ArgminCost for Problem<'_, F, G>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Diverged.into());
        }
        let v = (self.f)(p)?;
        if !v.is_finite() {
            return Err(Error::NonFinite.into());
        }
        let mut best = self.best.borrow_mut();
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            *best = Some((p.clone(), v));
        }
        Ok(v)
    }
}

impl<F, G> Gradient for Problem<'_, F, G>
where
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Diverged.into());
        }
        Ok((self.g)(p)?)
    }
}

/// The line search proposed a non-finite point.
#[derive(Debug, thiserror::Error)]
#[error("line search left the finite domain")]
struct Diverged;

/// BFGS restarts from the best point after a failed line search.
const MAX_RESUMES: usize = 3;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One BFGS run from `x0`. A failed line search ends the run at the best
/// point seen so far.
pub fn minimize<F, G>(f: &F, g: &G, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizeRun>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let start = f(x0)?;
    if !start.is_finite() {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(OptimizeRun {
            initial: Vec::new(),
            theta: Vec::new(),
            value: start,
            grad_norm: 0.0,
            iterations: 0,
            converged: true,
            termination: "no parameters".into(),
        });
    }
    let best = Rc::new(RefCell::new(Some((x0.to_vec(), start))));
    let identity: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut theta = x0.to_vec();
    let mut iterations = 0;
    let mut termination = String::new();
    for _ in 0..=MAX_RESUMES {
        let problem = Problem {
            f,
            g,
            best: Rc::clone(&best),
        };
        let solver = BFGS::new(MoreThuenteLineSearch::new())
            .with_tolerance_grad(cfg.grad_tol)
            .map_err(|e| Error::Config(e.to_string()))?
            .with_tolerance_cost(0.0)
            .map_err(|e| Error::Config(e.to_string()))?;
        let budget = cfg.max_iters.saturating_sub(iterations);
        let outcome = Executor::new(problem, solver)
            .configure(|s| s.param(theta.clone()).inv_hessian(identity.clone()).max_iters(budget))
            .run();
        match outcome {
            Ok(res) => {
                let state = res.state();
                if let Some(p) = state.get_best_param() {
                    theta = p.clone();
                }
                iterations += state.get_iter();
                termination = state.get_termination_status().to_string();
                break;
            }
            Err(e) => {
                if let Some(err) = e.downcast_ref::<Error>() {
                    return Err(err.clone());
                }
                theta = best.borrow().clone().expect("seeded with x0").0;
                termination = format!("stopped: {e}");
                iterations += 1;
                if norm(&g(&theta)?) < cfg.grad_tol {
                    break;
                }
            }
        }
    }
    let value = f(&theta)?;
    let grad_norm = norm(&g(&theta)?);
    Ok(OptimizeRun {
        initial: x0.to_vec(),
        theta,
        value,
        grad_norm,
        iterations,
        converged: grad_norm < cfg.grad_tol,
        termination,
    })
}

/// Best of `cfg.restarts` runs from points drawn uniformly in `[0, 2 pi)`.
pub fn minimize_with_restarts<F, G, R>(
    f: &F,
    g: &G,
    n_params: usize,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
    G: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    R: Rng + ?Sized,
{
    if cfg.restarts == 0 {
        return Err(Error::Config("optimizer needs at least one restart".into()));
    }
    let starts: Vec<Vec<f64>> = (0..cfg.restarts)
        .map(|_| (0..n_params).map(|_| rng.random_range(0.0..TAU)).collect())
        .collect();
    let runs: Vec<OptimizeRun> = starts
        .par_iter()
        .map(|x0| minimize(f, g, x0, cfg))
        .collect::<Result<_>>()?;
    let best = runs
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one run")
        .clone();
    Ok(OptimizeResult { best, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn cosine_from_one() {
        let f = |x: &[f64]| Ok(x[0].cos());
        let g = |x: &[f64]| Ok(vec![-x[0].sin()]);
        let run = minimize(&f, &g, &[1.0], &OptimizerConfig::default()).unwrap();
        assert!((run.theta[0] - PI).abs() < 1e-6, "{run:?}");
        assert!(run.converged);
    }

    #[test]
    fn rosenbrock_like_quadratic() {
        let f = |x: &[f64]| Ok((x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + (x[0] * x[1]).cos());
        let g = |x: &[f64]| {
            Ok(vec![
                2.0 * (x[0] - 1.0) - x[1] * (x[0] * x[1]).sin(),
                20.0 * (x[1] + 2.0) - x[0] * (x[0] * x[1]).sin(),
            ])
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let res = minimize_with_restarts(&f, &g, 2, &OptimizerConfig::default(), &mut rng).unwrap();
        assert_eq!(res.runs.len(), 5);
        assert!(res.best.grad_norm < 1e-6);
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        let again = minimize_with_restarts(&f, &g, 2, &OptimizerConfig::default(), &mut rng2).unwrap();
        assert_eq!(res, again);
    }

    #[test]
    fn non_finite_cost_is_an_error() {
        let f = |_: &[f64]| Ok(f64::NAN);
        let g = |_: &[f64]| Ok(vec![0.0]);
        assert!(matches!(
            minimize(&f, &g, &[0.0], &OptimizerConfig::default()),
            Err(Error::NonFinite)
        ));
    }
}
