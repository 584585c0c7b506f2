//! Noisy cost evaluation, exactly through density matrices or by sampling
//! stochastic Pauli trajectories.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{shifted, CostFunction};
use crate::density::{DensityMatrix, DEFAULT_EXACT_QUBIT_LIMIT};
use crate::error::{Error, Result};
use crate::noise::{NoisyCircuit, SlotId};

/// Trajectories per work unit; partial sums are merged in chunk order so the
/// result does not depend on the number of worker threads.
const TRAJECTORY_CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EvalMode {
    #[default]
    Exact,
    Trajectory { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug)]
pub struct NoisyEvaluator {
    cost: CostFunction,
    noisy: NoisyCircuit,
    mode: EvalMode,
    qubit_limit: usize,
    evaluations: AtomicU64,
}

impl Clone for NoisyEvaluator {
    fn clone(&self) -> Self {
        Self {
            cost: self.cost.clone(),
            noisy: self.noisy.clone(),
            mode: self.mode,
            qubit_limit: self.qubit_limit,
            evaluations: AtomicU64::new(self.evaluations()),
        }
    }
}

impl NoisyEvaluator {
    pub fn new(cost: CostFunction, noisy: NoisyCircuit, mode: EvalMode) -> Result<Self> {
        cost.check_noisy(&noisy)?;
        if let EvalMode::Trajectory { samples: 0, .. } = mode {
            return Err(Error::Config("trajectory mode needs at least one sample".into()));
        }
        Ok(Self {
            cost,
            noisy,
            mode,
            qubit_limit: DEFAULT_EXACT_QUBIT_LIMIT,
            evaluations: AtomicU64::new(0),
        })
    }

    pub fn with_qubit_limit(mut self, limit: usize) -> Self {
        self.qubit_limit = limit;
        self
    }

    pub fn cost(&self) -> &CostFunction {
        &self.cost
    }

    pub fn noisy_circuit(&self) -> &NoisyCircuit {
        &self.noisy
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn n_params(&self) -> usize {
        self.cost.n_params()
    }

    /// Number of noisy cost-function calls so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn reset_evaluations(&self) {
        self.evaluations.store(0, Ordering::Relaxed);
    }

    pub fn eval(&self, theta: &[f64]) -> Result<Estimate> {
        self.eval_virtual(theta, &[])
    }

    /// Noisy cost with virtual rotations set to `virt` (empty means zero).
    pub fn eval_virtual(&self, theta: &[f64], virt: &[f64]) -> Result<Estimate> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        match self.mode {
            EvalMode::Exact => self.eval_exact(theta, virt).map(|value| Estimate {
                value,
                std_error: 0.0,
            }),
            EvalMode::Trajectory { samples, seed } => self.eval_trajectories(theta, virt, samples, seed),
        }
    }

    fn eval_exact(&self, theta: &[f64], virt: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        let mut cached: Option<(usize, DensityMatrix)> = None;
        for (l, t) in self.cost.terms().iter().enumerate() {
            let reuse = matches!(&cached, Some((k, _)) if self.cost.terms()[*k].input == t.input);
            if !reuse {
                let rho = DensityMatrix::from_pure(&t.input);
                cached = Some((l, self.noisy.evolve_density(theta, virt, &rho, self.qubit_limit)?));
            }
            let rho = &cached.as_ref().expect("set above").1;
            total += t.observable.expectation_density(rho)?;
        }
        if !total.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(total)
    }

    fn eval_trajectories(&self, theta: &[f64], virt: &[f64], samples: usize, seed: u64) -> Result<Estimate> {
        self.cost.circuit().check_params(theta)?;
        self.noisy.check_virtual(virt)?;
        let chunks = samples.div_ceil(TRAJECTORY_CHUNK);
        let partial: Vec<(f64, f64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                let end = ((c + 1) * TRAJECTORY_CHUNK).min(samples);
                for t in c * TRAJECTORY_CHUNK..end {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(t as u64);
                    let mut x = 0.0;
                    for term in self.cost.terms() {
                        let psi = self.noisy.sample_trajectory(theta, virt, &term.input, &mut rng)?;
                        x += term.observable.expectation(&psi)?;
                    }
                    sum += x;
                    sum_sq += x * x;
                }
                Ok((sum, sum_sq))
            })
            .collect::<Result<_>>()?;
        let (sum, sum_sq) = partial
            .iter()
            .fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
        let n = samples as f64;
        let mean = sum / n;
        let var = if samples > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        if !mean.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Estimate {
            value: mean,
            std_error: (var / n).sqrt(),
        })
    }

    /// Noisy cost at `theta` shifted by `amount` along `slot`.
    pub fn eval_shifted(&self, theta: &[f64], slot: SlotId, amount: f64) -> Result<Estimate> {
        let (t, v) = shifted(theta, self.noisy.n_virtual(), slot, amount)?;
        self.eval_virtual(&t, &v)
    }

    /// `h_i = (C_noisy(theta + pi e_i) - C_noisy(theta)) / 2`; pass the value
    /// at `theta` if already known.
    pub fn second_derivative(&self, theta: &[f64], slot: SlotId, base: Option<f64>) -> Result<f64> {
        let base = match base {
            Some(b) => b,
            None => self.eval(theta)?.value,
        };
        Ok(0.5 * (self.eval_shifted(theta, slot, PI)?.value - base))
    }

    /// Parameter-shift gradient of the noisy cost. Channels do not depend on
    /// the parameters, so each cross-section stays sinusoidal.
    pub fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        (0..theta.len())
            .map(|i| {
                let plus = self.eval_shifted(theta, SlotId::Real(i), FRAC_PI_2)?.value;
                let minus = self.eval_shifted(theta, SlotId::Real(i), -FRAC_PI_2)?.value;
                Ok(0.5 * (plus - minus))
            })
            .collect()
    }
}

pub fn eval_noisy_cost(ev: &NoisyEvaluator, theta: &[f64]) -> Result<Estimate> {
    ev.eval(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;
    use crate::noise::{insert_noise, ChannelOrigin, ChannelSpec, NoiseSpec, Placement};
    use crate::observable::Observable;
    use crate::state::StateVector;
    use crate::testutil::layered_circuit;
    use rand::Rng;

    fn rx_gaussian(sigma2: f64) -> NoisyEvaluator {
        let mut c = Circuit::new(1);
        c.push_rotation("X".parse().unwrap()).unwrap();
        let cf = CostFunction::single(c.clone(), Observable::pauli(&"Z".parse().unwrap()), StateVector::zero(1)).unwrap();
        let nc = NoisyCircuit::with_channels(
            c,
            vec![ChannelSpec {
                placement: Placement::AfterGate(0),
                generator: "X".parse().unwrap(),
                sigma2,
                origin: ChannelOrigin::Custom,
            }],
        )
        .unwrap();
        NoisyEvaluator::new(cf, nc, EvalMode::Exact).unwrap()
    }

    #[test]
    fn gaussian_cosine_closed_form() {
        for &s in &[1e-3, 0.1, 0.5, 2.0] {
            let ev = rx_gaussian(s);
            for &t in &[0.0, 0.4, 2.0] {
                let v = ev.eval(&[t]).unwrap().value;
                assert!((v - (-s / 2.0).exp() * t.cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_noise_matches_noiseless() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = layered_circuit(3, 2);
        let cf = CostFunction::single(c.clone(), Observable::pauli(&"ZXY".parse().unwrap()), StateVector::zero(3)).unwrap();
        let nc = insert_noise(&c, &NoiseSpec::none()).unwrap();
        let ev = NoisyEvaluator::new(cf.clone(), nc, EvalMode::Exact).unwrap();
        let theta: Vec<f64> = (0..c.n_params()).map(|_| rng.random_range(0.0..6.0)).collect();
        assert!((ev.eval(&theta).unwrap().value - cf.eval(&theta).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn trajectory_is_reproducible_and_unbiased() {
        let c = layered_circuit(3, 2);
        let cf = CostFunction::single(c.clone(), Observable::pauli(&"ZZI".parse().unwrap()), StateVector::zero(3)).unwrap();
        let nc = insert_noise(&c, &NoiseSpec::depolarizing(0.02, 0.05, 0.03)).unwrap();
        let theta: Vec<f64> = (0..c.n_params()).map(|i| 0.3 + 0.7 * i as f64).collect();
        let exact = NoisyEvaluator::new(cf.clone(), nc.clone(), EvalMode::Exact).unwrap();
        let mode = EvalMode::Trajectory { samples: 20000, seed: 9 };
        let traj = NoisyEvaluator::new(cf, nc, mode).unwrap();
        let a = traj.eval(&theta).unwrap();
        let one_thread = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = one_thread.install(|| traj.eval(&theta).unwrap());
        assert_eq!(a, b);
        let e = exact.eval(&theta).unwrap().value;
        assert!((a.value - e).abs() < 4.0 * a.std_error, "{a:?} vs {e}");
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn noisy_gradient_matches_finite_difference() {
        let c = layered_circuit(2, 2);
        let cf = CostFunction::single(c.clone(), Observable::pauli(&"XZ".parse().unwrap()), StateVector::zero(2)).unwrap();
        let spec = NoiseSpec {
            param_variance: 0.05,
            ..NoiseSpec::depolarizing(0.01, 0.03, 0.02)
        };
        let ev = NoisyEvaluator::new(cf, insert_noise(&c, &spec).unwrap(), EvalMode::Exact).unwrap();
        let theta: Vec<f64> = (0..c.n_params()).map(|i| 0.5 + 1.1 * i as f64).collect();
        let g = ev.gradient(&theta).unwrap();
        for i in 0..theta.len() {
            let mut p = theta.clone();
            let mut m = theta.clone();
            p[i] += 1e-5;
            m[i] -= 1e-5;
            let fd = (ev.eval(&p).unwrap().value - ev.eval(&m).unwrap().value) / 2e-5;
            assert!((g[i] - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn commuting_channels_reorder_invariant() {
        let c = layered_circuit(2, 1);
        let cf = CostFunction::single(c.clone(), Observable::pauli(&"XY".parse().unwrap()), StateVector::zero(2)).unwrap();
        let mk = |gens: [&str; 2]| {
            let chans = gens
                .iter()
                .map(|g| ChannelSpec {
                    placement: Placement::AfterGate(1),
                    generator: g.parse().unwrap(),
                    sigma2: 0.2,
                    origin: ChannelOrigin::Custom,
                })
                .collect();
            let nc = NoisyCircuit::with_channels(c.clone(), chans).unwrap();
            NoisyEvaluator::new(cf.clone(), nc, EvalMode::Exact).unwrap()
        };
        let theta = [0.4, 1.9];
        let a = mk(["ZZ", "XX"]).eval(&theta).unwrap().value;
        let b = mk(["XX", "ZZ"]).eval(&theta).unwrap().value;
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn qubit_limit_enforced() {
        let c = layered_circuit(3, 1);
        let cf = CostFunction::single(c.clone(), Observable::pauli(&"ZII".parse().unwrap()), StateVector::zero(3)).unwrap();
        let ev = NoisyEvaluator::new(cf, insert_noise(&c, &NoiseSpec::none()).unwrap(), EvalMode::Exact)
            .unwrap()
            .with_qubit_limit(2);
        assert!(matches!(ev.eval(&[0.0; 3]), Err(Error::QubitLimit { .. })));
    }
}
