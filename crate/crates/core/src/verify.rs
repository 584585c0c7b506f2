//! Transfer-matrix checks of the channel correspondences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{
    ptm, ptm_of_sequence, variance_of_stochastic, Channel, DepolarizingChannel, GaussianRotationChannel,
    StochasticPauliChannel,
};
use crate::error::Result;
use crate::pauli::PauliString;

pub const DEPOLARIZING_RATES: [f64; 3] = [1e-4, 1e-2, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random cases in the stochastic/Gaussian suite.
    pub cases: usize,
    pub tolerance: f64,
    /// Multiplies every Gaussian variance; anything but 1 should fail.
    pub variance_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            cases: 200,
            tolerance: 1e-10,
            variance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

fn suite(name: &str, deviations: &[f64], tol: f64) -> SuiteReport {
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    SuiteReport {
        name: name.into(),
        cases: deviations.len(),
        max_deviation,
        passed: deviations.iter().all(|d| *d < tol),
    }
}

/// Stochastic Pauli channel against the Gaussian rotation channel of the
/// matching variance, on random generators of one or two qubits.
pub fn stochastic_gaussian_deviations(opts: &VerifyOptions) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.cases)
        .map(|_| {
            let k = rng.random_range(1..=2);
            let index = rng.random_range(1..1usize << (2 * k));
            let generator = PauliString::from_index(k, index);
            let p = rng.random_range(0.0..0.45);
            let sigma2 = variance_of_stochastic(p)? * opts.variance_scale;
            let st = ptm(&Channel::Stochastic(StochasticPauliChannel::new(generator.clone(), p)?))?;
            let ga = ptm(&Channel::Gaussian(GaussianRotationChannel::new(generator, sigma2)?))?;
            Ok(st.max_abs_diff(&ga))
        })
        .collect()
}

/// Depolarizing channel against its composed Gaussian decomposition.
pub fn depolarizing_deviation(k: usize, q: f64, variance_scale: f64) -> Result<f64> {
    let dep = DepolarizingChannel::new((0..k).collect(), q)?;
    let parts: Vec<Channel> = dep
        .decompose()
        .into_iter()
        .map(|g| GaussianRotationChannel::new(g.generator, g.sigma2 * variance_scale).map(Channel::Gaussian))
        .collect::<Result<_>>()?;
    let composed = ptm_of_sequence(k, &parts)?;
    Ok(composed.max_abs_diff(&ptm(&Channel::Depolarizing(dep))?))
}

pub fn verify_channels(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut suites = vec![suite(
        "stochastic_gaussian",
        &stochastic_gaussian_deviations(opts)?,
        opts.tolerance,
    )];
    for k in 1..=2 {
        let devs: Vec<f64> = DEPOLARIZING_RATES
            .iter()
            .map(|&q| depolarizing_deviation(k, q, opts.variance_scale))
            .collect::<Result<_>>()?;
        suites.push(suite(&format!("depolarizing_k{k}"), &devs, opts.tolerance));
    }
    Ok(VerifyReport { options: *opts, suites })
}
