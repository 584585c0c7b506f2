//! Stochastic Pauli, Gaussian-rotation and depolarizing channels, the
//! variance/probability correspondences between them, and Pauli transfer
//! matrices.
//!
//! The simulator applies a Gaussian rotation channel through its equivalent
//! stochastic Pauli form. The transfer matrix of a Gaussian channel is instead
//! computed from its definition, a Gaussian average of rotation conjugations,
//! so the two can be checked against each other.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Largest channel width accepted by [`ptm`].
pub const PTM_MAX_QUBITS: usize = 3;

/// `sigma^2 = -2 log(1 - 2p)`, valid for `0 <= p < 1/2`.
pub fn variance_of_stochastic(p: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { p, max: 0.5 });
    }
    Ok(-2.0 * (-2.0 * p).ln_1p())
}

/// Inverse of [`variance_of_stochastic`]: `p = (1 - exp(-sigma^2 / 2)) / 2`.
pub fn stochastic_of_variance(sigma2: f64) -> Result<f64> {
    if sigma2 < 0.0 || sigma2.is_nan() {
        return Err(Error::NegativeVariance(sigma2));
    }
    Ok(-(-sigma2 / 2.0).exp_m1() / 2.0)
}

/// Upper limit (exclusive) of the `k`-qubit depolarizing probability.
pub fn depolarizing_max_probability(k: usize) -> f64 {
    let d2 = 4f64.powi(k as i32);
    (d2 - 1.0) / d2
}

/// Common Gaussian variance of the `4^k - 1` Pauli rotations making up a
/// `k`-qubit depolarizing channel:
/// `-(1 / 4^{k-1}) log(1 - 4^k q / (4^k - 1))`.
pub fn depolarizing_gaussian_variance(k: usize, q: f64) -> Result<f64> {
    let max = depolarizing_max_probability(k);
    if k == 0 || !(0.0..max).contains(&q) {
        return Err(Error::ProbabilityOutOfRange { p: q, max });
    }
    let d2 = 4f64.powi(k as i32);
    Ok(-(-d2 * q / (d2 - 1.0)).ln_1p() / 4f64.powi(k as i32 - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticPauliChannel {
    pub generator: PauliString,
    pub p: f64,
}

impl StochasticPauliChannel {
    pub fn new(generator: PauliString, p: f64) -> Result<Self> {
        variance_of_stochastic(p)?;
        Ok(Self { generator, p })
    }

    pub fn variance(&self) -> f64 {
        variance_of_stochastic(self.p).expect("validated on construction")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianRotationChannel {
    pub generator: PauliString,
    pub sigma2: f64,
}

impl GaussianRotationChannel {
    pub fn new(generator: PauliString, sigma2: f64) -> Result<Self> {
        stochastic_of_variance(sigma2)?;
        Ok(Self { generator, sigma2 })
    }

    /// The equivalent stochastic Pauli channel.
    pub fn to_stochastic(&self) -> StochasticPauliChannel {
        StochasticPauliChannel {
            generator: self.generator.clone(),
            p: stochastic_of_variance(self.sigma2).expect("validated on construction"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingChannel {
    pub targets: Vec<usize>,
    pub q: f64,
}

impl DepolarizingChannel {
    pub fn new(targets: Vec<usize>, q: f64) -> Result<Self> {
        depolarizing_gaussian_variance(targets.len(), q)?;
        Ok(Self { targets, q })
    }

    pub fn k(&self) -> usize {
        self.targets.len()
    }

    pub fn variance(&self) -> f64 {
        depolarizing_gaussian_variance(self.k(), self.q).expect("validated on construction")
    }

    /// One Gaussian rotation channel per non-identity Pauli string on the
    /// target qubits; generators are local to the targets.
    pub fn decompose(&self) -> Vec<GaussianRotationChannel> {
        let sigma2 = self.variance();
        PauliString::all_non_identity(self.k())
            .into_iter()
            .map(|generator| GaussianRotationChannel { generator, sigma2 })
            .collect()
    }
}

/// Channels on `k` qubits for which a transfer matrix can be computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Identity(usize),
    Stochastic(StochasticPauliChannel),
    Gaussian(GaussianRotationChannel),
    /// Acts on all `k` qubits of the local register; targets are ignored.
    Depolarizing(DepolarizingChannel),
}

impl Channel {
    pub fn num_qubits(&self) -> usize {
        match self {
            Channel::Identity(k) => *k,
            Channel::Stochastic(c) => c.generator.num_qubits(),
            Channel::Gaussian(c) => c.generator.num_qubits(),
            Channel::Depolarizing(c) => c.k(),
        }
    }

    /// Applies the channel to an arbitrary operator on `k` qubits.
    pub fn apply_to_operator(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        match self {
            Channel::Identity(_) => m.clone(),
            Channel::Stochastic(c) => {
                let a = dense(&c.generator);
                m * Complex64::new(1.0 - c.p, 0.0) + &a * m * &a * Complex64::new(c.p, 0.0)
            }
            Channel::Depolarizing(c) => {
                let k = c.k();
                let count = (1usize << (2 * k)) - 1;
                let mut acc = m * Complex64::new(1.0 - c.q, 0.0);
                let w = Complex64::new(c.q / count as f64, 0.0);
                for p in PauliString::all_non_identity(k) {
                    let a = dense(&p);
                    acc += &a * m * &a * w;
                }
                acc
            }
            Channel::Gaussian(c) => gaussian_average(&c.generator, c.sigma2, m),
        }
    }
}

fn dense(p: &PauliString) -> DMatrix<Complex64> {
    let dim = 1usize << p.num_qubits();
    DMatrix::from_row_slice(dim, dim, &p.to_matrix())
}

/// `int dDelta N(0, sigma^2) U_Delta m U_Delta^dagger` with
/// `U_Delta = cos(Delta/2) I - i sin(Delta/2) A`, by the trapezoid rule in
/// standardized units. The integrand is entire and Gaussian-damped, so the
/// rule converges geometrically in the node spacing.
fn gaussian_average(a: &PauliString, sigma2: f64, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    if sigma2 == 0.0 {
        return m.clone();
    }
    let sigma = sigma2.sqrt();
    let amat = dense(a);
    let dim = amat.nrows();
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let h = 0.125;
    // weights beyond 12 standard deviations are below 1e-31
    let half_width = 12.0;
    let nodes = (half_width / h) as i64;
    let norm = h / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    for j in -nodes..=nodes {
        let x = j as f64 * h;
        let w = norm * (-0.5 * x * x).exp();
        let delta = sigma * x;
        let (s, c) = (delta / 2.0).sin_cos();
        let u = &id * Complex64::new(c, 0.0) + &amat * Complex64::new(0.0, -s);
        acc += (&u * m * u.adjoint()) * Complex64::new(w, 0.0);
    }
    acc
}

/// Real `4^k x 4^k` matrix `R_ij = tr(P_i E(P_j)) / 2^k` in the Pauli basis
/// ordered by [`PauliString::from_index`] (`P_0 = I`).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTransferMatrix {
    k: usize,
    data: Vec<f64>,
}

impl PauliTransferMatrix {
    pub fn identity(k: usize) -> Self {
        let d = 1usize << (2 * k);
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        Self { k, data }
    }

    pub fn from_diagonal(k: usize, diag: &[f64]) -> Self {
        let d = 1usize << (2 * k);
        assert_eq!(diag.len(), d);
        let mut data = vec![0.0; d * d];
        for (i, v) in diag.iter().enumerate() {
            data[i * d + i] = *v;
        }
        Self { k, data }
    }

    pub fn num_qubits(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> usize {
        1usize << (2 * self.k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size() + j]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size()).map(|i| self.get(i, i)).collect()
    }

    /// `self` after `first`: the transfer matrix of `self ∘ first`.
    pub fn compose(&self, first: &PauliTransferMatrix) -> PauliTransferMatrix {
        assert_eq!(self.k, first.k);
        let d = self.size();
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for l in 0..d {
                let a = self.data[i * d + l];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * first.data[l * d + j];
                }
            }
        }
        PauliTransferMatrix { k: self.k, data }
    }

    pub fn max_abs_diff(&self, other: &PauliTransferMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let d = self.size();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    worst = worst.max(self.data[i * d + j].abs());
                }
            }
        }
        worst
    }
}

/// Transfer matrix by exhaustive action of the channel on the Pauli basis.
pub fn ptm(channel: &Channel) -> Result<PauliTransferMatrix> {
    let k = channel.num_qubits();
    if k > PTM_MAX_QUBITS {
        return Err(Error::PtmTooLarge(k));
    }
    let d = 1usize << (2 * k);
    let dim = 1usize << k;
    let basis: Vec<DMatrix<Complex64>> = (0..d)
        .map(|i| dense(&PauliString::from_index(k, i)))
        .collect();
    let mut data = vec![0.0; d * d];
    for j in 0..d {
        let out = channel.apply_to_operator(&basis[j]);
        for i in 0..d {
            // P_i is Hermitian, so tr(P_i X) = sum_rc P_i[r][c] X[c][r]
            let tr: Complex64 = (0..dim)
                .flat_map(|r| (0..dim).map(move |c| (r, c)))
                .map(|(r, c)| basis[i][(r, c)] * out[(c, r)])
                .sum();
            data[i * d + j] = tr.re / dim as f64;
        }
    }
    Ok(PauliTransferMatrix { k, data })
}

/// Transfer matrix of the composition of `channels`, applied in list order.
pub fn ptm_of_sequence(k: usize, channels: &[Channel]) -> Result<PauliTransferMatrix> {
    channels
        .iter()
        .try_fold(PauliTransferMatrix::identity(k), |acc, ch| {
            Ok(ptm(ch)?.compose(&acc))
        })
}
