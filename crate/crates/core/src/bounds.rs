//! Analytic estimates of the noise-induced cost deviation
//! `eps(theta) = C_noisy(theta) - C(theta)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::variance_of_stochastic;
use crate::cost::{gradient, second_derivative, second_derivative_slot, shifted, CostFunction};
use crate::error::{Error, Result};
use crate::noise::{ChannelOrigin, NoiseSlot, NoisyCircuit, SlotId};

/// Ground-gap tolerance below which the ground space counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumInfo {
    pub e0: f64,
    pub e1: f64,
    pub emax: f64,
    /// `(E_{0,l}, E_{max,l})` for every cost term.
    pub terms: Vec<(f64, f64)>,
}

impl SpectrumInfo {
    pub fn new(e0: f64, e1: f64, emax: f64) -> Result<Self> {
        if !(e0 <= e1 && e1 <= emax) || !(e0.is_finite() && emax.is_finite()) {
            return Err(Error::InvalidSpectrum(format!(
                "need E0 <= E1 <= Emax, got {e0}, {e1}, {emax}"
            )));
        }
        Ok(Self {
            e0,
            e1,
            emax,
            terms: vec![(e0, emax)],
        })
    }

    /// Spectrum of `H = sum_l H_l`; per-term extremes are kept separately.
    pub fn from_cost(cf: &CostFunction) -> Result<Self> {
        let terms: Vec<(f64, f64)> = cf
            .terms()
            .iter()
            .map(|t| (t.observable.min_eigenvalue(), t.observable.max_eigenvalue()))
            .collect();
        let eig = if cf.terms().len() == 1 {
            cf.terms()[0].observable.eigenvalues()
        } else {
            let dim = 1usize << cf.n_qubits();
            let total = cf
                .terms()
                .iter()
                .fold(DMatrix::<Complex64>::zeros(dim, dim), |acc, t| acc + t.observable.to_dmatrix());
            let mut e: Vec<f64> = total.symmetric_eigenvalues().iter().cloned().collect();
            e.sort_by(f64::total_cmp);
            e
        };
        let e1 = if eig.len() > 1 { eig[1] } else { eig[0] };
        let mut info = Self::new(eig[0], e1, eig[eig.len() - 1])?;
        info.terms = terms;
        Ok(info)
    }

    pub fn gap(&self) -> f64 {
        self.e1 - self.e0
    }

    pub fn width(&self) -> f64 {
        self.emax - self.e0
    }

    /// `sum_l (E_{max,l} - E_{0,l})`.
    pub fn term_width(&self) -> f64 {
        self.terms.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn check_nondegenerate(&self) -> Result<()> {
        if self.gap() < DEGENERACY_TOL {
            return Err(Error::DegenerateGround(self.gap()));
        }
        Ok(())
    }
}

/// Leading term of the deviation and the bound on what it leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadingError {
    pub leading: f64,
    pub remainder_bound: f64,
}

fn total_variance(slots: &[NoiseSlot]) -> Result<f64> {
    slots.iter().try_fold(0.0, |acc, s| {
        if s.sigma2 < 0.0 || s.sigma2.is_nan() {
            return Err(Error::NegativeVariance(s.sigma2));
        }
        Ok(acc + s.sigma2)
    })
}

/// `leading = 1/2 sum_i C_ii sigma_i^2`,
/// `remainder_bound = sum_l (E_{max,l} - E_{0,l}) / 16 (sum_i sigma_i^2)^2`.
pub fn leading_error(
    cf: &CostFunction,
    noisy: &NoisyCircuit,
    theta: &[f64],
    slots: &[NoiseSlot],
) -> Result<LeadingError> {
    let total = total_variance(slots)?;
    let mut leading = 0.0;
    for s in slots.iter().filter(|s| s.sigma2 > 0.0) {
        leading += 0.5 * second_derivative_slot(cf, noisy, theta, s.id)? * s.sigma2;
    }
    Ok(LeadingError {
        leading,
        remainder_bound: cf.spectral_width() / 16.0 * total * total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMapping {
    /// `sigma^2 = -2 ln(1 - 2p)`.
    #[default]
    Exact,
    /// `sigma^2 = 4p`.
    FourP,
}

impl VarianceMapping {
    pub fn variance(self, p: f64) -> Result<f64> {
        match self {
            VarianceMapping::Exact => variance_of_stochastic(p),
            VarianceMapping::FourP => {
                variance_of_stochastic(p)?;
                Ok(4.0 * p)
            }
        }
    }
}

/// Noise slots built from per-channel probabilities (one per registry entry);
/// merged channels fold into their real slot. Parameter fluctuations keep
/// their Gaussian variance.
pub fn stochastic_slots(
    noisy: &NoisyCircuit,
    probabilities: &[f64],
    mapping: VarianceMapping,
) -> Result<Vec<NoiseSlot>> {
    let entries = noisy.registry().entries();
    if probabilities.len() != entries.len() {
        return Err(Error::ParameterLength {
            expected: entries.len(),
            actual: probabilities.len(),
        });
    }
    let mut real = vec![0.0; noisy.n_params()];
    let mut virt = Vec::new();
    for (j, (e, &p)) in entries.iter().zip(probabilities).enumerate() {
        let sigma2 = match e.origin {
            ChannelOrigin::Parameter { .. } => e.sigma2,
            _ => mapping.variance(p)?,
        };
        match e.merged {
            Some(slot) => real[slot] += sigma2,
            None => virt.push(NoiseSlot {
                id: SlotId::Virtual(j),
                sigma2,
            }),
        }
    }
    Ok(real
        .into_iter()
        .enumerate()
        .filter(|(_, s)| *s > 0.0)
        .map(|(i, sigma2)| NoiseSlot {
            id: SlotId::Real(i),
            sigma2,
        })
        .chain(virt)
        .collect())
}

/// Leading-error estimate for stochastic Pauli channels with probabilities
/// `p_j`, using either the exact variance map or the small-`p` form `4 p_j`.
pub fn leading_error_stochastic(
    cf: &CostFunction,
    noisy: &NoisyCircuit,
    theta: &[f64],
    probabilities: &[f64],
    mapping: VarianceMapping,
) -> Result<LeadingError> {
    let slots = stochastic_slots(noisy, probabilities, mapping)?;
    leading_error(cf, noisy, theta, &slots)
}

/// Fubini-Study diagonal for a real or virtual slot.
pub fn fubini_slot(cf: &CostFunction, noisy: &NoisyCircuit, theta: &[f64], slot: SlotId) -> Result<f64> {
    let input = cf.common_input()?;
    let phi = noisy.run_pure(theta, &[], input)?;
    let (t, v) = shifted(theta, noisy.n_virtual(), slot, PI)?;
    let phi_i = noisy.run_pure(&t, &v, input)?;
    Ok((1.0 - phi_i.fidelity(&phi)) / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm2Bounds {
    pub lower: f64,
    pub upper: f64,
    /// `(E1 - E0) sum G sigma^2` and `(Emax - E0) sum G sigma^2`, the
    /// values left when the noiseless precision and the quadratic terms are
    /// dropped.
    pub simplified_lower: f64,
    pub simplified_upper: f64,
}

/// Bounds from the ground gap, the spectral width and the metric diagonal.
pub fn thm2_bounds(
    cf: &CostFunction,
    noisy: &NoisyCircuit,
    theta: &[f64],
    spectrum: &SpectrumInfo,
    slots: &[NoiseSlot],
) -> Result<Thm2Bounds> {
    spectrum.check_nondegenerate()?;
    cf.common_input()?;
    let total = total_variance(slots)?;
    let mut g_sum = 0.0;
    for s in slots.iter().filter(|s| s.sigma2 > 0.0) {
        g_sum += fubini_slot(cf, noisy, theta, s.id)? * s.sigma2;
    }
    let delta = (cf.eval(theta)? - spectrum.e0).max(0.0);
    let gap = spectrum.gap();
    let width = spectrum.width();
    let quad = width / 16.0 * total * total;
    Ok(Thm2Bounds {
        lower: gap * g_sum - ((gap * delta).sqrt() + 0.25 * delta) * total - quad,
        upper: width * g_sum + ((width * delta).sqrt() - 0.25 * delta) * total + quad,
        simplified_lower: gap * g_sum,
        simplified_upper: width * g_sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoughBounds {
    pub lower: f64,
    pub upper: f64,
    /// The weaker upper form in terms of the operator norm of `H`.
    pub upper_norm: f64,
}

/// Spectrum-only estimates obtained by setting every metric entry to 1/4.
pub fn rough_bounds(spectrum: &SpectrumInfo, total_variance: f64) -> Result<RoughBounds> {
    if total_variance < 0.0 || total_variance.is_nan() {
        return Err(Error::NegativeVariance(total_variance));
    }
    let s = total_variance;
    let norm = spectrum.e0.abs().max(spectrum.emax.abs());
    Ok(RoughBounds {
        lower: spectrum.gap() / 4.0 * s - spectrum.width() / 16.0 * s * s,
        upper: spectrum.width() * (s / 4.0 + s * s / 16.0),
        upper_norm: norm * (s / 2.0 + s * s / 8.0),
    })
}

/// Bounds on the second derivative along real parameter `i`.
pub fn lemma2_bounds(cf: &CostFunction, theta: &[f64], i: usize, spectrum: &SpectrumInfo) -> Result<(f64, f64)> {
    spectrum.check_nondegenerate()?;
    let g = crate::cost::fubini_diag(cf, theta, i)?;
    let delta = (cf.eval(theta)? - spectrum.e0).max(0.0);
    let gap = spectrum.gap();
    let width = spectrum.width();
    Ok((
        2.0 * gap * g - 0.5 * delta - (gap * delta).sqrt(),
        2.0 * width * g - 0.5 * delta + (width * delta).sqrt(),
    ))
}

/// Bounds on the infidelity `1 - <psi_0|rho|psi_0>` of a state with energy
/// `tr(rho H)`.
pub fn fidelity_bounds(energy: f64, spectrum: &SpectrumInfo) -> Result<(f64, f64)> {
    spectrum.check_nondegenerate()?;
    let slack = 1e-12 * spectrum.width().max(1.0);
    if energy < spectrum.e0 - slack || energy > spectrum.emax + slack {
        return Err(Error::EnergyOutOfRange {
            energy,
            e0: spectrum.e0,
            emax: spectrum.emax,
        });
    }
    let d = (energy - spectrum.e0).max(0.0);
    Ok((d / spectrum.width(), d / spectrum.gap()))
}

/// `(R1, Rmax) = ((C - E0)/(E1 - E0), (C - E0)/(Emax - E0))`.
pub fn relative_errors(noisy_value: f64, spectrum: &SpectrumInfo) -> Result<(f64, f64)> {
    spectrum.check_nondegenerate()?;
    let d = noisy_value - spectrum.e0;
    Ok((d / spectrum.gap(), d / spectrum.width()))
}

/// Order-of-magnitude error rates (all constants set to 1) for a target
/// precision `eps`, `n` qubits, `m` gates and spectral width `O(n^r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingEstimate {
    /// Rate that suffices without mitigation: `eps / (n^r M)`.
    pub sufficient: f64,
    /// Rate that suffices with leading-order mitigation: `sqrt(eps) / (n^{r/2} M)`.
    pub sufficient_mitigated: f64,
    /// Rate below which the target cannot be reached: `eps / M`.
    pub necessary: f64,
    pub order_of_magnitude_only: bool,
}

pub fn scaling_helpers(n: f64, m: f64, r: f64, eps: f64) -> Result<ScalingEstimate> {
    for (name, v) in [("n", n), ("M", m), ("eps", eps)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("{name} must be positive, got {v}")));
        }
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Config(format!("r must be non-negative, got {r}")));
    }
    Ok(ScalingEstimate {
        sufficient: eps / (n.powf(r) * m),
        sufficient_mitigated: eps.sqrt() / (n.powf(r / 2.0) * m),
        necessary: eps / m,
        order_of_magnitude_only: true,
    })
}

/// Order-of-magnitude precision reached at error rate `q`; inverse of
/// [`scaling_helpers`].
pub fn precision_at_rate(n: f64, m: f64, r: f64, q: f64) -> Result<ScalingEstimate> {
    let s = scaling_helpers(n, m, r, 1.0)?;
    Ok(ScalingEstimate {
        sufficient: q / s.sufficient,
        sufficient_mitigated: (q / s.sufficient_mitigated).powi(2),
        necessary: q / s.necessary,
        order_of_magnitude_only: true,
    })
}

/// Sum of the diagonal second derivatives at a stationary point; equals the
/// Hessian trace norm there when the Hessian is positive semidefinite.
pub fn hessian_trace_diag(cf: &CostFunction, theta: &[f64], grad_tol: f64) -> Result<f64> {
    let g = gradient(cf, theta)?;
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > grad_tol {
        return Err(Error::NotStationary(norm));
    }
    (0..cf.n_params()).try_fold(0.0, |acc, i| Ok(acc + second_derivative(cf, theta, i)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub noiseless: f64,
    pub noisy: f64,
    pub epsilon: f64,
    pub total_variance: f64,
    pub leading: f64,
    pub remainder_bound: f64,
    pub thm2_lower: Option<f64>,
    pub thm2_upper: Option<f64>,
    pub thm2_simplified_lower: Option<f64>,
    pub thm2_simplified_upper: Option<f64>,
    pub rough_lower: f64,
    pub rough_upper: f64,
    pub rough_upper_norm: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "Rmax")]
    pub rmax: f64,
    pub delta: f64,
}

/// All estimates at `theta` for the noise in `noisy`, given the measured
/// noisy cost.
pub fn bound_report(
    cf: &CostFunction,
    noisy: &NoisyCircuit,
    theta: &[f64],
    noisy_value: f64,
) -> Result<BoundReport> {
    let spectrum = SpectrumInfo::from_cost(cf)?;
    let slots = noisy.noise_slots();
    let total = total_variance(&slots)?;
    let noiseless = cf.eval(theta)?;
    let lead = leading_error(cf, noisy, theta, &slots)?;
    let thm2 = match thm2_bounds(cf, noisy, theta, &spectrum, &slots) {
        Ok(b) => Some(b),
        Err(Error::DegenerateGround(_) | Error::MultipleInputStates) => None,
        Err(e) => return Err(e),
    };
    let rough = rough_bounds(&spectrum, total)?;
    let (r1, rmax) = match relative_errors(noisy_value, &spectrum) {
        Ok(r) => r,
        Err(Error::DegenerateGround(_)) => (f64::NAN, (noisy_value - spectrum.e0) / spectrum.width()),
        Err(e) => return Err(e),
    };
    Ok(BoundReport {
        noiseless,
        noisy: noisy_value,
        epsilon: noisy_value - noiseless,
        total_variance: total,
        leading: lead.leading,
        remainder_bound: lead.remainder_bound,
        thm2_lower: thm2.map(|b| b.lower),
        thm2_upper: thm2.map(|b| b.upper),
        thm2_simplified_lower: thm2.map(|b| b.simplified_lower),
        thm2_simplified_upper: thm2.map(|b| b.simplified_upper),
        rough_lower: rough.lower,
        rough_upper: rough.upper,
        rough_upper_norm: rough.upper_norm,
        r1,
        rmax,
        delta: noiseless - spectrum.e0,
    })
}
