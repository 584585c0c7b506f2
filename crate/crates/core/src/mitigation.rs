//! Leading-order error mitigation: subtract `1/2 sum_i h_i sigma_i^2`, where
//! `h_i` is the second derivative of the noisy cost along real or virtual
//! slot `i`, obtained from noisy evaluations at pi-shifted parameters.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{stochastic_slots, VarianceMapping};
use crate::error::Result;
use crate::evaluator::NoisyEvaluator;
use crate::noise::{NoiseSlot, SlotId};

/// Slots with a smaller variance are not shifted.
pub const MIN_SLOT_VARIANCE: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotContribution {
    pub slot: SlotId,
    pub h: f64,
    pub sigma2: f64,
    /// `h sigma^2 / 2`.
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitigationReport {
    pub raw_noisy: f64,
    pub mitigated: f64,
    pub contributions: Vec<SlotContribution>,
    /// Noisy cost-function calls used.
    pub evaluations: usize,
    /// Standard error of the raw value (zero in exact mode).
    pub raw_std_error: f64,
    /// Ceiling on the residual left after mitigation.
    pub remainder_bound: f64,
}

/// Mitigates with the evaluator's own noise slots.
pub fn mitigate(ev: &NoisyEvaluator, theta: &[f64]) -> Result<MitigationReport> {
    mitigate_slots(ev, theta, &ev.noisy_circuit().noise_slots())
}

/// Mitigates with variances derived from per-channel probabilities.
pub fn mitigate_stochastic(
    ev: &NoisyEvaluator,
    theta: &[f64],
    probabilities: &[f64],
    mapping: VarianceMapping,
) -> Result<MitigationReport> {
    let slots = stochastic_slots(ev.noisy_circuit(), probabilities, mapping)?;
    mitigate_slots(ev, theta, &slots)
}

pub fn mitigate_slots(ev: &NoisyEvaluator, theta: &[f64], slots: &[NoiseSlot]) -> Result<MitigationReport> {
    let base = ev.eval(theta)?;
    let active: Vec<&NoiseSlot> = slots.iter().filter(|s| s.sigma2 >= MIN_SLOT_VARIANCE).collect();
    let hs: Vec<f64> = active
        .par_iter()
        .map(|s| ev.second_derivative(theta, s.id, Some(base.value)))
        .collect::<Result<_>>()?;
    let contributions: Vec<SlotContribution> = active
        .iter()
        .zip(hs)
        .map(|(s, h)| SlotContribution {
            slot: s.id,
            h,
            sigma2: s.sigma2,
            term: 0.5 * h * s.sigma2,
        })
        .collect();
    let correction: f64 = contributions.iter().map(|c| c.term).sum();
    let total: f64 = slots.iter().map(|s| s.sigma2).sum();
    let remainder_bound = ev.cost().spectral_width() / 16.0 * total * total;
    Ok(MitigationReport {
        raw_noisy: base.value,
        mitigated: base.value - correction,
        evaluations: 1 + contributions.len(),
        contributions,
        raw_std_error: base.std_error,
        remainder_bound,
    })
}
