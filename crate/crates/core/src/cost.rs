//! Noiseless cost `C(theta) = sum_l <phi_l| U^dag H_l U |phi_l>` and its
//! parameter-shift derivatives.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::noise::{NoisyCircuit, SlotId};
use crate::observable::Observable;
use crate::state::{run_circuit, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct CostTerm {
    pub observable: Observable,
    pub input: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction {
    circuit: Circuit,
    terms: Vec<CostTerm>,
}

impl CostFunction {
    pub fn new(circuit: Circuit, terms: Vec<CostTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidCircuit("cost function needs at least one term".into()));
        }
        let n = circuit.n_qubits();
        for t in &terms {
            for m in [t.observable.n_qubits(), t.input.n_qubits()] {
                if m != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: m,
                    });
                }
            }
        }
        Ok(Self { circuit, terms })
    }

    pub fn single(circuit: Circuit, observable: Observable, input: StateVector) -> Result<Self> {
        Self::new(circuit, vec![CostTerm { observable, input }])
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn terms(&self) -> &[CostTerm] {
        &self.terms
    }

    pub fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    /// `sum_l E_{0,l}` and `sum_l E_{max,l}`.
    pub fn spectral_range(&self) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(lo, hi), t| {
            let e = t.observable.eigenvalues();
            (lo + e[0], hi + e[e.len() - 1])
        })
    }

    /// `sum_l (E_{max,l} - E_{0,l})`.
    pub fn spectral_width(&self) -> f64 {
        let (lo, hi) = self.spectral_range();
        hi - lo
    }

    /// The input state shared by all terms.
    pub fn common_input(&self) -> Result<&StateVector> {
        let first = &self.terms[0].input;
        if self.terms[1..].iter().any(|t| t.input != *first) {
            return Err(Error::MultipleInputStates);
        }
        Ok(first)
    }

    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        let mut cached: Option<(&StateVector, StateVector)> = None;
        for t in &self.terms {
            let out = match &cached {
                Some((input, out)) if *input == &t.input => out.clone(),
                _ => {
                    let out = run_circuit(&self.circuit, theta, &t.input)?;
                    cached = Some((&t.input, out.clone()));
                    out
                }
            };
            total += t.observable.expectation(&out)?;
        }
        Ok(total)
    }

    /// Cost of the circuit with noise markers, virtual rotations set to
    /// `virt` (empty means all zero).
    pub fn eval_with_virtual(&self, noisy: &NoisyCircuit, theta: &[f64], virt: &[f64]) -> Result<f64> {
        self.check_noisy(noisy)?;
        self.terms.iter().try_fold(0.0, |acc, t| {
            let out = noisy.run_pure(theta, virt, &t.input)?;
            Ok(acc + t.observable.expectation(&out)?)
        })
    }

    pub(crate) fn check_noisy(&self, noisy: &NoisyCircuit) -> Result<()> {
        if noisy.circuit() != &self.circuit {
            return Err(Error::InvalidCircuit(
                "noisy circuit was built from a different circuit".into(),
            ));
        }
        Ok(())
    }
}

pub fn eval_cost(cf: &CostFunction, theta: &[f64]) -> Result<f64> {
    cf.eval(theta)
}

fn check_index(i: usize, len: usize) -> Result<()> {
    if i >= len {
        return Err(Error::IndexOutOfRange { index: i, len });
    }
    Ok(())
}

/// Parameters shifted by `amount` along `slot`: `(theta, virt)`, with `virt`
/// empty when the slot is real.
pub(crate) fn shifted(
    theta: &[f64],
    n_virtual: usize,
    slot: SlotId,
    amount: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut t = theta.to_vec();
    match slot {
        SlotId::Real(i) => {
            check_index(i, theta.len())?;
            t[i] += amount;
            Ok((t, Vec::new()))
        }
        SlotId::Virtual(j) => {
            check_index(j, n_virtual)?;
            let mut v = vec![0.0; n_virtual];
            v[j] = amount;
            Ok((t, v))
        }
    }
}

/// `d^2 C / d theta_i^2 = (C(theta + pi e_i) - C(theta)) / 2`.
pub fn second_derivative(cf: &CostFunction, theta: &[f64], i: usize) -> Result<f64> {
    check_index(i, cf.n_params())?;
    let base = cf.eval(theta)?;
    let mut t = theta.to_vec();
    t[i] += PI;
    Ok(0.5 * (cf.eval(&t)? - base))
}

/// Second derivative with respect to a real or virtual slot of `noisy`,
/// evaluated noiselessly.
pub fn second_derivative_slot(
    cf: &CostFunction,
    noisy: &NoisyCircuit,
    theta: &[f64],
    slot: SlotId,
) -> Result<f64> {
    let base = cf.eval_with_virtual(noisy, theta, &[])?;
    let (t, v) = shifted(theta, noisy.n_virtual(), slot, PI)?;
    Ok(0.5 * (cf.eval_with_virtual(noisy, &t, &v)? - base))
}

pub fn gradient(cf: &CostFunction, theta: &[f64]) -> Result<Vec<f64>> {
    cf.circuit.check_params(theta)?;
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            t[i] = theta[i] + FRAC_PI_2;
            let plus = cf.eval(&t)?;
            t[i] = theta[i] - FRAC_PI_2;
            let minus = cf.eval(&t)?;
            t[i] = theta[i];
            Ok(0.5 * (plus - minus))
        })
        .collect()
}

/// `G_ii = (1 - |<phi(theta + pi e_i)|phi(theta)>|^2) / 4`.
pub fn fubini_diag(cf: &CostFunction, theta: &[f64], i: usize) -> Result<f64> {
    check_index(i, cf.n_params())?;
    let input = cf.common_input()?;
    let phi = run_circuit(&cf.circuit, theta, input)?;
    let mut t = theta.to_vec();
    t[i] += PI;
    let phi_i = run_circuit(&cf.circuit, &t, input)?;
    Ok((1.0 - phi_i.fidelity(&phi)) / 4.0)
}

/// Fubini-Study diagonal for every real parameter.
pub fn fubini_diagonal(cf: &CostFunction, theta: &[f64]) -> Result<Vec<f64>> {
    (0..cf.n_params()).map(|i| fubini_diag(cf, theta, i)).collect()
}
