use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::bounds::SpectrumInfo;
use crate::circuit::Circuit;
use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::pauli::{Pauli, PauliString};
use crate::state::StateVector;

/// Hardware-efficient toy problem whose ground state is reachable by the
/// ansatz at a known parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyModelSpec {
    pub n: usize,
    pub depth: usize,
    pub e0: f64,
    pub e1: f64,
    pub emax: f64,
    pub circuit_seed: u64,
    pub spectrum_seed: u64,
    pub theta_seed: u64,
}

impl Default for ToyModelSpec {
    fn default() -> Self {
        Self {
            n: 4,
            depth: 2,
            e0: 1.0,
            e1: 51.0,
            emax: 100.0,
            circuit_seed: 1,
            spectrum_seed: 2,
            theta_seed: 3,
        }
    }
}

impl ToyModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.depth < 1 {
            return Err(Error::Config(format!(
                "toy model needs n >= 2 and depth >= 1, got n = {}, depth = {}",
                self.n, self.depth
            )));
        }
        if !(self.e0 < self.e1 && self.e1 <= self.emax) {
            return Err(Error::InvalidSpectrum(format!(
                "need E0 < E1 <= Emax, got {}, {}, {}",
                self.e0, self.e1, self.emax
            )));
        }
        Ok(())
    }

    /// Same model with circuit, spectrum and optimum seeds drawn from `seed`.
    pub fn reseeded(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            circuit_seed: rng.random(),
            spectrum_seed: rng.random(),
            theta_seed: rng.random(),
            ..*self
        }
    }
}

/// `depth` layers; each applies a rotation about a uniformly random axis in
/// {X, Y, Z} to every qubit, then CZ on each adjacent pair of a linear chain.
pub fn build_ansatz(n: usize, depth: usize, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::Config(format!("ansatz needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut c = Circuit::new(n);
    for _ in 0..depth {
        for q in 0..n {
            let axis = axes[rng.random_range(0..3)];
            c.push_rotation(PauliString::single(n, q, axis)?)?;
        }
        for q in 0..n - 1 {
            c.push_cz(q, q + 1)?;
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    pub spec: ToyModelSpec,
    pub circuit: Circuit,
    pub hamiltonian: Observable,
    pub theta_opt: Vec<f64>,
}

/// `H = sum_i E_i U(theta_opt)|i><i|U(theta_opt)^dag` with `E_0`, `E_1` and
/// `E_max` fixed and the other eigenvalues uniform on `(E_1, E_max)`.
pub fn build_toy_hamiltonian(spec: &ToyModelSpec) -> Result<ToyModel> {
    spec.validate()?;
    let circuit = build_ansatz(spec.n, spec.depth, spec.circuit_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.theta_seed);
    let theta_opt: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(0.0..TAU)).collect();
    let dim = 1usize << spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.spectrum_seed);
    let mut middle: Vec<f64> = (0..dim - 3)
        .map(|_| spec.e1 + rng.random::<f64>() * (spec.emax - spec.e1))
        .collect();
    middle.sort_by(f64::total_cmp);
    let mut eigenvalues = Vec::with_capacity(dim);
    eigenvalues.push(spec.e0);
    eigenvalues.push(spec.e1);
    eigenvalues.extend(middle);
    eigenvalues.push(spec.emax);
    let hamiltonian = Observable::spectral(eigenvalues, circuit.clone(), theta_opt.clone())?;
    Ok(ToyModel {
        spec: *spec,
        circuit,
        hamiltonian,
        theta_opt,
    })
}

impl ToyModel {
    /// Cost with the all-zero input state.
    pub fn cost_function(&self) -> CostFunction {
        CostFunction::single(
            self.circuit.clone(),
            self.hamiltonian.clone(),
            StateVector::zero(self.spec.n),
        )
        .expect("toy model terms match the circuit")
    }

    pub fn spectrum(&self) -> SpectrumInfo {
        SpectrumInfo::new(self.spec.e0, self.spec.e1, self.spec.emax).expect("validated spec")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn ansatz_counts() {
        let c = build_ansatz(4, 2, 7).unwrap();
        assert_eq!(c.n_params(), 8);
        let rot = c.gates().iter().filter(|g| matches!(g, Gate::Rotation { .. })).count();
        assert_eq!((rot, c.gates().len() - rot), (8, 6));
        let small = build_ansatz(2, 1, 0).unwrap();
        assert_eq!(small.gates().len(), 3);
        assert_eq!(build_ansatz(4, 2, 7).unwrap(), c);
        assert!(build_ansatz(1, 2, 0).is_err());
    }

    #[test]
    fn optimum_has_ground_energy() {
        let model = build_toy_hamiltonian(&ToyModelSpec::default()).unwrap();
        let cf = model.cost_function();
        assert!((cf.eval(&model.theta_opt).unwrap() - 1.0).abs() < 1e-12);
        let eig = model.hamiltonian.eigenvalues();
        assert_eq!(eig.len(), 16);
        assert_eq!((eig[0], eig[1], eig[15]), (1.0, 51.0, 100.0));
        assert!(eig[2..15].iter().all(|e| *e > 51.0 && *e < 100.0));
    }

    #[test]
    fn invalid_spec() {
        let bad = ToyModelSpec {
            e1: 1.0,
            ..ToyModelSpec::default()
        };
        assert!(build_toy_hamiltonian(&bad).is_err());
    }
}
