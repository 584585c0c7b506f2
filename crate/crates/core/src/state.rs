//! Dense statevector simulation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, FixedGate, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliAction, PauliString};

const NORM_TOL: f64 = 1e-12;

/// In-place kernels shared by the statevector and density-matrix paths.
pub(crate) mod kernel {
    use super::*;

    #[inline]
    pub fn bit(n: usize, qubit: usize) -> usize {
        1usize << (n - 1 - qubit)
    }

    pub fn pauli(amps: &mut [Complex64], act: &PauliAction) {
        if act.x_mask == 0 {
            for (x, a) in amps.iter_mut().enumerate() {
                *a *= act.apply(x).1;
            }
            return;
        }
        for x in 0..amps.len() {
            let y = x ^ act.x_mask;
            if x < y {
                let (_, px) = act.apply(x);
                let (_, py) = act.apply(y);
                let a = amps[x];
                let b = amps[y];
                amps[y] = px * a;
                amps[x] = py * b;
            }
        }
    }

    /// `exp(-i angle P / 2)` applied in place.
    pub fn rotation(amps: &mut [Complex64], act: &PauliAction, angle: f64) {
        let (s, c) = (angle / 2.0).sin_cos();
        let mis = Complex64::new(0.0, -s);
        if act.x_mask == 0 {
            for (x, a) in amps.iter_mut().enumerate() {
                let ph = act.apply(x).1;
                *a *= c + mis * ph;
            }
            return;
        }
        for x in 0..amps.len() {
            let y = x ^ act.x_mask;
            if x < y {
                let (_, px) = act.apply(x);
                let (_, py) = act.apply(y);
                let a = amps[x];
                let b = amps[y];
                amps[x] = a * c + mis * py * b;
                amps[y] = b * c + mis * px * a;
            }
        }
    }

    pub fn cz(amps: &mut [Complex64], n: usize, a: usize, b: usize) {
        let mask = bit(n, a) | bit(n, b);
        for (x, amp) in amps.iter_mut().enumerate() {
            if x & mask == mask {
                *amp = -*amp;
            }
        }
    }

    pub fn unitary(
        amps: &mut [Complex64],
        n: usize,
        qubits: &[usize],
        matrix: &[Complex64],
        adjoint: bool,
    ) {
        let k = qubits.len();
        let dim = 1usize << k;
        let bits: Vec<usize> = qubits.iter().map(|&q| bit(n, q)).collect();
        let target_mask: usize = bits.iter().sum();
        let offsets: Vec<usize> = (0..dim)
            .map(|local| {
                (0..k)
                    .filter(|&j| local & (1 << (k - 1 - j)) != 0)
                    .map(|j| bits[j])
                    .sum()
            })
            .collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..amps.len() {
            if base & target_mask != 0 {
                continue;
            }
            for (i, b) in buf.iter_mut().enumerate() {
                *b = amps[base + offsets[i]];
            }
            for i in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, b) in buf.iter().enumerate() {
                    let m = if adjoint {
                        matrix[j * dim + i].conj()
                    } else {
                        matrix[i * dim + j]
                    };
                    acc += m * b;
                }
                amps[base + offsets[i]] = acc;
            }
        }
    }

    pub fn gate(amps: &mut [Complex64], n: usize, gate: &Gate, params: &[f64], adjoint: bool) {
        match gate {
            Gate::Rotation { generator, slot } => {
                let angle = if adjoint { -params[*slot] } else { params[*slot] };
                rotation(amps, &generator.action(), angle);
            }
            Gate::Fixed(FixedGate::Cz(a, b)) => cz(amps, n, *a, *b),
            Gate::Fixed(FixedGate::Unitary { qubits, matrix }) => {
                unitary(amps, n, qubits, matrix, adjoint)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: len.next_power_of_two().max(1),
                actual: len,
            });
        }
        let s = Self {
            n: len.trailing_zeros() as usize,
            amps,
        };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidCircuit(format!(
                "state norm {norm} is not 1"
            )));
        }
        Ok(s)
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidCircuit("zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amps)
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps).expect("gaussian vector is non-zero")
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        p.check_width(self.n)?;
        kernel::pauli(&mut self.amps, &p.action());
        Ok(())
    }

    pub fn rotate(&mut self, generator: &PauliString, angle: f64) -> Result<()> {
        if generator.num_qubits() > self.n {
            return Err(Error::QubitOutOfRange {
                qubit: generator.num_qubits() - 1,
                n: self.n,
            });
        }
        generator.check_width(self.n)?;
        kernel::rotation(&mut self.amps, &generator.action(), angle);
        Ok(())
    }

    pub(crate) fn apply_gate(&mut self, gate: &Gate, params: &[f64], adjoint: bool) {
        kernel::gate(&mut self.amps, self.n, gate, params, adjoint);
    }
}

/// `cos(angle/2)|psi> - i sin(angle/2) A|psi>`.
pub fn apply_rotation(
    state: &StateVector,
    generator: &PauliString,
    angle: f64,
) -> Result<StateVector> {
    let mut out = state.clone();
    out.rotate(generator, angle)?;
    Ok(out)
}

fn check_input(circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<()> {
    circuit.check_params(params)?;
    if input.n_qubits() != circuit.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            actual: input.n_qubits(),
        });
    }
    Ok(())
}

/// `U(params)|input>`.
pub fn run_circuit(circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<StateVector> {
    check_input(circuit, params, input)?;
    let mut out = input.clone();
    for g in circuit.gates() {
        out.apply_gate(g, params, false);
    }
    Ok(out)
}

/// `U(params)^dagger |input>`.
pub fn run_circuit_adjoint(
    circuit: &Circuit,
    params: &[f64],
    input: &StateVector,
) -> Result<StateVector> {
    check_input(circuit, params, input)?;
    let mut out = input.clone();
    for g in circuit.gates().iter().rev() {
        out.apply_gate(g, params, true);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;
    use proptest::prelude::{any, prop_assert, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &StateVector, b: &StateVector, tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn rotation_examples() {
        let z0 = StateVector::zero(1);
        let out = apply_rotation(&z0, &"Z".parse().unwrap(), 0.0).unwrap();
        assert!(close(&out, &z0, 1e-15));

        let out = apply_rotation(&z0, &"X".parse().unwrap(), PI).unwrap();
        assert!((out.amplitudes()[0]).norm() < 1e-15);
        assert!((out.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);

        // exp(-i pi/4 XX)|00> = (|00> - i|11>)/sqrt2
        let out = apply_rotation(&StateVector::zero(2), &"XX".parse().unwrap(), PI / 2.0).unwrap();
        let h = FRAC_1_SQRT_2;
        let expect = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -h)];
        for (a, e) in out.amplitudes().iter().zip(expect) {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn rotation_rejects_wrong_width() {
        let s = StateVector::zero(1);
        assert!(apply_rotation(&s, &"XX".parse().unwrap(), 0.3).is_err());
        assert!(PauliString::single(1, 3, Pauli::X).is_err());
    }

    #[test]
    fn rotation_matches_dense_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in PauliString::all_non_identity(2) {
            let s = StateVector::random(2, &mut rng);
            let theta: f64 = 0.731;
            let m = p.to_matrix();
            let (sn, cs) = (theta / 2.0).sin_cos();
            let mut expect = vec![c(0.0, 0.0); 4];
            for i in 0..4 {
                for j in 0..4 {
                    let id = if i == j { cs } else { 0.0 };
                    let u = c(id, 0.0) + c(0.0, -sn) * m[i * 4 + j];
                    expect[i] += u * s.amplitudes()[j];
                }
            }
            let got = apply_rotation(&s, &p, theta).unwrap();
            for (a, e) in got.amplitudes().iter().zip(&expect) {
                assert!((a - e).norm() < 1e-14, "{p}");
            }
        }
    }

    #[test]
    fn rx_expectation_is_cosine() {
        let mut circ = Circuit::new(1);
        circ.push_rotation("X".parse().unwrap()).unwrap();
        for &t in &[0.0, 0.4, 1.3, 2.9, -0.7] {
            let out = run_circuit(&circ, &[t], &StateVector::zero(1)).unwrap();
            let a = out.amplitudes();
            let z = a[0].norm_sqr() - a[1].norm_sqr();
            assert!((z - f64::cos(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_circuit_and_length_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = StateVector::random(3, &mut rng);
        let circ = Circuit::new(3);
        assert_eq!(run_circuit(&circ, &[], &s).unwrap(), s);
        let mut circ = Circuit::new(3);
        circ.push_rotation("XII".parse().unwrap()).unwrap();
        assert!(matches!(
            run_circuit(&circ, &[], &s),
            Err(Error::ParameterLength { .. })
        ));
    }

    #[test]
    fn adjoint_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let circ = crate::testutil::random_circuit(3, 6, &mut rng);
        let params: Vec<f64> = (0..circ.n_params()).map(|_| rng.random::<f64>() * 6.0).collect();
        let s = StateVector::random(3, &mut rng);
        let fwd = run_circuit(&circ, &params, &s).unwrap();
        let back = run_circuit_adjoint(&circ, &params, &fwd).unwrap();
        assert!(close(&back, &s, 1e-12));
    }

    #[test]
    fn norm_preserved_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let n = rng.random_range(1..=4);
            let circ = crate::testutil::random_circuit(n, rng.random_range(0..8), &mut rng);
            let params: Vec<f64> = (0..circ.n_params())
                .map(|_| rng.random_range(-7.0..7.0))
                .collect();
            let s = StateVector::random(n, &mut rng);
            let out = run_circuit(&circ, &params, &s).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn rotation_periodicity(seed in any::<u64>(), theta in -10.0f64..10.0, idx in 1usize..16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = StateVector::random(2, &mut rng);
            let p = PauliString::from_index(2, idx);
            let a = apply_rotation(&s, &p, theta).unwrap();
            let b = apply_rotation(&s, &p, theta + 4.0 * PI).unwrap();
            prop_assert!(close(&a, &b, 1e-12));
        }

        #[test]
        fn pi_shift_composes(seed in any::<u64>(), theta in -10.0f64..10.0, idx in 1usize..16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = StateVector::random(2, &mut rng);
            let p = PauliString::from_index(2, idx);
            let a = apply_rotation(&s, &p, theta + PI).unwrap();
            let b = apply_rotation(&apply_rotation(&s, &p, PI).unwrap(), &p, theta).unwrap();
            prop_assert!(close(&a, &b, 1e-12));
        }
    }
}
