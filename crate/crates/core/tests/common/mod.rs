#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use vqa_noise::{Circuit, CostFunction, Observable, Pauli, PauliString, StateVector};

pub fn random_pauli<R: Rng>(n: usize, rng: &mut R) -> PauliString {
    let weight = if n > 1 && rng.random_bool(0.3) { 2 } else { 1 };
    let mut letters = vec![Pauli::I; n];
    let first = rng.random_range(0..n);
    letters[first] = Pauli::from_index(rng.random_range(1..4));
    if weight == 2 {
        let mut second = rng.random_range(0..n - 1);
        if second >= first {
            second += 1;
        }
        letters[second] = Pauli::from_index(rng.random_range(1..4));
    }
    PauliString::new(letters)
}

/// `m` Pauli rotations on `n` qubits with CZ gates sprinkled in between.
pub fn random_circuit<R: Rng>(n: usize, m: usize, rng: &mut R) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..m {
        c.push_rotation(random_pauli(n, rng)).unwrap();
        if n > 1 && rng.random_bool(0.4) {
            let a = rng.random_range(0..n - 1);
            c.push_cz(a, a + 1).unwrap();
        }
    }
    c
}

/// Random Hermitian matrix with Gaussian entries, rescaled to spectral radius 1.
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> Observable {
    let dim = 1usize << n;
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut normal = || {
        let u: f64 = rng.random_range(1e-12..1.0);
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    };
    for r in 0..dim {
        m[r * dim + r] = Complex64::new(normal(), 0.0);
        for c in r + 1..dim {
            let z = Complex64::new(normal(), normal());
            m[r * dim + c] = z;
            m[c * dim + r] = z.conj();
        }
    }
    let raw = Observable::dense(n, m.clone()).unwrap();
    let scale = raw.min_eigenvalue().abs().max(raw.max_eigenvalue().abs());
    Observable::dense(n, m.into_iter().map(|z| z / scale).collect()).unwrap()
}

pub fn random_theta<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

pub fn random_cost<R: Rng>(n: usize, m: usize, rng: &mut R) -> CostFunction {
    CostFunction::single(random_circuit(n, m, rng), random_hermitian(n, rng), StateVector::zero(n)).unwrap()
}
