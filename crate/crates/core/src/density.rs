//! Dense density matrices and exact channel application.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliAction, PauliString};
use crate::state::{kernel, StateVector};

/// Default qubit cap for density-matrix (exact-channel) evaluation.
pub const DEFAULT_EXACT_QUBIT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    /// Row-major `2^n x 2^n`.
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let dim = a.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(a[r] * a[c].conj());
            }
        }
        Self {
            n: psi.n_qubits(),
            data,
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { n, data }
    }

    /// Checks Hermiticity (1e-12), unit trace (1e-12) and positivity (-1e-10).
    pub fn from_matrix(n: usize, data: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        let rho = Self { n, data };
        let herm = rho.hermiticity_deviation();
        if herm > 1e-12 {
            return Err(Error::NotHermitian(herm));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidSpectrum(format!("trace {tr} is not 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::InvalidSpectrum(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        DMatrix::from_row_slice(dim, dim, &self.data)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_dmatrix();
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// `<psi|rho|psi>`.
    pub fn overlap(&self, psi: &StateVector) -> f64 {
        let a = psi.amplitudes();
        let dim = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            let row: Complex64 = self.data[r * dim..(r + 1) * dim].iter().zip(a).map(|(m, x)| m * x).sum();
            acc += a[r].conj() * row;
        }
        acc.re
    }

    /// Frobenius distance.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `rho -> U rho U^dagger`, where `apply` maps a vector `v` to `U v`.
    pub(crate) fn conjugate_by(&mut self, apply: impl Fn(&mut [Complex64])) {
        let dim = self.dim();
        // rho U^dagger, one row at a time: row <- conj(U conj(row))
        for row in self.data.chunks_mut(dim) {
            row.iter_mut().for_each(|z| *z = z.conj());
            apply(row);
            row.iter_mut().for_each(|z| *z = z.conj());
        }
        // U X via the transpose: columns of X become rows
        transpose_in_place(&mut self.data, dim);
        for row in self.data.chunks_mut(dim) {
            apply(row);
        }
        transpose_in_place(&mut self.data, dim);
    }

    pub(crate) fn apply_gate(&mut self, gate: &Gate, params: &[f64], adjoint: bool) {
        let n = self.n;
        self.conjugate_by(|v| kernel::gate(v, n, gate, params, adjoint));
    }

    pub fn rotate(&mut self, generator: &PauliString, angle: f64) -> Result<()> {
        generator.check_width(self.n)?;
        let act = generator.action();
        self.conjugate_by(|v| kernel::rotation(v, &act, angle));
        Ok(())
    }

    /// `rho -> (1 - p) rho + p P rho P`.
    pub(crate) fn apply_pauli_channel(&mut self, act: &PauliAction, p: f64) {
        if p == 0.0 {
            return;
        }
        let dim = self.dim();
        let old = self.data.clone();
        for r in 0..dim {
            let (_, pr) = act.apply(r ^ act.x_mask);
            let rs = r ^ act.x_mask;
            for c in 0..dim {
                let (_, pc) = act.apply(c);
                let conj_term = pr * old[rs * dim + (c ^ act.x_mask)] * pc;
                self.data[r * dim + c] = old[r * dim + c] * (1.0 - p) + conj_term * p;
            }
        }
    }

    pub fn pauli_channel(&mut self, generator: &PauliString, p: f64) -> Result<()> {
        generator.check_width(self.n)?;
        self.apply_pauli_channel(&generator.action(), p);
        Ok(())
    }

    /// `tr(rho P)` for a Pauli string.
    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        let act = p.action();
        let dim = self.dim();
        // P[c ^ x][c] = phase(c), so tr(rho P) = sum_c rho[c][c ^ x] phase(c)
        (0..dim)
            .map(|c| {
                let (row, ph) = act.apply(c);
                ph * self.data[c * dim + row]
            })
            .sum::<Complex64>()
            .re
    }
}

fn transpose_in_place(data: &mut [Complex64], dim: usize) {
    for r in 0..dim {
        for c in (r + 1)..dim {
            data.swap(r * dim + c, c * dim + r);
        }
    }
}

/// Noiseless density evolution through a circuit.
pub fn evolve_circuit(
    rho: &DensityMatrix,
    circuit: &Circuit,
    params: &[f64],
    qubit_limit: usize,
) -> Result<DensityMatrix> {
    if circuit.n_qubits() > qubit_limit {
        return Err(Error::QubitLimit {
            n: circuit.n_qubits(),
            limit: qubit_limit,
        });
    }
    circuit.check_params(params)?;
    if rho.n_qubits() != circuit.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            actual: rho.n_qubits(),
        });
    }
    let mut out = rho.clone();
    for g in circuit.gates() {
        out.apply_gate(g, params, false);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::run_circuit;
    use crate::testutil::random_circuit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pure_evolution_matches_statevector() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.random_range(1..=4);
            let circ = random_circuit(n, 8, &mut rng);
            let params: Vec<f64> = (0..circ.n_params()).map(|_| rng.random_range(-4.0..4.0)).collect();
            let psi = StateVector::random(n, &mut rng);
            let out = run_circuit(&circ, &params, &psi).unwrap();
            let rho = evolve_circuit(&DensityMatrix::from_pure(&psi), &circ, &params, 8).unwrap();
            assert!(rho.distance(&DensityMatrix::from_pure(&out)) < 1e-12);
            assert!(rho.hermiticity_deviation() < 1e-12);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_circuit_leaves_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = DensityMatrix::from_pure(&StateVector::random(2, &mut rng));
        let out = evolve_circuit(&rho, &Circuit::new(2), &[], 8).unwrap();
        assert_eq!(out, rho);
        let big = Circuit::new(9);
        let rho9 = DensityMatrix::maximally_mixed(1);
        assert!(matches!(
            evolve_circuit(&rho9, &big, &[], 8),
            Err(Error::QubitLimit { .. })
        ));
    }

    #[test]
    fn single_qubit_depolarizing_shrinks_bloch_vector() {
        // D_{1,q} = (1-q) rho + q/3 (X rho X + Y rho Y + Z rho Z)
        let q = 0.09;
        let mut rho = DensityMatrix::from_pure(&StateVector::zero(1));
        let old = rho.clone();
        let mut acc = old.data.iter().map(|z| z * (1.0 - q)).collect::<Vec<_>>();
        for p in PauliString::all_non_identity(1) {
            let mut t = old.clone();
            t.apply_pauli_channel(&p.action(), 1.0);
            for (a, b) in acc.iter_mut().zip(&t.data) {
                *a += b * (q / 3.0);
            }
        }
        rho.data = acc;
        let z = rho.pauli_expectation(&"Z".parse().unwrap());
        assert!((z - (1.0 - 4.0 * q / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn pauli_channel_matches_dense_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = StateVector::random(2, &mut rng);
        let base = DensityMatrix::from_pure(&psi);
        for p in PauliString::all_non_identity(2) {
            let m = p.to_matrix();
            let mut expect = vec![Complex64::new(0.0, 0.0); 16];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            expect[i * 4 + l] += m[i * 4 + j] * base.data[j * 4 + k] * m[k * 4 + l];
                        }
                    }
                }
            }
            let mut got = base.clone();
            got.pauli_channel(&p, 1.0).unwrap();
            for (a, b) in got.data.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-14, "{p}");
            }
            let ev = base.pauli_expectation(&p);
            let mut direct = Complex64::new(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    direct += base.data[i * 4 + j] * m[j * 4 + i];
                }
            }
            assert!((ev - direct.re).abs() < 1e-14);
        }
    }

    #[test]
    fn from_matrix_validates() {
        let bad = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)];
        assert!(DensityMatrix::from_matrix(1, bad).is_err());
        let neg = vec![Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-0.5, 0.0)];
        assert!(DensityMatrix::from_matrix(1, neg).is_err());
        let ok = DensityMatrix::maximally_mixed(2);
        assert!(DensityMatrix::from_matrix(2, ok.data.clone()).is_ok());
    }
}
