//! Hermitian observables: dense matrices or a spectral form `sum_i E_i |psi_i><psi_i|`
//! with `|psi_i> = V|i>` for a fixed circuit `V`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::state::{run_circuit, run_circuit_adjoint, StateVector};

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Dense {
        n: usize,
        /// Row-major `2^n x 2^n`.
        matrix: Vec<Complex64>,
    },
    Spectral {
        /// Ascending.
        eigenvalues: Vec<f64>,
        basis: Circuit,
        params: Vec<f64>,
    },
}

impl Observable {
    pub fn dense(n: usize, matrix: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: matrix.len(),
            });
        }
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((matrix[r * dim + c] - matrix[c * dim + r].conj()).norm());
            }
        }
        if worst > HERMITIAN_TOL {
            return Err(Error::NotHermitian(worst));
        }
        Ok(Observable::Dense { n, matrix })
    }

    pub fn pauli(p: &PauliString) -> Self {
        Observable::Dense {
            n: p.num_qubits(),
            matrix: p.to_matrix(),
        }
    }

    pub fn spectral(eigenvalues: Vec<f64>, basis: Circuit, params: Vec<f64>) -> Result<Self> {
        basis.check_params(&params)?;
        let dim = 1usize << basis.n_qubits();
        if eigenvalues.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: eigenvalues.len(),
            });
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidSpectrum(
                "eigenvalues must be sorted ascending".into(),
            ));
        }
        Ok(Observable::Spectral {
            eigenvalues,
            basis,
            params,
        })
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Observable::Dense { n, .. } => *n,
            Observable::Spectral { basis, .. } => basis.n_qubits(),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                actual: n,
            });
        }
        Ok(())
    }

    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        self.check(psi.n_qubits())?;
        Ok(match self {
            Observable::Dense { matrix, .. } => {
                let a = psi.amplitudes();
                let dim = a.len();
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..dim {
                    let row: Complex64 = (0..dim).map(|c| matrix[r * dim + c] * a[c]).sum();
                    acc += a[r].conj() * row;
                }
                acc.re
            }
            Observable::Spectral {
                eigenvalues,
                basis,
                params,
            } => {
                let rotated = run_circuit_adjoint(basis, params, psi)?;
                rotated
                    .amplitudes()
                    .iter()
                    .zip(eigenvalues)
                    .map(|(a, e)| e * a.norm_sqr())
                    .sum()
            }
        })
    }

    pub fn expectation_density(&self, rho: &DensityMatrix) -> Result<f64> {
        self.check(rho.n_qubits())?;
        Ok(match self {
            Observable::Dense { matrix, .. } => {
                let dim = rho.dim();
                let data = rho.data();
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..dim {
                    for c in 0..dim {
                        acc += data[r * dim + c] * matrix[c * dim + r];
                    }
                }
                acc.re
            }
            Observable::Spectral {
                eigenvalues,
                basis,
                params,
            } => {
                let mut rotated = rho.clone();
                for g in basis.gates().iter().rev() {
                    rotated.apply_gate(g, params, true);
                }
                eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(i, e)| e * rotated.get(i, i).re)
                    .sum()
            }
        })
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        match self {
            Observable::Dense { n, matrix } => {
                let dim = 1usize << n;
                DMatrix::from_row_slice(dim, dim, matrix)
            }
            Observable::Spectral { eigenvalues, .. } => {
                let dim = eigenvalues.len();
                let mut m = DMatrix::zeros(dim, dim);
                for (i, e) in eigenvalues.iter().enumerate() {
                    let psi = self.eigenvector(i).expect("index in range");
                    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
                    m += &v * v.adjoint() * Complex64::new(*e, 0.0);
                }
                m
            }
        }
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self {
            Observable::Spectral { eigenvalues, .. } => eigenvalues.clone(),
            Observable::Dense { .. } => {
                let mut e: Vec<f64> = self.to_dmatrix().symmetric_eigenvalues().iter().cloned().collect();
                e.sort_by(f64::total_cmp);
                e
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty spectrum")
    }

    /// `i`-th eigenvector in ascending-eigenvalue order.
    pub fn eigenvector(&self, i: usize) -> Result<StateVector> {
        match self {
            Observable::Spectral { basis, params, eigenvalues } => {
                if i >= eigenvalues.len() {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        len: eigenvalues.len(),
                    });
                }
                run_circuit(basis, params, &StateVector::basis(basis.n_qubits(), i))
            }
            Observable::Dense { .. } => {
                let eig = self.to_dmatrix().symmetric_eigen();
                let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let col = *order.get(i).ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: order.len(),
                })?;
                StateVector::normalized(eig.eigenvectors.column(col).iter().cloned().collect())
            }
        }
    }

    pub fn ground_state(&self) -> Result<StateVector> {
        self.eigenvector(0)
    }
}
