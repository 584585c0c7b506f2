//! Parameterized circuits of Pauli rotations and fixed gates.
//!
//! Rotations follow `U(theta) = exp(-i theta A / 2)`. Gates act in list order:
//! the first gate touches the input state first.
//!
//! # JSON schema
//!
//! ```json
//! {
//!   "n_qubits": 2,
//!   "n_params": 1,
//!   "gates": [
//!     {"kind": "rotation", "generator": "XZ", "qubits": [0, 1], "param_slot": 0},
//!     {"kind": "cz", "qubits": [0, 1]},
//!     {"kind": "unitary", "qubits": [1], "matrix": [[[0,0],[1,0]],[[1,0],[0,0]]]}
//!   ]
//! }
//! ```
//!
//! `generator` holds one letter per entry of `qubits`; `matrix` is row-major
//! with each entry a `[re, im]` pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum FixedGate {
    Cz(usize, usize),
    /// Arbitrary unitary on `qubits`; row-major `2^k x 2^k`, first listed
    /// qubit is the most significant local bit.
    Unitary {
        qubits: Vec<usize>,
        matrix: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Rotation { generator: PauliString, slot: usize },
    Fixed(FixedGate),
}

impl Gate {
    /// Number of qubits the gate acts on non-trivially.
    pub fn qubit_count(&self) -> usize {
        match self {
            Gate::Rotation { generator, .. } => generator.weight(),
            Gate::Fixed(FixedGate::Cz(..)) => 2,
            Gate::Fixed(FixedGate::Unitary { qubits, .. }) => qubits.len(),
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Rotation { generator, .. } => generator.support(),
            Gate::Fixed(FixedGate::Cz(a, b)) => vec![*a, *b],
            Gate::Fixed(FixedGate::Unitary { qubits, .. }) => qubits.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate>,
}

pub(crate) fn unitarity_deviation(m: &[Complex64], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += m[k * dim + i].conj() * m[k * dim + j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - expect).norm());
        }
    }
    worst
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            n_params: 0,
            gates: Vec::new(),
        }
    }

    /// Builds a circuit from an explicit gate list, checking that every slot
    /// `< n_params` is used by exactly one rotation.
    pub fn from_gates(n_qubits: usize, n_params: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut seen = vec![false; n_params];
        for g in &gates {
            Self::check_gate(n_qubits, g)?;
            if let Gate::Rotation { slot, .. } = g {
                if *slot >= n_params {
                    return Err(Error::InvalidCircuit(format!(
                        "parameter slot {slot} >= {n_params}"
                    )));
                }
                if std::mem::replace(&mut seen[*slot], true) {
                    return Err(Error::InvalidCircuit(format!(
                        "parameter slot {slot} used twice"
                    )));
                }
            }
        }
        if let Some(unused) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidCircuit(format!(
                "parameter slot {unused} is never used"
            )));
        }
        Ok(Self {
            n_qubits,
            n_params,
            gates,
        })
    }

    fn check_gate(n: usize, g: &Gate) -> Result<()> {
        match g {
            Gate::Rotation { generator, .. } => {
                generator.check_width(n)?;
                if generator.weight() == 0 {
                    return Err(Error::InvalidCircuit(
                        "rotation generator must not be the identity".into(),
                    ));
                }
            }
            Gate::Fixed(FixedGate::Cz(a, b)) => {
                for &q in [a, b] {
                    if q >= n {
                        return Err(Error::QubitOutOfRange { qubit: q, n });
                    }
                }
                if a == b {
                    return Err(Error::InvalidCircuit("CZ on a single qubit".into()));
                }
            }
            Gate::Fixed(FixedGate::Unitary { qubits, matrix }) => {
                for &q in qubits {
                    if q >= n {
                        return Err(Error::QubitOutOfRange { qubit: q, n });
                    }
                }
                let mut sorted = qubits.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != qubits.len() || qubits.is_empty() {
                    return Err(Error::InvalidCircuit("bad unitary target list".into()));
                }
                let dim = 1usize << qubits.len();
                if matrix.len() != dim * dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim * dim,
                        actual: matrix.len(),
                    });
                }
                let dev = unitarity_deviation(matrix, dim);
                if dev > UNITARY_TOL {
                    return Err(Error::NotUnitary(dev));
                }
            }
        }
        Ok(())
    }

    /// Appends a rotation with a fresh parameter slot and returns the slot.
    pub fn push_rotation(&mut self, generator: PauliString) -> Result<usize> {
        let slot = self.n_params;
        let g = Gate::Rotation { generator, slot };
        Self::check_gate(self.n_qubits, &g)?;
        self.gates.push(g);
        self.n_params += 1;
        Ok(slot)
    }

    pub fn push_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.push_fixed(FixedGate::Cz(a, b))
    }

    pub fn push_fixed(&mut self, gate: FixedGate) -> Result<()> {
        let g = Gate::Fixed(gate);
        Self::check_gate(self.n_qubits, &g)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::ParameterLength {
                expected: self.n_params,
                actual: params.len(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitDoc::from(self)).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CircuitDoc =
            serde_json::from_str(s).map_err(|e| Error::InvalidCircuit(e.to_string()))?;
        doc.try_into()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<GateDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum GateDoc {
    Rotation {
        generator: String,
        qubits: Vec<usize>,
        param_slot: usize,
    },
    Cz {
        qubits: [usize; 2],
    },
    Unitary {
        qubits: Vec<usize>,
        matrix: Vec<Vec<[f64; 2]>>,
    },
}

impl From<&Circuit> for CircuitDoc {
    fn from(c: &Circuit) -> Self {
        let gates = c
            .gates
            .iter()
            .map(|g| match g {
                Gate::Rotation { generator, slot } => {
                    let qubits = generator.support();
                    let letters = qubits
                        .iter()
                        .map(|&q| generator.letters()[q].as_char())
                        .collect();
                    GateDoc::Rotation {
                        generator: letters,
                        qubits,
                        param_slot: *slot,
                    }
                }
                Gate::Fixed(FixedGate::Cz(a, b)) => GateDoc::Cz { qubits: [*a, *b] },
                Gate::Fixed(FixedGate::Unitary { qubits, matrix }) => {
                    let dim = 1usize << qubits.len();
                    GateDoc::Unitary {
                        qubits: qubits.clone(),
                        matrix: matrix
                            .chunks(dim)
                            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                            .collect(),
                    }
                }
            })
            .collect();
        Self {
            n_qubits: c.n_qubits,
            n_params: c.n_params,
            gates,
        }
    }
}

impl TryFrom<CircuitDoc> for Circuit {
    type Error = Error;

    fn try_from(doc: CircuitDoc) -> Result<Self> {
        let n = doc.n_qubits;
        let gates = doc
            .gates
            .into_iter()
            .map(|g| -> Result<Gate> {
                Ok(match g {
                    GateDoc::Rotation {
                        generator,
                        qubits,
                        param_slot,
                    } => {
                        let local: PauliString = generator.parse()?;
                        Gate::Rotation {
                            generator: PauliString::embed(n, &qubits, &local)?,
                            slot: param_slot,
                        }
                    }
                    GateDoc::Cz { qubits } => Gate::Fixed(FixedGate::Cz(qubits[0], qubits[1])),
                    GateDoc::Unitary { qubits, matrix } => Gate::Fixed(FixedGate::Unitary {
                        qubits,
                        matrix: matrix
                            .into_iter()
                            .flatten()
                            .map(|[re, im]| Complex64::new(re, im))
                            .collect(),
                    }),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Circuit::from_gates(n, doc.n_params, gates)
    }
}
