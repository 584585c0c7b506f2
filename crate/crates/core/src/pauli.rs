//! Pauli letters and strings on an `n`-qubit register.
//!
//! Basis labelling: qubit 0 is the leftmost tensor factor, so it maps to the
//! most significant bit of a basis index.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i & 3]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Two single-qubit letters anticommute iff both are non-identity and differ.
    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }
}

/// Tensor product of Pauli letters, one per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

/// Precomputed bit masks for applying a Pauli string to basis states.
///
/// `P|x> = i^{n_y} (-1)^{|x & z|} |x ^ x_mask>`.
#[derive(Debug, Clone, Copy)]
pub struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    pub y_phase: Complex64,
}

impl PauliAction {
    #[inline]
    pub fn apply(&self, basis: usize) -> (usize, Complex64) {
        let sign = if (basis & self.z_mask).count_ones() & 1 == 1 {
            -1.0
        } else {
            1.0
        };
        (basis ^ self.x_mask, self.y_phase * sign)
    }
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            letters: vec![Pauli::I; n],
        }
    }

    /// A single letter on qubit `qubit` of an `n`-qubit register.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        if qubit >= n {
            return Err(Error::QubitOutOfRange { qubit, n });
        }
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = p;
        Ok(Self { letters })
    }

    /// Embeds a local string acting on `targets` into an `n`-qubit register.
    pub fn embed(n: usize, targets: &[usize], local: &PauliString) -> Result<Self> {
        if targets.len() != local.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: targets.len(),
                actual: local.num_qubits(),
            });
        }
        let mut letters = vec![Pauli::I; n];
        for (&q, &p) in targets.iter().zip(&local.letters) {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            letters[q] = p;
        }
        Ok(Self { letters })
    }

    /// The `index`-th string on `k` qubits, reading `index` in base 4 with the
    /// first qubit as the most significant digit (I=0, X=1, Y=2, Z=3).
    pub fn from_index(k: usize, index: usize) -> Self {
        let letters = (0..k)
            .map(|q| Pauli::from_index(index >> (2 * (k - 1 - q))))
            .collect();
        Self { letters }
    }

    /// All `4^k - 1` non-identity strings on `k` qubits, in index order.
    pub fn all_non_identity(k: usize) -> Vec<PauliString> {
        (1..(1usize << (2 * k)))
            .map(|i| Self::from_index(k, i))
            .collect()
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| a.anticommutes(**b))
            .count();
        anti % 2 == 0
    }

    pub fn action(&self) -> PauliAction {
        let n = self.letters.len();
        let mut x_mask = 0usize;
        let mut z_mask = 0usize;
        let mut n_y = 0u32;
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
            }
        }
        let y_phase = match n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        PauliAction {
            x_mask,
            z_mask,
            y_phase,
        }
    }

    /// Dense row-major matrix, `2^n x 2^n`.
    pub fn to_matrix(&self) -> Vec<Complex64> {
        let dim = 1usize << self.num_qubits();
        let act = self.action();
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for col in 0..dim {
            let (row, amp) = act.apply(col);
            m[row * dim + col] = amp;
        }
        m
    }

    pub fn check_width(&self, n: usize) -> Result<()> {
        if self.num_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.num_qubits(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidPauli(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidPauli("empty string".into()));
        }
        Ok(Self { letters })
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                for j in 0..dim {
                    out[i * dim + j] += a[i * dim + k] * b[k * dim + j];
                }
            }
        }
        out
    }

    #[test]
    fn squares_to_identity() {
        for k in 1..=3 {
            let dim = 1 << k;
            for p in PauliString::all_non_identity(k) {
                let m = p.to_matrix();
                let sq = matmul(&m, &m, dim);
                for i in 0..dim {
                    for j in 0..dim {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((sq[i * dim + j] - expect).norm() < 1e-12, "{p}");
                    }
                }
            }
        }
    }

    #[test]
    fn single_qubit_matrices() {
        let y: PauliString = "Y".parse().unwrap();
        let m = y.to_matrix();
        // Y = [[0, -i], [i, 0]]
        assert_eq!(m[1], Complex64::new(0.0, -1.0));
        assert_eq!(m[2], Complex64::new(0.0, 1.0));
        let zi: PauliString = "ZI".parse().unwrap();
        let m = zi.to_matrix();
        // qubit 0 is the most significant bit
        assert_eq!(m[2 * 4 + 2], Complex64::new(-1.0, 0.0));
        assert_eq!(m[5], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn commutation_matches_matrices() {
        let all = PauliString::all_non_identity(2);
        for a in &all {
            for b in &all {
                let ma = a.to_matrix();
                let mb = b.to_matrix();
                let ab = matmul(&ma, &mb, 4);
                let ba = matmul(&mb, &ma, 4);
                let commute = ab.iter().zip(&ba).all(|(x, y)| (x - y).norm() < 1e-12);
                assert_eq!(commute, a.commutes_with(b), "{a} {b}");
            }
        }
    }

    #[test]
    fn anticommuting_count_is_two_quarters() {
        for k in 1..=3 {
            let all = PauliString::all_non_identity(k);
            assert_eq!(all.len(), (1 << (2 * k)) - 1);
            for p in &all {
                let anti = all.iter().filter(|q| !p.commutes_with(q)).count();
                assert_eq!(anti, 2 * (1 << (2 * (k - 1))));
            }
        }
    }

    #[test]
    fn parse_and_embed() {
        assert!("XQ".parse::<PauliString>().is_err());
        let local: PauliString = "XZ".parse().unwrap();
        let e = PauliString::embed(4, &[1, 3], &local).unwrap();
        assert_eq!(e.to_string(), "IXIZ");
        assert_eq!(e.weight(), 2);
        assert_eq!(e.support(), vec![1, 3]);
        assert!(PauliString::single(2, 2, Pauli::X).is_err());
    }
}
