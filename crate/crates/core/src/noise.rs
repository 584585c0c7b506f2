//! Noise insertion: every stochastic Pauli channel in a circuit becomes a
//! virtual rotation gate whose angle is pinned at zero and whose Gaussian
//! fluctuation has the variance of the equivalent channel.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{
    depolarizing_gaussian_variance, depolarizing_max_probability, stochastic_of_variance,
};
use crate::circuit::{Circuit, Gate};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::pauli::{PauliAction, PauliString};
use crate::state::{kernel, StateVector};

/// Depolarizing noise levels for the standard model: `q1` after every
/// single-qubit gate, `q2` after every two-qubit gate, `q_readout` on every
/// qubit after the last gate. `param_variance` adds independent Gaussian
/// fluctuations of that variance to every real parameter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NoiseSpec {
    pub q1: f64,
    pub q2: f64,
    pub q_readout: f64,
    pub param_variance: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NoiseSpecDoc {
    Direct(DirectDoc),
    Scaled(ScaledDoc),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectDoc {
    q1: f64,
    q2: f64,
    q_readout: f64,
    #[serde(default)]
    param_variance: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaledDoc {
    q_scale: f64,
    c: BTreeMap<String, f64>,
    #[serde(default)]
    param_variance: f64,
}

impl<'de> Deserialize<'de> for NoiseSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = match NoiseSpecDoc::deserialize(d)? {
            NoiseSpecDoc::Direct(doc) => NoiseSpec {
                q1: doc.q1,
                q2: doc.q2,
                q_readout: doc.q_readout,
                param_variance: doc.param_variance,
            },
            NoiseSpecDoc::Scaled(doc) => {
                for key in doc.c.keys() {
                    if !matches!(key.as_str(), "1" | "2" | "readout") {
                        return Err(serde::de::Error::custom(format!(
                            "unknown gate-size key {key:?} in \"c\""
                        )));
                    }
                }
                let c = |k: &str| doc.c.get(k).copied().unwrap_or(0.0);
                let mut spec = NoiseSpec::scaled(doc.q_scale, c("1"), c("2"));
                spec.q_readout = NoiseSpec::scaled_probability(1, c("readout"), doc.q_scale);
                spec.param_variance = doc.param_variance;
                spec
            }
        };
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn depolarizing(q1: f64, q2: f64, q_readout: f64) -> Self {
        Self {
            q1,
            q2,
            q_readout,
            param_variance: 0.0,
        }
    }

    /// `q_k = (4^{k-1} - 1/4) c_k q`, so each Pauli component of the
    /// depolarizing channel carries variance close to `c_k q`.
    pub fn scaled_probability(k: usize, c_k: f64, q: f64) -> f64 {
        (4f64.powi(k as i32 - 1) - 0.25) * c_k * q
    }

    /// Gate noise from the scaled parameterization; no readout layer.
    pub fn scaled(q: f64, c1: f64, c2: f64) -> Self {
        Self {
            q1: Self::scaled_probability(1, c1, q),
            q2: Self::scaled_probability(2, c2, q),
            q_readout: 0.0,
            param_variance: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (q, k) in [(self.q1, 1), (self.q2, 2), (self.q_readout, 1)] {
            let max = depolarizing_max_probability(k);
            if !(0.0..max).contains(&q) {
                return Err(Error::ProbabilityOutOfRange { p: q, max });
            }
        }
        if self.param_variance < 0.0 || self.param_variance.is_nan() {
            return Err(Error::NegativeVariance(self.param_variance));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.q1 == 0.0 && self.q2 == 0.0 && self.q_readout == 0.0 && self.param_variance == 0.0
    }
}

/// Which physical noise source a virtual parameter stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ChannelOrigin {
    /// Depolarizing channel after gate `gate`, acting on `k` qubits.
    GateNoise { gate: usize, k: usize },
    Readout { qubit: usize },
    /// Gaussian fluctuation of a real parameter.
    Parameter { slot: usize },
    Custom,
}

/// Where a channel sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// Directly after the gate with this index (and after earlier channels
    /// placed at the same spot).
    AfterGate(usize),
    /// After the last gate.
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirtualEntry {
    /// Index into [`NoisyCircuit::ops`].
    pub position: usize,
    pub placement: Placement,
    pub generator: PauliString,
    pub sigma2: f64,
    /// Probability of the equivalent stochastic Pauli channel.
    pub p: f64,
    pub origin: ChannelOrigin,
    /// Real parameter slot whose rotation has the same generator at the same
    /// position; the second derivatives coincide.
    pub merged: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct VirtualParameterRegistry {
    entries: Vec<VirtualEntry>,
}

impl VirtualParameterRegistry {
    pub fn entries(&self) -> &[VirtualEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn merged_count(&self) -> usize {
        self.entries.iter().filter(|e| e.merged.is_some()).count()
    }
}

/// A real parameter or a virtual parameter (registry index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum SlotId {
    Real(usize),
    Virtual(usize),
}

/// A parameter carrying noise, with its total variance. Merged virtual
/// entries are folded into the real slot they coincide with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSlot {
    pub id: SlotId,
    pub sigma2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Gate(usize),
    Virtual(usize),
}

/// A channel request for [`NoisyCircuit::with_channels`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub placement: Placement,
    pub generator: PauliString,
    pub sigma2: f64,
    pub origin: ChannelOrigin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyCircuit {
    circuit: Circuit,
    ops: Vec<Op>,
    registry: VirtualParameterRegistry,
    /// Depolarizing probabilities `(q1, q2)` attached to virtual rotations
    /// that are shifted away from zero; `None` leaves inserted gates clean.
    shift_noise: Option<(f64, f64)>,
}

impl NoisyCircuit {
    pub fn noiseless(circuit: Circuit) -> Self {
        let ops = (0..circuit.gates().len()).map(Op::Gate).collect();
        Self {
            circuit,
            ops,
            registry: VirtualParameterRegistry::default(),
            shift_noise: None,
        }
    }

    pub fn with_channels(circuit: Circuit, channels: Vec<ChannelSpec>) -> Result<Self> {
        let n = circuit.n_qubits();
        let n_gates = circuit.gates().len();
        let mut by_spot: BTreeMap<Option<usize>, Vec<ChannelSpec>> = BTreeMap::new();
        for ch in channels {
            ch.generator.check_width(n)?;
            if ch.generator.weight() == 0 {
                return Err(Error::InvalidCircuit("identity noise generator".into()));
            }
            stochastic_of_variance(ch.sigma2)?;
            if ch.sigma2 == 0.0 {
                continue;
            }
            let spot = match ch.placement {
                Placement::AfterGate(g) if g >= n_gates => {
                    return Err(Error::IndexOutOfRange {
                        index: g,
                        len: n_gates,
                    })
                }
                Placement::AfterGate(g) => Some(g),
                Placement::End => None,
            };
            by_spot.entry(spot).or_default().push(ch);
        }

        let mut ops = Vec::new();
        let mut entries = Vec::new();
        let mut push_channels = |ops: &mut Vec<Op>, list: Vec<ChannelSpec>, prev: Option<&Gate>| {
            for ch in list {
                let merged = match prev {
                    Some(Gate::Rotation { generator, slot }) if *generator == ch.generator => {
                        Some(*slot)
                    }
                    _ => None,
                };
                ops.push(Op::Virtual(entries.len()));
                entries.push(VirtualEntry {
                    position: ops.len() - 1,
                    placement: ch.placement,
                    p: stochastic_of_variance(ch.sigma2).expect("checked above"),
                    generator: ch.generator,
                    sigma2: ch.sigma2,
                    origin: ch.origin,
                    merged,
                });
            }
        };
        for (g, gate) in circuit.gates().iter().enumerate() {
            ops.push(Op::Gate(g));
            if let Some(list) = by_spot.remove(&Some(g)) {
                push_channels(&mut ops, list, Some(gate));
            }
        }
        if let Some(list) = by_spot.remove(&None) {
            push_channels(&mut ops, list, None);
        }
        Ok(Self {
            circuit,
            ops,
            registry: VirtualParameterRegistry { entries },
            shift_noise: None,
        })
    }

    /// Enables depolarizing noise on virtual rotations shifted away from zero.
    pub fn with_shift_noise(mut self, q1: f64, q2: f64) -> Self {
        self.shift_noise = Some((q1, q2));
        self
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn registry(&self) -> &VirtualParameterRegistry {
        &self.registry
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    pub fn n_virtual(&self) -> usize {
        self.registry.len()
    }

    pub fn is_noiseless(&self) -> bool {
        self.registry.is_empty()
    }

    /// Noisy parameters with their total variances: real slots (ascending,
    /// merged variances folded in) followed by unmerged virtual slots.
    pub fn noise_slots(&self) -> Vec<NoiseSlot> {
        let mut real = vec![0.0; self.n_params()];
        let mut virt = Vec::new();
        for (j, e) in self.registry.entries.iter().enumerate() {
            match e.merged {
                Some(slot) => real[slot] += e.sigma2,
                None => virt.push(NoiseSlot {
                    id: SlotId::Virtual(j),
                    sigma2: e.sigma2,
                }),
            }
        }
        real.into_iter()
            .enumerate()
            .filter(|(_, s)| *s > 0.0)
            .map(|(i, sigma2)| NoiseSlot {
                id: SlotId::Real(i),
                sigma2,
            })
            .chain(virt)
            .collect()
    }

    pub fn total_variance(&self) -> f64 {
        self.registry.entries.iter().map(|e| e.sigma2).sum()
    }

    pub(crate) fn check_virtual(&self, virt: &[f64]) -> Result<()> {
        if !virt.is_empty() && virt.len() != self.n_virtual() {
            return Err(Error::ParameterLength {
                expected: self.n_virtual(),
                actual: virt.len(),
            });
        }
        Ok(())
    }

    fn check_state(&self, n: usize) -> Result<()> {
        if n != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                actual: n,
            });
        }
        Ok(())
    }

    /// Noiseless evolution with the virtual angles set to `virt` (empty means
    /// all zero).
    pub fn run_pure(&self, theta: &[f64], virt: &[f64], input: &StateVector) -> Result<StateVector> {
        self.circuit.check_params(theta)?;
        self.check_virtual(virt)?;
        self.check_state(input.n_qubits())?;
        let mut psi = input.clone();
        let n = self.n_qubits();
        for op in &self.ops {
            match *op {
                Op::Gate(g) => kernel::gate(psi.amplitudes_mut(), n, &self.circuit.gates()[g], theta, false),
                Op::Virtual(j) => {
                    let angle = virt.get(j).copied().unwrap_or(0.0);
                    if angle != 0.0 {
                        let act = self.registry.entries[j].generator.action();
                        kernel::rotation(psi.amplitudes_mut(), &act, angle);
                    }
                }
            }
        }
        Ok(psi)
    }

    /// Exact channel evolution of a density matrix.
    pub fn evolve_density(
        &self,
        theta: &[f64],
        virt: &[f64],
        rho: &DensityMatrix,
        qubit_limit: usize,
    ) -> Result<DensityMatrix> {
        if self.n_qubits() > qubit_limit {
            return Err(Error::QubitLimit {
                n: self.n_qubits(),
                limit: qubit_limit,
            });
        }
        self.circuit.check_params(theta)?;
        self.check_virtual(virt)?;
        self.check_state(rho.n_qubits())?;
        let mut out = rho.clone();
        for op in &self.ops {
            match *op {
                Op::Gate(g) => out.apply_gate(&self.circuit.gates()[g], theta, false),
                Op::Virtual(j) => {
                    let e = &self.registry.entries[j];
                    let act = e.generator.action();
                    let angle = virt.get(j).copied().unwrap_or(0.0);
                    if angle != 0.0 {
                        out.conjugate_by(|v| kernel::rotation(v, &act, angle));
                        for (a, p) in self.shift_noise_channels(&e.generator)? {
                            out.apply_pauli_channel(&a, p);
                        }
                    }
                    out.apply_pauli_channel(&act, e.p);
                }
            }
        }
        Ok(out)
    }

    fn shift_noise_channels(&self, generator: &PauliString) -> Result<Vec<(PauliAction, f64)>> {
        let Some((q1, q2)) = self.shift_noise else {
            return Ok(Vec::new());
        };
        let support = generator.support();
        let k = support.len();
        let q = if k == 1 { q1 } else { q2 };
        if q == 0.0 || k > 2 {
            return Ok(Vec::new());
        }
        let p = stochastic_of_variance(depolarizing_gaussian_variance(k, q)?)?;
        PauliString::all_non_identity(k)
            .iter()
            .map(|local| Ok((PauliString::embed(self.n_qubits(), &support, local)?.action(), p)))
            .collect()
    }

    /// One stochastic trajectory: each channel independently applies its
    /// generator with probability `p`.
    pub fn sample_trajectory<R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        virt: &[f64],
        input: &StateVector,
        rng: &mut R,
    ) -> Result<StateVector> {
        self.circuit.check_params(theta)?;
        self.check_virtual(virt)?;
        self.check_state(input.n_qubits())?;
        let mut psi = input.clone();
        let n = self.n_qubits();
        for op in &self.ops {
            match *op {
                Op::Gate(g) => kernel::gate(psi.amplitudes_mut(), n, &self.circuit.gates()[g], theta, false),
                Op::Virtual(j) => {
                    let e = &self.registry.entries[j];
                    let act = e.generator.action();
                    let angle = virt.get(j).copied().unwrap_or(0.0);
                    if angle != 0.0 {
                        kernel::rotation(psi.amplitudes_mut(), &act, angle);
                        for (a, p) in self.shift_noise_channels(&e.generator)? {
                            if rng.random::<f64>() < p {
                                kernel::pauli(psi.amplitudes_mut(), &a);
                            }
                        }
                    }
                    if rng.random::<f64>() < e.p {
                        kernel::pauli(psi.amplitudes_mut(), &act);
                    }
                }
            }
        }
        Ok(psi)
    }
}

/// Inserts the standard noise model: a `k`-qubit depolarizing channel
/// (decomposed into `4^k - 1` Pauli rotations) after every `k`-qubit gate
/// (`k` in {1, 2}), a single-qubit depolarizing layer after the last gate,
/// and optional Gaussian fluctuations on every real parameter.
pub fn insert_noise(circuit: &Circuit, spec: &NoiseSpec) -> Result<NoisyCircuit> {
    spec.validate()?;
    let n = circuit.n_qubits();
    let mut channels = Vec::new();
    for (g, gate) in circuit.gates().iter().enumerate() {
        let qubits = gate.qubits();
        let k = qubits.len();
        let q = match k {
            1 => spec.q1,
            2 => spec.q2,
            _ => 0.0,
        };
        if let Gate::Rotation { generator, slot } = gate {
            if spec.param_variance > 0.0 {
                channels.push(ChannelSpec {
                    placement: Placement::AfterGate(g),
                    generator: generator.clone(),
                    sigma2: spec.param_variance,
                    origin: ChannelOrigin::Parameter { slot: *slot },
                });
            }
        }
        if q > 0.0 {
            let sigma2 = depolarizing_gaussian_variance(k, q)?;
            for local in PauliString::all_non_identity(k) {
                channels.push(ChannelSpec {
                    placement: Placement::AfterGate(g),
                    generator: PauliString::embed(n, &qubits, &local)?,
                    sigma2,
                    origin: ChannelOrigin::GateNoise { gate: g, k },
                });
            }
        }
    }
    if spec.q_readout > 0.0 {
        let sigma2 = depolarizing_gaussian_variance(1, spec.q_readout)?;
        for qubit in 0..n {
            for local in PauliString::all_non_identity(1) {
                channels.push(ChannelSpec {
                    placement: Placement::End,
                    generator: PauliString::embed(n, &[qubit], &local)?,
                    sigma2,
                    origin: ChannelOrigin::Readout { qubit },
                });
            }
        }
    }
    NoisyCircuit::with_channels(circuit.clone(), channels)
}
