//! Noise-precision analysis for variational quantum algorithms.
//!
//! Circuits are sequences of Pauli rotations `exp(-i theta A / 2)` and fixed
//! gates. Noise channels are represented as virtual rotation parameters with
//! zero mean and a Gaussian variance, which turns the effect of noise on the
//! cost into a statement about cost-landscape curvature.

pub mod bounds;
pub mod channels;
pub mod circuit;
pub mod config;
pub mod cost;
pub mod density;
pub mod error;
pub mod evaluator;
pub mod harness;
pub mod mitigation;
pub mod noise;
pub mod observable;
pub mod optimize;
pub mod pauli;
pub mod state;
pub mod verify;

pub use channels::{
    depolarizing_gaussian_variance, stochastic_of_variance, variance_of_stochastic, Channel,
    DepolarizingChannel, GaussianRotationChannel, PauliTransferMatrix, StochasticPauliChannel,
};
pub use bounds::{BoundReport, SpectrumInfo};
pub use circuit::{Circuit, FixedGate, Gate};
pub use config::RunConfig;
pub use cost::{CostFunction, CostTerm};
pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use evaluator::{EvalMode, Estimate, NoisyEvaluator};
pub use mitigation::{mitigate, MitigationReport};
pub use noise::{insert_noise, NoiseSpec, NoisyCircuit, SlotId, VirtualParameterRegistry};
pub use observable::Observable;
pub use optimize::{OptimizerConfig, OptimizeResult};
pub use pauli::{Pauli, PauliString};
pub use state::StateVector;
