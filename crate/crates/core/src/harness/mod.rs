//! End-to-end toy experiments: random-axis ansatz, artificial spectrum with
//! a reachable ground state, noisy optimization and parameter sweeps.

pub mod demo;
pub mod stats;
pub mod sweep;
pub mod toy;

pub use demo::{mitigation_demo, predict_bounds, MitigationDemo, Prediction};
pub use stats::{linear_fit, log_log_fit, spearman, LinearFit};
pub use sweep::{
    optimize_noiseless, optimize_noisy, run_sweep, NoiseRatios, PointResult, RunRecord, SweepConfig,
    SweepSummary, SweepVariable, CSV_COLUMNS,
};
pub use toy::{build_ansatz, build_toy_hamiltonian, ToyModel, ToyModelSpec};
