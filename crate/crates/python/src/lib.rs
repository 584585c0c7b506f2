//! Python bindings for the `vqa-noise` crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use vqa::bounds::{bound_report, scaling_helpers as rs_scaling};
use vqa::channels::{depolarizing_gaussian_variance as rs_dep_var, variance_of_stochastic as rs_var};
use vqa::harness::{build_toy_hamiltonian, mitigation_demo as rs_demo, run_sweep as rs_sweep};
use vqa::verify::{verify_channels as rs_verify, VerifyOptions};

fn err(e: vqa::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(module = "vqa_noise")]
#[derive(Clone)]
struct Circuit {
    inner: vqa::Circuit,
}

#[pymethods]
impl Circuit {
    #[new]
    fn new(n_qubits: usize) -> Self {
        Self {
            inner: vqa::Circuit::new(n_qubits),
        }
    }

    /// Appends `exp(-i theta P / 2)` for a Pauli string such as `"XZ"`;
    /// returns the parameter index.
    fn push_rotation(&mut self, generator: &str) -> PyResult<usize> {
        let p = generator.parse().map_err(err)?;
        self.inner.push_rotation(p).map_err(err)
    }

    fn push_cz(&mut self, a: usize, b: usize) -> PyResult<()> {
        self.inner.push_cz(a, b).map_err(err)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: vqa::Circuit::from_json(text).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Circuit(n_qubits={}, n_params={})", self.inner.n_qubits(), self.inner.n_params())
    }
}

#[pyclass(module = "vqa_noise")]
#[derive(Clone)]
struct NoiseSpec {
    inner: vqa::NoiseSpec,
}

#[pymethods]
impl NoiseSpec {
    #[new]
    #[pyo3(signature = (q1=0.0, q2=0.0, q_readout=0.0, param_variance=0.0))]
    fn new(q1: f64, q2: f64, q_readout: f64, param_variance: f64) -> PyResult<Self> {
        let inner = vqa::NoiseSpec {
            q1,
            q2,
            q_readout,
            param_variance,
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn q1(&self) -> f64 {
        self.inner.q1
    }

    #[getter]
    fn q2(&self) -> f64 {
        self.inner.q2
    }

    #[getter]
    fn q_readout(&self) -> f64 {
        self.inner.q_readout
    }

    #[getter]
    fn param_variance(&self) -> f64 {
        self.inner.param_variance
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "NoiseSpec(q1={}, q2={}, q_readout={}, param_variance={})",
            s.q1, s.q2, s.q_readout, s.param_variance
        )
    }
}

/// Expectation of an observable after a parameterized circuit, from `|0...0>`.
#[pyclass(module = "vqa_noise")]
#[derive(Clone)]
struct CostFunction {
    inner: vqa::CostFunction,
}

#[pymethods]
impl CostFunction {
    /// `pauli` is a Pauli string; alternatively pass `matrix`, a row-major
    /// list of complex entries.
    #[new]
    #[pyo3(signature = (circuit, pauli=None, matrix=None))]
    fn new(circuit: &Circuit, pauli: Option<&str>, matrix: Option<Vec<num_complex::Complex64>>) -> PyResult<Self> {
        let n = circuit.inner.n_qubits();
        let obs = match (pauli, matrix) {
            (Some(p), None) => vqa::Observable::pauli(&p.parse().map_err(err)?),
            (None, Some(m)) => vqa::Observable::dense(n, m).map_err(err)?,
            _ => return Err(PyValueError::new_err("give exactly one of pauli= or matrix=")),
        };
        let inner = vqa::CostFunction::single(circuit.inner.clone(), obs, vqa::StateVector::zero(n))
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    fn __call__(&self, theta: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&theta).map_err(err)
    }

    fn gradient(&self, theta: Vec<f64>) -> PyResult<Vec<f64>> {
        vqa::cost::gradient(&self.inner, &theta).map_err(err)
    }

    fn second_derivative(&self, theta: Vec<f64>, i: usize) -> PyResult<f64> {
        vqa::cost::second_derivative(&self.inner, &theta, i).map_err(err)
    }

    fn fubini_diagonal(&self, theta: Vec<f64>) -> PyResult<Vec<f64>> {
        vqa::cost::fubini_diagonal(&self.inner, &theta).map_err(err)
    }
}

/// Noisy cost evaluation with depolarizing noise after every gate.
#[pyclass(module = "vqa_noise")]
struct NoisyEvaluator {
    inner: vqa::NoisyEvaluator,
}

#[pymethods]
impl NoisyEvaluator {
    /// `samples=None` evaluates the channels exactly; otherwise averages
    /// `samples` sampled trajectories drawn from `seed`.
    #[new]
    #[pyo3(signature = (cost, noise, samples=None, seed=0))]
    fn new(cost: &CostFunction, noise: &NoiseSpec, samples: Option<usize>, seed: u64) -> PyResult<Self> {
        let noisy = vqa::insert_noise(cost.inner.circuit(), &noise.inner).map_err(err)?;
        let mode = match samples {
            None => vqa::EvalMode::Exact,
            Some(samples) => vqa::EvalMode::Trajectory { samples, seed },
        };
        Ok(Self {
            inner: vqa::NoisyEvaluator::new(cost.inner.clone(), noisy, mode).map_err(err)?,
        })
    }

    /// Returns `(value, standard_error)`.
    fn __call__(&self, theta: Vec<f64>) -> PyResult<(f64, f64)> {
        let e = self.inner.eval(&theta).map_err(err)?;
        Ok((e.value, e.std_error))
    }

    #[getter]
    fn total_variance(&self) -> f64 {
        self.inner.noisy_circuit().total_variance()
    }

    #[getter]
    fn n_virtual(&self) -> usize {
        self.inner.noisy_circuit().n_virtual()
    }

    #[getter]
    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }

    /// Leading-order mitigated value and its bookkeeping.
    fn mitigate<'py>(&self, py: Python<'py>, theta: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        let rep = vqa::mitigate(&self.inner, &theta).map_err(err)?;
        to_dict(py, &rep)
    }

    /// Error estimates and bounds at `theta`.
    fn bounds<'py>(&self, py: Python<'py>, theta: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
        let v = self.inner.eval(&theta).map_err(err)?.value;
        let cf = self.inner.cost();
        let rep = bound_report(cf, self.inner.noisy_circuit(), &theta, v).map_err(err)?;
        to_dict(py, &rep)
    }
}

/// The toy problem: random-axis ansatz and a Hamiltonian whose ground state
/// the ansatz reaches at `theta_opt`.
#[pyfunction]
#[pyo3(signature = (n=4, depth=2, e0=1.0, e1=51.0, emax=100.0, seed=None))]
fn toy_model(
    py: Python<'_>,
    n: usize,
    depth: usize,
    e0: f64,
    e1: f64,
    emax: f64,
    seed: Option<u64>,
) -> PyResult<(CostFunction, Vec<f64>)> {
    let mut spec = vqa::harness::ToyModelSpec {
        n,
        depth,
        e0,
        e1,
        emax,
        ..Default::default()
    };
    if let Some(s) = seed {
        spec = spec.reseeded(s);
    }
    let model = py.detach(|| build_toy_hamiltonian(&spec)).map_err(err)?;
    Ok((
        CostFunction {
            inner: model.cost_function(),
        },
        model.theta_opt,
    ))
}

#[pyfunction]
fn variance_of_stochastic(p: f64) -> PyResult<f64> {
    rs_var(p).map_err(err)
}

#[pyfunction]
fn depolarizing_gaussian_variance(k: usize, q: f64) -> PyResult<f64> {
    rs_dep_var(k, q).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, m, r, eps))]
fn scaling_helpers<'py>(py: Python<'py>, n: f64, m: f64, r: f64, eps: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = rs_scaling(n, m, r, eps).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("sufficient", s.sufficient)?;
    d.set_item("sufficient_mitigated", s.sufficient_mitigated)?;
    d.set_item("necessary", s.necessary)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (cases=200, seed=0))]
fn verify_channels<'py>(py: Python<'py>, cases: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let opts = VerifyOptions {
        cases,
        seed,
        ..VerifyOptions::default()
    };
    let rep = py.detach(|| rs_verify(&opts)).map_err(err)?;
    to_dict(py, &rep)
}

/// Runs the sweep section of a JSON run configuration.
#[pyfunction]
fn run_sweep<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = vqa::RunConfig::from_json(config_json).map_err(err)?;
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| PyValueError::new_err("config has no \"sweep\" section"))?;
    let rec = py.detach(|| rs_sweep(&cfg.toy_model, &sweep, cfg.seed)).map_err(err)?;
    to_dict(py, &rec)
}

/// Leading-order mitigation on the toy model described by a JSON run configuration.
#[pyfunction]
fn mitigation_demo<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = vqa::RunConfig::from_json(config_json).map_err(err)?;
    let demo = py.detach(|| rs_demo(&cfg)).map_err(err)?;
    to_dict(py, &demo)
}

#[pymodule]
#[pyo3(name = "vqa_noise")]
fn vqa_noise_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Circuit>()?;
    m.add_class::<NoiseSpec>()?;
    m.add_class::<CostFunction>()?;
    m.add_class::<NoisyEvaluator>()?;
    m.add_function(wrap_pyfunction!(toy_model, m)?)?;
    m.add_function(wrap_pyfunction!(variance_of_stochastic, m)?)?;
    m.add_function(wrap_pyfunction!(depolarizing_gaussian_variance, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_helpers, m)?)?;
    m.add_function(wrap_pyfunction!(verify_channels, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(mitigation_demo, m)?)?;
    Ok(())
}
