//! Python bindings for `qest-core`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qest_core::fisherinfo::{self, verify_bounds as core_verify_bounds};
use qest_core::harness::io::prior_from_str;
use qest_core::{
    derive_stream, sample_state, Dim, ExperimentConfig, PriorSpec, Protocol, QestError, RunRow, RunTable,
    SchemeSpec, Vec3,
};

fn py_err(e: QestError) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn dim(d: usize) -> PyResult<Dim> {
    Dim::try_from(d).map_err(py_err)
}

fn prior(kind: &str, d: usize) -> PyResult<PriorSpec> {
    prior_from_str(kind, dim(d)?).map_err(py_err)
}

fn vec3(v: (f64, f64, f64)) -> Vec3 {
    Vec3::new(v.0, v.1, v.2)
}

fn tuple3(v: Vec3) -> (f64, f64, f64) {
    (v.x, v.y, v.z)
}

fn rows_of(m: &qest_core::InfoMatrix) -> Vec<Vec<f64>> {
    let n = m.dim().get();
    (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect()
}

/// Qubit state with purity `r`, unit direction `n` and model dimension `d`.
#[pyclass(name = "BlochState", module = "qest", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBlochState {
    inner: qest_core::BlochState,
}

#[pymethods]
impl PyBlochState {
    #[new]
    #[pyo3(signature = (r, n, d = 3))]
    fn new(r: f64, n: (f64, f64, f64), d: usize) -> PyResult<Self> {
        let inner = qest_core::BlochState::new(r, vec3(n), dim(d)?).map_err(py_err)?;
        Ok(PyBlochState { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (v, d = 3))]
    fn from_bloch_vector(v: (f64, f64, f64), d: usize) -> PyResult<Self> {
        let inner = qest_core::BlochState::from_bloch_vector(vec3(v), dim(d)?).map_err(py_err)?;
        Ok(PyBlochState { inner })
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r()
    }

    #[getter]
    fn n(&self) -> (f64, f64, f64) {
        tuple3(self.inner.direction())
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.dim().get()
    }

    fn bloch_vector(&self) -> (f64, f64, f64) {
        tuple3(self.inner.bloch_vector())
    }

    /// `(sqrt(1 - r^2), r n)`.
    fn four_vector(&self) -> (f64, (f64, f64, f64)) {
        let f = self.inner.four_vector();
        (f.t, tuple3(f.v))
    }

    fn __repr__(&self) -> String {
        let n = self.inner.direction();
        format!("BlochState(r={}, n=({}, {}, {}), d={})", self.inner.r(), n.x, n.y, n.z, self.d())
    }
}

#[pyfunction]
fn fidelity(a: &PyBlochState, b: &PyBlochState) -> f64 {
    qest_core::fidelity(&a.inner, &b.inner)
}

/// Returns `(n0, per_axis_step1, n1, leftover)`.
#[pyfunction]
#[pyo3(signature = (n, alpha = 0.7, d = 3))]
fn split_copies(n: u64, alpha: f64, d: usize) -> PyResult<(u64, u64, u64, u64)> {
    let s = qest_core::split_copies(n, alpha, dim(d)?).map_err(py_err)?;
    Ok((s.n0, s.per_axis_step1, s.n1, s.leftover))
}

#[pyfunction]
#[pyo3(signature = (n, state, alpha = 0.7, seed = 0, stream = 0))]
fn adaptive_estimate(n: u64, state: &PyBlochState, alpha: f64, seed: u64, stream: u64) -> PyResult<PyBlochState> {
    let cfg = qest_core::AdaptiveConfig::new(n, alpha, state.inner.dim()).map_err(py_err)?;
    let est = qest_core::adaptive_estimate(&cfg, &state.inner, &mut derive_stream(seed, stream)).map_err(py_err)?;
    Ok(PyBlochState { inner: est.into_state() })
}

#[pyfunction]
#[pyo3(signature = (n, state, seed = 0, stream = 0))]
fn tomography_estimate(n: u64, state: &PyBlochState, seed: u64, stream: u64) -> PyResult<PyBlochState> {
    let s = &state.inner;
    let est = qest_core::tomography_estimate(n, s.dim(), s, &mut derive_stream(seed, stream)).map_err(py_err)?;
    Ok(PyBlochState { inner: est.into_state() })
}

fn row_dict<'py>(py: Python<'py>, r: &RunRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("N", r.n)?;
    d.set_item("trials", r.trials)?;
    d.set_item("mean_fidelity", r.mean_fidelity)?;
    d.set_item("std_err", r.std_err)?;
    d.set_item("scaled_risk", r.scaled_risk)?;
    d.set_item("scaled_risk_err", r.scaled_risk_err)?;
    Ok(d)
}

/// Monte Carlo sweep; returns one dict per grid point with the CSV column
/// names as keys.
#[pyfunction]
#[pyo3(signature = (protocol = "adaptive", prior_kind = "bures", d = 3, n_grid = None, trials = 100_000, alpha = 0.7, seed = 0, threads = 0))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    protocol: &str,
    prior_kind: &str,
    d: usize,
    n_grid: Option<Vec<u64>>,
    trials: u64,
    alpha: f64,
    seed: u64,
    threads: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let protocol: Protocol = protocol.parse().map_err(py_err)?;
    let mut cfg = ExperimentConfig::new(protocol, prior(prior_kind, d)?);
    if let Some(g) = n_grid {
        cfg.n_grid = g;
    }
    cfg.trials = trials;
    cfg.alpha = alpha;
    cfg.master_seed = seed;
    cfg.threads = threads;
    let table = py.detach(|| qest_core::run_experiment(&cfg)).map_err(py_err)?;
    table.rows.iter().map(|r| row_dict(py, r)).collect()
}

/// Fits `1 - F = a N^(-b)`; returns `{a, b, a_err, b_err, gof}`.
#[pyfunction]
#[pyo3(signature = (n, mean_fidelity, std_err = None))]
fn fit_scaling<'py>(
    py: Python<'py>,
    n: Vec<u64>,
    mean_fidelity: Vec<f64>,
    std_err: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    if n.len() != mean_fidelity.len() || std_err.as_ref().is_some_and(|e| e.len() != n.len()) {
        return Err(PyValueError::new_err("n, mean_fidelity and std_err must have equal length"));
    }
    let rows = n
        .iter()
        .zip(&mean_fidelity)
        .enumerate()
        .map(|(k, (&n, &f))| RunRow::new(n, 0, f, std_err.as_ref().map(|e| e[k])))
        .collect();
    let table = RunTable {
        protocol: Protocol::Adaptive,
        dim: Dim::Three,
        prior: qest_core::PriorKind::Bures,
        alpha: 0.7,
        rows,
    };
    let fit = qest_core::fit_scaling(&table).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("a", fit.a)?;
    d.set_item("b", fit.b)?;
    d.set_item("a_err", fit.a_err)?;
    d.set_item("b_err", fit.b_err)?;
    d.set_item("gof", fit.gof)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (r, theta, d = 3))]
fn qfi(r: f64, theta: f64, d: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows_of(&qest_core::qfi(r, theta, dim(d)?).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (r, theta, phi, axis, d = 3))]
fn fisher_single_axis(r: f64, theta: f64, phi: f64, axis: (f64, f64, f64), d: usize) -> PyResult<Vec<Vec<f64>>> {
    let m = qest_core::fisher_single_axis(r, theta, phi, &vec3(axis).normalize(), dim(d)?).map_err(py_err)?;
    Ok(rows_of(&m))
}

/// `(tr H^-1 I, tr H I^-1)` for a scheme measuring `axes` with `weights`
/// (equal weights by default).
#[pyfunction]
#[pyo3(signature = (r, theta, phi, axes, weights = None, d = 3))]
fn bound_stats(
    r: f64,
    theta: f64,
    phi: f64,
    axes: Vec<(f64, f64, f64)>,
    weights: Option<Vec<f64>>,
    d: usize,
) -> PyResult<(f64, f64)> {
    let dim = dim(d)?;
    let k = axes.len();
    let weights = weights.unwrap_or_else(|| vec![1.0 / k as f64; k]);
    if weights.len() != k {
        return Err(PyValueError::new_err("axes and weights must have equal length"));
    }
    let scheme = SchemeSpec::new(axes.into_iter().map(vec3).zip(weights).collect()).map_err(py_err)?;
    let h = qest_core::qfi(r, theta, dim).map_err(py_err)?;
    let i = qest_core::fisher_scheme(r, theta, phi, &scheme, dim).map_err(py_err)?;
    let s = qest_core::bound_stats(&h, &i).map_err(py_err)?;
    Ok((s.gm, s.dual))
}

/// Number of sweep points that satisfy the separable-measurement bounds,
/// and the sweep size.
#[pyfunction]
#[pyo3(signature = (d = 3, sweeps = 200, seed = 0))]
fn verify_bounds(d: usize, sweeps: usize, seed: u64) -> PyResult<(usize, usize)> {
    let checks = core_verify_bounds(dim(d)?, sweeps, seed).map_err(py_err)?;
    Ok((checks.iter().filter(|c| c.pass).count(), checks.len()))
}

#[pyfunction]
#[pyo3(signature = (prior_kind, d, n))]
fn collective_bound(prior_kind: &str, d: usize, n: u64) -> PyResult<f64> {
    Ok(qest_core::collective_bound(&prior(prior_kind, d)?, dim(d)?, n))
}

#[pyfunction]
fn separable_constant(d: usize) -> PyResult<f64> {
    Ok(fisherinfo::separable_constant(dim(d)?))
}

#[pyfunction]
#[pyo3(signature = (prior_kind = "bures", d = 3))]
fn mean_purity(prior_kind: &str, d: usize) -> PyResult<f64> {
    Ok(qest_core::mean_purity(&prior(prior_kind, d)?))
}

/// `count` prior draws as `(r, nx, ny, nz)`; draw `k` uses stream `k`.
#[pyfunction]
#[pyo3(signature = (prior_kind = "bures", d = 3, count = 1000, seed = 0))]
fn sample_prior(prior_kind: &str, d: usize, count: u64, seed: u64) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let p = prior(prior_kind, d)?;
    Ok((0..count)
        .map(|k| {
            let s = sample_state(&p, &mut derive_stream(seed, k));
            let n = s.direction();
            (s.r(), n.x, n.y, n.z)
        })
        .collect())
}

#[pymodule]
fn qest(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBlochState>()?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(split_copies, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(tomography_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(qfi, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_single_axis, m)?)?;
    m.add_function(wrap_pyfunction!(bound_stats, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(collective_bound, m)?)?;
    m.add_function(wrap_pyfunction!(separable_constant, m)?)?;
    m.add_function(wrap_pyfunction!(mean_purity, m)?)?;
    m.add_function(wrap_pyfunction!(sample_prior, m)?)?;
    Ok(())
}
