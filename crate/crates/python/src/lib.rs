//! Python module `glassydicke`.
//!
//! Core types are wrapped as classes; composite results (scans, Monte Carlo
//! estimates, validation reports) come back as plain dicts and lists.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use glassydicke::mc::{self, MCConfig};
use glassydicke::model::{self, DisorderRealization};
use glassydicke::phase::{self, Axis, BoundarySearch, FixedParams, GridSpec, PhaseLabel, ScanAxis};
use glassydicke::rs::{self, RSParams, SolveOptions};
use glassydicke::{acceptance, oracle, Error};

create_exception!(glassydicke, NotConvergedError, PyException);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NotConverged { .. } => NotConvergedError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Serializes through JSON so nested results arrive as dicts and lists.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "ModelParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyModelParams(model::ModelParams);

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (n, lambda_, j0, j, t))]
    fn new(n: usize, lambda_: f64, j0: f64, j: f64, t: f64) -> PyResult<Self> {
        model::ModelParams::new(n, lambda_, j0, j, t).map(Self).map_err(py_err)
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }
    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }
    #[getter]
    fn j0(&self) -> f64 {
        self.0.j0
    }
    #[getter]
    fn j(&self) -> f64 {
        self.0.j
    }
    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta()
    }
    /// Shifted mean coupling J0 + 2λ².
    #[getter]
    fn jtilde0(&self) -> f64 {
        self.0.jtilde0()
    }
    fn __repr__(&self) -> String {
        let p = &self.0;
        format!("ModelParams(n={}, lambda_={}, j0={}, j={}, t={})", p.n, p.lambda, p.j0, p.j, p.t)
    }
}

/// One quenched draw of the couplings.
#[pyclass(name = "Disorder", frozen, from_py_object)]
#[derive(Clone)]
struct PyDisorder(DisorderRealization);

#[pymethods]
impl PyDisorder {
    #[staticmethod]
    fn sample(n: usize, j0: f64, j: f64, seed: u64) -> PyResult<Self> {
        model::sample_disorder(n, j0, j, seed).map(Self).map_err(py_err)
    }
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        DisorderRealization::from_text(text).map(Self).map_err(py_err)
    }
    fn to_text(&self) -> String {
        self.0.to_text()
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }
    /// `(i, j, J_ij)` for every pair `i < j`, zero-based.
    fn couplings(&self) -> Vec<(usize, usize, f64)> {
        self.0.couplings.iter().collect()
    }
    /// Energy of a ±1 spin configuration in the photon-eliminated model.
    #[pyo3(signature = (spins, lambda_))]
    fn effective_energy(&self, spins: Vec<i8>, lambda_: f64) -> PyResult<f64> {
        let model = model::build_effective(&self.0, lambda_).map_err(py_err)?;
        let spins = model::SpinConfiguration::new(spins).map_err(py_err)?;
        model::effective_energy(&model, &spins).map_err(py_err)
    }
}

/// Exact classical and quantum reports by enumeration, with the
/// photon-elimination residual.
#[pyfunction]
#[pyo3(signature = (disorder, lambda_, beta))]
fn exact_oracle(py: Python<'_>, disorder: &PyDisorder, lambda_: f64, beta: f64) -> PyResult<Py<PyAny>> {
    let d = &disorder.0;
    let (classical, quantum, residual) = py
        .detach(|| -> glassydicke::Result<_> {
            let model = model::build_effective(d, lambda_)?;
            Ok((
                oracle::enumerate_classical(&model, beta)?,
                oracle::quantum_closed_form(d, lambda_, beta)?,
                oracle::mapping_residual(d, &model, lambda_, beta)?,
            ))
        })
        .map_err(py_err)?;
    #[derive(Serialize)]
    struct Report<'a> {
        classical: &'a oracle::ClassicalReport,
        quantum: &'a oracle::QuantumReport,
        residual: f64,
    }
    to_py(py, &Report { classical: &classical, quantum: &quantum, residual })
}

#[pyclass(name = "RSSolution", frozen, get_all)]
struct PyRSSolution {
    m: f64,
    q: f64,
    free_energy: f64,
    theta: f64,
    converged: bool,
    iterations: usize,
    residual: f64,
    branch: &'static str,
    label: &'static str,
}

#[pymethods]
impl PyRSSolution {
    fn __repr__(&self) -> String {
        format!(
            "RSSolution(m={}, q={}, theta={}, label={}, converged={})",
            self.m, self.q, self.theta, self.label, self.converged
        )
    }
}

fn options(tol: f64, max_iter: usize, damping: f64, order: usize) -> SolveOptions {
    SolveOptions { tol, max_iter, damping, order }
}

/// Replica-symmetric saddle point. Unconverged solves are returned with
/// `converged = False` rather than raised.
#[pyfunction]
#[pyo3(signature = (t, jtilde0, j, lambda_=0.0, tol=1e-10, max_iter=100_000, damping=0.5, order=20, classify_tol=phase::DEFAULT_CLASSIFY_TOL))]
#[allow(clippy::too_many_arguments)]
fn solve_rs(
    t: f64,
    jtilde0: f64,
    j: f64,
    lambda_: f64,
    tol: f64,
    max_iter: usize,
    damping: f64,
    order: usize,
    classify_tol: f64,
) -> PyResult<PyRSSolution> {
    let params = RSParams::new(t, jtilde0, j, lambda_).map_err(py_err)?;
    let s = rs::solve_rs(&params, &options(tol, max_iter, damping, order)).map_err(py_err)?;
    Ok(PyRSSolution {
        m: s.m,
        q: s.q,
        free_energy: s.free_energy,
        theta: s.theta,
        converged: s.converged,
        iterations: s.iterations,
        residual: s.residual,
        branch: s.branch.as_str(),
        label: phase::classify(&s, classify_tol).as_str(),
    })
}

fn axis(name: &str, values: Vec<f64>) -> PyResult<Axis> {
    Axis::explicit(name, values).map_err(py_err)
}

/// Grid over `jt_over_j` × `t_over_j`; one dict per node, columns of
/// descending temperature.
#[pyfunction]
#[pyo3(signature = (jt_over_j, t_over_j, j=1.0, lambda_=0.0, warm_start=true))]
fn scan_matter(
    py: Python<'_>,
    jt_over_j: Vec<f64>,
    t_over_j: Vec<f64>,
    j: f64,
    lambda_: f64,
    warm_start: bool,
) -> PyResult<Py<PyAny>> {
    let mut grid = GridSpec::matter(axis("jt_over_j", jt_over_j)?, axis("t_over_j", t_over_j)?, j);
    grid.lambda = lambda_;
    grid.warm_start = warm_start;
    let points = py.detach(|| phase::scan_matter(&grid)).map_err(py_err)?;
    to_py(py, &points)
}

/// Grid over `lambdas` × `temperatures` at fixed bare `j0`, `j`.
#[pyfunction]
#[pyo3(signature = (lambdas, temperatures, j0=0.0, j=1.0, warm_start=true))]
fn scan_optical(
    py: Python<'_>,
    lambdas: Vec<f64>,
    temperatures: Vec<f64>,
    j0: f64,
    j: f64,
    warm_start: bool,
) -> PyResult<Py<PyAny>> {
    let mut grid = GridSpec::optical(axis("lambda", lambdas)?, axis("t", temperatures)?, j0, j);
    grid.warm_start = warm_start;
    let points = py.detach(|| phase::scan_optical(&grid)).map_err(py_err)?;
    to_py(py, &points)
}

/// Bisects `bracket` along `axis` ("temperature", "jtilde0" or "lambda")
/// for the edge of the `target` phase.
#[pyfunction]
#[pyo3(signature = (axis, target, bracket, t=1.0, j0=0.0, j=1.0, lambda_=0.0, tol=1e-4))]
#[allow(clippy::too_many_arguments)]
fn locate_boundary(
    axis: &str,
    target: &str,
    bracket: (f64, f64),
    t: f64,
    j0: f64,
    j: f64,
    lambda_: f64,
    tol: f64,
) -> PyResult<f64> {
    let axis = match axis {
        "temperature" => ScanAxis::Temperature,
        "jtilde0" => ScanAxis::JTilde0,
        "lambda" => ScanAxis::Lambda,
        other => {
            return Err(PyValueError::new_err(format!(
                "axis must be temperature, jtilde0 or lambda, got `{other}`"
            )))
        }
    };
    let target: PhaseLabel = target.parse().map_err(py_err)?;
    let mut search = BoundarySearch::new(axis, FixedParams { t, j0, j, lambda: lambda_ }, target, bracket);
    search.tol = tol;
    phase::locate_boundary(&search).map_err(py_err)
}

#[allow(clippy::too_many_arguments)]
fn mc_config(
    ladder: Vec<f64>,
    sweeps: usize,
    burn_in: usize,
    exchange_interval: usize,
    block_count: usize,
    seed: u64,
) -> PyResult<MCConfig> {
    let config = MCConfig { sweeps, burn_in, ladder, exchange_interval, seed, block_count };
    config.validate().map_err(py_err)?;
    Ok(config)
}

/// Parallel tempering on one disorder realization.
#[pyfunction]
#[pyo3(signature = (disorder, lambda_, ladder, sweeps=20_000, burn_in=2_000, seed=1, exchange_interval=10, block_count=32))]
#[allow(clippy::too_many_arguments)]
fn monte_carlo(
    py: Python<'_>,
    disorder: &PyDisorder,
    lambda_: f64,
    ladder: Vec<f64>,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
    exchange_interval: usize,
    block_count: usize,
) -> PyResult<Py<PyAny>> {
    let config = mc_config(ladder, sweeps, burn_in, exchange_interval, block_count, seed)?;
    let model = model::build_effective(&disorder.0, lambda_).map_err(py_err)?;
    let est = py.detach(|| mc::run_parallel_tempering(&model, &config)).map_err(py_err)?;
    to_py(py, &est)
}

/// Disorder-averaged parallel tempering; `seed` is the master seed.
#[pyfunction]
#[pyo3(signature = (params, realizations, ladder, sweeps=20_000, burn_in=2_000, seed=1, exchange_interval=10, block_count=32))]
#[allow(clippy::too_many_arguments)]
fn disorder_average(
    py: Python<'_>,
    params: &PyModelParams,
    realizations: usize,
    ladder: Vec<f64>,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
    exchange_interval: usize,
    block_count: usize,
) -> PyResult<Py<PyAny>> {
    let config = mc_config(ladder, sweeps, burn_in, exchange_interval, block_count, seed)?;
    let avg = py
        .detach(|| mc::disorder_average(&params.0, realizations, &config))
        .map_err(py_err)?;
    to_py(py, &avg)
}

/// Runs acceptance criteria (all when `criteria` is None) and returns their
/// reports.
#[pyfunction]
#[pyo3(signature = (quick=true, criteria=None))]
fn validate(py: Python<'_>, quick: bool, criteria: Option<Vec<u8>>) -> PyResult<Py<PyAny>> {
    let ids = criteria.unwrap_or_else(|| (1..=8).collect());
    if let Some(bad) = ids.iter().find(|id| !(1..=8).contains(*id)) {
        return Err(PyValueError::new_err(format!("criteria: no criterion {bad}")));
    }
    let reports: Vec<_> = py.detach(|| {
        ids.iter()
            .map(|&id| acceptance::run_one(id, quick).expect("checked id"))
            .collect()
    });
    to_py(py, &reports)
}

#[pymodule]
#[pyo3(name = "glassydicke")]
fn glassydicke_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyDisorder>()?;
    m.add_class::<PyRSSolution>()?;
    m.add("NotConvergedError", m.py().get_type::<NotConvergedError>())?;
    m.add_function(wrap_pyfunction!(exact_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(solve_rs, m)?)?;
    m.add_function(wrap_pyfunction!(scan_matter, m)?)?;
    m.add_function(wrap_pyfunction!(scan_optical, m)?)?;
    m.add_function(wrap_pyfunction!(locate_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(disorder_average, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
