//! Python bindings for `rftrace`.
//!
//! Heavy calls release the interpreter lock while they run.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyTypeError, PyValueError};
use pyo3::prelude::*;

use rftrace::bench::{self, find_q_for_target};
use rftrace::gen::{
    gen_barabasi_albert, gen_grid2d, gen_grid3d, gen_ring, GenSpec, DEFAULT_BA_M, DEFAULT_KNN_K,
    DEFAULT_NOISE_SIGMA,
};
use rftrace::{io, sdd, SolverConfig, StreamFamily, SubstreamId, SymmetricOperator};

create_exception!(rftrace_py, RftraceError, PyValueError);

fn to_py(e: rftrace::Error) -> PyErr {
    match e {
        rftrace::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        e => RftraceError::new_err(e.to_string()),
    }
}

fn solver(tol: f64, direct: bool) -> SolverConfig {
    if direct {
        SolverConfig::dense()
    } else {
        SolverConfig::cg(tol)
    }
}

/// A weighted undirected graph.
#[pyclass(name = "Graph", module = "rftrace_py", frozen)]
pub struct PyGraph {
    inner: rftrace::WeightedGraph,
}

#[pymethods]
impl PyGraph {
    /// Builds a graph on `n` nodes from `(i, j, w)` triples.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let inner = rftrace::WeightedGraph::with_nodes(n, &edges).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn ring(n: usize) -> PyResult<Self> {
        gen_ring(n).map(Self::from).map_err(to_py)
    }

    #[staticmethod]
    fn grid2d(rows: usize, cols: usize) -> PyResult<Self> {
        gen_grid2d(rows, cols).map(Self::from).map_err(to_py)
    }

    #[staticmethod]
    fn grid3d(a: usize, b: usize, c: usize) -> PyResult<Self> {
        gen_grid3d(a, b, c).map(Self::from).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (n, m = DEFAULT_BA_M, seed = 0))]
    fn barabasi_albert(py: Python<'_>, n: usize, m: usize, seed: u64) -> PyResult<Self> {
        py.detach(|| gen_barabasi_albert(n, m, seed))
            .map(Self::from)
            .map_err(to_py)
    }

    /// k-nearest-neighbor graph over points sampled from a heart-shaped surface.
    #[staticmethod]
    #[pyo3(signature = (n, k = DEFAULT_KNN_K, noise_sigma = DEFAULT_NOISE_SIGMA, seed = 0))]
    fn heart(py: Python<'_>, n: usize, k: usize, noise_sigma: f64, seed: u64) -> PyResult<Self> {
        let spec = GenSpec::KnnCloud {
            n,
            k,
            noise_sigma,
            seed,
        };
        py.detach(|| spec.generate()).map(Self::from).map_err(to_py)
    }

    /// Generates from a spec string such as `"grid2d:50x50"`.
    #[staticmethod]
    fn generate(py: Python<'_>, spec: &str) -> PyResult<Self> {
        let spec: GenSpec = spec.parse().map_err(to_py)?;
        py.detach(|| spec.generate()).map(Self::from).map_err(to_py)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        io::read_graph(path).map(Self::from).map_err(to_py)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_graph(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn degrees(&self) -> Vec<f64> {
        self.inner.degrees().to_vec()
    }

    /// Edges as `(i, j, w)` with `i < j`.
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().collect()
    }

    fn laplacian_apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.laplacian_apply(&x).map_err(to_py)
    }

    fn component_count(&self) -> usize {
        self.inner.component_count()
    }

    fn validate(&self) -> Vec<String> {
        self.inner
            .validate()
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, edges={})",
            self.inner.n(),
            self.inner.num_edges()
        )
    }
}

impl From<rftrace::WeightedGraph> for PyGraph {
    fn from(inner: rftrace::WeightedGraph) -> Self {
        Self { inner }
    }
}

/// A symmetric diagonally dominant matrix with nonnegative diagonal.
#[pyclass(name = "SddMatrix", module = "rftrace_py", frozen)]
pub struct PySddMatrix {
    inner: rftrace::SddMatrix,
}

#[pymethods]
impl PySddMatrix {
    /// Builds an `n × n` matrix from `(i, j, value)` entries; each off-diagonal
    /// pair may be given once or twice with equal values.
    #[new]
    fn new(n: usize, entries: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let inner = rftrace::SddMatrix::from_entries(n, &entries).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_graph(g: &PyGraph) -> Self {
        Self {
            inner: rftrace::SddMatrix::from_laplacian(&g.inner),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed = 0))]
    fn random(n: usize, seed: u64) -> Self {
        Self {
            inner: sdd::random_sdd(n, seed),
        }
    }

    /// Reads a Matrix Market `coordinate real symmetric` file.
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        io::read_matrix_market(path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_matrix_market(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn diag(&self) -> Vec<f64> {
        self.inner.diag().to_vec()
    }

    /// Off-diagonal entries `(i, j, value)` with `i < j`.
    fn entries(&self) -> Vec<(usize, usize, f64)> {
        self.inner.upper_entries()
    }

    /// The pair of Laplacians `(L1, L2)` with `s_G = s_L2 - s_L1`.
    fn laplacians(&self) -> PyResult<(PyGraph, PyGraph)> {
        let (l1, l2) =
            rftrace::build_laplacians(&rftrace::dd_decompose(&self.inner)).map_err(to_py)?;
        Ok((l1.into(), l2.into()))
    }

    fn __repr__(&self) -> String {
        format!("SddMatrix(n={})", self.inner.n())
    }
}

/// Mean, spread and cost of `k` Monte Carlo replicates.
#[pyclass(name = "EstimatorResult", module = "rftrace_py", frozen)]
pub struct PyEstimatorResult {
    inner: rftrace::EstimatorResult,
}

#[pymethods]
impl PyEstimatorResult {
    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean
    }

    #[getter]
    fn sample_variance(&self) -> f64 {
        self.inner.sample_variance
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn stderr(&self) -> f64 {
        self.inner.stderr
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    #[getter]
    fn total_work(&self) -> u64 {
        self.inner.total_work
    }

    fn work_per_replicate(&self) -> f64 {
        self.inner.work_per_replicate()
    }

    /// Smallest `k` whose relative standard error reaches `epsilon`.
    fn required_k(&self, epsilon: f64) -> PyResult<usize> {
        bench::required_k(&self.inner, epsilon).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let r = &self.inner;
        format!(
            "EstimatorResult(method='{}', q={}, mean={}, stderr={}, k={})",
            r.method, r.q, r.mean, r.stderr, r.k
        )
    }
}

impl From<rftrace::EstimatorResult> for PyEstimatorResult {
    fn from(inner: rftrace::EstimatorResult) -> Self {
        Self { inner }
    }
}

enum Operator<'py> {
    Graph(PyRef<'py, PyGraph>),
    Sdd(PyRef<'py, PySddMatrix>),
}

impl<'py> Operator<'py> {
    fn extract(obj: &Bound<'py, PyAny>) -> PyResult<Self> {
        if let Ok(g) = obj.cast::<PyGraph>() {
            return Ok(Operator::Graph(g.borrow()));
        }
        if let Ok(m) = obj.cast::<PySddMatrix>() {
            return Ok(Operator::Sdd(m.borrow()));
        }
        Err(PyTypeError::new_err("expected a Graph or an SddMatrix"))
    }

    fn get(&self) -> &(dyn SymmetricOperator + Send + Sync) {
        match self {
            Operator::Graph(g) => &g.inner,
            Operator::Sdd(m) => &m.inner,
        }
    }
}

/// Random spanning forest estimate of `s(q)`: the mean root count of `k` forests.
#[pyfunction]
#[pyo3(signature = (graph, q, k, seed = 0))]
fn estimate_rf(
    py: Python<'_>,
    graph: &PyGraph,
    q: f64,
    k: usize,
    seed: u64,
) -> PyResult<PyEstimatorResult> {
    py.detach(|| rftrace::estimate_rf(&graph.inner, q, k, seed))
        .map(Into::into)
        .map_err(to_py)
}

/// Gaussian-probe estimate of `s(q)` for a Graph or an SddMatrix.
#[pyfunction]
#[pyo3(signature = (op, q, k, seed = 0, tol = 1e-8, direct = false))]
fn estimate_girard(
    py: Python<'_>,
    op: &Bound<'_, PyAny>,
    q: f64,
    k: usize,
    seed: u64,
    tol: f64,
    direct: bool,
) -> PyResult<PyEstimatorResult> {
    let op = Operator::extract(op)?;
    let op = op.get();
    let cfg = solver(tol, direct);
    py.detach(|| rftrace::estimate_girard(op, q, k, seed, &cfg))
        .map(Into::into)
        .map_err(to_py)
}

/// Forest estimate of `s(q)` for an SDD matrix through its two Laplacians.
#[pyfunction]
#[pyo3(signature = (matrix, q, k, seed = 0))]
fn estimate_sdd(
    py: Python<'_>,
    matrix: &PySddMatrix,
    q: f64,
    k: usize,
    seed: u64,
) -> PyResult<PyEstimatorResult> {
    py.detach(|| rftrace::estimate_sdd(&matrix.inner, q, k, seed))
        .map(Into::into)
        .map_err(to_py)
}

/// One forest: `(sorted roots, walk steps)`.
#[pyfunction]
#[pyo3(signature = (graph, q, seed = 0, index = 0))]
fn sample_forest(
    py: Python<'_>,
    graph: &PyGraph,
    q: f64,
    seed: u64,
    index: u64,
) -> PyResult<(Vec<usize>, u64)> {
    let stream = SubstreamId::new(seed, StreamFamily::Forest, index);
    let f = py
        .detach(|| rftrace::sample_forest(&graph.inner, q, stream))
        .map_err(to_py)?;
    Ok((f.roots, f.steps))
}

/// Sorted eigenvalues of a Graph Laplacian or an SddMatrix.
#[pyfunction]
fn spectrum(py: Python<'_>, op: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
    let op = Operator::extract(op)?;
    let op = op.get();
    py.detach(|| rftrace::spectrum(op))
        .map(|s| s.eigenvalues)
        .map_err(to_py)
}

fn with_spectrum(
    py: Python<'_>,
    op: &Bound<'_, PyAny>,
    q: f64,
    f: fn(&rftrace::SpectralSummary, f64) -> rftrace::Result<f64>,
) -> PyResult<f64> {
    let op = Operator::extract(op)?;
    let op = op.get();
    py.detach(|| f(&rftrace::spectrum(op)?, q)).map_err(to_py)
}

/// Exact `s(q)` from the dense spectrum.
#[pyfunction]
fn exact_s(py: Python<'_>, op: &Bound<'_, PyAny>, q: f64) -> PyResult<f64> {
    with_spectrum(py, op, q, rftrace::exact_s)
}

/// Variance of a single forest root count.
#[pyfunction]
fn var_wilson(py: Python<'_>, op: &Bound<'_, PyAny>, q: f64) -> PyResult<f64> {
    with_spectrum(py, op, q, rftrace::var_wilson)
}

/// Variance of a single Gaussian-probe replicate.
#[pyfunction]
fn var_girard(py: Python<'_>, op: &Bound<'_, PyAny>, q: f64) -> PyResult<f64> {
    with_spectrum(py, op, q, rftrace::var_girard)
}

/// Solves `(L + qI) x = q y`.
#[pyfunction]
#[pyo3(signature = (op, q, y, tol = 1e-8, direct = false))]
fn smooth(
    py: Python<'_>,
    op: &Bound<'_, PyAny>,
    q: f64,
    y: Vec<f64>,
    tol: f64,
    direct: bool,
) -> PyResult<Vec<f64>> {
    let op = Operator::extract(op)?;
    let op = op.get();
    let cfg = solver(tol, direct);
    py.detach(|| rftrace::smooth(op, q, &y, &cfg))
        .map_err(to_py)
}

/// A `q` with `s(q)` close to `target`.
#[pyfunction]
#[pyo3(signature = (graph, target, seed = 0))]
fn q_for_target(py: Python<'_>, graph: &PyGraph, target: f64, seed: u64) -> PyResult<f64> {
    py.detach(|| find_q_for_target(&graph.inner, target, seed))
        .map_err(to_py)
}

#[pymodule]
fn rftrace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RftraceError", m.py().get_type::<RftraceError>())?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PySddMatrix>()?;
    m.add_class::<PyEstimatorResult>()?;
    m.add_function(wrap_pyfunction!(estimate_rf, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_girard, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_sdd, m)?)?;
    m.add_function(wrap_pyfunction!(sample_forest, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(exact_s, m)?)?;
    m.add_function(wrap_pyfunction!(var_wilson, m)?)?;
    m.add_function(wrap_pyfunction!(var_girard, m)?)?;
    m.add_function(wrap_pyfunction!(smooth, m)?)?;
    m.add_function(wrap_pyfunction!(q_for_target, m)?)?;
    Ok(())
}
