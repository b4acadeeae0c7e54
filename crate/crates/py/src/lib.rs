//! Python bindings: models, queries, run generation, statistical checks and
//! the numerical oracle.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::nptasmc::cli::bundled_examples;
use ::nptasmc::engine::{random_run, RunOptions};
use ::nptasmc::model::{validate, NetworkModel};
use ::nptasmc::monitor::check;
use ::nptasmc::oracle::exact_probability;
use ::nptasmc::rng::substream;
use ::nptasmc::sampler::{outcome_pairs, outcomes, satisfied, satisfied_pairs, Jobs};
use ::nptasmc::stats::{self, CompareParams, EstimateParams, SprtParams};
use ::nptasmc::text::{parse_model, parse_query, serialize_run, PwctlQuery};
use ::nptasmc::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Validation(_) | Error::InvalidParameter(_) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A validated network.
#[pyclass(frozen)]
struct Model {
    inner: NetworkModel,
}

#[pymethods]
impl Model {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let doc = parse_model(text).map_err(|e| err(e.into()))?;
        let inner = validate(&doc).map_err(|e| err(e.into()))?;
        Ok(Model { inner })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn components(&self) -> Vec<String> {
        self.inner.components.iter().map(|c| c.name.clone()).collect()
    }

    #[getter]
    fn clocks(&self) -> Vec<String> {
        self.inner.clocks.iter().map(|c| c.name.clone()).collect()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Model({:?}, components={:?})", self.inner.name, self.components())
    }
}

/// A query resolved against one model.
#[pyclass(frozen)]
struct Query {
    inner: PwctlQuery,
    text: String,
}

#[pymethods]
impl Query {
    #[new]
    fn new(text: &str, model: &Model) -> PyResult<Self> {
        let inner = parse_query(text, &model.inner).map_err(|e| err(e.into()))?;
        let text = inner.display(&model.inner).to_string();
        Ok(Query { inner, text })
    }

    #[getter]
    fn bound(&self) -> f64 {
        self.inner.bound
    }

    fn __str__(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!("Query({:?})", self.text)
    }
}

/// Generates run `index` of stream `seed` and checks the query on it.
/// Returns `(trace, satisfied, hit_cost)`.
#[pyfunction]
#[pyo3(signature = (model, query, seed=0, index=0))]
fn simulate(model: &Model, query: &Query, seed: u64, index: u64) -> PyResult<(String, bool, Option<f64>)> {
    let (m, q) = (&model.inner, &query.inner);
    let run = random_run(m, q.observer, q.bound, &mut substream(seed, index)).map_err(err)?;
    let o = check(m, &run, q).map_err(err)?;
    Ok((serialize_run(&run, m), o.satisfied, o.hit_cost))
}

#[pyfunction]
fn required_samples(epsilon: f64, delta: f64) -> PyResult<u64> {
    stats::required_samples(&EstimateParams { delta, epsilon }).map_err(err)
}

/// Probability estimate with `required_samples(epsilon, delta)` runs.
#[pyfunction]
#[pyo3(signature = (model, query, epsilon=0.05, delta=0.05, seed=0, jobs=None))]
fn estimate<'py>(
    py: Python<'py>,
    model: &Model,
    query: &Query,
    epsilon: f64,
    delta: f64,
    seed: u64,
    jobs: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let jobs = Jobs::new(jobs).map_err(err)?;
    let src = outcomes(&model.inner, &query.inner, seed, jobs, RunOptions::default());
    let r = stats::estimate(satisfied(src), &EstimateParams { delta, epsilon }).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("p_hat", r.p_hat)?;
    d.set_item("lo", r.lo)?;
    d.set_item("hi", r.hi)?;
    d.set_item("samples", r.samples)?;
    d.set_item("successes", r.successes)?;
    Ok(d)
}

/// Sequential test of `p >= theta + delta0` (`"H0"`) against `p <= theta - delta1` (`"H1"`).
#[pyfunction]
#[pyo3(signature = (model, query, theta, delta0=0.01, delta1=0.01, alpha=0.05, beta=0.05, seed=0, jobs=None))]
#[allow(clippy::too_many_arguments)]
fn sprt<'py>(
    py: Python<'py>,
    model: &Model,
    query: &Query,
    theta: f64,
    delta0: f64,
    delta1: f64,
    alpha: f64,
    beta: f64,
    seed: u64,
    jobs: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let jobs = Jobs::new(jobs).map_err(err)?;
    let src = outcomes(&model.inner, &query.inner, seed, jobs, RunOptions::default());
    let r = stats::sprt(satisfied(src), &SprtParams::new(theta, delta0, delta1, alpha, beta)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("verdict", format!("{:?}", r.verdict))?;
    d.set_item("samples", r.samples)?;
    d.set_item("successes", r.successes)?;
    d.set_item("llr", r.llr)?;
    Ok(d)
}

/// Sequential comparison of two processes on paired runs.
#[pyfunction]
#[pyo3(signature = (model1, query1, model2, query2, u0=0.5, u1=2.0, alpha=0.05, beta=0.05, p0eq=0.999, p1eq=0.99, seed=0, jobs=None))]
#[allow(clippy::too_many_arguments)]
fn compare<'py>(
    py: Python<'py>,
    model1: &Model,
    query1: &Query,
    model2: &Model,
    query2: &Query,
    u0: f64,
    u1: f64,
    alpha: f64,
    beta: f64,
    p0eq: f64,
    p1eq: f64,
    seed: u64,
    jobs: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let jobs = Jobs::new(jobs).map_err(err)?;
    let pairs = outcome_pairs(
        (&model1.inner, &query1.inner),
        (&model2.inner, &query2.inner),
        seed,
        jobs,
        RunOptions::default(),
    );
    let p = CompareParams::new(u0, u1, alpha, beta, p0eq, p1eq);
    let r = stats::compare(satisfied_pairs(pairs), &p).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("verdict", format!("{:?}", r.verdict))?;
    d.set_item("informative", r.informative)?;
    d.set_item("total", r.total)?;
    d.set_item("wins2", r.wins2)?;
    Ok(d)
}

/// Numerical probability of the query; returns `(probability, error_bound)`.
#[pyfunction]
#[pyo3(signature = (model, query, tolerance=1e-6, depth=8))]
fn oracle(model: &Model, query: &Query, tolerance: f64, depth: usize) -> PyResult<(f64, f64)> {
    let r = exact_probability(&model.inner, &query.inner, tolerance, depth).map_err(err)?;
    Ok((r.probability, r.error_bound))
}

/// Bundled examples as `(name, model_text, query_text)`.
#[pyfunction]
fn examples() -> PyResult<Vec<(String, String, String)>> {
    bundled_examples().map_err(err)
}

#[pymodule]
fn nptasmc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<Query>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(required_samples, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(sprt, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(examples, m)?)?;
    Ok(())
}
