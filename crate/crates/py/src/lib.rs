//! Python bindings: exponent checks, operator evaluation and the full pipeline.
//!
//! Reports cross the boundary as JSON and arrive in Python as dicts.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use fracvexp::config::ExponentSection;
use fracvexp::exponents::{eval_p, validate_p1, validate_p2, DEFAULT_SAMPLES};
use fracvexp::pipeline::{self, ExponentValidation};
use fracvexp::{report, Error, ExponentSpec, ExteriorRule, Grid, QuadratureConfig, RunConfig, SampledFunction};

fn py_err(e: Error) -> PyErr {
    match e.exit_code() {
        3 | 64 => PyValueError::new_err(e.to_string()),
        5 => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn load_config(config: Option<&str>) -> PyResult<RunConfig> {
    match config {
        Some(text) => RunConfig::parse(text).map_err(py_err),
        None => Ok(RunConfig::default()),
    }
}

/// Radial exponent p(x, y) = Q(|x − y|) with order s and bound m.
#[pyclass(module = "fracvexp", frozen)]
struct Exponent {
    spec: ExponentSpec,
    section: ExponentSection,
}

#[pymethods]
impl Exponent {
    #[new]
    #[pyo3(signature = (dimension = 1, order = 0.5, m = 0.5, q_kind = "example_ii", q_params = Vec::new()))]
    fn new(dimension: usize, order: f64, m: f64, q_kind: &str, q_params: Vec<f64>) -> PyResult<Self> {
        let section = ExponentSection {
            dimension,
            order,
            m,
            q_kind: q_kind.into(),
            q_params,
        };
        Ok(Exponent {
            spec: section.build().map_err(py_err)?,
            section,
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    #[getter]
    fn order(&self) -> f64 {
        self.spec.order()
    }

    #[getter]
    fn p_minus(&self) -> f64 {
        self.spec.p_minus()
    }

    #[getter]
    fn p_plus(&self) -> f64 {
        self.spec.p_plus()
    }

    fn p(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        eval_p(&self.spec, &x, &y).map_err(py_err)
    }

    fn kernel(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        fracvexp::kernel(&self.spec, &x, &y).map_err(py_err)
    }

    /// Checks both standing hypotheses on `samples` points of (0, 100].
    #[pyo3(signature = (samples = DEFAULT_SAMPLES))]
    fn validate<'py>(&self, py: Python<'py>, samples: usize) -> PyResult<Bound<'py, PyAny>> {
        let p1 = validate_p1(&self.spec, samples).map_err(py_err)?;
        let p2 = validate_p2(&self.spec, samples).map_err(py_err)?;
        to_py(
            py,
            &ExponentValidation {
                passed: p1.passed && p2.passed,
                p1,
                p2,
            },
        )
    }

    /// Evaluates the operator of a field sampled on the uniform grid of
    /// `[-half_width, half_width]^N`, values in row-major node order.
    #[pyo3(signature = (values, half_width, points, exterior = "zero_outside_box"))]
    fn eval_plap(
        &self,
        py: Python<'_>,
        values: Vec<f64>,
        half_width: f64,
        points: Vec<Vec<f64>>,
        exterior: &str,
    ) -> PyResult<Vec<f64>> {
        let n = match self.spec.dimension() {
            1 => values.len(),
            _ => {
                let n = (values.len() as f64).sqrt().round() as usize;
                if n * n != values.len() {
                    return Err(PyValueError::new_err(format!(
                        "{} values do not fill a square grid",
                        values.len()
                    )));
                }
                n
            }
        };
        let grid = Grid::new(self.spec.dimension(), n, half_width).map_err(py_err)?;
        let rule = ExteriorRule::parse(exterior).map_err(py_err)?;
        let u = SampledFunction::new(grid, values, rule, 2).map_err(py_err)?;
        let spec = self.spec.clone();
        py.detach(move || fracvexp::eval_plap_field(&spec, &u, &points, &QuadratureConfig::default()))
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        let s = &self.section;
        format!(
            "Exponent(dimension={}, order={}, m={}, q_kind={:?}, q_params={:?})",
            s.dimension, s.order, s.m, s.q_kind, s.q_params
        )
    }
}

/// Reads a sampled field written by the command-line tool.
#[pyfunction]
fn read_sampled_csv<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let u = report::read_sampled_csv(&path).map_err(py_err)?;
    let g = u.grid();
    let header = report::SampledHeader {
        dimension: g.dimension,
        nodes_per_axis: g.nodes_per_axis,
        half_width: g.half_width,
        exterior_rule: u.exterior().label(),
        smoothness: u.smoothness(),
    };
    let dict = to_py(py, &header)?;
    dict.set_item("values", u.values().to_vec())?;
    Ok(dict)
}

/// SHA-256 of a run configuration (TOML or JSON text), as embedded in reports.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn config_hash(config: Option<&str>) -> PyResult<String> {
    Ok(load_config(config)?.hash())
}

/// Runs the seeded lemma suites of a configuration.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn certify_lemmas<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = load_config(config)?;
    let r = py.detach(|| pipeline::certify_lemmas(&cfg)).map_err(py_err)?;
    to_py(py, &r)
}

/// Solves the manufactured problem of a configuration.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn manufactured_solve<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = load_config(config)?;
    let r = py.detach(|| pipeline::manufactured_solve(&cfg)).map_err(py_err)?;
    to_py(py, &r.summary)
}

/// Runs every check, writes the reports to `output_dir` and returns the summary.
#[pyfunction]
#[pyo3(signature = (output_dir, config = None))]
fn reproduce_all<'py>(py: Python<'py>, output_dir: PathBuf, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = load_config(config)?;
    let r = py
        .detach(|| pipeline::reproduce_all(&cfg, &output_dir))
        .map_err(py_err)?;
    to_py(py, &r)
}

#[pymodule]
#[pyo3(name = "fracvexp")]
fn fracvexp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", report::VERSION)?;
    m.add_class::<Exponent>()?;
    m.add_function(wrap_pyfunction!(read_sampled_csv, m)?)?;
    m.add_function(wrap_pyfunction!(config_hash, m)?)?;
    m.add_function(wrap_pyfunction!(certify_lemmas, m)?)?;
    m.add_function(wrap_pyfunction!(manufactured_solve, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_all, m)?)?;
    Ok(())
}
