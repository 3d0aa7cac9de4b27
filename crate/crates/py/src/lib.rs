//! Python bindings: models, the textual notation, validation, code and
//! diagram generation, and the simulator.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use subsume::codegen::{self, GenOptions};
use subsume::runtime::trace_to_csv;
use subsume::sim::{self, SensorConfig, SimConfig};
use subsume::validate::Diagnostic;
use subsume::RuntimeConfig;

/// An immutable system model.
#[pyclass(name = "Model", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Model {
    inner: subsume::SystemModel,
}

/// One validation finding.
#[pyclass(name = "Diagnostic", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDiagnostic {
    code: String,
    message: String,
    location: String,
    line: Option<u32>,
    column: Option<u32>,
}

impl From<&Diagnostic> for PyDiagnostic {
    fn from(d: &Diagnostic) -> Self {
        Self {
            code: d.code.to_string(),
            message: d.message.clone(),
            location: d.location.clone(),
            line: d.span.map(|s| s.line),
            column: d.span.map(|s| s.column),
        }
    }
}

#[pymethods]
impl PyDiagnostic {
    fn __repr__(&self) -> String {
        format!("<Diagnostic {}: {}>", self.code, self.message)
    }
}

#[pymethods]
impl Model {
    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn modules(&self) -> Vec<(String, u32)> {
        self.inner.modules.iter().map(|m| (m.name.clone(), m.layer)).collect()
    }

    #[getter]
    fn wires(&self) -> Vec<(String, String)> {
        self.inner
            .wires
            .iter()
            .map(|w| (w.source.to_string(), w.sink.to_string()))
            .collect()
    }

    /// `(kind, target, controlled_by, time_ms)` per modifier.
    #[getter]
    fn modifiers(&self) -> Vec<(String, String, String, i64)> {
        self.inner
            .modifiers
            .iter()
            .map(|m| (m.kind.to_string(), m.target.to_string(), m.controlled_by.to_string(), m.time_ms))
            .collect()
    }

    fn layers(&self) -> Vec<u32> {
        self.inner.layers().into_iter().collect()
    }

    fn without_modules(&self, names: Vec<String>) -> Model {
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        Model {
            inner: self.inner.without_modules(&names),
        }
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Model> {
        subsume::SystemModel::from_json(text)
            .map(|inner| Model { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "<Model {} with {} modules, {} wires, {} modifiers>",
            self.inner.name,
            self.inner.modules.len(),
            self.inner.wires.len(),
            self.inner.modifiers.len()
        )
    }
}

/// The bundled eight-module example.
#[pyfunction]
fn example_model() -> Model {
    Model {
        inner: subsume::example::example_model(),
    }
}

/// Parses `.sub` text. Raises `ValueError` listing every syntax error.
#[pyfunction]
fn parse(text: &str) -> PyResult<Model> {
    subsume::dsl::parse(text)
        .map(|inner| Model { inner })
        .map_err(|errors| {
            let lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
            PyValueError::new_err(lines.join("\n"))
        })
}

#[pyfunction]
fn format(model: &Model) -> String {
    subsume::dsl::format(&model.inner)
}

#[pyfunction]
fn validate(model: &Model) -> Vec<PyDiagnostic> {
    subsume::validate::validate(&model.inner).iter().map(PyDiagnostic::from).collect()
}

/// Parses and validates, attaching source positions to the findings.
#[pyfunction]
fn check(text: &str) -> PyResult<Vec<PyDiagnostic>> {
    let (model, spans) = subsume::dsl::parse_with_spans(text).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
        PyValueError::new_err(lines.join("\n"))
    })?;
    Ok(subsume::validate::validate_with_spans(&model, Some(&spans))
        .iter()
        .map(PyDiagnostic::from)
        .collect())
}

#[pyfunction]
fn dot(model: &Model) -> String {
    subsume::dot::to_dot(&model.inner)
}

/// Generated project as `{relative path: content}`. With `existing`, user
/// regions found there are carried over.
#[pyfunction]
#[pyo3(signature = (model, project_name=None, docs=false, tests=false, existing=None))]
fn generate(
    model: &Model,
    project_name: Option<String>,
    docs: bool,
    tests: bool,
    existing: Option<BTreeMap<String, String>>,
) -> PyResult<BTreeMap<String, String>> {
    let opts = GenOptions {
        project_name,
        emit_docs: docs,
        emit_tests: tests,
        ..GenOptions::default()
    };
    let result = match existing {
        None => codegen::generate(&model.inner, &opts),
        Some(files) => {
            let mut set = codegen::FileSet::new();
            for (p, c) in files {
                set.insert(p, c);
            }
            codegen::regenerate(&model.inner, &opts, &set)
        }
    };
    let files = result.map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(files.iter().map(|(p, c)| (p.to_owned(), c.to_owned())).collect())
}

/// A simulation arena.
#[pyclass(name = "World", frozen)]
pub struct PyWorld {
    inner: sim::World,
}

#[pymethods]
impl PyWorld {
    #[getter]
    fn size(&self) -> (f64, f64) {
        (self.inner.width, self.inner.height)
    }

    #[getter]
    fn obstacle_count(&self) -> usize {
        self.inner.obstacles.len()
    }

    fn is_free(&self, x: f64, y: f64) -> bool {
        self.inner.is_free(x, y)
    }
}

/// Loads a world from JSON text; without text, the bundled rooms world.
#[pyfunction]
#[pyo3(signature = (text=None))]
fn load_world(text: Option<&str>) -> PyResult<PyWorld> {
    sim::load_world(text.unwrap_or(sim::ROOMS_JSON))
        .map(|inner| PyWorld { inner })
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Outcome of a simulator run.
#[pyclass(name = "SimResult", frozen, get_all)]
pub struct PySimResult {
    coverage_cells: u64,
    collisions: u64,
    /// `(t_ms, x, y)` samples.
    path: Vec<(u64, f64, f64)>,
    path_csv: String,
    trace_csv: String,
}

/// Runs the example controller (or a subset of its modules) in `world`.
#[pyfunction]
#[pyo3(signature = (world, model=None, ticks=10_000, layers=None, seed=0))]
fn run_sim(
    py: Python<'_>,
    world: &PyWorld,
    model: Option<&Model>,
    ticks: u64,
    layers: Option<Vec<u32>>,
    seed: u64,
) -> PyResult<PySimResult> {
    let model = model.map_or_else(subsume::example::example_model, |m| m.inner.clone());
    let mut runtime = RuntimeConfig::default().with_seed(seed);
    if let Some(l) = layers {
        runtime = runtime.with_layers(l);
    }
    let config = SimConfig {
        runtime,
        duration_ticks: ticks,
        ..SimConfig::default()
    };
    let sensors = SensorConfig {
        seed,
        ..SensorConfig::default()
    };
    let result = py
        .detach(|| sim::run_sim(&world.inner, model, sensors, &config))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(PySimResult {
        coverage_cells: result.coverage_cells,
        collisions: result.collisions,
        path: result.path.iter().map(|p| (p.t_ms, p.x, p.y)).collect(),
        path_csv: sim::path_to_csv(&result.path),
        trace_csv: trace_to_csv(&result.trace),
    })
}

#[pymodule]
#[pyo3(name = "subsume")]
pub fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<PyDiagnostic>()?;
    m.add_class::<PyWorld>()?;
    m.add_class::<PySimResult>()?;
    m.add_function(wrap_pyfunction!(example_model, m)?)?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(format, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(dot, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(load_world, m)?)?;
    m.add_function(wrap_pyfunction!(run_sim, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
