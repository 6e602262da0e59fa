//! Python bindings. Grids, grid functions, weights and the Riesz kernel are
//! exposed as classes; composite inputs (exponent sets, function and weight
//! constructors, run configurations) travel as JSON strings using the same
//! schema as the `wfs` command-line tool.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use wfs_core::cli::{cmd_check_condition, cmd_norm, cmd_verify, CliError, RunConfig};
use wfs_core::conditions::{check_condition, ConditionId};
use wfs_core::functions::FunctionSpec;
use wfs_core::grid::{default_ell_grid, make_cube_family};
use wfs_core::orlicz::{luxemburg_norm as lux, YoungFunction};
use wfs_core::{
    spaces, Cube, Error, ExponentSet, GridFunction, GridSpec, RieszKernel, Weight, WeightSpec,
};

fn core_err(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Core(e) => core_err(e),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(format!("malformed JSON: {e}"))
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(json_err)
}

#[pyclass(name = "Grid", module = "wfs", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyGrid {
    inner: GridSpec,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(dim: usize, half_width: f64, cells_per_axis: usize) -> PyResult<Self> {
        Ok(Self {
            inner: GridSpec::new(dim, half_width, cells_per_axis).map_err(core_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn half_width(&self) -> f64 {
        self.inner.half_width
    }

    #[getter]
    fn cells_per_axis(&self) -> usize {
        self.inner.cells_per_axis
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }

    /// Cell centers in flat-index order.
    fn centers(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n_cells())
            .map(|i| self.inner.center(i)[..self.inner.dim].to_vec())
            .collect()
    }

    fn refined(&self) -> Self {
        Self {
            inner: self.inner.refined(),
        }
    }

    /// Default geometric side-length grid with `points` values.
    #[pyo3(signature = (points = 12))]
    fn ell_grid(&self, points: usize) -> Vec<f64> {
        default_ell_grid(&self.inner, points)
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(dim={}, half_width={}, cells_per_axis={})",
            self.inner.dim, self.inner.half_width, self.inner.cells_per_axis
        )
    }
}

#[pyclass(name = "GridFunction", module = "wfs", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGridFunction {
    inner: GridFunction,
}

#[pymethods]
impl PyGridFunction {
    #[new]
    fn new(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: GridFunction::new(grid.inner, values).map_err(core_err)?,
        })
    }

    /// Rasterizes a function description such as `{"kind": "step"}`.
    #[staticmethod]
    fn from_spec(grid: &PyGrid, spec_json: &str) -> PyResult<Self> {
        let spec: FunctionSpec = serde_json::from_str(spec_json).map_err(json_err)?;
        Ok(Self {
            inner: spec.rasterize(grid.inner).map_err(core_err)?,
        })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid {
            inner: *self.inner.spec(),
        }
    }

    fn integrate(&self, center: Vec<f64>, side: f64) -> PyResult<f64> {
        self.inner
            .integrate(&Cube::new(center, side))
            .map_err(core_err)
    }

    fn mean(&self, center: Vec<f64>, side: f64) -> PyResult<f64> {
        self.inner.mean(&Cube::new(center, side)).map_err(core_err)
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }
}

#[pyclass(name = "Weight", module = "wfs", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWeight {
    inner: Weight,
}

#[pymethods]
impl PyWeight {
    /// Builds a weight from a constructor such as `{"kind": "power", "a": 0.2}`.
    #[new]
    fn new(grid: &PyGrid, spec_json: &str) -> PyResult<Self> {
        let spec: WeightSpec = serde_json::from_str(spec_json).map_err(json_err)?;
        Ok(Self {
            inner: spec.build(grid.inner).map_err(core_err)?,
        })
    }

    #[staticmethod]
    fn unit(grid: &PyGrid) -> Self {
        Self {
            inner: Weight::unit(grid.inner),
        }
    }

    #[staticmethod]
    fn power(grid: &PyGrid, a: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Weight::power(grid.inner, a).map_err(core_err)?,
        })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values()
    }

    /// `w(Q)` for the cube with the given center and side.
    fn measure(&self, center: Vec<f64>, side: f64) -> PyResult<f64> {
        self.inner
            .measure(&Cube::new(center, side))
            .map_err(core_err)
    }
}

#[pyclass(name = "RieszKernel", module = "wfs", frozen)]
struct PyRieszKernel {
    inner: RieszKernel,
}

#[pymethods]
impl PyRieszKernel {
    #[new]
    fn new(grid: &PyGrid, gamma: f64) -> PyResult<Self> {
        Ok(Self {
            inner: RieszKernel::new(grid.inner, gamma).map_err(core_err)?,
        })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[getter]
    fn zeta(&self) -> f64 {
        self.inner.zeta()
    }

    fn apply(&self, py: Python<'_>, f: &PyGridFunction) -> PyResult<PyGridFunction> {
        let out = py.detach(|| self.inner.apply(&f.inner)).map_err(core_err)?;
        Ok(PyGridFunction { inner: out })
    }

    fn potential_at(&self, f: &PyGridFunction, x: Vec<f64>) -> PyResult<f64> {
        self.inner.potential_at(&f.inner, &x).map_err(core_err)
    }

    #[pyo3(signature = (b, f, m = 1))]
    fn commutator(
        &self,
        py: Python<'_>,
        b: &PyGridFunction,
        f: &PyGridFunction,
        m: u32,
    ) -> PyResult<PyGridFunction> {
        let out = py
            .detach(|| self.inner.commutator(&b.inner, &f.inner, m))
            .map_err(core_err)?;
        Ok(PyGridFunction { inner: out })
    }
}

#[pyfunction]
fn zeta(gamma: f64, dim: usize) -> f64 {
    wfs_core::operators::zeta(gamma, dim)
}

#[pyfunction]
fn lp_norm(f: &PyGridFunction, w: &PyWeight, p: f64) -> PyResult<f64> {
    spaces::lp_norm(&f.inner, &w.inner, p).map_err(core_err)
}

#[pyfunction]
fn weak_lp_norm(f: &PyGridFunction, w: &PyWeight, p: f64) -> PyResult<f64> {
    spaces::weak_lp_norm(&f.inner, &w.inner, p, None).map_err(core_err)
}

/// Weighted Morrey norm over the translated dyadic family; returns the
/// full result as JSON.
#[pyfunction]
#[pyo3(signature = (f, nu, w, p, kappa, depth = 4, translations = 2))]
#[allow(clippy::too_many_arguments)]
fn morrey_norm(
    f: &PyGridFunction,
    nu: &PyWeight,
    w: &PyWeight,
    p: f64,
    kappa: f64,
    depth: usize,
    translations: usize,
) -> PyResult<String> {
    let fam = make_cube_family(f.inner.spec(), depth, translations);
    to_json(&spaces::morrey_norm(&f.inner, &nu.inner, &w.inner, p, kappa, &fam).map_err(core_err)?)
}

#[pyfunction]
#[pyo3(signature = (f, nu, w, mu, p, s, alpha, ell = None))]
#[allow(clippy::too_many_arguments)]
fn amalgam_norm(
    f: &PyGridFunction,
    nu: &PyWeight,
    w: &PyWeight,
    mu: &PyWeight,
    p: f64,
    s: f64,
    alpha: f64,
    ell: Option<Vec<f64>>,
) -> PyResult<String> {
    let ell = ell.unwrap_or_else(|| default_ell_grid(f.inner.spec(), 12));
    to_json(
        &spaces::amalgam_norm(&f.inner, &nu.inner, &w.inner, &mu.inner, p, s, alpha, &ell)
            .map_err(core_err)?,
    )
}

#[pyfunction]
#[pyo3(signature = (b, depth = 4, translations = 2))]
fn bmo_norm(b: &PyGridFunction, depth: usize, translations: usize) -> PyResult<f64> {
    let fam = make_cube_family(b.inner.spec(), depth, translations);
    Ok(spaces::bmo_norm(&b.inner, &fam).map_err(core_err)?.value)
}

/// Luxemburg norm on a cube; `young_json` is e.g. `{"kind": "expm1"}`.
#[pyfunction]
fn luxemburg_norm(
    f: &PyGridFunction,
    center: Vec<f64>,
    side: f64,
    young_json: &str,
) -> PyResult<f64> {
    let phi: YoungFunction = serde_json::from_str(young_json).map_err(json_err)?;
    lux(&f.inner, &Cube::new(center, side), &phi).map_err(core_err)
}

/// Scans a condition by id over the translated dyadic family and returns
/// the report as JSON.
#[pyfunction]
#[pyo3(signature = (condition_id, w, nu, exponents_json, depth = 4, translations = 2))]
fn condition(
    py: Python<'_>,
    condition_id: &str,
    w: &PyWeight,
    nu: &PyWeight,
    exponents_json: &str,
    depth: usize,
    translations: usize,
) -> PyResult<String> {
    let id: ConditionId = condition_id.parse().map_err(core_err)?;
    let e: ExponentSet = serde_json::from_str(exponents_json).map_err(json_err)?;
    let grid = *w.inner.grid();
    let fam = make_cube_family(&grid, depth, translations);
    let kernel = match id {
        ConditionId::SawyerDagger => Some(RieszKernel::new(grid, e.gamma).map_err(core_err)?),
        _ => None,
    };
    let r = py
        .detach(|| check_condition(id, &w.inner, &nu.inner, &e, kernel.as_ref(), &fam))
        .map_err(core_err)?;
    to_json(&r)
}

fn load(config_json: &str) -> PyResult<RunConfig> {
    RunConfig::from_json(config_json).map_err(cli_err)
}

/// Runs the `norm` section of a configuration document.
#[pyfunction]
fn run_norm(config_json: &str) -> PyResult<String> {
    let cfg = load(config_json)?;
    to_json(&cmd_norm(&cfg).map_err(cli_err)?)
}

/// Runs the `condition` section of a configuration document.
#[pyfunction]
fn run_condition(config_json: &str) -> PyResult<String> {
    let cfg = load(config_json)?;
    to_json(&cmd_check_condition(&cfg).map_err(cli_err)?)
}

/// Runs the `verify` section of a configuration document and returns the
/// verification report as JSON.
#[pyfunction]
#[pyo3(signature = (config_json, refine = false))]
fn verify(py: Python<'_>, config_json: &str, refine: bool) -> PyResult<String> {
    let cfg = load(config_json)?;
    let r = py.detach(|| cmd_verify(&cfg, refine)).map_err(cli_err)?;
    to_json(&r)
}

#[pymodule]
fn wfs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyGridFunction>()?;
    m.add_class::<PyWeight>()?;
    m.add_class::<PyRieszKernel>()?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(weak_lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(morrey_norm, m)?)?;
    m.add_function(wrap_pyfunction!(amalgam_norm, m)?)?;
    m.add_function(wrap_pyfunction!(bmo_norm, m)?)?;
    m.add_function(wrap_pyfunction!(luxemburg_norm, m)?)?;
    m.add_function(wrap_pyfunction!(condition, m)?)?;
    m.add_function(wrap_pyfunction!(run_norm, m)?)?;
    m.add_function(wrap_pyfunction!(run_condition, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
