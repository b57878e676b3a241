//! Python bindings: the anisotropy spec, rough kernels, fields, radial
//! profiles, the operators, the norm machinery, and the condition checkers.
//! Structured results cross the boundary as plain dicts.

use anisoharm::conditions::{self, ConditionKind, ConditionScheme};
use anisoharm::functions::{
    builtin_field_by_name, builtin_profile_by_name, RadialProfile, ScalarField,
};
use anisoharm::geometry::AnisotropySpec;
use anisoharm::kernels::{builtin_kernel, KernelId, RoughKernel};
use anisoharm::operators::{self, OperatorResult, QuadratureScheme};
use anisoharm::spaces::{self, NormReport, NormScheme, Region};
use anisoharm::Ellipsoid;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn err(e: anisoharm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_json<T: serde::de::DeserializeOwned>(text: Option<&str>, what: &str) -> PyResult<T> {
    let text = text.unwrap_or("{}");
    serde_json::from_str(text)
        .map_err(|e| PyValueError::new_err(format!("bad {what} JSON: {e}")))
}

fn op_result_dict(py: Python<'_>, r: &OperatorResult) -> PyResult<Py<PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("est_error", r.est_error)?;
    d.set_item("pv_converged", r.pv_converged)?;
    let diag = PyDict::new(py);
    for (k, v) in &r.diagnostics {
        diag.set_item(k, *v)?;
    }
    d.set_item("diagnostics", diag)?;
    Ok(d.into())
}

fn norm_report_dict(py: Python<'_>, r: &NormReport) -> PyResult<Py<PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("argsup_r", r.argsup_r)?;
    d.set_item("r_window", r.r_window)?;
    let grid = PyList::new(py, r.grid.iter().map(|&(r, v)| (r, v)))?;
    d.set_item("grid", grid)?;
    d.set_item("est_error", r.est_error)?;
    Ok(d.into())
}

/// The diagonal anisotropic dilation group and its quasi-distance.
#[pyclass(name = "Spec", module = "anisoharm_py", skip_from_py_object)]
#[derive(Clone)]
struct PySpec {
    inner: AnisotropySpec,
}

#[pymethods]
impl PySpec {
    #[new]
    #[pyo3(signature = (alpha, k=None))]
    fn new(alpha: Vec<f64>, k: Option<f64>) -> PyResult<Self> {
        let inner = match k {
            Some(k) => AnisotropySpec::with_k(alpha, k),
            None => AnisotropySpec::new(alpha),
        }
        .map_err(err)?;
        Ok(Self { inner })
    }

    /// diag[1, ..., 1, 2] in dimension n.
    #[staticmethod]
    fn parabolic(n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: AnisotropySpec::parabolic(n).map_err(err)?,
        })
    }

    #[staticmethod]
    fn isotropic(n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: AnisotropySpec::isotropic(n).map_err(err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha().to_vec()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[getter]
    fn k_quasi(&self) -> f64 {
        self.inner.k_quasi()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rho(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.rho(&x).map_err(err)
    }

    /// The displayed closed form of the standard parabolic distance; a
    /// cross-check with a different normalization, not the definition.
    #[staticmethod]
    fn rho_paper_p0(x: Vec<f64>) -> PyResult<f64> {
        AnisotropySpec::rho_paper_p0(&x).map_err(err)
    }

    fn dilate(&self, t: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.dilate(t, &x).map_err(err)
    }

    fn polar_decompose(&self, x: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        self.inner.polar_decompose(&x).map_err(err)
    }

    fn polar_compose(&self, rho: f64, dir: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.polar_compose(rho, &dir).map_err(err)
    }

    fn jacobian(&self, dir: Vec<f64>) -> PyResult<f64> {
        self.inner.jacobian(&dir).map_err(err)
    }

    fn unit_volume(&self) -> PyResult<f64> {
        self.inner.unit_volume().map_err(err)
    }

    fn ellipsoid_volume(&self, r: f64) -> PyResult<f64> {
        self.inner.ellipsoid_volume(r).map_err(err)
    }

    fn contains(&self, center: Vec<f64>, r: f64, y: Vec<f64>) -> bool {
        self.inner.contains(&center, r, &y)
    }

    #[pyo3(signature = (trials=100_000, seed=42))]
    fn estimate_k(&self, trials: usize, seed: u64) -> f64 {
        self.inner.estimate_k(trials, seed)
    }

    fn __repr__(&self) -> String {
        format!(
            "Spec(alpha={:?}, gamma={}, k={})",
            self.inner.alpha(),
            self.inner.gamma(),
            self.inner.k_quasi()
        )
    }
}

/// A rough kernel on the sphere, extended by degree-zero homogeneity.
#[pyclass(name = "Kernel", module = "anisoharm_py", skip_from_py_object)]
#[derive(Clone)]
struct PyKernel {
    inner: RoughKernel,
}

#[pymethods]
impl PyKernel {
    /// Instantiate a catalog kernel (`cos1`, `sign4`, `const-projected`, ...).
    #[staticmethod]
    fn catalog(spec: &PySpec, id: &str) -> PyResult<Self> {
        Ok(Self {
            inner: builtin_kernel(&spec.inner, &KernelId(id.to_string())).map_err(err)?,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    #[getter]
    fn s_exponent(&self) -> f64 {
        self.inner.s_exponent
    }

    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(&x).map_err(err)
    }

    fn on_sphere(&self, dir: Vec<f64>) -> f64 {
        self.inner.on_sphere(&dir)
    }

    fn cancellation_residual(&self) -> PyResult<f64> {
        self.inner.cancellation_residual().map_err(err)
    }

    fn cancellation_checked(&self) -> bool {
        self.inner.cancellation_checked()
    }

    fn project(&self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.project_to_cancellation().map_err(err)?,
        })
    }

    fn sphere_s_norm(&self, s: f64) -> PyResult<f64> {
        self.inner.sphere_s_norm(s).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({})", self.inner.label)
    }
}

/// An evaluable scalar field from the built-in catalog.
#[pyclass(name = "Field", module = "anisoharm_py", skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: ScalarField,
}

#[pymethods]
impl PyField {
    /// Catalog field by name with a JSON params object, e.g.
    /// `Field.catalog(spec, "indicator-ellipsoid", '{"radius": 1.0}')`.
    #[staticmethod]
    #[pyo3(signature = (spec, name, params=None))]
    fn catalog(spec: &PySpec, name: &str, params: Option<&str>) -> PyResult<Self> {
        let params: serde_json::Value = parse_json(params, "field params")?;
        Ok(Self {
            inner: builtin_field_by_name(&spec.inner, name, &params).map_err(err)?,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    #[getter]
    fn support_radius(&self) -> f64 {
        self.inner.support_radius
    }

    fn eval(&self, x: Vec<f64>) -> f64 {
        self.inner.eval(&x)
    }

    fn scale(&self, c: f64) -> Self {
        Self {
            inner: self.inner.scale(c),
        }
    }

    fn add(&self, other: &PyField) -> Self {
        Self {
            inner: self.inner.add(&other.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.inner.label)
    }
}

/// A radial weight profile on (0, inf).
#[pyclass(name = "Profile", module = "anisoharm_py", skip_from_py_object)]
#[derive(Clone)]
struct PyProfile {
    inner: RadialProfile,
}

#[pymethods]
impl PyProfile {
    /// Catalog profile by name with a JSON params object, e.g.
    /// `Profile.catalog("remark-phi1", '{"beta": 0.5, "p": 2, "gamma": 3}')`.
    #[staticmethod]
    #[pyo3(signature = (name, params=None))]
    fn catalog(name: &str, params: Option<&str>) -> PyResult<Self> {
        let params: serde_json::Value = parse_json(params, "profile params")?;
        Ok(Self {
            inner: builtin_profile_by_name(name, &params).map_err(err)?,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    fn eval(&self, r: f64) -> f64 {
        self.inner.eval(r)
    }

    fn reciprocal(&self) -> Self {
        Self {
            inner: self.inner.reciprocal(),
        }
    }

    fn times_power(&self, e: f64) -> Self {
        Self {
            inner: self.inner.times_power(e),
        }
    }

    fn __repr__(&self) -> String {
        format!("Profile({})", self.inner.label)
    }
}

fn scheme_from(json: Option<&str>) -> PyResult<QuadratureScheme> {
    parse_json(json, "scheme")
}

#[pyfunction]
#[pyo3(signature = (kernel, f, x, scheme=None))]
fn maximal(
    py: Python<'_>,
    kernel: &PyKernel,
    f: &PyField,
    x: Vec<f64>,
    scheme: Option<&str>,
) -> PyResult<Py<PyDict>> {
    let r = operators::maximal(&kernel.inner, &f.inner, &x, &scheme_from(scheme)?).map_err(err)?;
    op_result_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (kernel, f, x, scheme=None))]
fn singular_pv(
    py: Python<'_>,
    kernel: &PyKernel,
    f: &PyField,
    x: Vec<f64>,
    scheme: Option<&str>,
) -> PyResult<Py<PyDict>> {
    let r =
        operators::singular_pv(&kernel.inner, &f.inner, &x, &scheme_from(scheme)?).map_err(err)?;
    op_result_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (b, kernel, f, x, scheme=None))]
fn commutator_singular(
    py: Python<'_>,
    b: &PyField,
    kernel: &PyKernel,
    f: &PyField,
    x: Vec<f64>,
    scheme: Option<&str>,
) -> PyResult<Py<PyDict>> {
    let r = operators::commutator_singular(
        &b.inner,
        &kernel.inner,
        &f.inner,
        &x,
        &scheme_from(scheme)?,
    )
    .map_err(err)?;
    op_result_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (b, kernel, f, x, scheme=None))]
fn commutator_singular_identity(
    py: Python<'_>,
    b: &PyField,
    kernel: &PyKernel,
    f: &PyField,
    x: Vec<f64>,
    scheme: Option<&str>,
) -> PyResult<Py<PyDict>> {
    let r = operators::commutator_singular_identity(
        &b.inner,
        &kernel.inner,
        &f.inner,
        &x,
        &scheme_from(scheme)?,
    )
    .map_err(err)?;
    op_result_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (b, kernel, f, x, scheme=None))]
fn maximal_commutator(
    py: Python<'_>,
    b: &PyField,
    kernel: &PyKernel,
    f: &PyField,
    x: Vec<f64>,
    scheme: Option<&str>,
) -> PyResult<Py<PyDict>> {
    let r = operators::maximal_commutator(
        &b.inner,
        &kernel.inner,
        &f.inner,
        &x,
        &scheme_from(scheme)?,
    )
    .map_err(err)?;
    op_result_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (kernel, f, x, scheme=None))]
fn marcinkiewicz(
    py: Python<'_>,
    kernel: &PyKernel,
    f: &PyField,
    x: Vec<f64>,
    scheme: Option<&str>,
) -> PyResult<Py<PyDict>> {
    let r = operators::marcinkiewicz(&kernel.inner, &f.inner, &x, &scheme_from(scheme)?)
        .map_err(err)?;
    op_result_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (b, kernel, f, x, scheme=None))]
fn marcinkiewicz_commutator(
    py: Python<'_>,
    b: &PyField,
    kernel: &PyKernel,
    f: &PyField,
    x: Vec<f64>,
    scheme: Option<&str>,
) -> PyResult<Py<PyDict>> {
    let r = operators::marcinkiewicz_commutator(
        &b.inner,
        &kernel.inner,
        &f.inner,
        &x,
        &scheme_from(scheme)?,
    )
    .map_err(err)?;
    op_result_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (kernel, f, x, c0=1.0, scheme=None))]
fn e1_majorant(
    kernel: &PyKernel,
    f: &PyField,
    x: Vec<f64>,
    c0: f64,
    scheme: Option<&str>,
) -> PyResult<f64> {
    operators::e1_majorant(&kernel.inner, &f.inner, &x, &scheme_from(scheme)?, c0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (spec, f, p, radius=None, center=None))]
fn lp_norm(
    spec: &PySpec,
    f: &PyField,
    p: f64,
    radius: Option<f64>,
    center: Option<Vec<f64>>,
) -> PyResult<f64> {
    let region = match radius {
        Some(r) => Region::Ellipsoid(
            Ellipsoid::new(center.unwrap_or_else(|| vec![0.0; spec.inner.dim()]), r)
                .map_err(err)?,
        ),
        None => Region::WholeSpace,
    };
    spaces::lp_norm(&spec.inner, &f.inner, p, &region, &NormScheme::default()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (spec, f, p, radius, center=None))]
fn weak_lp_norm(
    spec: &PySpec,
    f: &PyField,
    p: f64,
    radius: f64,
    center: Option<Vec<f64>>,
) -> PyResult<f64> {
    let region = Ellipsoid::new(center.unwrap_or_else(|| vec![0.0; spec.inner.dim()]), radius)
        .map_err(err)?;
    spaces::weak_lp_norm(&spec.inner, &f.inner, p, &region, &NormScheme::default()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (spec, f, p, phi, x0=None, weak=false, window=(1e-3, 1e3), nodes_per_decade=None))]
fn local_morrey_norm(
    py: Python<'_>,
    spec: &PySpec,
    f: &PyField,
    p: f64,
    phi: &PyProfile,
    x0: Option<Vec<f64>>,
    weak: bool,
    window: (f64, f64),
    nodes_per_decade: Option<usize>,
) -> PyResult<Py<PyDict>> {
    let x0 = x0.unwrap_or_else(|| vec![0.0; spec.inner.dim()]);
    let mut scheme = NormScheme::with_window(window.0, window.1);
    if let Some(n) = nodes_per_decade {
        scheme.nodes_per_decade = n;
    }
    let rep = spaces::local_morrey_norm(&spec.inner, &f.inner, p, &phi.inner, &x0, weak, &scheme)
        .map_err(err)?;
    norm_report_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (spec, b, p, lambda_, x0=None, window=(1e-3, 1e3), nodes_per_decade=None))]
fn local_campanato_norm(
    py: Python<'_>,
    spec: &PySpec,
    b: &PyField,
    p: f64,
    lambda_: f64,
    x0: Option<Vec<f64>>,
    window: (f64, f64),
    nodes_per_decade: Option<usize>,
) -> PyResult<Py<PyDict>> {
    let x0 = x0.unwrap_or_else(|| vec![0.0; spec.inner.dim()]);
    let mut scheme = NormScheme::with_window(window.0, window.1);
    if let Some(n) = nodes_per_decade {
        scheme.nodes_per_decade = n;
    }
    let rep = spaces::local_campanato_norm(&spec.inner, &b.inner, p, lambda_, &x0, &scheme)
        .map_err(err)?;
    norm_report_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (spec, b, p, centers, window=(1e-3, 1e3)))]
fn bmo_norm_sampled(
    py: Python<'_>,
    spec: &PySpec,
    b: &PyField,
    p: f64,
    centers: Vec<Vec<f64>>,
    window: (f64, f64),
) -> PyResult<Py<PyDict>> {
    let scheme = NormScheme::with_window(window.0, window.1);
    let rep =
        spaces::bmo_norm_sampled(&spec.inner, &b.inner, p, &centers, &scheme).map_err(err)?;
    norm_report_dict(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (phi, weight_exponent, t, horizon=1e9))]
fn essinf_tail(phi: &PyProfile, weight_exponent: f64, t: f64, horizon: f64) -> PyResult<f64> {
    conditions::essinf_tail(&phi.inner, weight_exponent, t, horizon).map_err(err)
}

/// Check a weight-pair condition. `kind` is the JSON form, e.g.
/// `'{"tag": "SupE37", "p": 2.0, "gamma": 3.0}'`.
#[pyfunction]
#[pyo3(signature = (kind, phi1, phi2, base_window, extended_window))]
fn check_condition(
    py: Python<'_>,
    kind: &str,
    phi1: &PyProfile,
    phi2: Option<&PyProfile>,
    base_window: (f64, f64),
    extended_window: (f64, f64),
) -> PyResult<Py<PyDict>> {
    let kind: ConditionKind = parse_json(Some(kind), "condition kind")?;
    let rep = conditions::check_condition(
        &kind,
        &phi1.inner,
        phi2.map(|p| &p.inner),
        base_window,
        extended_window,
        &ConditionScheme::default(),
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("tag", rep.kind.tag.as_str())?;
    d.set_item("verdict", format!("{:?}", rep.verdict))?;
    d.set_item("c_sup", rep.c_sup)?;
    d.set_item("growth_ratio", rep.growth_ratio)?;
    let samples = PyList::new(py, rep.c_samples.iter().map(|&(r, c)| (r, c)))?;
    d.set_item("c_samples", samples)?;
    Ok(d.into())
}

#[pyfunction]
#[pyo3(signature = (v1, v2, omega, log_weighted, window))]
fn hardy_best_constant(
    v1: &PyProfile,
    v2: &PyProfile,
    omega: &PyProfile,
    log_weighted: bool,
    window: (f64, f64),
) -> PyResult<f64> {
    conditions::hardy_best_constant(
        &v1.inner,
        &v2.inner,
        &omega.inner,
        log_weighted,
        window,
        &ConditionScheme::default(),
    )
    .map_err(err)
}

#[pymodule]
fn anisoharm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyProfile>()?;
    m.add_function(wrap_pyfunction!(maximal, m)?)?;
    m.add_function(wrap_pyfunction!(singular_pv, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_singular, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_singular_identity, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_commutator, m)?)?;
    m.add_function(wrap_pyfunction!(marcinkiewicz, m)?)?;
    m.add_function(wrap_pyfunction!(marcinkiewicz_commutator, m)?)?;
    m.add_function(wrap_pyfunction!(e1_majorant, m)?)?;
    m.add_function(wrap_pyfunction!(lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(weak_lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(local_morrey_norm, m)?)?;
    m.add_function(wrap_pyfunction!(local_campanato_norm, m)?)?;
    m.add_function(wrap_pyfunction!(bmo_norm_sampled, m)?)?;
    m.add_function(wrap_pyfunction!(essinf_tail, m)?)?;
    m.add_function(wrap_pyfunction!(check_condition, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_best_constant, m)?)?;
    Ok(())
}
