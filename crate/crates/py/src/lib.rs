//! Python bindings: Cantor-type sets, staircase evaluation, fractal
//! integrals with bounds, the separable-equation solver, and pointwise LFD
//! estimation. Thin wrappers over the core crate; all numerics stay in Rust.

use lfrac::{
    Error as LfracError, FractalTerm, GbarExpr, HSpec, Interval, LfdEstimate, ScaleLadder,
    SelfSimilarSet, SeparableProblem, Side, SolutionEvaluator, StaircaseEvaluator,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py_err(e: LfracError) -> PyErr {
    if e.is_numeric() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse_side(side: &str) -> PyResult<Side> {
    match side {
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        "both" => Ok(Side::Both),
        other => Err(PyValueError::new_err(format!(
            "side must be left|right|both, got '{other}'"
        ))),
    }
}

fn parse_h(kind: &str, k: Option<f64>) -> PyResult<HSpec> {
    match kind {
        "constant_one" => Ok(HSpec::ConstantOne),
        "linear" => Ok(HSpec::Linear),
        "quadratic" => Ok(HSpec::Quadratic),
        "power" => k
            .map(|k| HSpec::Power { k })
            .ok_or_else(|| PyValueError::new_err("h kind 'power' requires k")),
        other => Err(PyValueError::new_err(format!(
            "h must be constant_one|linear|quadratic|power, got '{other}'"
        ))),
    }
}

/// Wrap a Python callable as a scalar function; failures surface as NaN and
/// are rejected by the estimators as non-finite samples.
fn scalar_callable(obj: Py<PyAny>) -> impl Fn(f64) -> f64 + Send + Sync {
    move |t: f64| {
        Python::attach(|py| {
            obj.call1(py, (t,))
                .and_then(|v| v.extract::<f64>(py))
                .unwrap_or(f64::NAN)
        })
    }
}

fn build_term(
    set: &PySelfSimilarSet,
    gbar: &str,
    lipschitz: Option<f64>,
) -> PyResult<FractalTerm> {
    let expr = GbarExpr::parse(gbar).map_err(to_py_err)?;
    let mut term = FractalTerm::new(set.inner.clone(), expr).map_err(to_py_err)?;
    if let Some(l) = lipschitz {
        term = term.with_lipschitz(l).map_err(to_py_err)?;
    }
    Ok(term)
}

/// A self-similar Cantor-type set on an ambient interval.
#[pyclass(name = "SelfSimilarSet", frozen, from_py_object)]
#[derive(Clone)]
struct PySelfSimilarSet {
    inner: SelfSimilarSet,
}

#[pymethods]
impl PySelfSimilarSet {
    /// Middle-1/p Cantor set on [a, b].
    #[staticmethod]
    #[pyo3(signature = (p, a=0.0, b=1.0))]
    fn middle_p(p: f64, a: f64, b: f64) -> PyResult<Self> {
        let ambient = Interval::new(a, b).map_err(to_py_err)?;
        Ok(Self {
            inner: SelfSimilarSet::middle_p(p, ambient).map_err(to_py_err)?,
        })
    }

    /// Parse the JSON document {ambient, maps, dimension}.
    #[staticmethod]
    fn from_json(doc: &str) -> PyResult<Self> {
        Ok(Self {
            inner: SelfSimilarSet::from_json_str(doc).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn dimension(&self) -> f64 {
        self.inner.dimension()
    }

    #[getter]
    fn ratio(&self) -> f64 {
        self.inner.ratio()
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    #[getter]
    fn ambient(&self) -> (f64, f64) {
        let iv = self.inner.ambient();
        (iv.lo, iv.hi)
    }

    /// Depth-n cover as a list of (lo, hi, address) tuples.
    fn refine(&self, depth: u32) -> PyResult<Vec<(f64, f64, String)>> {
        let cover = self.inner.refine(depth).map_err(to_py_err)?;
        Ok(cover
            .intervals()
            .iter()
            .map(|iv| (iv.lo, iv.hi, iv.address.clone()))
            .collect())
    }

    /// Point location: {"kind": "address", "address", "lo", "hi"} or
    /// {"kind": "gap", "generation", "lo", "hi"}.
    fn locate<'py>(&self, py: Python<'py>, x: f64, depth: u32) -> PyResult<Bound<'py, PyDict>> {
        let dict = PyDict::new(py);
        match self.inner.locate(x, depth).map_err(to_py_err)? {
            lfrac::Location::Inside(iv) => {
                dict.set_item("kind", "address")?;
                dict.set_item("address", iv.address)?;
                dict.set_item("lo", iv.lo)?;
                dict.set_item("hi", iv.hi)?;
            }
            lfrac::Location::Gap(g) => {
                dict.set_item("kind", "gap")?;
                dict.set_item("generation", g.generation)?;
                dict.set_item("lo", g.lo)?;
                dict.set_item("hi", g.hi)?;
            }
        }
        Ok(dict)
    }

    /// Distribution function of the natural measure.
    fn cdf(&self, x: f64) -> f64 {
        lfrac::cdf(&self.inner, x)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json_string().map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        let iv = self.inner.ambient();
        format!(
            "SelfSimilarSet(m={}, r={}, ambient=[{}, {}], dimension={})",
            self.inner.arity(),
            self.inner.ratio(),
            iv.lo,
            iv.hi,
            self.inner.dimension()
        )
    }
}

/// Evaluates the staircase solution P_C of D^q f = 1_C.
#[pyclass(name = "Staircase", frozen)]
struct PyStaircase {
    inner: StaircaseEvaluator,
}

#[pymethods]
impl PyStaircase {
    #[new]
    fn new(set: &PySelfSimilarSet) -> PyResult<Self> {
        Ok(Self {
            inner: StaircaseEvaluator::new(set.inner.clone()).map_err(to_py_err)?,
        })
    }

    /// P_C(x).
    fn value(&self, x: f64) -> f64 {
        self.inner.value(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    /// Γ(q+1) for the set's dimension.
    #[getter]
    fn gamma_factor(&self) -> f64 {
        self.inner.gamma_factor()
    }
}

/// Integral value with certified or heuristic lower/upper bounds.
#[pyclass(name = "IntegralResult", frozen)]
struct PyIntegralResult {
    inner: lfrac::IntegralResult,
}

#[pymethods]
impl PyIntegralResult {
    #[getter]
    fn value(&self) -> f64 {
        self.inner.value
    }

    #[getter]
    fn lower(&self) -> f64 {
        self.inner.lower
    }

    #[getter]
    fn upper(&self) -> f64 {
        self.inner.upper
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.inner.depth
    }

    #[getter]
    fn method(&self) -> String {
        match self.inner.method {
            lfrac::IntegrationMethod::RiemannCover => "riemann_cover".into(),
            lfrac::IntegrationMethod::SelfSimilarRecursion => "self_similar_recursion".into(),
        }
    }

    #[getter]
    fn certified(&self) -> bool {
        self.inner.bounds == lfrac::BoundsQuality::Certified
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json_string().map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "IntegralResult(value={}, lower={}, upper={}, depth={})",
            self.inner.value, self.inner.lower, self.inner.upper, self.inner.depth
        )
    }
}

/// Γ(q+1) for q ∈ (0, 1).
#[pyfunction]
fn gamma_plus_one(q: f64) -> PyResult<f64> {
    lfrac::gamma_plus_one(q).map_err(to_py_err)
}

/// Generalized Riemann sum of ḡ·1_C over `range` at the given cover depth.
#[pyfunction]
#[pyo3(signature = (set, gbar, depth, range=None, lipschitz=None))]
fn integrate_riemann(
    set: &PySelfSimilarSet,
    gbar: &str,
    depth: u32,
    range: Option<(f64, f64)>,
    lipschitz: Option<f64>,
) -> PyResult<PyIntegralResult> {
    let term = build_term(set, gbar, lipschitz)?;
    let ambient = set.inner.ambient();
    let range = range.unwrap_or((ambient.lo, ambient.hi));
    Ok(PyIntegralResult {
        inner: lfrac::integrate_riemann(&term, range, depth).map_err(to_py_err)?,
    })
}

/// Self-similarity recursion quadrature over the full ambient interval.
#[pyfunction]
#[pyo3(signature = (set, gbar, depth, lipschitz=None))]
fn integrate_recursive(
    set: &PySelfSimilarSet,
    gbar: &str,
    depth: u32,
    lipschitz: Option<f64>,
) -> PyResult<PyIntegralResult> {
    let term = build_term(set, gbar, lipschitz)?;
    Ok(PyIntegralResult {
        inner: lfrac::integrate_recursive(&term, depth).map_err(to_py_err)?,
    })
}

/// Superposition Σ_j ∫ ḡ_j·1_{C_j}: terms are (set, gbar) or
/// (set, gbar, lipschitz) tuples sharing one dimension.
#[pyfunction]
#[pyo3(signature = (terms, depth, range=None))]
fn integrate_sum(
    terms: Vec<(PySelfSimilarSet, String, Option<f64>)>,
    depth: u32,
    range: Option<(f64, f64)>,
) -> PyResult<PyIntegralResult> {
    let terms = terms
        .iter()
        .map(|(set, gbar, lipschitz)| build_term(set, gbar, *lipschitz))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PyIntegralResult {
        inner: lfrac::integrate_sum(&terms, range, depth).map_err(to_py_err)?,
    })
}

/// A solved separable equation, evaluable with propagated brackets.
#[pyclass(name = "Solution", frozen)]
struct PySolution {
    inner: SolutionEvaluator,
}

#[pymethods]
impl PySolution {
    /// (y, lower, upper) at x.
    fn evaluate(&self, x: f64) -> PyResult<(f64, f64, f64)> {
        let p = self.inner.evaluate(x).map_err(to_py_err)?;
        Ok((p.y, p.lower, p.upper))
    }

    fn value(&self, x: f64) -> PyResult<f64> {
        self.inner.value(x).map_err(to_py_err)
    }

    /// u(x) = ∫ ḡ·1_C d^q t from the anchor abscissa.
    fn u(&self, x: f64) -> PyResult<f64> {
        self.inner.u(x).map_err(to_py_err)
    }

    #[getter]
    fn validity(&self) -> (f64, f64) {
        self.inner.validity()
    }

    #[getter]
    fn blowup(&self) -> Option<f64> {
        self.inner.blowup()
    }

    #[getter]
    fn equilibrium(&self) -> Option<f64> {
        self.inner.equilibrium()
    }
}

/// Solve dy/dx^q = ḡ(x)·1_C(x)·h(y) through (x0, y0).
#[pyfunction]
#[pyo3(signature = (set, gbar, h, x0, y0, depth, k=None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    set: &PySelfSimilarSet,
    gbar: &str,
    h: &str,
    x0: f64,
    y0: f64,
    depth: u32,
    k: Option<f64>,
) -> PyResult<PySolution> {
    let term = build_term(set, gbar, None)?;
    let problem = SeparableProblem::new(term, parse_h(h, k)?, x0, y0).map_err(to_py_err)?;
    Ok(PySolution {
        inner: lfrac::solve(problem, depth).map_err(to_py_err)?,
    })
}

/// Solve with an explicit integration constant: H(y(x)) = c + ∫_a^x ḡ·1_C.
/// c = 0 with quadratic h gives the branch y = −1/P_C(x).
#[pyfunction]
#[pyo3(signature = (set, gbar, h, c, depth, k=None))]
fn solve_with_constant(
    set: &PySelfSimilarSet,
    gbar: &str,
    h: &str,
    c: f64,
    depth: u32,
    k: Option<f64>,
) -> PyResult<PySolution> {
    let term = build_term(set, gbar, None)?;
    let problem = SeparableProblem::with_constant(term, parse_h(h, k)?, c).map_err(to_py_err)?;
    Ok(PySolution {
        inner: lfrac::solve(problem, depth).map_err(to_py_err)?,
    })
}

/// Solve dy/dx^q = Σ_j ḡ_j·1_{C_j} (y-independent): y = y0 + Σ_j u_j.
#[pyfunction]
fn solve_sum_rhs(
    terms: Vec<(PySelfSimilarSet, String, Option<f64>)>,
    x0: f64,
    y0: f64,
    depth: u32,
) -> PyResult<PySolution> {
    let terms = terms
        .iter()
        .map(|(set, gbar, lipschitz)| build_term(set, gbar, *lipschitz))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PySolution {
        inner: lfrac::solve_sum_rhs(terms, x0, y0, depth).map_err(to_py_err)?,
    })
}

fn estimate_to_dict<'py>(py: Python<'py>, est: &LfdEstimate) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("locally_constant", est.locally_constant)?;
    dict.set_item("critical_order", est.critical_order)?;
    dict.set_item("fit_residual", est.fit_residual)?;
    dict.set_item("coefficient", est.coefficient)?;
    dict.set_item("left_coefficient", est.left_coefficient)?;
    dict.set_item("right_coefficient", est.right_coefficient)?;
    dict.set_item("oscillation_band", est.oscillation_band)?;
    dict.set_item("interpolated", est.interpolated)?;
    Ok(dict)
}

/// Critical order (local Hölder exponent) of a callable at x.
#[pyfunction]
#[pyo3(signature = (f, x, h0=1e-2, rho=0.5, count=20, side="both"))]
fn estimate_critical_order<'py>(
    py: Python<'py>,
    f: Py<PyAny>,
    x: f64,
    h0: f64,
    rho: f64,
    count: u32,
    side: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let ladder = ScaleLadder::new(h0, rho, count).map_err(to_py_err)?;
    let func = scalar_callable(f);
    let est = lfrac::estimate_critical_order(func, x, &ladder, parse_side(side)?)
        .map_err(to_py_err)?;
    estimate_to_dict(py, &est)
}

/// Order-q local fractional derivative coefficient of a callable at x.
#[pyfunction]
#[pyo3(signature = (f, x, q, h0=1e-2, rho=0.5, count=20, side="both"))]
#[allow(clippy::too_many_arguments)]
fn lfd_at<'py>(
    py: Python<'py>,
    f: Py<PyAny>,
    x: f64,
    q: f64,
    h0: f64,
    rho: f64,
    count: u32,
    side: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let ladder = ScaleLadder::new(h0, rho, count).map_err(to_py_err)?;
    let func = scalar_callable(f);
    let est = lfrac::lfd_at(func, x, q, &ladder, parse_side(side)?).map_err(to_py_err)?;
    estimate_to_dict(py, &est)
}

/// Residual check of a candidate solution at set points: returns
/// {"max_integral_residual", "points": [{x, rhs, integral_residual, ...}]}.
#[pyfunction]
#[pyo3(signature = (candidate, set, gbar, h, x0, y0, samples, depth, k=None, h0=1e-3, rho=0.5, count=12))]
#[allow(clippy::too_many_arguments)]
fn verify_solution<'py>(
    py: Python<'py>,
    candidate: Py<PyAny>,
    set: &PySelfSimilarSet,
    gbar: &str,
    h: &str,
    x0: f64,
    y0: f64,
    samples: Vec<f64>,
    depth: u32,
    k: Option<f64>,
    h0: f64,
    rho: f64,
    count: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let term = build_term(set, gbar, None)?;
    let problem = SeparableProblem::new(term, parse_h(h, k)?, x0, y0).map_err(to_py_err)?;
    let ladder = ScaleLadder::new(h0, rho, count).map_err(to_py_err)?;
    let func = scalar_callable(candidate);
    let report =
        lfrac::verify_solution(func, &problem, &samples, depth, &ladder).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("max_integral_residual", report.max_integral_residual)?;
    let points: Vec<Bound<'py, PyDict>> = report
        .points
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("x", p.x)?;
            d.set_item("rhs", p.rhs)?;
            d.set_item("lfd_estimate", p.lfd_estimate)?;
            d.set_item("lfd_relative_deviation", p.lfd_relative_deviation)?;
            d.set_item("integral_residual", p.integral_residual)?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    dict.set_item("points", points)?;
    Ok(dict)
}

#[pymodule]
fn lfrac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySelfSimilarSet>()?;
    m.add_class::<PyStaircase>()?;
    m.add_class::<PyIntegralResult>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(gamma_plus_one, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_riemann, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_recursive, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_sum, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_with_constant, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sum_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_critical_order, m)?)?;
    m.add_function(wrap_pyfunction!(lfd_at, m)?)?;
    m.add_function(wrap_pyfunction!(verify_solution, m)?)?;
    m.add("__version__", lfrac::VERSION)?;
    Ok(())
}
