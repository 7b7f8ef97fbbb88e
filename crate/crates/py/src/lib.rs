//! Python bindings for the dyadic oscillation toolkit. The module mirrors
//! the core crate's main types and operations: gauges, dyadic step
//! functions, the oscillation functionals, the explicit sub-solution, the
//! extremal search, gauge regularization, and the two counterexample
//! constructions.

use bmolab_core as core;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A gauge function `h` with its declared structural flags.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Gauge {
    inner: core::OscillationGauge,
}

#[pymethods]
impl Gauge {
    /// `h(t) = t^p` for `0 < p ≤ 1`.
    #[staticmethod]
    fn power(p: f64) -> PyResult<Self> {
        Ok(Self { inner: core::OscillationGauge::power(p).map_err(err)? })
    }

    /// `h(t) = log(1 + t)`.
    #[staticmethod]
    fn log1p() -> Self {
        Self { inner: core::OscillationGauge::log1p() }
    }

    /// The non-monotone gauge with linear dips to zero at the integers.
    #[staticmethod]
    fn section6() -> Self {
        Self { inner: core::section6_gauge() }
    }

    /// `h(t) = t^2 |log2 t - round(log2 t)|`, vanishing at powers of two.
    #[staticmethod]
    fn dip() -> Self {
        Self { inner: core::dip_gauge() }
    }

    /// Piecewise-linear gauge through `(t, h(t))` pairs starting at t = 0.
    #[staticmethod]
    fn from_table(points: Vec<(f64, f64)>) -> PyResult<Self> {
        Ok(Self { inner: core::OscillationGauge::from_table(points).map_err(err)? })
    }

    /// The gauge lifted by a constant `c`. `declare_growth` additionally
    /// marks the result as tending to infinity, which the regularizer
    /// requires; the declaration is taken on faith, as with any flag.
    #[pyo3(signature = (c, declare_growth = false))]
    fn shifted(&self, c: f64, declare_growth: bool) -> Self {
        let base = self.inner.clone();
        let mut flags = self.inner.flags();
        flags.vanishes_at_zero = false;
        flags.tends_to_infinity |= declare_growth;
        let name = format!("{}+{}", self.inner.name(), c);
        Self { inner: core::OscillationGauge::from_fn(name, flags, move |t| base.eval(t) + c) }
    }

    fn eval(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    fn d1(&self, t: f64) -> f64 {
        self.inner.d1(t)
    }

    fn inverse(&self, y: f64) -> PyResult<f64> {
        self.inner.inverse(y).map_err(err)
    }

    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Gauge({})", self.inner.name())
    }
}

/// A dyadic step function on the unit cube, constant on depth-`depth` cells.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct SimpleFunction {
    inner: core::DyadicSimpleFunction,
}

#[pymethods]
impl SimpleFunction {
    #[new]
    fn new(n: usize, depth: u32, leaves: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: core::DyadicSimpleFunction::new(n, depth, leaves).map_err(err)? })
    }

    /// The Haar function of order `k` represented at the given depth.
    #[staticmethod]
    fn haar(k: u32, depth: u32) -> PyResult<Self> {
        Ok(Self { inner: core::DyadicSimpleFunction::haar(k, depth).map_err(err)? })
    }

    #[staticmethod]
    fn from_dsf(text: &str) -> PyResult<Self> {
        Ok(Self { inner: core::DyadicSimpleFunction::from_dsf_str(text).map_err(err)? })
    }

    fn to_dsf(&self) -> String {
        self.inner.to_dsf_string()
    }

    fn n(&self) -> usize {
        self.inner.n()
    }

    fn depth(&self) -> u32 {
        self.inner.depth()
    }

    fn leaves(&self) -> Vec<f64> {
        self.inner.leaves().to_vec()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    /// Conditional expectation onto depth-`m` cells.
    fn truncate(&self, m: u32) -> Self {
        Self { inner: self.inner.truncate(m) }
    }

    fn clamp(&self, m: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.clamp(m).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("SimpleFunction(n={}, depth={})", self.inner.n(), self.inner.depth())
    }
}

/// Dyadic BMO norm (square root of the worst per-cube variance).
#[pyfunction]
fn bmo_dyadic(phi: &SimpleFunction) -> f64 {
    core::bmo_dyadic(&phi.inner).value
}

/// Grid BMO norm at resolution `g` (shifted windows, endpoint refinement).
#[pyfunction]
fn bmo_grid(phi: &SimpleFunction, g: u32) -> PyResult<f64> {
    Ok(core::bmo_grid(&phi.inner, g).map_err(err)?.value)
}

/// Weak oscillation functional over dyadic cubes.
#[pyfunction]
fn k_h_dyadic(phi: &SimpleFunction, h: &Gauge) -> f64 {
    core::k_h_dyadic(&phi.inner, &h.inner).value
}

/// Weak oscillation functional over the shifted grid at resolution `g`.
#[pyfunction]
fn k_h_grid(phi: &SimpleFunction, h: &Gauge, g: u32) -> PyResult<f64> {
    Ok(core::k_h_grid(&phi.inner, &h.inner, g).map_err(err)?.value)
}

/// The explicit sub-solution evaluated at `(x1, x2)` for parameter `t`.
#[pyfunction]
fn g_eval(x1: f64, x2: f64, t: f64, h: &Gauge) -> PyResult<f64> {
    core::g_eval(x1, x2, t, &h.inner).map_err(err)
}

/// Closed-form lower bound `2^{-(n+2)} h(2^{(n+2)/2} t)`.
#[pyfunction]
fn lower_bound_a(t: f64, h: &Gauge, n: usize) -> f64 {
    core::lower_bound_a(t, &h.inner, n)
}

/// Randomized extremal search. Returns `(value, witness)`.
#[pyfunction]
fn bellman_oracle(
    x1: f64,
    x2: f64,
    t: f64,
    h: &Gauge,
    depth: u32,
    budget: u64,
    seed: u64,
) -> PyResult<(f64, SimpleFunction)> {
    let r = core::bellman_oracle(x1, x2, t, &h.inner, depth, budget, seed).map_err(err)?;
    Ok((r.value, SimpleFunction { inner: r.witness }))
}

/// Worst signed midpoint-convexity margin over random in-domain segments.
#[pyfunction]
fn local_convexity_fuzz(t: f64, h: &Gauge, segments: usize, seed: u64) -> PyResult<f64> {
    core::local_convexity_fuzz(t, &h.inner, segments, seed).map_err(err)
}

/// Regularizes a gauge into a smooth concave dominated minorant; returns it
/// as a new gauge together with its threshold sequence.
#[pyfunction]
fn regularize(h: &Gauge, horizon: f64, eps: f64) -> PyResult<(Gauge, Vec<f64>)> {
    let reg = core::regularize(&h.inner, horizon, eps).map_err(err)?;
    let thresholds = reg.thresholds().to_vec();
    Ok((Gauge { inner: reg.as_gauge() }, thresholds))
}

/// Verifies the bounded-norm construction. Returns `(margin, bmo, k_h,
/// fractional_ok)`.
#[pyfunction]
fn verify_sqrt10m(phi: &SimpleFunction, m_bound: f64) -> PyResult<(f64, f64, f64, bool)> {
    let rep = core::verify_sqrt10m(&phi.inner, m_bound).map_err(err)?;
    Ok((rep.margin, rep.bmo, rep.k_h, rep.fractional_ok))
}

/// Builds the divergent series for a gauge vanishing along a sequence and
/// audits it. Returns `(function, k_d, variance_table)`.
#[pyfunction]
fn haar_series(
    h: &Gauge,
    bound: f64,
    terms: usize,
    horizon: f64,
) -> PyResult<(SimpleFunction, f64, Vec<(usize, f64, f64)>)> {
    let (series, phi) = core::haar_series_build(&h.inner, bound, terms, horizon).map_err(err)?;
    let rep = core::haar_series_audit(&series, &phi, &h.inner).map_err(err)?;
    Ok((SimpleFunction { inner: phi }, rep.k_d, rep.variance_table))
}

/// Rising-sun decomposition of the primitive at level `lam`; returns the
/// maximal intervals where the indefinite integral sits below its future
/// maximum.
#[pyfunction]
fn rising_sun(phi: &SimpleFunction, lam: f64) -> PyResult<Vec<(f64, f64)>> {
    core::rising_sun(&phi.inner, lam).map_err(err)
}

#[pymodule]
fn bmolab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Gauge>()?;
    m.add_class::<SimpleFunction>()?;
    m.add_function(wrap_pyfunction!(bmo_dyadic, m)?)?;
    m.add_function(wrap_pyfunction!(bmo_grid, m)?)?;
    m.add_function(wrap_pyfunction!(k_h_dyadic, m)?)?;
    m.add_function(wrap_pyfunction!(k_h_grid, m)?)?;
    m.add_function(wrap_pyfunction!(g_eval, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_a, m)?)?;
    m.add_function(wrap_pyfunction!(bellman_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(local_convexity_fuzz, m)?)?;
    m.add_function(wrap_pyfunction!(regularize, m)?)?;
    m.add_function(wrap_pyfunction!(verify_sqrt10m, m)?)?;
    m.add_function(wrap_pyfunction!(haar_series, m)?)?;
    m.add_function(wrap_pyfunction!(rising_sun, m)?)?;
    Ok(())
}
