//! Python bindings: domains, p-allowable index sets, thresholds, monomial
//! norms, kernels and the property suites.

use mbk_core::exact::{format_rational, Exponent};
use mbk_core::indexsets::{
    effective_conditions, enumerate_sp as core_enumerate_sp, thresholds as core_thresholds,
};
use mbk_core::kernel::{evaluate_kernel, twist as core_twist, KernelQuery};
use mbk_core::norms::{closed_form_norm_p, quadrature_norm_p};
use mbk_core::verify::{run_suite, Suite};
use mbk_core::{DomainSpec, IndexBox, Membership, MultiIndex, ThresholdSet};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn exact_p(p: &str) -> PyResult<Exponent> {
    Exponent::parse_exact(p).map_err(value_error)
}

fn lenient_p(p: &str) -> PyResult<Exponent> {
    Exponent::parse_lenient(p).map_err(value_error)
}

/// A Reinhardt domain, parsed from JSON or shorthand such as `omega_a:1,1,1,2`.
#[pyclass(name = "Domain", frozen)]
struct PyDomain {
    inner: DomainSpec,
}

#[pymethods]
impl PyDomain {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        DomainSpec::parse(spec)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    /// `"inside"`, `"outside"` or `"boundary"`.
    fn contains(&self, z: Vec<Complex64>) -> PyResult<&'static str> {
        Ok(match self.inner.contains_point(&z).map_err(value_error)? {
            Membership::Inside => "inside",
            Membership::Outside => "outside",
            Membership::Boundary => "boundary",
        })
    }

    /// Symbolic allowability conditions.
    fn conditions(&self) -> String {
        effective_conditions(&self.inner).to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Domain('{}')", self.inner)
    }
}

/// p-allowable indices of a box such as `"-3:0,-3:0"`; `p` is an exact rational string.
#[pyfunction]
fn enumerate_sp(domain: &PyDomain, p: &str, index_box: &str) -> PyResult<Vec<Vec<i64>>> {
    let index_box = IndexBox::parse(index_box).map_err(value_error)?;
    let found = core_enumerate_sp(&domain.inner, &exact_p(p)?, &index_box).map_err(value_error)?;
    Ok(found.into_iter().map(|a| a.as_slice().to_vec()).collect())
}

/// Threshold exponents in descending order as `"n/d"` strings, or `None` when dense.
#[pyfunction]
fn thresholds(domain: &PyDomain) -> PyResult<Option<Vec<String>>> {
    match core_thresholds(&domain.inner).map_err(value_error)? {
        ThresholdSet::Dense => Ok(None),
        set => Ok(Some(
            set.values_desc().iter().map(format_rational).collect(),
        )),
    }
}

/// Closed-form `||e_alpha||_p^p`; infinite when `alpha` is not allowable.
#[pyfunction]
fn norm(domain: &PyDomain, alpha: Vec<i64>, p: &str) -> PyResult<f64> {
    let value = closed_form_norm_p(&domain.inner, &MultiIndex::new(alpha), &lenient_p(p)?)
        .map_err(value_error)?;
    Ok(value.value().unwrap_or(f64::INFINITY))
}

/// Quadrature estimate of `||e_alpha||_p^p`; infinite when the cutoff ladder diverges.
#[pyfunction]
#[pyo3(signature = (domain, alpha, p, rel_tol = 1e-9))]
fn quadrature_norm(domain: &PyDomain, alpha: Vec<i64>, p: f64, rel_tol: f64) -> PyResult<f64> {
    let report = quadrature_norm_p(&domain.inner, &MultiIndex::new(alpha), p, rel_tol)
        .map_err(value_error)?;
    Ok(if report.diverged {
        f64::INFINITY
    } else {
        report.estimate
    })
}

/// Truncated p-monomial basis kernel `K_p(z, w)`.
#[pyfunction]
#[pyo3(signature = (domain, p, z, w, truncation = 200, rel_tol = 1e-10))]
fn kernel(
    domain: &PyDomain,
    p: &str,
    z: Vec<Complex64>,
    w: Vec<Complex64>,
    truncation: u32,
    rel_tol: f64,
) -> PyResult<Complex64> {
    let query = KernelQuery {
        domain: domain.inner.clone(),
        p: lenient_p(p)?,
        z,
        w,
        truncation,
        rel_tol,
    };
    evaluate_kernel(&query)
        .map(|v| v.value)
        .map_err(value_error)
}

/// Componentwise `zeta |zeta|^(p-2)`.
#[pyfunction]
fn twist(zeta: Vec<Complex64>, p: f64) -> Vec<Complex64> {
    core_twist(&zeta, p)
}

/// Run a property suite; returns `(passed, report_json)`.
#[pyfunction]
#[pyo3(signature = (suite, seed = 1))]
fn verify(py: Python<'_>, suite: &str, seed: u64) -> PyResult<(bool, String)> {
    let suite: Suite = suite.parse().map_err(value_error)?;
    let report = py.detach(|| run_suite(suite, seed)).map_err(value_error)?;
    Ok((report.passed, report.to_json().to_string()))
}

#[pymodule]
fn mbk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_function(wrap_pyfunction!(enumerate_sp, m)?)?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(quadrature_norm, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(twist, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
