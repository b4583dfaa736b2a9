//! Python module `polimage`: polynomials, matrices, classification and the
//! finite-field oracle. Structured results come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use polimage_core::classify::{
    check_euler, classify_general, euler_predict, evaluate_on_units, field_of_characteristic, ClassifyOptions, Mode,
    UnitTuple,
};
use polimage_core::cli::{corpus, parse_poly};
use polimage_core::freealg::weights::WeightVector;
use polimage_core::matalg::{self, Mat2};
use polimage_core::oracle::{alternating_trace_trials, enumerate_image, DEFAULT_TUPLE_BUDGET};
use polimage_core::{FieldSpec, FreePoly};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn field(characteristic: u64) -> PyResult<FieldSpec> {
    field_of_characteristic(characteristic).map_err(err)
}

/// A non-commutative polynomial with rational coefficients.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Poly {
    inner: FreePoly,
}

#[pymethods]
impl Poly {
    /// Parses `text` (or a builtin such as `s4`) in `vars` variables.
    #[new]
    #[pyo3(signature = (text, vars=None))]
    fn new(text: &str, vars: Option<usize>) -> PyResult<Self> {
        let inner = parse_poly(text, vars, FieldSpec::rationals()).map_err(|e| err(e.message))?;
        Ok(Poly { inner })
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn num_terms(&self) -> usize {
        self.inner.num_terms()
    }

    fn is_multilinear(&self) -> bool {
        self.inner.is_multilinear()
    }

    fn multilinearize(&self) -> PyResult<Poly> {
        Ok(Poly { inner: self.inner.multilinearize().map_err(err)? })
    }

    /// Value at a tuple of matrices over one field.
    fn evaluate(&self, args: Vec<PyRef<'_, Matrix>>) -> PyResult<Matrix> {
        if args.len() != self.inner.nvars() {
            return Err(err(format!("expected {} matrices, got {}", self.inner.nvars(), args.len())));
        }
        let mats: Vec<Mat2> = args.iter().map(|m| m.inner.clone()).collect();
        let target = mats.first().map_or(FieldSpec::rationals(), |m| m.field());
        if mats.iter().any(|m| m.field() != target) {
            return Err(err("matrices over different fields"));
        }
        let p = self.inner.reduce_to(target).map_err(err)?;
        Ok(Matrix { inner: matalg::evaluate(&p, &mats) })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly('{}', vars={})", self.inner, self.inner.nvars())
    }

    fn __eq__(&self, other: PyRef<'_, Poly>) -> bool {
        self.inner == other.inner
    }
}

/// A 2x2 matrix over the rationals or a prime field.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Matrix {
    inner: Mat2,
}

#[pymethods]
impl Matrix {
    /// Entries as `"a,b;c,d"`; `char` is 0 or a prime.
    #[new]
    #[pyo3(signature = (text, char=0))]
    fn new(text: &str, char: u64) -> PyResult<Self> {
        Ok(Matrix { inner: Mat2::parse(text, field(char)?).map_err(err)? })
    }

    #[getter]
    fn characteristic(&self) -> u64 {
        self.inner.field().characteristic()
    }

    fn trace(&self) -> String {
        self.inner.trace().to_string()
    }

    fn det(&self) -> String {
        self.inner.det().to_string()
    }

    fn disc(&self) -> String {
        self.inner.disc().to_string()
    }

    /// `tr^2/det - 2`, or `"inf"` / `"undefined"` when `det = 0`.
    fn pi(&self) -> String {
        self.inner.pi_invariant().to_string()
    }

    fn cone_class(&self) -> &'static str {
        self.inner.cone_class().tag()
    }

    fn __add__(&self, other: PyRef<'_, Matrix>) -> PyResult<Matrix> {
        self.same_field(&other)?;
        Ok(Matrix { inner: &self.inner + &other.inner })
    }

    fn __sub__(&self, other: PyRef<'_, Matrix>) -> PyResult<Matrix> {
        self.same_field(&other)?;
        Ok(Matrix { inner: &self.inner - &other.inner })
    }

    fn __mul__(&self, other: PyRef<'_, Matrix>) -> PyResult<Matrix> {
        self.same_field(&other)?;
        Ok(Matrix { inner: &self.inner * &other.inner })
    }

    fn __eq__(&self, other: PyRef<'_, Matrix>) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Matrix('{}', char={})", self.inner, self.characteristic())
    }
}

impl Matrix {
    fn same_field(&self, other: &Matrix) -> PyResult<()> {
        if self.inner.field() == other.inner.field() {
            Ok(())
        } else {
            Err(err("matrices over different fields"))
        }
    }
}

fn poly_arg(poly: &Bound<'_, PyAny>, vars: Option<usize>) -> PyResult<FreePoly> {
    if let Ok(p) = poly.cast::<Poly>() {
        let inner = p.get().inner.clone();
        return match vars {
            Some(m) => inner.with_nvars(m).map_err(err),
            None => Ok(inner),
        };
    }
    let text: String = poly.extract()?;
    parse_poly(&text, vars, FieldSpec::rationals()).map_err(|e| err(e.message))
}

/// Classifies the image of `poly` (a `Poly` or polynomial text).
#[pyfunction]
#[pyo3(signature = (poly, vars=None, char=0, mode="auto", seed=0, weights=None))]
fn classify<'py>(
    py: Python<'py>,
    poly: &Bound<'py, PyAny>,
    vars: Option<usize>,
    char: u64,
    mode: &str,
    seed: u64,
    weights: Option<Vec<Vec<i64>>>,
) -> PyResult<Bound<'py, PyAny>> {
    let f = poly_arg(poly, vars)?;
    let mode: Mode = mode.parse().map_err(err)?;
    let weights = weights.unwrap_or_default().into_iter().map(WeightVector).collect();
    let opts = ClassifyOptions { mode, seed, weights, ..Default::default() };
    let class = py.detach(|| classify_general(&f, char, &opts)).map_err(err)?;
    to_py(py, &class)
}

/// Exhaustive image over `M_2(F_q)`; the dict includes the image as strings.
#[pyfunction]
#[pyo3(signature = (poly, field, vars=None, budget=DEFAULT_TUPLE_BUDGET))]
fn enumerate<'py>(
    py: Python<'py>,
    poly: &Bound<'py, PyAny>,
    field: u64,
    vars: Option<usize>,
    budget: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let f = poly_arg(poly, vars)?;
    let report = py.detach(|| enumerate_image(&f, field, budget)).map_err(err)?;
    let out = to_py(py, &report)?;
    let image: Vec<String> = report.image.iter().map(|m| m.to_string()).collect();
    out.cast::<PyDict>()?.set_item("image", image)?;
    Ok(out)
}

/// Eulerian prediction for matrix units such as `"e12,e21"`, optionally
/// checked against the value of a multilinear polynomial.
#[pyfunction]
#[pyo3(signature = (units, poly=None, n=2))]
fn euler<'py>(py: Python<'py>, units: &str, poly: Option<&Bound<'py, PyAny>>, n: usize) -> PyResult<Bound<'py, PyAny>> {
    let t = UnitTuple::parse(units, n).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("units", t.to_string())?;
    out.set_item("verdict", to_py(py, &euler_predict(&t))?)?;
    if let Some(p) = poly {
        let f = poly_arg(p, Some(t.len()))?;
        out.set_item("value", evaluate_on_units(&f, &t).map_err(err)?.to_string())?;
        out.set_item("compatible", check_euler(&f, &t).map_err(err)?)?;
    }
    Ok(out.into_any())
}

/// Runs the built-in corpus; one dict per entry.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn run_corpus(py: Python<'_>, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let results = py.detach(|| corpus::run_corpus(seed)).map_err(err)?;
    to_py(py, &results)
}

/// Seeded check of the alternating trace identity over `F_p`.
#[pyfunction]
#[pyo3(signature = (field=101, trials=100, seed=0))]
fn verify_alternating_trace(py: Python<'_>, field: u64, trials: usize, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let report = py.detach(|| alternating_trace_trials(field, trials, seed)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn polimage(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Poly>()?;
    m.add_class::<Matrix>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(euler, m)?)?;
    m.add_function(wrap_pyfunction!(run_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(verify_alternating_trace, m)?)?;
    Ok(())
}
