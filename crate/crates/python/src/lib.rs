//! Python bindings. Sequences are lists of coordinate lists; class specs are
//! strings such as `"strong:2"`, `"weak:1"` or `"sup"`. Structured results
//! come back as plain dicts.

use blocknorm_core::multilinear::{finite_type, sup_norm, MultiOperator};
use blocknorm_core::rng;
use blocknorm_core::sampling::random_operator;
use blocknorm_core::seqnorms::{class_norm, ClassSpec, ClassStack, VecSequence};
use blocknorm_core::spaces::{Exponent, FiniteLpSpace, Vector};
use blocknorm_core::summing::{block_value, check_compatibility, summing_norm};
use blocknorm_core::theorems::{
    check_diagonal_reduction, check_multiple_formula, check_partition_formula, find_incompatibility_witness,
    CheckOptions,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts a serializable result into Python objects through JSON.
fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn exponent(p: f64) -> PyResult<Exponent> {
    if p == f64::INFINITY {
        Ok(Exponent::Infinity)
    } else {
        Exponent::finite(p).map_err(value_err)
    }
}

fn specs(list: &[String]) -> PyResult<Vec<ClassSpec>> {
    list.iter().map(|s| s.parse::<ClassSpec>().map_err(value_err)).collect()
}

fn stack(list: &[String]) -> PyResult<ClassStack> {
    ClassStack::new(specs(list)?).map_err(value_err)
}

fn sequences(op: &MultiOperator, seqs: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<VecSequence>> {
    if seqs.len() != op.arity() {
        return Err(PyValueError::new_err(format!("{} sequences for arity {}", seqs.len(), op.arity())));
    }
    op.domains.iter().zip(seqs).map(|(d, s)| VecSequence::new(*d, s).map_err(value_err)).collect()
}

/// ℝ^dim with the ℓ_p norm; `p` may be `float("inf")`.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Space {
    inner: FiniteLpSpace,
}

#[pymethods]
impl Space {
    #[new]
    fn new(dim: usize, p: f64) -> PyResult<Self> {
        Ok(Self { inner: FiniteLpSpace::new(dim, exponent(p)?).map_err(value_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.exp.as_f64()
    }

    fn norm(&self, x: Vec<f64>) -> PyResult<f64> {
        Ok(Vector::new(self.inner, x).map_err(value_err)?.norm())
    }

    fn __repr__(&self) -> String {
        format!("Space(dim={}, p={})", self.inner.dim, self.inner.exp.as_f64())
    }
}

fn spaces(list: &[Space]) -> Vec<FiniteLpSpace> {
    list.iter().map(|s| s.inner).collect()
}

/// A multilinear operator with row-major coefficients, codomain index last.
#[pyclass(frozen)]
struct Operator {
    inner: MultiOperator,
}

#[pymethods]
impl Operator {
    #[new]
    fn new(domains: Vec<Space>, codomain: Space, coeffs: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: MultiOperator::new(spaces(&domains), codomain.inner, coeffs).map_err(value_err)? })
    }

    /// `φ₁ ⊗ ⋯ ⊗ φₙ ⊗ b`.
    #[staticmethod]
    fn finite_type(domains: Vec<Space>, functionals: Vec<Vec<f64>>, codomain: Space, b: Vec<f64>) -> PyResult<Self> {
        if domains.len() != functionals.len() {
            return Err(PyValueError::new_err("one functional per domain is required"));
        }
        let phis = domains
            .iter()
            .zip(functionals)
            .map(|(d, c)| Vector::new(d.inner, c).map_err(value_err))
            .collect::<PyResult<Vec<_>>>()?;
        let b = Vector::new(codomain.inner, b).map_err(value_err)?;
        Ok(Self { inner: finite_type(&phis, &b).map_err(value_err)? })
    }

    /// Gaussian coefficients from `seed`.
    #[staticmethod]
    fn random(domains: Vec<Space>, codomain: Space, seed: u64) -> Self {
        Self { inner: random_operator(&mut rng::stream(seed, 0), &spaces(&domains), codomain.inner) }
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape()
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs.clone()
    }

    fn apply(&self, xs: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let vs = self
            .inner
            .domains
            .iter()
            .zip(xs)
            .map(|(d, x)| Vector::new(*d, x).map_err(value_err))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(self.inner.apply(&vs).map_err(value_err)?.coords)
    }

    /// Operator norm with `value`, `exact` and `witness`.
    #[pyo3(signature = (budget = 8, seed = 0))]
    fn sup_norm<'py>(&self, py: Python<'py>, budget: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let est = py.detach(|| sup_norm(&self.inner, budget, seed));
        to_py(py, &est)
    }
}

/// A finite block of zero-based index tuples.
#[pyclass(frozen)]
struct Block {
    inner: blocknorm_core::blocks::Block,
}

#[pymethods]
impl Block {
    #[staticmethod]
    fn diagonal(bounds: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: blocknorm_core::blocks::Block::diagonal(&bounds).map_err(value_err)? })
    }

    #[staticmethod]
    fn full(bounds: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: blocknorm_core::blocks::Block::full(&bounds).map_err(value_err)? })
    }

    /// Tuples with `j_a == j_b`.
    #[staticmethod]
    fn equality(a: usize, b: usize, bounds: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: blocknorm_core::blocks::Block::equality(a, b, &bounds).map_err(value_err)? })
    }

    #[staticmethod]
    fn explicit(bounds: Vec<usize>, tuples: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(Self { inner: blocknorm_core::blocks::Block::explicit(&bounds, tuples).map_err(value_err)? })
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    #[getter]
    fn bounds(&self) -> Vec<usize> {
        self.inner.bounds().to_vec()
    }

    fn members(&self) -> Vec<Vec<usize>> {
        self.inner.members().cloned().collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// `(value, exact)` of a sequence in the class `spec`.
#[pyfunction(name = "class_norm")]
#[pyo3(signature = (spec, space, entries, budget = 8, seed = 0))]
fn py_class_norm(spec: &str, space: Space, entries: Vec<Vec<f64>>, budget: usize, seed: u64) -> PyResult<(f64, bool)> {
    let spec: ClassSpec = spec.parse().map_err(value_err)?;
    let seq = VecSequence::new(space.inner, entries).map_err(value_err)?;
    let e = class_norm(spec, &seq, budget, seed);
    Ok((e.value, e.exact))
}

/// `(value, exact)` of the nested norm of the block image.
#[pyfunction(name = "block_value")]
#[pyo3(signature = (op, block, stack, seqs, budget = 8, seed = 0))]
fn py_block_value(
    op: &Operator,
    block: &Block,
    stack: Vec<String>,
    seqs: Vec<Vec<Vec<f64>>>,
    budget: usize,
    seed: u64,
) -> PyResult<(f64, bool)> {
    let seqs = sequences(&op.inner, seqs)?;
    let e = block_value(&op.inner, &block.inner, &self::stack(&stack)?, &seqs, budget, seed).map_err(value_err)?;
    Ok((e.value, e.exact))
}

/// Certified lower bound on the summing norm, with its witness.
#[pyfunction(name = "summing_norm")]
#[pyo3(signature = (op, block, x, y, truncation = 2, budget = 8, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn py_summing_norm<'py>(
    py: Python<'py>,
    op: &Operator,
    block: &Block,
    x: Vec<String>,
    y: Vec<String>,
    truncation: usize,
    budget: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let (xs, ys) = (specs(&x)?, stack(&y)?);
    let est = py
        .detach(|| summing_norm(&op.inner, &block.inner, &xs, &ys, truncation, budget, seed))
        .map_err(value_err)?;
    to_py(py, &est)
}

/// Compatibility test on explicit scalar-sequence tuples.
#[pyfunction(name = "check_compatibility")]
#[pyo3(signature = (block, x, y, samples, tol = 1e-12))]
fn py_check_compatibility<'py>(
    py: Python<'py>,
    block: &Block,
    x: Vec<String>,
    y: Vec<String>,
    samples: Vec<Vec<Vec<f64>>>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = check_compatibility(&specs(&x)?, &stack(&y)?, &block.inner, &samples, tol).map_err(value_err)?;
    to_py(py, &rep)
}

/// Searches for scalar sequences violating compatibility.
#[pyfunction(name = "find_incompatibility_witness")]
#[pyo3(signature = (block, x, y, truncation, budget = 8, seed = 0, tol = 1e-12))]
#[allow(clippy::too_many_arguments)]
fn py_find_incompatibility_witness<'py>(
    py: Python<'py>,
    block: &Block,
    x: Vec<String>,
    y: Vec<String>,
    truncation: usize,
    budget: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let (xs, ys) = (specs(&x)?, stack(&y)?);
    let rep = py
        .detach(|| find_incompatibility_witness(&xs, &ys, &block.inner, truncation, budget, seed, tol))
        .map_err(value_err)?;
    to_py(py, &rep)
}

fn options(tol_identity: f64) -> CheckOptions {
    CheckOptions { tol_identity, ..CheckOptions::default() }
}

fn samples_for(op: &Operator, samples: Vec<Vec<Vec<Vec<f64>>>>) -> PyResult<Vec<Vec<VecSequence>>> {
    samples.into_iter().map(|s| sequences(&op.inner, s)).collect()
}

/// Diagonal block value with stack `[strong:q, z, …, z]` against the direct sum.
#[pyfunction(name = "check_diagonal_reduction")]
#[pyo3(signature = (op, q, z, samples, tol = 1e-12))]
fn py_check_diagonal_reduction<'py>(
    py: Python<'py>,
    op: &Operator,
    q: f64,
    z: &str,
    samples: Vec<Vec<Vec<Vec<f64>>>>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let z: ClassSpec = z.parse().map_err(value_err)?;
    let rep = check_diagonal_reduction(&op.inner, q, z, &samples_for(op, samples)?, &options(tol)).map_err(value_err)?;
    to_py(py, &rep)
}

/// Full block value with strong stack `qs` against the iterated sum.
#[pyfunction(name = "check_multiple_formula")]
#[pyo3(signature = (op, qs, samples, tol = 1e-12))]
fn py_check_multiple_formula<'py>(
    py: Python<'py>,
    op: &Operator,
    qs: Vec<f64>,
    samples: Vec<Vec<Vec<Vec<f64>>>>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = check_multiple_formula(&op.inner, &qs, &samples_for(op, samples)?, &options(tol)).map_err(value_err)?;
    to_py(py, &rep)
}

/// Value on the block `{j₁ = j₂}` against the double sum.
#[pyfunction(name = "check_partition_formula")]
#[pyo3(signature = (op, q1, q2, samples, tol = 1e-12))]
fn py_check_partition_formula<'py>(
    py: Python<'py>,
    op: &Operator,
    q1: f64,
    q2: f64,
    samples: Vec<Vec<Vec<Vec<f64>>>>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = check_partition_formula(&op.inner, q1, q2, &samples_for(op, samples)?, &options(tol)).map_err(value_err)?;
    to_py(py, &rep)
}

#[pymodule]
fn blocknorm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Space>()?;
    m.add_class::<Operator>()?;
    m.add_class::<Block>()?;
    m.add_function(wrap_pyfunction!(py_class_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_block_value, m)?)?;
    m.add_function(wrap_pyfunction!(py_summing_norm, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_compatibility, m)?)?;
    m.add_function(wrap_pyfunction!(py_find_incompatibility_witness, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_diagonal_reduction, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_multiple_formula, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_partition_formula, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
