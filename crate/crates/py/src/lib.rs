//! Python bindings. Rationals go in as `int`, `str` ("p/q") or anything whose
//! `str()` is one of those (so `fractions.Fraction` works) and come back as
//! canonical strings; shift vectors come back as Python ints.

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mdsp::bench::{bench_compare, generate_random_basis, BenchConfig};
use mdsp::cvp::{cvp_to_mdsp, mdsp_to_cvp, recover_mdsp_distance_sq, solve_cvp_bruteforce, CvpGramInstance};
use mdsp::exact::{shift_ranges, solve_exact};
use mdsp::heuristic::{run_heuristic, HeuristicConfig};
use mdsp::io::{format_matrix, parse_basis_file};
use mdsp::lattice::{certificate_bounds, verify_dmdsp_certificate, DmdspQuery};
use mdsp::lll::{accelerated_reduce, det_identity_check, lll_reduce, AccelConfig, AccelStatus, LllParams};
use mdsp::rational::{format_rational, parse_rational};
use mdsp::{LatticeBasis, MdspInstance, QMatrix, QVector, Rational, ShiftVector};

fn err(e: mdsp::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(&obj.str()?.to_cow()?).map_err(err)
}

fn to_vector(row: &Bound<'_, PyAny>) -> PyResult<QVector> {
    row.try_iter()?
        .map(|x| to_rational(&x?))
        .collect::<PyResult<Vec<_>>>()
        .map(QVector::new)
}

fn to_vectors(rows: &Bound<'_, PyAny>) -> PyResult<Vec<QVector>> {
    rows.try_iter()?.map(|r| to_vector(&r?)).collect()
}

fn to_matrix(rows: &Bound<'_, PyAny>) -> PyResult<QMatrix> {
    QMatrix::from_rows(&to_vectors(rows)?).map_err(err)
}

fn strs(v: &QVector) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn matrix_strs(vs: &[QVector]) -> Vec<Vec<String>> {
    vs.iter().map(strs).collect()
}

fn qmatrix_strs(m: &QMatrix) -> Vec<Vec<String>> {
    matrix_strs(&m.row_vectors())
}

/// MDSP instance: fixed vector `v` and the remaining basis vectors.
#[pyclass(name = "MdspInstance", module = "mdsp_py", frozen)]
struct PyMdspInstance {
    inner: MdspInstance,
}

#[pymethods]
impl PyMdspInstance {
    #[new]
    #[pyo3(signature = (rows, fixed_index = 0))]
    fn new(rows: &Bound<'_, PyAny>, fixed_index: usize) -> PyResult<Self> {
        let inner = MdspInstance::from_rows(&to_matrix(rows)?, fixed_index).map_err(err)?;
        Ok(PyMdspInstance { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn fixed(&self) -> Vec<String> {
        strs(self.inner.fixed())
    }

    #[getter]
    fn rest(&self) -> Vec<Vec<String>> {
        matrix_strs(self.inner.rest())
    }

    /// `dist²(v, ⟨B⟩)` as "p/q".
    fn dist_sq(&self) -> String {
        format_rational(&self.inner.dist_sq())
    }

    /// `(s_i, t_i)` per coordinate.
    fn shift_ranges(&self) -> PyResult<Vec<(BigInt, BigInt)>> {
        let r = shift_ranges(&self.inner).map_err(err)?;
        Ok(r.s.into_iter().zip(r.t).collect())
    }

    fn solve_exact<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let sol = py.detach(|| solve_exact(&self.inner)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("x", sol.x.0)?;
        d.set_item("dist_sq", format_rational(&sol.dist_sq))?;
        d.set_item("basis", matrix_strs(&sol.basis))?;
        Ok(d)
    }

    #[pyo3(signature = (max_passes = 64))]
    fn heuristic<'py>(&self, py: Python<'py>, max_passes: usize) -> PyResult<Bound<'py, PyDict>> {
        let cfg = HeuristicConfig::new(max_passes).map_err(err)?;
        let out = run_heuristic(&self.inner, &cfg).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("x", out.x_total.0)?;
        d.set_item("dist_sq", format_rational(&out.dist_sq))?;
        d.set_item("converged", out.converged)?;
        d.set_item("passes", out.passes_used)?;
        d.set_item("basis", matrix_strs(out.instance.rest()))?;
        Ok(d)
    }

    fn to_cvp(&self) -> PyResult<PyCvpInstance> {
        Ok(PyCvpInstance {
            inner: mdsp_to_cvp(&self.inner).map_err(err)?,
        })
    }

    /// Whether shift vector `x` witnesses `dist(v, ⟨B(x)⟩) ≥ γ‖v‖`.
    fn verify_certificate(&self, x: Vec<BigInt>, gamma: &Bound<'_, PyAny>) -> PyResult<bool> {
        let q = DmdspQuery::new(self.inner.clone(), to_rational(gamma)?).map_err(err)?;
        verify_dmdsp_certificate(&q, &ShiftVector(x)).map_err(err)
    }

    fn certificate_bounds<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let b = certificate_bounds(&self.inner);
        let d = PyDict::new(py);
        d.set_item("big_d", format_rational(&b.big_d))?;
        d.set_item("big_e", format_rational(&b.big_e))?;
        d.set_item("input_bit_size", b.input_bit_size)?;
        d.set_item("d_within_bound", b.d_within_bound())?;
        d.set_item("e_within_bound", b.e_within_bound())?;
        Ok(d)
    }

    /// `det([v|B])² = vol²(B)·dist²(v, ⟨B⟩)`
    fn det_identity_holds(&self) -> PyResult<bool> {
        det_identity_check(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("MdspInstance(n={}, dist_sq={})", self.inner.n(), self.dist_sq())
    }
}

/// Gram-form CVP instance: minimize `(j+c)ᵀ G (j+c)` over integer `j`.
#[pyclass(name = "CvpInstance", module = "mdsp_py", frozen)]
struct PyCvpInstance {
    inner: CvpGramInstance,
}

#[pymethods]
impl PyCvpInstance {
    #[new]
    #[pyo3(signature = (gram, offset, scale_sq = None))]
    fn new(gram: &Bound<'_, PyAny>, offset: &Bound<'_, PyAny>, scale_sq: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let scale = match scale_sq {
            Some(s) => to_rational(s)?,
            None => Rational::from_integer(1.into()),
        };
        let inner = CvpGramInstance::new(to_matrix(gram)?, to_vector(offset)?, scale).map_err(err)?;
        Ok(PyCvpInstance { inner })
    }

    #[getter]
    fn gram(&self) -> Vec<Vec<String>> {
        qmatrix_strs(&self.inner.gram)
    }

    #[getter]
    fn offset(&self) -> Vec<String> {
        strs(&self.inner.offset)
    }

    #[getter]
    fn scale_sq(&self) -> String {
        format_rational(&self.inner.scale_sq)
    }

    fn objective(&self, j: Vec<BigInt>) -> PyResult<String> {
        self.check_len(&j)?;
        Ok(format_rational(&self.inner.objective(&j)))
    }

    /// `(j, objective)` minimizing the form, lexicographically first on ties.
    fn solve(&self, py: Python<'_>) -> PyResult<(Vec<BigInt>, String)> {
        let sol = py.detach(|| solve_cvp_bruteforce(&self.inner)).map_err(err)?;
        Ok((sol.j, format_rational(&sol.objective)))
    }

    fn recover_dist_sq(&self, j: Vec<BigInt>) -> PyResult<String> {
        self.check_len(&j)?;
        Ok(format_rational(&recover_mdsp_distance_sq(&self.inner, &j)))
    }
}

impl PyCvpInstance {
    fn check_len(&self, j: &[BigInt]) -> PyResult<()> {
        if j.len() != self.inner.dim() {
            return Err(err(mdsp::Error::LengthMismatch {
                expected: self.inner.dim(),
                found: j.len(),
            }));
        }
        Ok(())
    }
}

/// MDSP instance equivalent to CVP with basis rows `basis` and `target`.
#[pyfunction]
fn from_cvp(basis: &Bound<'_, PyAny>, target: &Bound<'_, PyAny>) -> PyResult<PyMdspInstance> {
    let inner = cvp_to_mdsp(&to_matrix(basis)?, &to_vector(target)?).map_err(err)?;
    Ok(PyMdspInstance { inner })
}

#[pyfunction]
#[pyo3(signature = (rows, delta = None))]
fn lll<'py>(py: Python<'py>, rows: &Bound<'py, PyAny>, delta: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyDict>> {
    let basis = LatticeBasis::new(to_vectors(rows)?).map_err(err)?;
    let params = match delta {
        Some(d) => LllParams::new(to_rational(d)?).map_err(err)?,
        None => LllParams::default(),
    };
    let (out, trace) = py.detach(|| lll_reduce(&basis, &params)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("basis", matrix_strs(out.vectors()))?;
    d.set_item("swaps", trace.swap_count)?;
    d.set_item("size_reductions", trace.size_reduction_count)?;
    d.set_item("shortest_norm_sq", format_rational(&trace.final_shortest_norm_sq))?;
    Ok(d)
}

/// LLL with `delta` interleaved with MDSP sweeps until a basis vector of
/// squared norm at most `target_norm_sq` appears.
#[pyfunction]
#[pyo3(signature = (rows, target_norm_sq, delta = None, max_rounds = 1000))]
fn accelerated<'py>(
    py: Python<'py>,
    rows: &Bound<'py, PyAny>,
    target_norm_sq: &Bound<'py, PyAny>,
    delta: Option<&Bound<'py, PyAny>>,
    max_rounds: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let basis = LatticeBasis::new(to_vectors(rows)?).map_err(err)?;
    let delta = match delta {
        Some(d) => to_rational(d)?,
        None => mdsp::rational::ratio(1, 4),
    };
    let mut cfg = AccelConfig::new(LllParams::new(delta).map_err(err)?, to_rational(target_norm_sq)?).map_err(err)?;
    cfg.max_rounds = max_rounds;
    let out = py.detach(|| accelerated_reduce(&basis, &cfg)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("basis", matrix_strs(out.basis.vectors()))?;
    d.set_item("reached", out.status == AccelStatus::Reached)?;
    d.set_item("rounds", out.trace.rounds)?;
    d.set_item("shortest_norm_sq", format_rational(&out.trace.final_shortest_norm_sq))?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (dim, entry_bound, seed))]
fn random_basis(dim: usize, entry_bound: u64, seed: u64) -> PyResult<Vec<Vec<String>>> {
    Ok(qmatrix_strs(&generate_random_basis(dim, entry_bound, seed).map_err(err)?))
}

#[pyfunction]
fn parse_basis(text: &str) -> PyResult<Vec<Vec<String>>> {
    Ok(qmatrix_strs(&parse_basis_file(text).map_err(err)?))
}

#[pyfunction]
fn format_basis(rows: &Bound<'_, PyAny>) -> PyResult<String> {
    Ok(format_matrix(&to_matrix(rows)?))
}

/// Bench report as a JSON string.
#[pyfunction(name = "bench")]
#[pyo3(signature = (dims, count, seed, entry_bound = 1000))]
fn run_bench(py: Python<'_>, dims: Vec<usize>, count: usize, seed: u64, entry_bound: u64) -> PyResult<String> {
    let mut cfg = BenchConfig::new(dims, count, seed);
    cfg.entry_bound = entry_bound;
    let report = py.detach(|| bench_compare(&cfg)).map_err(err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
pub fn mdsp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMdspInstance>()?;
    m.add_class::<PyCvpInstance>()?;
    m.add_function(wrap_pyfunction!(from_cvp, m)?)?;
    m.add_function(wrap_pyfunction!(lll, m)?)?;
    m.add_function(wrap_pyfunction!(accelerated, m)?)?;
    m.add_function(wrap_pyfunction!(random_basis, m)?)?;
    m.add_function(wrap_pyfunction!(parse_basis, m)?)?;
    m.add_function(wrap_pyfunction!(format_basis, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    Ok(())
}
