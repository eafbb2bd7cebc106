//! Python bindings for the `cubezeta` library.

#![allow(clippy::type_complexity)]

use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use cubezeta_core::congruence;
use cubezeta_core::cube::{self, GroupElement};
use cubezeta_core::identities::{self, IdentityReport, Variant};
use cubezeta_core::{orbits, ppart, quadring, wmds, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(m) => PyValueError::new_err(m),
        Error::Range(m) => PyOverflowError::new_err(m),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn variant(name: &str) -> PyResult<Variant> {
    match name {
        "printed" => Ok(Variant::Printed),
        "corrected" => Ok(Variant::Corrected),
        other => Err(PyValueError::new_err(format!("unknown variant {other:?}"))),
    }
}

fn report_json(r: cubezeta_core::Result<IdentityReport>) -> PyResult<String> {
    let r = r.map_err(to_py)?;
    serde_json::to_string(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// A 2x2x2 integer cube with entries `(a, b, c, d, e, f, g, h)`.
#[pyclass(name = "Cube", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyCube(cube::Cube);

/// Group element descriptor: `("f1", k)`, `("f2", k)` or `("f3", ((p, q), (r, s)))`.
#[derive(FromPyObject)]
enum Word {
    Shift((String, i64)),
    Matrix((String, ((i64, i64), (i64, i64)))),
}

fn element(w: Word) -> PyResult<GroupElement> {
    match w {
        Word::Shift((tag, k)) if tag == "f1" => Ok(GroupElement::Factor1(k)),
        Word::Shift((tag, k)) if tag == "f2" => Ok(GroupElement::Factor2(k)),
        Word::Matrix((tag, ((p, q), (r, s)))) if tag == "f3" => Ok(GroupElement::Factor3([[p, q], [r, s]])),
        _ => Err(PyValueError::new_err("expected ('f1', k), ('f2', k) or ('f3', ((p, q), (r, s)))")),
    }
}

#[pymethods]
impl PyCube {
    #[new]
    fn new(entries: [i64; 8]) -> Self {
        PyCube(cube::Cube::new(entries))
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse().map(PyCube).map_err(to_py)
    }

    fn entries(&self) -> [i64; 8] {
        self.0.to_array()
    }

    /// The three binary quadratic forms as `(a, b, c)` tuples.
    fn forms(&self) -> Vec<(i128, i128, i128)> {
        self.0.forms().iter().map(|f| (f.a, f.b, f.c)).collect()
    }

    /// `(D, m, n)`.
    fn invariants(&self) -> (i128, i128, i128) {
        let i = self.0.invariants();
        (i.d, i.m, i.n)
    }

    fn is_semistable(&self) -> bool {
        self.0.is_semistable()
    }

    fn is_projective(&self) -> bool {
        self.0.is_projective()
    }

    fn act(&self, word: Vec<Word>) -> PyResult<Self> {
        let word: Vec<GroupElement> = word.into_iter().map(element).collect::<PyResult<_>>()?;
        self.0.act(&word).map(PyCube).map_err(to_py)
    }

    fn canonical_form(&self) -> PyResult<Self> {
        self.0.canonical_form().map(PyCube).map_err(to_py)
    }

    #[pyo3(signature = (bound = 4))]
    fn stabilizer_trivial(&self, bound: i64) -> bool {
        self.0.stabilizer_trivial(bound)
    }

    /// `(D, (a1, b1), (a2, b2))`.
    fn ideal_class_pair(&self) -> PyResult<(i64, (i64, i64), (i64, i64))> {
        let p = quadring::pair_from_cube(&self.0).map_err(to_py)?;
        Ok((p.d, (p.first.a, p.first.b), (p.second.a, p.second.b)))
    }

    fn __repr__(&self) -> String {
        format!("Cube({:?})", self.0.to_array())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyfunction]
fn sqrt_count(d: i64, a: i64) -> PyResult<u64> {
    congruence::sqrt_count(d, a).map_err(to_py)
}

#[pyfunction]
fn chi(d: i64, n: u64) -> PyResult<i8> {
    congruence::chi(d, n).map_err(to_py)
}

#[pyfunction]
fn is_discriminant(d: i64) -> bool {
    congruence::is_discriminant(d)
}

#[pyfunction]
fn orbit_count(d: i64, m: i64, n: i64) -> PyResult<u64> {
    orbits::orbit_count(d, m, n).map_err(to_py)
}

/// `(count, stable)` from bounded union-find enumeration.
#[pyfunction]
#[pyo3(signature = (d, m, n, entry_bound = None, slack = 2))]
fn orbit_count_oracle(py: Python<'_>, d: i64, m: i64, n: i64, entry_bound: Option<i64>, slack: i64) -> PyResult<(u64, bool)> {
    let bound = entry_bound.unwrap_or_else(|| cube::default_entry_bound(m, n));
    let r = py
        .detach(|| cube::orbit_count_oracle(d, m, n, bound, slack))
        .map_err(to_py)?;
    Ok((r.count, r.stable))
}

/// Congruence pairs `(x, y, s, t)` with their constructed cubes.
#[pyfunction]
fn congruence_pairs(d: i64, m: i64, n: i64) -> PyResult<Vec<((i64, i64, i64, i64), PyCube)>> {
    orbits::congruence_pairs(d, m, n)
        .map_err(to_py)?
        .into_iter()
        .map(|p| {
            let c = orbits::cube_from_invariants(&p).map_err(to_py)?;
            Ok(((p.x, p.y, p.s, p.t), PyCube(c)))
        })
        .collect()
}

#[pyfunction]
fn a_coeff(d: i64, m: u64) -> PyResult<u64> {
    wmds::a_coeff(d, m).map_err(to_py)
}

#[pyfunction]
fn a_coeff3(d: i64, m: u64, n: u64) -> PyResult<u64> {
    wmds::a_coeff3(d, m, n).map_err(to_py)
}

/// `{(l, k, t): [c0, c1, ...]}` for the expanded `A3` p-part.
#[pyfunction]
#[pyo3(name = "ppart", signature = (kmax, p = None))]
fn ppart_coefficients(kmax: usize, p: Option<i64>) -> PyResult<Vec<((usize, usize, usize), Vec<i128>)>> {
    let s = ppart::f_a3_expand(kmax, p).map_err(to_py)?;
    Ok(s.iter().map(|(l, k, t, c)| ((l, k, t), c.coeffs().to_vec())).collect())
}

#[pyfunction]
#[pyo3(signature = (kmax, p = None))]
fn thm44_check(kmax: usize, p: Option<i64>) -> PyResult<bool> {
    Ok(ppart::thm44_check(kmax, p).map_err(to_py)?.equal)
}

#[pyfunction]
fn fiber_count(d: i64, a1: i64, a2: i64) -> PyResult<u64> {
    quadring::fiber_count(d, a1, a2).map_err(to_py)
}

/// `[(a1, b1, a2, b2, fiber, fiber_exact)]`.
#[pyfunction]
fn moduli(d: i64, a1: i64, a2: i64) -> PyResult<Vec<(i64, i64, i64, i64, u64, u64)>> {
    Ok(quadring::moduli(d, a1, a2)
        .map_err(to_py)?
        .into_iter()
        .map(|r| (r.a1, r.b1, r.a2, r.b2, r.fiber, r.fiber_exact))
        .collect())
}

/// Runs one identity check and returns its JSON report.
#[pyfunction]
#[pyo3(signature = (identity, d, m = None, variant = "printed", a1 = None, a2 = None))]
fn verify(
    py: Python<'_>,
    identity: &str,
    d: i64,
    m: Option<usize>,
    variant: &str,
    a1: Option<i64>,
    a2: Option<i64>,
) -> PyResult<String> {
    let v = self::variant(variant)?;
    let r = py.detach(|| match identity {
        "prop21" => Some(identities::verify_prop21(d, m.unwrap_or(200), v)),
        "cor24" => Some(identities::verify_cor24(d, m.unwrap_or(200), v)),
        "prop25" => Some(identities::verify_prop25(d, m.unwrap_or(100), v)),
        "thm12" => Some(identities::verify_thm12(d, m.unwrap_or(32), v)),
        "lemma41" => Some(identities::verify_lemma41(d, m.unwrap_or(48))),
        "thm13" => Some(quadring::verify_thm13(d, a1.unwrap_or(1), a2.unwrap_or(1), v)),
        _ => None,
    });
    match r {
        Some(r) => report_json(r),
        None => Err(PyValueError::new_err(format!("unknown identity {identity:?}"))),
    }
}

/// `(value, converges)` for the truncated triple sum.
#[pyfunction]
fn partial_sum(s1: f64, s2: f64, w: f64, d_max: i64, m_max: i64) -> PyResult<(f64, bool)> {
    let r = identities::partial_sum(s1, s2, w, d_max, m_max).map_err(to_py)?;
    Ok((r.value, r.converges))
}

#[pymodule(name = "cubezeta")]
fn cubezeta_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCube>()?;
    m.add_function(wrap_pyfunction!(sqrt_count, m)?)?;
    m.add_function(wrap_pyfunction!(chi, m)?)?;
    m.add_function(wrap_pyfunction!(is_discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_count, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_count_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(congruence_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(a_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(a_coeff3, m)?)?;
    m.add_function(wrap_pyfunction!(ppart_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(thm44_check, m)?)?;
    m.add_function(wrap_pyfunction!(fiber_count, m)?)?;
    m.add_function(wrap_pyfunction!(moduli, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(partial_sum, m)?)?;
    Ok(())
}
