use pyo3::exceptions::{PyRuntimeError, PyTimeoutError, PyValueError};
use pyo3::prelude::*;

use pcore::absorber::{self, AbsorbOptions};
use pcore::chains;
use pcore::grid;
use pcore::io;
use pcore::oracle::{self, Mode};
use pcore::{Error, Outcome};

fn err(e: Error) -> PyErr {
    match e.root() {
        Error::Timeout(_) => PyTimeoutError::new_err(e.to_string()),
        Error::Parse { .. }
        | Error::Parameter(_)
        | Error::Precondition(_)
        | Error::Index { .. }
        | Error::Size { .. }
        | Error::Cycle(..)
        | Error::Divisibility { .. }
        | Error::MinMax
        | Error::Goodness(_)
        | Error::Dimension(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(module = "posetpack", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Poset {
    inner: pcore::Poset,
}

#[pymethods]
impl Poset {
    /// Closure of the pairs `(i, j)` meaning `i < j` on `0..n`.
    #[new]
    fn new(n: usize, relations: Vec<(usize, usize)>) -> PyResult<Self> {
        pcore::Poset::new(n, &relations).map(|inner| Poset { inner }).map_err(err)
    }

    #[staticmethod]
    fn chain(n: usize) -> Self {
        Poset { inner: pcore::Poset::chain(n) }
    }

    #[staticmethod]
    fn antichain(n: usize) -> Self {
        Poset { inner: pcore::Poset::antichain(n) }
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        io::parse_poset(text).map(|inner| Poset { inner }).map_err(err)
    }

    fn to_text(&self) -> String {
        io::poset_to_text(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    fn leq(&self, a: usize, b: usize) -> bool {
        a < self.inner.size() && b < self.inner.size() && self.inner.leq(a, b)
    }

    fn cover_relations(&self) -> Vec<(usize, usize)> {
        self.inner.cover_relations()
    }

    fn fingerprint(&self) -> u64 {
        self.inner.fingerprint()
    }

    /// Minimal realizer as a list of linear orders, or `None` above `d_max`.
    #[pyo3(signature = (d_max = 4))]
    fn realizer(&self, d_max: usize) -> PyResult<Option<Vec<Vec<usize>>>> {
        Ok(pcore::find_realizer(&self.inner, d_max).map_err(err)?.map(|r| r.orders().to_vec()))
    }

    fn __repr__(&self) -> String {
        format!("Poset({}, {:?})", self.inner.size(), self.inner.cover_relations())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

#[pyclass(module = "posetpack", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Packing {
    inner: pcore::Packing,
}

#[pymethods]
impl Packing {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        io::parse_packing(text).map(|(inner, _)| Packing { inner }).map_err(err)
    }

    fn to_text(&self, poset: &Poset) -> String {
        io::packing_to_text(&poset.inner, &self.inner)
    }

    #[getter]
    fn ground(&self) -> String {
        self.inner.ground.descriptor()
    }

    /// Copies as lists of element strings in the text format.
    fn copies(&self) -> Vec<Vec<String>> {
        self.inner.copies.iter().map(|c| c.image.iter().map(|e| e.to_string()).collect()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Verifier verdict; `mode` is `packing`, `partition` or `almost:<t>`.
    #[pyo3(signature = (poset, mode = "partition"))]
    fn verify(&self, poset: &Poset, mode: &str) -> PyResult<Report> {
        let m = Mode::parse(mode).map_err(err)?;
        let r = oracle::verify_packing(&self.inner.ground, &poset.inner, &self.inner, m);
        Ok(Report { passed: r.pass, copies: r.copies, covered: r.covered, uncovered: r.uncovered_count, reasons: r.reasons })
    }

    fn svg(&self) -> PyResult<String> {
        pcore::svg::render(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Packing({}, {} copies)", self.inner.ground.descriptor(), self.inner.len())
    }
}

#[pyclass(module = "posetpack", frozen, get_all)]
struct Report {
    passed: bool,
    copies: usize,
    covered: u64,
    uncovered: u64,
    reasons: Vec<String>,
}

#[pymethods]
impl Report {
    fn __bool__(&self) -> bool {
        self.passed
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(passed={}, copies={}, covered={}, uncovered={})",
            self.passed, self.copies, self.covered, self.uncovered
        )
    }
}

#[pyclass(module = "posetpack", frozen)]
struct Absorber {
    inner: absorber::Absorber,
}

#[pymethods]
impl Absorber {
    #[new]
    #[pyo3(signature = (n, d, alpha, f, gamma = Vec::new()))]
    fn new(n: u32, d: u32, alpha: [Vec<u32>; 4], f: [u32; 4], gamma: Vec<u32>) -> PyResult<Self> {
        absorber::build_absorber(n, d, alpha, f, gamma).map(|inner| Absorber { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        io::parse_absorber(text).map(|inner| Absorber { inner }).map_err(err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Elements as bitmasks, bit `i - 1` for base element `i`.
    fn elements(&self) -> Vec<u64> {
        self.inner.elements()
    }

    fn law_holds(&self) -> bool {
        self.inner.law_holds()
    }

    /// Copies packing the absorber minus `removed`, as lists of bitmasks.
    #[pyo3(signature = (poset, removed = Vec::new()))]
    fn absorb(&self, py: Python<'_>, poset: &Poset, removed: Vec<u64>) -> PyResult<Vec<Vec<u64>>> {
        py.detach(|| absorber::absorb(&self.inner, &removed, &poset.inner, &AbsorbOptions::default()))
            .map(|a| a.copies)
            .map_err(err)
    }
}

#[pyfunction]
fn dense_grid_packing(poset: &Poset, dims: Vec<u32>) -> PyResult<Packing> {
    let r = pcore::find_realizer(&poset.inner, poset.inner.size().max(1))
        .map_err(err)?
        .ok_or_else(|| PyRuntimeError::new_err("no realizer found"))?;
    grid::dense_grid_packing(&poset.inner, &r, &dims).map(|inner| Packing { inner }).map_err(err)
}

#[pyfunction]
fn stacked_pair_partition(poset: &Poset, h: u32) -> PyResult<Packing> {
    let r = pcore::find_realizer(&poset.inner, poset.inner.size().max(1))
        .map_err(err)?
        .ok_or_else(|| PyRuntimeError::new_err("no realizer found"))?;
    grid::stacked_pair_partition(&poset.inner, &r, h).map(|inner| Packing { inner }).map_err(err)
}

/// Chains of `h` subsets each, or `None` when proved impossible.
#[pyfunction]
fn equal_chain_partition(py: Python<'_>, n: u32, h: usize) -> PyResult<Option<Vec<Vec<u64>>>> {
    Ok(py.detach(|| chains::equal_chain_partition(n, h)).map_err(err)?.found().map(|c| c.chains))
}

#[pyfunction]
fn gray_code(s: u32) -> PyResult<Vec<u64>> {
    if !(1..=24).contains(&s) {
        return Err(PyValueError::new_err("need 1 <= s <= 24"));
    }
    Ok(chains::gray_code(s))
}

/// Exhaustive partition search over a ground such as `boolean:4`; `None` when infeasible.
#[pyfunction]
#[pyo3(signature = (ground, poset, budget = 10_000_000))]
fn partition_oracle(py: Python<'_>, ground: &str, poset: &Poset, budget: u64) -> PyResult<Option<Packing>> {
    let g = pcore::GroundPoset::parse_descriptor(ground).map_err(err)?;
    match py.detach(|| oracle::exact_partition_oracle(&g, &poset.inner, budget)).map_err(err)? {
        Outcome::Found(inner) => Ok(Some(Packing { inner })),
        Outcome::Infeasible(_) => Ok(None),
    }
}

#[pymodule]
fn posetpack(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Poset>()?;
    m.add_class::<Packing>()?;
    m.add_class::<Report>()?;
    m.add_class::<Absorber>()?;
    m.add_function(wrap_pyfunction!(dense_grid_packing, m)?)?;
    m.add_function(wrap_pyfunction!(stacked_pair_partition, m)?)?;
    m.add_function(wrap_pyfunction!(equal_chain_partition, m)?)?;
    m.add_function(wrap_pyfunction!(gray_code, m)?)?;
    m.add_function(wrap_pyfunction!(partition_oracle, m)?)?;
    Ok(())
}
