//! Python bindings. Tables cross the boundary as `Table` objects; reports
//! come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use seclab::classes::{classify, ClassifyOptions};
use seclab::common_info::{common_information, maximal_common_partition};
use seclab::entropy::{evaluate, EntropyQuery};
use seclab::io::{table_from_json_str, table_to_json_string};
use seclab::protocol::{apply_protocol, verify_message_identity, Protocol};
use seclab::quantum::maxcorr_report;
use seclab::secrecy::certificates::zero_pattern_scan;
use seclab::secrecy::intrinsic::{intrinsic_information, IntrinsicOptions};
use seclab::secrecy::keycost::{winter_key_cost, KeyCostOptions};
use seclab::secrecy::reversibility::decide_reversibility;
use seclab::{corpus, Error, JointTable, Roles};

create_exception!(seclab_py, SizeCapError, PyException);
create_exception!(seclab_py, ConsistencyError, PyException);

fn err(e: Error) -> PyErr {
    match e {
        Error::SizeCap(_) => SizeCapError::new_err(e.to_string()),
        Error::InternalConsistency(_) => ConsistencyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn roles(x: &str, y: &str, z: &str) -> Roles {
    let split = |s: &str| s.split(',').filter(|p| !p.is_empty()).map(String::from).collect::<Vec<_>>();
    Roles::grouped(&split(x), &split(y), &split(z))
}

fn classify_opts(tol: f64, seed: u64) -> ClassifyOptions {
    ClassifyOptions { tol, intrinsic: IntrinsicOptions { seed, ..Default::default() }, ..Default::default() }
}

/// A joint distribution over named discrete variables.
#[pyclass(name = "Table", frozen)]
struct PyTable {
    inner: JointTable,
}

#[pymethods]
impl PyTable {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self { inner: table_from_json_str(s).map_err(err)? })
    }

    /// A named corpus table or a seeded draw from a generator.
    #[staticmethod]
    #[pyo3(signature = (name, seed = 0))]
    fn corpus(name: &str, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: corpus::emit(name, seed).map_err(err)? })
    }

    fn to_json(&self) -> String {
        table_to_json_string(&self.inner)
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.inner.variables().to_vec()
    }

    #[getter]
    fn alphabets(&self) -> Vec<Vec<String>> {
        self.inner.alphabets().to_vec()
    }

    /// Evaluates `H(A)`, `H(A|B)`, `I(A:B)` or `I(A:B|C)` in bits.
    fn entropy(&self, query: &str) -> PyResult<f64> {
        let q = EntropyQuery::parse(query).map_err(err)?;
        evaluate(&self.inner, &q).map_err(err)
    }

    fn common_partition<'py>(&self, py: Python<'py>, x: &str, y: &str) -> PyResult<Bound<'py, PyAny>> {
        let p = maximal_common_partition(&self.inner, x, y).map_err(err)?;
        let d = to_py(py, &p)?;
        d.cast::<PyDict>()?.set_item("entropy", common_information(&self.inner, x, y).map_err(err)?)?;
        Ok(d)
    }

    #[pyo3(signature = (x = "X", y = "Y", z = "Z", tol = 1e-9, seed = 0))]
    fn classify<'py>(&self, py: Python<'py>, x: &str, y: &str, z: &str, tol: f64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &classify(&self.inner, &roles(x, y, z), &classify_opts(tol, seed)).map_err(err)?)
    }

    #[pyo3(signature = (x = "X", y = "Y", z = "Z", restarts = 64, seed = 0, zbar_card = None, local_only = false))]
    #[allow(clippy::too_many_arguments)]
    fn intrinsic<'py>(
        &self,
        py: Python<'py>,
        x: &str,
        y: &str,
        z: &str,
        restarts: usize,
        seed: u64,
        zbar_card: Option<usize>,
        local_only: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = IntrinsicOptions { restarts, seed, zbar_card, local_only, ..Default::default() };
        to_py(py, &intrinsic_information(&self.inner, &roles(x, y, z), &opts).map_err(err)?)
    }

    #[pyo3(signature = (x = "X", y = "Y", z = "Z", w_card = None, seed = 0))]
    fn keycost<'py>(
        &self,
        py: Python<'py>,
        x: &str,
        y: &str,
        z: &str,
        w_card: Option<usize>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = KeyCostOptions { w_card, seed, ..Default::default() };
        to_py(py, &winter_key_cost(&self.inner, &roles(x, y, z), &opts).map_err(err)?)
    }

    #[pyo3(signature = (x = "X", y = "Y", z = "Z", tol = 1e-9, seed = 0))]
    fn reversibility<'py>(&self, py: Python<'py>, x: &str, y: &str, z: &str, tol: f64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &decide_reversibility(&self.inner, &roles(x, y, z), &classify_opts(tol, seed)).map_err(err)?)
    }

    #[pyo3(signature = (x = "X", y = "Y", z = "Z"))]
    fn zero_pattern_scan<'py>(&self, py: Python<'py>, x: &str, y: &str, z: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &zero_pattern_scan(&self.inner, &roles(x, y, z)).map_err(err)?)
    }

    #[pyo3(signature = (x = "X", y = "Y", z = "Z", tol = 1e-9))]
    fn maxcorr_report<'py>(&self, py: Python<'py>, x: &str, y: &str, z: &str, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &maxcorr_report(&self.inner, &roles(x, y, z), &classify_opts(tol, 0)).map_err(err)?)
    }

    /// Applies a protocol given as JSON; returns the extended table and the
    /// message-identity check.
    #[pyo3(signature = (protocol_json, x = "X", y = "Y", z = "Z", tol = 1e-9))]
    fn run_protocol<'py>(
        &self,
        py: Python<'py>,
        protocol_json: &str,
        x: &str,
        y: &str,
        z: &str,
        tol: f64,
    ) -> PyResult<(PyTable, Bound<'py, PyAny>)> {
        let r = roles(x, y, z);
        let p = Protocol::from_json_str(protocol_json).map_err(err)?;
        let tr = apply_protocol(&self.inner, &r, &p).map_err(err)?;
        let report = verify_message_identity(&tr, &r, tol).map_err(err)?;
        Ok((PyTable { inner: tr.extended }, to_py(py, &report)?))
    }

    fn __repr__(&self) -> String {
        format!("Table(variables={:?})", self.inner.variables())
    }
}

#[pyfunction]
fn corpus_names() -> Vec<&'static str> {
    corpus::list()
}

#[pymodule]
pub fn seclab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTable>()?;
    m.add_function(wrap_pyfunction!(corpus_names, m)?)?;
    m.add("SizeCapError", m.py().get_type::<SizeCapError>())?;
    m.add("ConsistencyError", m.py().get_type::<ConsistencyError>())?;
    Ok(())
}
