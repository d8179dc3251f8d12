use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn with_module<T>(f: impl FnOnce(Python<'_>, &Bound<'_, PyModule>) -> PyResult<T>) -> T {
    Python::attach(|py| {
        let m = wrap_pymodule!(seclab_py::seclab_py)(py).into_bound(py);
        py.import("sys")?.getattr("modules")?.set_item("seclab_py", &m)?;
        f(py, &m)
    })
    .unwrap()
}

#[test]
fn smoke_script_runs_against_the_module() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../python/smoke_test.py");
    let code = CString::new(std::fs::read_to_string(path).unwrap()).unwrap();
    with_module(|py, _| {
        let globals = PyDict::new(py);
        globals.set_item("__name__", "smoke")?;
        globals.set_item("__file__", path)?;
        py.run(&code, Some(&globals), None)?;
        py.eval(c"main()", Some(&globals), None)?;
        Ok(())
    });
}

#[test]
fn errors_map_to_python_exceptions() {
    with_module(|py, m| {
        let table = m.getattr("Table")?;
        let wide = r#"{"variables":["X","Y","Z"],"alphabets":{"X":["0"],"Y":["0"],"Z":["0"]},"mass":[{"X":"0","Y":"0","Z":"0","p":1.0}]}"#;
        assert!(table.call_method1("from_json", (wide,)).is_ok());
        let err = table.call_method1("corpus", ("NOPE",)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let t = table.call_method1("corpus", ("PERFECT_BIT",))?;
        let v: f64 = t.call_method1("entropy", ("H(X)",))?.extract()?;
        assert!((v - 1.0).abs() < 1e-12);
        Ok(())
    });
}
