use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(irsdf_py::irsdf_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("ir", m).unwrap();
        f(py, &globals);
    });
}

fn run(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &str) -> PyResult<()> {
    let code = std::ffi::CString::new(code).unwrap();
    py.run(&code, Some(globals), None)
}

#[test]
fn scheme_run_round_trips_through_python() {
    with_module(|py, g| {
        run(
            py,
            g,
            r#"
ch = ir.ChannelSet.draw(4, 2, 4, 2, seed=1)
assert ch.dims == (4, 2, 4, 2)
res = ir.run_scheme(ch, "random_irs", seed=1, max_outer_iters=2)
assert res.feasible and res.sum_rate > 0
rep = ir.sinr_report(ch, res.state)
assert abs(rep.sum_rate - res.sum_rate) < 1e-12
assert len(res.state.g) == 4 and len(res.state.g[0]) == 2
"#,
        )
        .unwrap();
    });
}

#[test]
fn bad_inputs_raise_value_error() {
    with_module(|py, g| {
        let err = run(py, g, "ir.ChannelSet.draw(2, 1, 4, 2)").unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = run(py, g, "ir.run_scheme(ir.ChannelSet.draw(2, 2, 2, 1), 'nope')").unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = run(py, g, "ir.run_experiment()").unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}
