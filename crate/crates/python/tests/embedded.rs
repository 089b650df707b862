use pyo3::prelude::*;
use pyo3::types::PyDict;
use selfonn_py::selfonn_py;

#[test]
fn module_works_inside_an_embedded_interpreter() {
    pyo3::append_to_inittab!(selfonn_py);
    pyo3::prepare_freethreaded_python();
    Python::with_gil(|py| {
        let locals = PyDict::new_bound(py);
        py.run_bound(
            r#"
import selfonn_py as so
cfg = so.ModelConfig.default()
count = cfg.param_count()
zero = so.Model.zeros(so.ModelConfig.reduced(), f64=True)
out = zero.forward([0.0] * so.SEGMENT_LEN)
label = zero.classify([0.0] * so.SEGMENT_LEN)
norm = so.normalize_segment([0.0, 2.0, 4.0])
m = so.compute_metrics(8, 2, 4, 6)
tiny = so.ModelConfig([(2, 3, 2)], q_order=2, dense_width=3, input_length=16)
"#,
            None,
            Some(&locals),
        )
        .unwrap();
        let get = |name: &str| locals.get_item(name).unwrap().unwrap();
        assert_eq!(get("count").extract::<usize>().unwrap(), 259_170);
        assert_eq!(get("out").extract::<Vec<f64>>().unwrap(), vec![0.0, 0.0]);
        assert_eq!(get("label").extract::<String>().unwrap(), "faulty");
        assert_eq!(
            get("norm").extract::<Vec<f64>>().unwrap(),
            vec![-1.0, 0.0, 1.0]
        );
        let m = get("m");
        assert_eq!(
            m.get_item("precision").unwrap().extract::<f64>().unwrap(),
            0.8
        );
        let tiny = get("tiny");
        let expected = 2 * 3 * 2 + 2 + 2 * 8 * 3 * 2 + 3 + 3 * 2 * 2 + 2;
        assert_eq!(
            tiny.call_method0("param_count")
                .unwrap()
                .extract::<usize>()
                .unwrap(),
            expected
        );

        let err = py
            .run_bound("so.ModelConfig([], q_order=0)", None, Some(&locals))
            .unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}
