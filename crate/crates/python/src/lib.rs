//! Python bindings: model configuration, initialization, forward passes,
//! checkpoints, benchmarking and the signal/metric helpers.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use selfonn::data::{generate_synthetic_recording, DefectSpec, SynthConfig};
use selfonn::eval::{bench_forward, classify_segment, compute_metrics as metrics, ConfusionCounts};
use selfonn::model::{load_checkpoint, save_checkpoint, AnyParameters};
use selfonn::real::Real;
use selfonn::signal;

fn to_py(e: selfonn::Error) -> PyErr {
    match e {
        selfonn::Error::Io(_)
        | selfonn::Error::Checkpoint(_)
        | selfonn::Error::Recording { .. }
        | selfonn::Error::Manifest { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Network architecture.
#[pyclass(name = "ModelConfig", module = "selfonn_py")]
#[derive(Clone)]
struct PyModelConfig {
    inner: selfonn::ModelConfig,
}

#[pymethods]
impl PyModelConfig {
    /// `layers` is a list of `(neurons, kernel_size, stride)`.
    #[new]
    #[pyo3(signature = (layers, q_order=3, dense_width=32, output_classes=2, input_length=4096))]
    fn new(
        layers: Vec<(usize, usize, usize)>,
        q_order: usize,
        dense_width: usize,
        output_classes: usize,
        input_length: usize,
    ) -> PyResult<Self> {
        let inner = selfonn::ModelConfig {
            input_length,
            op_layers: layers
                .into_iter()
                .map(|(n, k, s)| selfonn::model::OpLayerSpec::new(n, k, s))
                .collect(),
            q_order,
            dense_width,
            output_classes,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Five layers of 16 neurons, kernels 81/41/21/7/7, stride 2, Q = 3.
    #[staticmethod]
    fn default() -> Self {
        Self {
            inner: selfonn::ModelConfig::default(),
        }
    }

    /// Three layers of 8 neurons, kernels 81/41/21, stride 4, Q = 3.
    #[staticmethod]
    fn reduced() -> Self {
        Self {
            inner: selfonn::ModelConfig::reduced(),
        }
    }

    #[getter]
    fn q_order(&self) -> usize {
        self.inner.q_order
    }

    #[getter]
    fn input_length(&self) -> usize {
        self.inner.input_length
    }

    #[getter]
    fn layers(&self) -> Vec<(usize, usize, usize)> {
        self.inner
            .op_layers
            .iter()
            .map(|l| (l.out_neurons, l.kernel_size, l.stride))
            .collect()
    }

    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    /// `(channels, length)` after the input and every operational layer.
    fn shape_trace(&self) -> Vec<(usize, usize)> {
        self.inner.shape_trace()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("config serializes")
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: selfonn::ModelConfig =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelConfig(layers={:?}, q_order={}, dense_width={}, output_classes={})",
            self.layers(),
            self.inner.q_order,
            self.inner.dense_width,
            self.inner.output_classes
        )
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Network parameters in 32- or 64-bit arithmetic.
#[pyclass(name = "Model", module = "selfonn_py")]
struct PyModel {
    params: AnyParameters,
}

fn forward_any<T: Real>(p: &selfonn::ModelParameters<T>, x: &[f64]) -> selfonn::Result<Vec<f64>> {
    let input: Vec<T> = x.iter().map(|&v| T::from_f64(v)).collect();
    Ok(p.forward(&input)?.iter().map(|v| v.as_f64()).collect())
}

macro_rules! with_params {
    ($any:expr, $p:ident => $body:expr) => {
        match $any {
            AnyParameters::F32($p) => $body,
            AnyParameters::F64($p) => $body,
        }
    };
}

#[pymethods]
impl PyModel {
    /// Glorot-uniform weights and zero biases drawn from `seed`.
    #[staticmethod]
    #[pyo3(signature = (config, seed=0, f64=false))]
    fn init(config: &PyModelConfig, seed: u64, f64: bool) -> PyResult<Self> {
        let params = if f64 {
            AnyParameters::F64(selfonn::ModelParameters::init(&config.inner, seed).map_err(to_py)?)
        } else {
            AnyParameters::F32(selfonn::ModelParameters::init(&config.inner, seed).map_err(to_py)?)
        };
        Ok(Self { params })
    }

    /// All parameters zero.
    #[staticmethod]
    #[pyo3(signature = (config, f64=false))]
    fn zeros(config: &PyModelConfig, f64: bool) -> PyResult<Self> {
        let params = if f64 {
            AnyParameters::F64(selfonn::ModelParameters::zeros(&config.inner).map_err(to_py)?)
        } else {
            AnyParameters::F32(selfonn::ModelParameters::zeros(&config.inner).map_err(to_py)?)
        };
        Ok(Self { params })
    }

    /// Loads a checkpoint; returns `(model, metadata)`.
    #[staticmethod]
    fn load(path: &str) -> PyResult<(Self, String)> {
        let ckpt = load_checkpoint(path).map_err(to_py)?;
        Ok((
            Self {
                params: ckpt.params,
            },
            ckpt.metadata,
        ))
    }

    #[pyo3(signature = (path, metadata=""))]
    fn save(&self, path: &str, metadata: &str) -> PyResult<()> {
        with_params!(&self.params, p => save_checkpoint(p, path, metadata)).map_err(to_py)
    }

    #[getter]
    fn config(&self) -> PyModelConfig {
        PyModelConfig {
            inner: self.params.config().clone(),
        }
    }

    #[getter]
    fn mode(&self) -> String {
        self.params.mode().to_string()
    }

    fn param_count(&self) -> usize {
        with_params!(&self.params, p => p.param_count())
    }

    /// Output activations for one normalized segment.
    fn forward(&self, py: Python<'_>, segment: Vec<f64>) -> PyResult<Vec<f64>> {
        py.allow_threads(|| with_params!(&self.params, p => forward_any(p, &segment)))
            .map_err(to_py)
    }

    /// `"healthy"` or `"faulty"` for one normalized segment.
    fn classify(&self, py: Python<'_>, segment: Vec<f64>) -> PyResult<String> {
        let out = self.forward(py, segment)?;
        Ok(classify_segment(&out).map_err(to_py)?.to_string())
    }

    /// Segments, normalizes and classifies a raw recording: a list of
    /// `(outputs, label)` per one-second window.
    fn predict_recording(
        &self,
        py: Python<'_>,
        samples: Vec<f32>,
    ) -> PyResult<Vec<(Vec<f64>, String)>> {
        let window = self.params.config().input_length;
        py.allow_threads(|| {
            signal::segment_recording(&samples, window)
                .into_iter()
                .map(|w| {
                    let x: Vec<f64> = signal::normalize_segment(w)
                        .iter()
                        .map(|&v| v as f64)
                        .collect();
                    let out = with_params!(&self.params, p => forward_any(p, &x))?;
                    let label = classify_segment(&out)?.to_string();
                    Ok((out, label))
                })
                .collect::<selfonn::Result<Vec<_>>>()
        })
        .map_err(to_py)
    }

    /// Single-thread forward latency statistics in milliseconds.
    #[pyo3(signature = (n_segments=10, repetitions=1))]
    fn bench<'py>(
        &self,
        py: Python<'py>,
        n_segments: usize,
        repetitions: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        if n_segments == 0 {
            return Err(PyValueError::new_err("n_segments must be positive"));
        }
        let stats = py
            .allow_threads(
                || with_params!(&self.params, p => bench_forward(p, n_segments, repetitions)),
            )
            .map_err(to_py)?;
        let d = PyDict::new_bound(py);
        d.set_item("timings", stats.timings)?;
        d.set_item("mean_ms", stats.mean_ms)?;
        d.set_item("median_ms", stats.median_ms)?;
        d.set_item("p95_ms", stats.p95_ms)?;
        d.set_item("min_ms", stats.min_ms)?;
        d.set_item("max_ms", stats.max_ms)?;
        d.set_item("real_time_factor", stats.real_time_factor)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Model({} parameters, {})", self.param_count(), self.mode())
    }
}

/// Linear map of a window onto [-1, 1]; constant windows give zeros.
#[pyfunction]
fn normalize_segment(window: Vec<f64>) -> Vec<f64> {
    signal::normalize_segment(&window)
}

/// Non-overlapping windows; the trailing remainder is dropped.
#[pyfunction]
#[pyo3(signature = (samples, window=4096))]
fn segment_recording(samples: Vec<f32>, window: usize) -> PyResult<Vec<Vec<f32>>> {
    if window == 0 {
        return Err(PyValueError::new_err("window must be positive"));
    }
    Ok(signal::segment_recording(&samples, window)
        .into_iter()
        .map(<[f32]>::to_vec)
        .collect())
}

/// Precision, recall, F1 and accuracy from confusion counts (faulty is positive).
#[pyfunction]
fn compute_metrics<'py>(
    py: Python<'py>,
    tp: u64,
    fp: u64,
    fn_: u64,
    tn: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = metrics(&ConfusionCounts { tp, fp, fn_, tn }).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("precision", m.precision)?;
    d.set_item("recall", m.recall)?;
    d.set_item("f1", m.f1)?;
    d.set_item("accuracy", m.accuracy)?;
    Ok(d)
}

#[pyfunction]
fn f1_score(precision: f64, recall: f64) -> f64 {
    selfonn::eval::f1_score(precision, recall)
}

/// Synthetic vibration recording; returns `(samples, label)`.
#[pyfunction]
#[pyo3(signature = (seed=0, faulty=false, duration_s=1.0, rpm=1010, noise_rms=0.3))]
fn synth_recording(
    seed: u64,
    faulty: bool,
    duration_s: f64,
    rpm: u32,
    noise_rms: f64,
) -> PyResult<(Vec<f32>, String)> {
    let cfg = SynthConfig {
        seed,
        duration_s,
        rpm,
        noise_rms,
        defect: faulty.then(DefectSpec::default),
        ..Default::default()
    };
    let (rec, label) = generate_synthetic_recording(&cfg).map_err(to_py)?;
    Ok((rec.samples, label.to_string()))
}

#[pymodule]
pub fn selfonn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelConfig>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(normalize_segment, m)?)?;
    m.add_function(wrap_pyfunction!(segment_recording, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(f1_score, m)?)?;
    m.add_function(wrap_pyfunction!(synth_recording, m)?)?;
    m.add("SAMPLE_RATE_HZ", selfonn::SAMPLE_RATE_HZ)?;
    m.add("SEGMENT_LEN", selfonn::SEGMENT_LEN)?;
    Ok(())
}
