//! Python module `jamdet`: configuration, dataset generation, detector
//! training and scoring, and threshold/ROC utilities.

use std::path::PathBuf;

use jamdet::config::RunConfig;
use jamdet::detect::{self, fit_null, ScoreSet};
use jamdet::io::{read_dataset, write_dataset};
use jamdet::nn::{Checkpoint, ModelKind};
use jamdet::pipeline::{self, Detector};
use jamdet::sim::{Dataset, DatasetMode};
use jamdet::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        Error::Numeric(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for jamdet::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Run configuration; angles in degrees and powers in dB as in TOML files.
#[pyclass(name = "RunConfig", module = "jamdet", from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[new]
    #[pyo3(signature = (toml = None, desk_scale = false))]
    fn new(toml: Option<&str>, desk_scale: bool) -> PyResult<Self> {
        let inner = match (toml, desk_scale) {
            (Some(_), true) => return Err(PyValueError::new_err("give either toml or desk_scale, not both")),
            (Some(text), false) => RunConfig::from_toml(text).or_py()?,
            (None, true) => RunConfig::desk_scale(),
            (None, false) => RunConfig::default(),
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: RunConfig::load(path).or_py()? })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    #[getter]
    fn num_subcarriers(&self) -> usize {
        self.inner.system.num_subcarriers
    }

    #[getter]
    fn observation_len(&self) -> usize {
        self.inner.system().observation_len()
    }

    #[getter]
    fn sjr_db(&self) -> Vec<f64> {
        self.inner.experiment.sjr_db.clone()
    }

    #[setter]
    fn set_sjr_db(&mut self, values: Vec<f64>) {
        self.inner.experiment.sjr_db = values;
    }

    #[getter]
    fn train_count(&self) -> usize {
        self.inner.experiment.train_count
    }

    #[setter]
    fn set_train_count(&mut self, n: usize) {
        self.inner.experiment.train_count = n;
    }

    #[getter]
    fn test_count(&self) -> usize {
        self.inner.experiment.test_count
    }

    #[setter]
    fn set_test_count(&mut self, n: usize) {
        self.inner.experiment.test_count = n;
    }

    /// Sets the epoch count of both the VAE and the AE.
    fn set_epochs(&mut self, epochs: usize) {
        self.inner.training.vae.train.epochs = epochs;
        self.inner.training.ae.train.epochs = epochs;
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().or_py()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner.system;
        format!(
            "RunConfig(K={}, N_T={}, N_R={}, train_count={}, sjr_db={:?})",
            s.num_subcarriers,
            s.num_tx_antennas,
            s.num_rx_antennas,
            self.inner.experiment.train_count,
            self.inner.experiment.sjr_db
        )
    }
}

#[pyclass(name = "Dataset", module = "jamdet", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: read_dataset(path).or_py()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_dataset(path, &self.inner).or_py()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn sjr_db(&self) -> Option<f64> {
        self.inner.jammer.as_ref().map(|j| j.sjr_db)
    }

    #[getter]
    fn observation_len(&self) -> usize {
        self.inner.observation_len()
    }

    /// `(H0 count, H1 count)`.
    fn label_counts(&self) -> (usize, usize) {
        self.inner.label_counts()
    }

    /// 0 for H0, 1 for H1.
    fn labels(&self) -> Vec<u8> {
        self.inner.observations.iter().map(|o| o.label.as_byte()).collect()
    }

    /// Real-valued observation vectors, real parts followed by imaginary parts.
    fn features(&self) -> Vec<Vec<f64>> {
        self.inner.observations.iter().map(|o| o.g.clone()).collect()
    }

    fn __repr__(&self) -> String {
        let (h0, h1) = self.inner.label_counts();
        format!("Dataset(n={}, H0={h0}, H1={h1}, seed={})", self.inner.len(), self.inner.seed)
    }
}

#[pyclass(name = "Detector", module = "jamdet")]
struct PyDetector {
    inner: Detector,
}

fn default_score_seed() -> u64 {
    RunConfig::default().experiment.score_seed
}

#[pymethods]
impl PyDetector {
    /// Trains a `"vae"` or `"ae"` detector on a jammer-free dataset.
    #[staticmethod]
    #[pyo3(signature = (config, dataset, kind = "vae", latent_dim = None))]
    fn train(
        py: Python<'_>,
        config: &PyRunConfig,
        dataset: &PyDataset,
        kind: &str,
        latent_dim: Option<usize>,
    ) -> PyResult<Self> {
        let kind: ModelKind = kind.parse().or_py()?;
        let (cfg, data) = (&config.inner, &dataset.inner);
        let inner = py.detach(|| pipeline::train(cfg, kind, data, latent_dim, |_| {})).or_py()?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: Detector::from_checkpoint(&Checkpoint::load(path).or_py()?).or_py()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.to_checkpoint().or_py()?.save(path).or_py()
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    #[getter]
    fn latent_dim(&self) -> Option<usize> {
        self.inner.latent_dim()
    }

    /// Per-epoch `(epoch, train_loss, validation_loss)`.
    #[getter]
    fn losses(&self) -> Vec<(usize, f64, Option<f64>)> {
        self.inner.trace.iter().map(|r| (r.epoch, r.train_loss, r.validation_loss)).collect()
    }

    /// One score per observation; larger means more anomalous.
    #[pyo3(signature = (dataset, seed = None))]
    fn score(&self, py: Python<'_>, dataset: &PyDataset, seed: Option<u64>) -> PyResult<Vec<f64>> {
        let seed = seed.unwrap_or_else(default_score_seed);
        let scores = py.detach(|| self.inner.score(&dataset.inner.observations, seed)).or_py()?;
        Ok(scores.into_iter().map(|s| s.value).collect())
    }

    /// Scores of the validation tail of a jammer-free training set.
    #[pyo3(signature = (dataset, seed = None))]
    fn calibration_scores(&self, py: Python<'_>, dataset: &PyDataset, seed: Option<u64>) -> PyResult<Vec<f64>> {
        let seed = seed.unwrap_or_else(default_score_seed);
        py.detach(|| self.inner.calibration_scores(&dataset.inner, seed)).or_py()
    }

    /// Operating point on `test` with the threshold calibrated on `calibration`.
    #[pyo3(signature = (calibration, test, pfa = 0.05, seed = None))]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        calibration: &PyDataset,
        test: &PyDataset,
        pfa: f64,
        seed: Option<u64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let seed = seed.unwrap_or_else(default_score_seed);
        let method = RunConfig::default().experiment.null_method;
        let ev = py
            .detach(|| {
                let cal = self.inner.calibration_scores(&calibration.inner, seed)?;
                pipeline::evaluate(&self.inner, &cal, &test.inner, pfa, method, seed)
            })
            .or_py()?;
        let p = &ev.point;
        let d = PyDict::new(py);
        d.set_item("model_kind", p.model_kind.to_string())?;
        d.set_item("sjr_db", p.sjr_db)?;
        d.set_item("target_pfa", p.target_pfa)?;
        d.set_item("omega", p.omega)?;
        d.set_item("pfa", p.pfa)?;
        d.set_item("pd", p.pd)?;
        d.set_item("auc", p.auc)?;
        d.set_item("n_calibration", p.n_calibration)?;
        d.set_item("n_h0", p.n_h0)?;
        d.set_item("n_h1", p.n_h1)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Detector(kind={}, epochs={})", self.inner.kind(), self.inner.trace.len())
    }
}

/// Generates a `"train"` (H0 only) or `"test"` (half H0, half H1) dataset.
#[pyfunction]
#[pyo3(signature = (config, mode, n = None, seed = None, sjr_db = None))]
fn generate_dataset(
    py: Python<'_>,
    config: &PyRunConfig,
    mode: &str,
    n: Option<usize>,
    seed: Option<u64>,
    sjr_db: Option<f64>,
) -> PyResult<PyDataset> {
    let e = &config.inner.experiment;
    let (mode, count, default_seed) = match mode {
        "train" => (DatasetMode::Train, e.train_count, e.train_seed),
        "test" => (DatasetMode::Test, e.test_count, e.test_seed),
        other => return Err(PyValueError::new_err(format!("mode must be 'train' or 'test', got '{other}'"))),
    };
    let (count, seed) = (n.unwrap_or(count), seed.unwrap_or(default_seed));
    let inner = py.detach(|| pipeline::generate(&config.inner, mode, count, seed, sjr_db)).or_py()?;
    Ok(PyDataset { inner })
}

/// Unit-modulus ULA steering vector for angle `theta` in radians.
#[pyfunction]
fn steering_vector(theta: f64, n_elements: usize) -> Vec<Complex64> {
    jamdet::sim::steering_vector(theta, n_elements)
}

/// Threshold whose empirical exceedance rate on `h0_scores` is `pfa`.
#[pyfunction]
fn threshold_for_pfa(h0_scores: Vec<f64>, pfa: f64) -> PyResult<f64> {
    let null = fit_null(&h0_scores).or_py()?;
    Ok(detect::threshold_for_pfa(&null, pfa).or_py()?.omega)
}

/// Detection rate on `h1_scores` at the threshold calibrated on `calibration_h0`.
#[pyfunction]
fn pd_at_pfa(calibration_h0: Vec<f64>, h1_scores: Vec<f64>, pfa: f64) -> PyResult<f64> {
    detect::pd_at_pfa(&calibration_h0, &h1_scores, pfa).or_py()
}

/// `(pfa, pd, auc)` of the ROC traced by sweeping the threshold.
#[pyfunction]
fn roc(h0_scores: Vec<f64>, h1_scores: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let set = ScoreSet::new(&h0_scores, &h1_scores, ModelKind::Vae).or_py()?;
    let curve = detect::roc(&set).or_py()?;
    Ok((curve.points.iter().map(|p| p.pfa).collect(), curve.points.iter().map(|p| p.pd).collect(), curve.auc))
}

#[pymodule]
#[pyo3(name = "jamdet")]
fn jamdet_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyDetector>()?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(steering_vector, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_for_pfa, m)?)?;
    m.add_function(wrap_pyfunction!(pd_at_pfa, m)?)?;
    m.add_function(wrap_pyfunction!(roc, m)?)?;
    Ok(())
}
