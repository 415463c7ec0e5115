//! Python bindings for the tenergy core library.

use std::io::BufReader;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;

use tenergy_core::simulator::DatasetSpec;
use tenergy_core::{self as core, DatasetPair, Error, MeasurementSeries, TimingMethod};

create_exception!(tenergy, TenergyError, PyException);
create_exception!(tenergy, DegenerateDataError, TenergyError);
create_exception!(tenergy, ParseError, TenergyError);
create_exception!(tenergy, ExecutionError, TenergyError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.root() {
        Error::InvalidArgument(_) | Error::OutOfRange(_) => PyValueError::new_err(msg),
        Error::DegenerateData(_) | Error::InsufficientData { .. } => {
            DegenerateDataError::new_err(msg)
        }
        Error::Parse { .. } | Error::UnsupportedVersion(_) | Error::InvalidManifest(_) => {
            ParseError::new_err(msg)
        }
        Error::Execution(_) => ExecutionError::new_err(msg),
        Error::Io(_) | Error::File { .. } => PyOSError::new_err(msg),
        _ => TenergyError::new_err(msg),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn timing(name: &str) -> PyResult<TimingMethod> {
    name.parse().py()
}

/// Sampled power trace: strictly increasing timestamps (s) and power (W).
#[pyclass(name = "PowerTrace", module = "tenergy", frozen)]
struct PyPowerTrace(core::PowerTrace);

#[pymethods]
impl PyPowerTrace {
    #[new]
    fn new(timestamps: Vec<f64>, power: Vec<f64>) -> PyResult<Self> {
        if timestamps.len() != power.len() {
            return Err(PyValueError::new_err("timestamps and power differ in length"));
        }
        let samples = timestamps.into_iter().zip(power).collect();
        Ok(PyPowerTrace(core::PowerTrace::new(samples).py()?))
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        let f = std::fs::File::open(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        Ok(PyPowerTrace(core::PowerTrace::read_csv(BufReader::new(f)).py()?))
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        self.0.write_csv(std::io::BufWriter::new(f)).py()
    }

    #[getter]
    fn timestamps(&self) -> Vec<f64> {
        self.0.samples().iter().map(|s| s.0).collect()
    }

    #[getter]
    fn power(&self) -> Vec<f64> {
        self.0.samples().iter().map(|s| s.1).collect()
    }

    fn energy(&self, t_start: f64, t_end: f64) -> PyResult<f64> {
        self.0.energy(t_start, t_end).py()
    }

    fn total_energy(&self) -> PyResult<f64> {
        self.0.total_energy().py()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("PowerTrace({} samples, {} s)", self.0.len(), self.0.duration())
    }
}

/// Paired time/energy observations for one configuration.
#[pyclass(name = "Dataset", module = "tenergy", frozen)]
struct PyDataset(core::Dataset);

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (times, energies, config_id = "dataset", stream_ids = None, timing_method = "wall", alpha = 0.99))]
    fn new(
        times: Vec<f64>,
        energies: Vec<f64>,
        config_id: &str,
        stream_ids: Option<Vec<String>>,
        timing_method: &str,
        alpha: f64,
    ) -> PyResult<Self> {
        if times.len() != energies.len() {
            return Err(PyValueError::new_err("times and energies differ in length"));
        }
        let ids = match stream_ids {
            Some(ids) if ids.len() != times.len() => {
                return Err(PyValueError::new_err("stream_ids must match times in length"))
            }
            Some(ids) => ids,
            None => (0..times.len()).map(|i| format!("s{i:03}")).collect(),
        };
        let pairs = ids
            .into_iter()
            .zip(times.into_iter().zip(energies))
            .map(|(stream_id, (time, energy))| DatasetPair {
                stream_id,
                time,
                energy,
            })
            .collect();
        let d = core::Dataset::new(config_id, pairs).py()?;
        Ok(PyDataset(d.with_provenance(timing(timing_method)?, alpha)))
    }

    #[staticmethod]
    #[pyo3(signature = (path, config_id = "dataset"))]
    fn read_csv(path: &str, config_id: &str) -> PyResult<Self> {
        let f = std::fs::File::open(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        Ok(PyDataset(core::Dataset::read_csv(BufReader::new(f), config_id).py()?))
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        self.0.write_csv(std::io::BufWriter::new(f)).py()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.0.energies()
    }

    #[getter]
    fn stream_ids(&self) -> Vec<String> {
        self.0.pairs().iter().map(|p| p.stream_id.clone()).collect()
    }

    #[getter]
    fn config_id(&self) -> String {
        self.0.config_id.clone()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Fitted linear model `E = power * t + offset`.
#[pyclass(name = "EnergyModel", module = "tenergy", frozen)]
struct PyEnergyModel(core::EnergyModel);

#[pymethods]
impl PyEnergyModel {
    #[new]
    fn new(power: f64, offset: f64) -> Self {
        PyEnergyModel(core::EnergyModel::from_coefficients(power, offset))
    }

    #[getter]
    fn power(&self) -> f64 {
        self.0.power
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.0.offset
    }

    #[getter]
    fn correlation(&self) -> f64 {
        self.0.correlation
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.0.n_samples
    }

    #[getter]
    fn config_id(&self) -> String {
        self.0.config_id.clone()
    }

    #[getter]
    fn timing_method(&self) -> &'static str {
        self.0.timing_method.as_str()
    }

    fn predict(&self, t: f64) -> PyResult<f64> {
        self.0.predict(t).py()
    }

    fn __repr__(&self) -> String {
        format!(
            "EnergyModel(power={}, offset={}, correlation={})",
            self.0.power, self.0.offset, self.0.correlation
        )
    }
}

/// Repetition rule for `run_until_stable`.
#[pyclass(name = "StoppingConfig", module = "tenergy", frozen)]
struct PyStoppingConfig(core::StoppingConfig);

#[pymethods]
impl PyStoppingConfig {
    #[new]
    #[pyo3(signature = (alpha = 0.99, relative_bound = 0.01, min_repeats = 2, max_repeats = 100))]
    fn new(alpha: f64, relative_bound: f64, min_repeats: usize, max_repeats: usize) -> PyResult<Self> {
        Ok(PyStoppingConfig(
            core::StoppingConfig::new(alpha, relative_bound, min_repeats, max_repeats).py()?,
        ))
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn relative_bound(&self) -> f64 {
        self.0.relative_bound
    }

    #[getter]
    fn min_repeats(&self) -> usize {
        self.0.min_repeats
    }

    #[getter]
    fn max_repeats(&self) -> usize {
        self.0.max_repeats
    }
}

/// Outcome of `run_until_stable`.
#[pyclass(name = "StableMeasurement", module = "tenergy", frozen, get_all)]
struct PyStableMeasurement {
    samples: Vec<f64>,
    converged: bool,
    mean: f64,
    halfwidth: Option<f64>,
}

/// Process timing in seconds.
#[pyclass(name = "TimingSample", module = "tenergy", frozen, get_all)]
struct PyTimingSample {
    wall: f64,
    cpu_user: f64,
    cpu_sys: f64,
    exit_status: i32,
}

fn series(values: Vec<f64>) -> PyResult<MeasurementSeries> {
    MeasurementSeries::new("value", "", "").with_samples(values).py()
}

#[pyfunction]
fn mean(values: Vec<f64>) -> PyResult<f64> {
    core::mean(&values).py()
}

#[pyfunction]
fn sample_stddev(values: Vec<f64>) -> PyResult<f64> {
    core::sample_stddev(&values).py()
}

#[pyfunction]
fn t_critical(alpha: f64, df: u64) -> PyResult<f64> {
    core::t_critical(alpha, df).py()
}

#[pyfunction]
fn pearson(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    core::pearson(&xs, &ys).py()
}

/// Least-squares line through the points, as `(slope, offset)`.
#[pyfunction]
fn linfit(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = core::linfit(&xs, &ys).py()?;
    Ok((r.slope, r.offset))
}

#[pyfunction]
fn trace_energy(trace: PyRef<'_, PyPowerTrace>, t_start: f64, t_end: f64) -> PyResult<f64> {
    core::trace_energy(&trace.0, t_start, t_end).py()
}

#[pyfunction]
fn net_energy(e_all: f64, e_idle: f64) -> PyResult<f64> {
    Ok(core::net_energy(e_all, e_idle).py()?.joules)
}

/// `(mean, halfwidth)` of the confidence interval at level `alpha`.
#[pyfunction]
#[pyo3(signature = (samples, alpha = 0.99))]
fn confidence_halfwidth(samples: Vec<f64>, alpha: f64) -> PyResult<(f64, f64)> {
    let ci = core::confidence_halfwidth(&series(samples)?, alpha).py()?;
    Ok((ci.center, ci.halfwidth))
}

#[pyfunction]
#[pyo3(signature = (samples, config = None))]
fn stopping_met(samples: Vec<f64>, config: Option<PyRef<'_, PyStoppingConfig>>) -> PyResult<bool> {
    let cfg = config.map(|c| c.0).unwrap_or_default();
    core::stopping_met(&series(samples)?, &cfg).py()
}

/// Call `sampler()` until the stopping rule holds or `max_repeats` is reached.
#[pyfunction]
#[pyo3(signature = (sampler, config = None))]
fn run_until_stable(
    sampler: &Bound<'_, PyAny>,
    config: Option<PyRef<'_, PyStoppingConfig>>,
) -> PyResult<PyStableMeasurement> {
    let cfg = config.map(|c| c.0).unwrap_or_default();
    let mut raised: Option<PyErr> = None;
    let outcome = core::run_until_stable(MeasurementSeries::new("value", "", ""), &cfg, || {
        match sampler.call0().and_then(|v| v.extract::<f64>()) {
            Ok(v) => Ok(v),
            Err(e) => {
                raised = Some(e);
                Err(Error::Execution("sampler raised".into()))
            }
        }
    });
    let stable = match (outcome, raised) {
        (Err(_), Some(e)) => return Err(e),
        (r, _) => r.py()?,
    };
    let halfwidth = core::confidence_halfwidth(&stable.series, cfg.alpha)
        .ok()
        .map(|ci| ci.halfwidth);
    Ok(PyStableMeasurement {
        mean: stable.series.mean().py()?,
        converged: stable.converged(),
        samples: stable.series.samples().to_vec(),
        halfwidth,
    })
}

#[pyfunction]
fn fit_model(dataset: PyRef<'_, PyDataset>) -> PyResult<PyEnergyModel> {
    Ok(PyEnergyModel(core::fit_model(&dataset.0).py()?))
}

#[pyfunction]
fn predict(model: PyRef<'_, PyEnergyModel>, t: f64) -> PyResult<f64> {
    core::predict(&model.0, t).py()
}

#[pyfunction]
fn save_model(model: PyRef<'_, PyEnergyModel>, path: &str) -> PyResult<()> {
    model.0.save(path).py()
}

#[pyfunction]
fn load_model(path: &str) -> PyResult<PyEnergyModel> {
    Ok(PyEnergyModel(core::EnergyModel::load(path).py()?))
}

#[pyfunction]
#[pyo3(signature = (
    total_duration = 2.0, idle_power = 2.6, active_power = 3.4, start = 0.5, end = 1.5,
    sample_interval = 0.001, noise_stddev = 0.0, init_ramp = 0.0, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn synth_trace(
    total_duration: f64,
    idle_power: f64,
    active_power: f64,
    start: f64,
    end: f64,
    sample_interval: f64,
    noise_stddev: f64,
    init_ramp: f64,
    seed: u64,
) -> PyResult<PyPowerTrace> {
    let profile = core::TraceProfile {
        idle_power,
        active_power,
        start,
        end,
        sample_interval,
        noise_stddev,
        init_ramp,
        seed,
    };
    Ok(PyPowerTrace(core::synth_trace(&profile, total_duration).py()?))
}

#[pyfunction]
#[pyo3(signature = (power, offset, times, noise_rel = 0.0, seed = 0, config_id = "synthetic"))]
fn synth_dataset(
    power: f64,
    offset: f64,
    times: Vec<f64>,
    noise_rel: f64,
    seed: u64,
    config_id: &str,
) -> PyResult<PyDataset> {
    let mut spec = DatasetSpec::new(power, offset, times, noise_rel, seed);
    spec.config_id = config_id.to_string();
    Ok(PyDataset(spec.generate().py()?))
}

/// Mean power over the first `duration` seconds of an idle trace.
#[pyfunction]
fn measure_idle(duration: f64, trace: PyRef<'_, PyPowerTrace>) -> PyResult<f64> {
    core::measure_idle(duration, &trace.0).py()
}

/// Run a command once, without a shell, and report its timing.
#[pyfunction]
fn time_command(py: Python<'_>, command: &str) -> PyResult<PyTimingSample> {
    let s = py.detach(|| core::time_command(command)).py()?;
    Ok(PyTimingSample {
        wall: s.wall,
        cpu_user: s.cpu_user,
        cpu_sys: s.cpu_sys,
        exit_status: s.exit_status,
    })
}

#[pymodule]
fn tenergy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("TenergyError", py.get_type::<TenergyError>())?;
    m.add("DegenerateDataError", py.get_type::<DegenerateDataError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("ExecutionError", py.get_type::<ExecutionError>())?;
    m.add_class::<PyPowerTrace>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyEnergyModel>()?;
    m.add_class::<PyStoppingConfig>()?;
    m.add_class::<PyStableMeasurement>()?;
    m.add_class::<PyTimingSample>()?;
    m.add_function(wrap_pyfunction!(mean, m)?)?;
    m.add_function(wrap_pyfunction!(sample_stddev, m)?)?;
    m.add_function(wrap_pyfunction!(t_critical, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(linfit, m)?)?;
    m.add_function(wrap_pyfunction!(trace_energy, m)?)?;
    m.add_function(wrap_pyfunction!(net_energy, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_halfwidth, m)?)?;
    m.add_function(wrap_pyfunction!(stopping_met, m)?)?;
    m.add_function(wrap_pyfunction!(run_until_stable, m)?)?;
    m.add_function(wrap_pyfunction!(fit_model, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(save_model, m)?)?;
    m.add_function(wrap_pyfunction!(load_model, m)?)?;
    m.add_function(wrap_pyfunction!(synth_trace, m)?)?;
    m.add_function(wrap_pyfunction!(synth_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(measure_idle, m)?)?;
    m.add_function(wrap_pyfunction!(time_command, m)?)?;
    Ok(())
}
