//! Python bindings: channels, rates, capacity and subset selection.
//!
//! Subsets cross the boundary as lists of input indices; heavy calls release
//! the interpreter lock.

use dmc_shaper_core as core;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A discrete memoryless channel given by its transition matrix `P[x][y]`.
#[pyclass(name = "Channel", frozen)]
struct Channel {
    inner: core::DmcChannel,
}

impl Channel {
    fn mask(&self, indices: &[usize]) -> PyResult<core::SubsetMask> {
        core::SubsetMask::from_indices(self.inner.num_inputs(), indices).map_err(err)
    }
}

#[pymethods]
impl Channel {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: core::DmcChannel::from_rows(&rows).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core::DmcChannel::from_json(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core::DmcChannel::load(path).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn num_inputs(&self) -> usize {
        self.inner.num_inputs()
    }

    #[getter]
    fn num_outputs(&self) -> usize {
        self.inner.num_outputs()
    }

    fn prob(&self, x: usize, y: usize) -> PyResult<f64> {
        if x >= self.inner.num_inputs() || y >= self.inner.num_outputs() {
            return Err(PyValueError::new_err(format!(
                "index ({x}, {y}) out of range"
            )));
        }
        Ok(self.inner.prob(x, y))
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().map(<[f64]>::to_vec).collect()
    }

    fn mutual_information(&self, p: Vec<f64>) -> PyResult<f64> {
        let p = core::InputDistribution::new(p).map_err(err)?;
        core::mutual_information(&self.inner, &p).map_err(err)
    }

    /// Mutual information with inputs uniform over `subset`.
    fn uniform_rate(&self, subset: Vec<usize>) -> PyResult<f64> {
        core::uniform_subset_rate(&self.inner, &self.mask(&subset)?).map_err(err)
    }

    fn cutoff_rate(&self, subset: Vec<usize>) -> PyResult<f64> {
        core::cutoff_rate(&self.inner, &self.mask(&subset)?).map_err(err)
    }

    fn ser(&self, subset: Vec<usize>) -> PyResult<f64> {
        core::ser_ml(&self.inner, &self.mask(&subset)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Channel(num_inputs={}, num_outputs={})",
            self.inner.num_inputs(),
            self.inner.num_outputs()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (channel, tol = 1e-6, max_iter = 1_000_000))]
fn blahut_arimoto<'py>(
    py: Python<'py>,
    channel: &Channel,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let cap = py
        .detach(|| core::blahut_arimoto(&channel.inner, tol, max_iter))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("capacity_bits", cap.bits)?;
    d.set_item("upper_bits", cap.upper_bits)?;
    d.set_item("iterations", cap.iterations)?;
    d.set_item("distribution", cap.distribution.probs().to_vec())?;
    Ok(d)
}

/// Channel of QPSK over `H = re + j im` with a one-bit receiver.
#[pyfunction]
fn build_quantized_mimo(
    py: Python<'_>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    snr_db: f64,
) -> PyResult<Channel> {
    let h = core::ComplexChannelMatrix::from_parts(&re, &im).map_err(err)?;
    let snr = core::SnrPoint::from_db(snr_db).map_err(err)?;
    let inner = py
        .detach(|| core::build_quantized_mimo(&h, snr))
        .map_err(err)?;
    Ok(Channel { inner })
}

/// The bundled 4x4 example matrix as `(re, im)`.
#[pyfunction]
fn example_matrix() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let file = core::paper_channel_matrix().to_file();
    (file.re, file.im)
}

#[pyfunction]
#[pyo3(signature = (channel, k, n_rand = 100, seed = 0, rounding = "randomized", solver = "ipm", tol = 1e-6))]
#[allow(clippy::too_many_arguments)]
fn sdp_select<'py>(
    py: Python<'py>,
    channel: &Channel,
    k: usize,
    n_rand: usize,
    seed: u64,
    rounding: &str,
    solver: &str,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = core::SdpConfig {
        tol,
        method: solver.parse().map_err(err)?,
        ..core::SdpConfig::default()
    };
    let round = core::RoundingConfig {
        n_rand,
        seed,
        method: rounding.parse().map_err(err)?,
    };
    let sel = py
        .detach(|| core::sdp_select(&channel.inner, k, &cfg, &round))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mask", sel.mask.indices())?;
    d.set_item("cutoff_rate_bits", sel.cutoff_rate_bits)?;
    d.set_item("sdp_objective", sel.sdp_objective)?;
    d.set_item("cutoff_rate_bound_bits", sel.cutoff_rate_bound_bits)?;
    d.set_item("iterations", sel.iterations)?;
    d.set_item("converged", sel.converged)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (channel, k, restarts = 20, seed = 0))]
fn bsa_select<'py>(
    py: Python<'py>,
    channel: &Channel,
    k: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = core::BsaConfig::new(k)
        .with_restarts(restarts)
        .with_seed(seed);
    let out = py
        .detach(|| core::bsa_select(&channel.inner, &cfg))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mask", out.mask.indices())?;
    d.set_item("ser", out.ser)?;
    d.set_item("truncated", out.truncated)?;
    d.set_item("best_restart", out.best_restart)?;
    Ok(d)
}

/// Optimal `k`-subset under `criterion` (rate, ser or cutoff) and its value.
#[pyfunction]
#[pyo3(signature = (channel, k, criterion = "cutoff"))]
fn exhaustive_select(
    py: Python<'_>,
    channel: &Channel,
    k: usize,
    criterion: &str,
) -> PyResult<(Vec<usize>, f64)> {
    let criterion: core::Criterion = criterion.parse().map_err(err)?;
    let (mask, value) = py
        .detach(|| core::exhaustive_select(&channel.inner, k, criterion))
        .map_err(err)?;
    Ok((mask.indices(), value))
}

#[pymodule]
fn dmc_shaper(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add_class::<Channel>()?;
    m.add_function(wrap_pyfunction!(blahut_arimoto, m)?)?;
    m.add_function(wrap_pyfunction!(build_quantized_mimo, m)?)?;
    m.add_function(wrap_pyfunction!(example_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(sdp_select, m)?)?;
    m.add_function(wrap_pyfunction!(bsa_select, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_select, m)?)?;
    Ok(())
}
