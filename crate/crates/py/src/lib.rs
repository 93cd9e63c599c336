//! Python module `irsdf_py`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use irsdf::ao::{run_scheme as run_scheme_rs, AoConfig, Scheme};
use irsdf::channel::{draw_trial, ChannelSet, Dims, LargeScaleParams};
use irsdf::harness::{parse_config, preset, run_sweep};
use irsdf::linalg::{CMat, CVec};
use irsdf::system::{sinr_report_with, BeamformingState, SystemParams};
use irsdf::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Validation { .. } | Error::Dimension(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows(m: &CMat) -> Vec<Vec<Complex64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<Complex64>], what: &str) -> PyResult<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|x| x.len() != c) {
        return Err(PyValueError::new_err(format!("{what}: ragged rows")));
    }
    Ok(CMat::from_fn(r, c, |i, j| rows[i][j]))
}

/// Rayleigh channel realization for the reference geometry.
#[pyclass(name = "ChannelSet", frozen)]
struct PyChannelSet {
    inner: ChannelSet,
}

#[pymethods]
impl PyChannelSet {
    #[staticmethod]
    #[pyo3(signature = (m, l, n, k, seed=0))]
    fn draw(m: usize, l: usize, n: usize, k: usize, seed: u64) -> PyResult<Self> {
        let (_, inner) = draw_trial(Dims { m, l, n, k }, &LargeScaleParams::default(), seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// `(M, L, N, K)`
    #[getter]
    fn dims(&self) -> (usize, usize, usize, usize) {
        let d = self.inner.dims();
        (d.m, d.l, d.n, d.k)
    }

    #[getter]
    fn checksum(&self) -> u64 {
        self.inner.checksum()
    }

    /// One of `h_bs_r`, `h_bs_irs`, `h_bs_users`, `h_r_irs`, `h_r_users`,
    /// `h_irs_users`, as a list of rows.
    fn link(&self, name: &str) -> PyResult<Vec<Vec<Complex64>>> {
        let c = &self.inner;
        let m = match name {
            "h_bs_r" => &c.h_bs_r,
            "h_bs_irs" => &c.h_bs_irs,
            "h_bs_users" => &c.h_bs_users,
            "h_r_irs" => &c.h_r_irs,
            "h_r_users" => &c.h_r_users,
            "h_irs_users" => &c.h_irs_users,
            _ => return Err(PyValueError::new_err(format!("unknown link `{name}`"))),
        };
        Ok(rows(m))
    }

    fn __repr__(&self) -> String {
        let (m, l, n, k) = self.dims();
        format!("ChannelSet(M={m}, L={l}, N={n}, K={k})")
    }
}

#[pyclass(name = "BeamformingState", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: BeamformingState,
}

#[pymethods]
impl PyState {
    #[new]
    fn new(g: Vec<Vec<Complex64>>, f: Vec<Vec<Complex64>>, theta: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: BeamformingState {
                g: from_rows(&g, "g")?,
                f: from_rows(&f, "f")?,
                theta: CVec::from_vec(theta),
            },
        })
    }

    /// `M × K` rows.
    #[getter]
    fn g(&self) -> Vec<Vec<Complex64>> {
        rows(&self.inner.g)
    }

    /// `L × K` rows.
    #[getter]
    fn f(&self) -> Vec<Vec<Complex64>> {
        rows(&self.inner.f)
    }

    #[getter]
    fn theta(&self) -> Vec<Complex64> {
        self.inner.theta.iter().copied().collect()
    }

    #[getter]
    fn bs_power(&self) -> f64 {
        self.inner.bs_power()
    }

    #[getter]
    fn relay_power(&self) -> f64 {
        self.inner.relay_power()
    }
}

#[pyclass(name = "SinrReport", frozen, get_all)]
struct PySinrReport {
    gamma1: Vec<f64>,
    gamma2: Vec<f64>,
    gamma_r: Vec<f64>,
    sum_rate: f64,
}

#[pyclass(name = "SchemeResult", frozen, get_all)]
struct PySchemeResult {
    scheme: String,
    sum_rate: f64,
    feasible: bool,
    eff_gamma_th: f64,
    outer_iters: usize,
    /// True sum rate at the start and after each outer iteration.
    trace: Vec<f64>,
    state: PyState,
}

#[pyclass(name = "TrialResult", frozen, get_all)]
struct PyTrialResult {
    scheme: String,
    sweep_var: String,
    sweep_value: usize,
    trial: usize,
    sum_rate: f64,
    feasible: bool,
    eff_gamma_th: f64,
    iters: usize,
    error: Option<String>,
}

fn params_for(
    k: usize,
    p_bs_max: f64,
    p_r_max: f64,
    sigma2: f64,
    sigma_r2: f64,
    gamma_r_th: f64,
) -> PyResult<SystemParams> {
    let p = SystemParams {
        p_bs_max,
        p_r_max,
        sigma_k2: vec![sigma2; k],
        sigma_r2,
        gamma_r_th,
    };
    p.validate().map_err(to_py)?;
    Ok(p)
}

/// SINRs and sum rate of `state`. With `independent=True` the IRS is
/// left out of the second phase.
#[pyfunction]
#[pyo3(signature = (channels, state, sigma2=1e-11, sigma_r2=1e-11, independent=false))]
fn sinr_report(
    channels: &PyChannelSet,
    state: &PyState,
    sigma2: f64,
    sigma_r2: f64,
    independent: bool,
) -> PyResult<PySinrReport> {
    let k = channels.inner.dims().k;
    let params = params_for(k, 1.0, 1.0, sigma2, sigma_r2, 1.0)?;
    let usage = if independent {
        irsdf::system::IrsUsage::FirstPhaseOnly
    } else {
        irsdf::system::IrsUsage::BothPhases
    };
    let r = sinr_report_with(&channels.inner, &state.inner, &params, usage).map_err(to_py)?;
    Ok(PySinrReport {
        gamma1: r.gamma1,
        gamma2: r.gamma2,
        gamma_r: r.gamma_r,
        sum_rate: r.sum_rate,
    })
}

/// Alternating optimization of one scheme (`proposed`, `relay_only`,
/// `random_irs`, `independent`) on a channel realization.
#[pyfunction]
#[pyo3(signature = (channels, scheme="proposed", seed=0, p_bs_max=0.01, p_r_max=0.01, sigma2=1e-11, sigma_r2=1e-11, gamma_r_th=10.0, max_outer_iters=20))]
#[allow(clippy::too_many_arguments)]
fn run_scheme(
    py: Python<'_>,
    channels: &PyChannelSet,
    scheme: &str,
    seed: u64,
    p_bs_max: f64,
    p_r_max: f64,
    sigma2: f64,
    sigma_r2: f64,
    gamma_r_th: f64,
    max_outer_iters: usize,
) -> PyResult<PySchemeResult> {
    let scheme: Scheme = scheme.parse().map_err(to_py)?;
    let params = params_for(channels.inner.dims().k, p_bs_max, p_r_max, sigma2, sigma_r2, gamma_r_th)?;
    let config = AoConfig {
        max_outer_iters,
        ..AoConfig::default()
    };
    let r = py
        .detach(|| run_scheme_rs(scheme, &channels.inner, &params, &config, seed))
        .map_err(to_py)?;
    Ok(PySchemeResult {
        scheme: scheme.name().to_string(),
        sum_rate: r.sum_rate,
        feasible: r.feasible,
        eff_gamma_th: r.eff_gamma_th,
        outer_iters: r.outer_iters,
        trace: r.trace.sum_rates,
        state: PyState { inner: r.state },
    })
}

/// Monte-Carlo sweep from TOML text or a preset name, with optional
/// overrides of the trial count and base seed.
#[pyfunction]
#[pyo3(signature = (config=None, preset_name=None, trials=None, seed=None))]
fn run_experiment(
    py: Python<'_>,
    config: Option<&str>,
    preset_name: Option<&str>,
    trials: Option<usize>,
    seed: Option<u64>,
) -> PyResult<Vec<PyTrialResult>> {
    let mut cfg = match (config, preset_name) {
        (Some(text), None) => parse_config(text),
        (None, Some(name)) => preset(name),
        _ => return Err(PyValueError::new_err("pass exactly one of config or preset_name")),
    }
    .map_err(to_py)?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    let results = py.detach(|| run_sweep(&cfg)).map_err(to_py)?;
    Ok(results
        .into_iter()
        .map(|r| PyTrialResult {
            scheme: r.scheme.name().to_string(),
            sweep_var: r.sweep_var.name().to_string(),
            sweep_value: r.sweep_value,
            trial: r.trial,
            sum_rate: r.sum_rate,
            feasible: r.feasible,
            eff_gamma_th: r.eff_gamma_th,
            iters: r.iters,
            error: r.error,
        })
        .collect())
}

#[pymodule]
pub fn irsdf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannelSet>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PySinrReport>()?;
    m.add_class::<PySchemeResult>()?;
    m.add_class::<PyTrialResult>()?;
    m.add_function(wrap_pyfunction!(sinr_report, m)?)?;
    m.add_function(wrap_pyfunction!(run_scheme, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
