//! Python module `dualrisk`. Results come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use dualrisk_core::cli::{self, RunConfig};
use dualrisk_core::montecarlo::{self, SimConfig};
use dualrisk_core::statedep::{self, Coefficient, Policy, StateExampleIIParams, StateExampleIParams};
use dualrisk_core::{market, solver, Error, Investment};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "JumpLaw", frozen, from_py_object)]
#[derive(Clone)]
struct PyJumpLaw(dualrisk_core::JumpLaw);

#[pymethods]
impl PyJumpLaw {
    #[staticmethod]
    fn exponential(rate: f64) -> PyResult<Self> {
        dualrisk_core::JumpLaw::exponential(rate).map(Self).map_err(err)
    }

    #[staticmethod]
    fn gamma(shape: f64, rate: f64) -> PyResult<Self> {
        dualrisk_core::JumpLaw::gamma(shape, rate).map(Self).map_err(err)
    }

    #[staticmethod]
    fn deterministic(value: f64) -> PyResult<Self> {
        dualrisk_core::JumpLaw::deterministic(value).map(Self).map_err(err)
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    /// `(1 - E[e^{-βY}]) / β`.
    fn g(&self, beta: f64) -> f64 {
        self.0.g(beta)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "ModelParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyModelParams(solver::ModelParams);

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (rho, lambda_, delta, gamma))]
    fn new(rho: f64, lambda_: f64, delta: f64, gamma: f64) -> PyResult<Self> {
        solver::ModelParams::new(rho, lambda_, delta, gamma).map(Self).map_err(err)
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "MarketParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyMarketParams(market::MarketParams);

#[pymethods]
impl PyMarketParams {
    #[new]
    fn new(mu: f64, sigma: f64) -> PyResult<Self> {
        market::MarketParams::new(mu, sigma).map(Self).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// State-dependent model from coefficient strings such as `"affine 1 1 1"`.
#[pyclass(name = "StateModel", frozen, from_py_object)]
#[derive(Clone)]
struct PyStateModel(statedep::StateModel);

#[pymethods]
impl PyStateModel {
    #[new]
    #[pyo3(signature = (rho, lambda_, delta, gamma))]
    fn new(rho: &str, lambda_: &str, delta: &str, gamma: f64) -> PyResult<Self> {
        let parse = |s: &str| s.parse::<Coefficient>().map_err(err);
        statedep::StateModel::new(parse(rho)?, parse(lambda_)?, parse(delta)?, gamma)
            .map(Self)
            .map_err(err)
    }

    fn intensity(&self, x: f64, c: f64) -> f64 {
        self.0.intensity(x, c)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

fn parse_policy(policy: &str) -> PyResult<Policy> {
    let parts: Vec<&str> = policy.split_whitespace().collect();
    let bad = || PyValueError::new_err(format!("policy must be optimal, bangbang [cap] or a rate, got {policy:?}"));
    Ok(match parts.as_slice() {
        ["optimal"] => Policy::Optimal,
        ["bangbang"] => Policy::BangBang { cap: None },
        ["bangbang", cap] => Policy::BangBang {
            cap: Some(cap.parse().map_err(|_| bad())?),
        },
        [rate] => Policy::Constant {
            rate: rate.parse().map_err(|_| bad())?,
        },
        _ => return Err(bad()),
    })
}

/// Optimal spending and exponent; dict with `feasible`, `regime`, `beta`,
/// `c_star`, `residuals`.
#[pyfunction]
fn solve<'py>(py: Python<'py>, law: &PyJumpLaw, params: &PyModelParams) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &solver::solve(&law.0, &params.0).map_err(err)?)
}

#[pyfunction]
fn solve_market<'py>(
    py: Python<'py>,
    law: &PyJumpLaw,
    params: &PyModelParams,
    market: &PyMarketParams,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &market::solve_market(&law.0, &params.0, &market.0).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (rho, lambda_, delta, gamma))]
fn implicit_c_star(rho: f64, lambda_: f64, delta: f64, gamma: f64) -> PyResult<f64> {
    solver::implicit_c_star(rho, lambda_, delta, gamma).map_err(err)
}

#[pyfunction]
fn condition_lhs(law: &PyJumpLaw, params: &PyModelParams) -> PyResult<f64> {
    solver::condition_one_lhs(&law.0, &params.0).map_err(err)
}

/// First state example with its optimal constant rate (or `c0` if given).
#[pyfunction]
#[pyo3(signature = (rho0, lambda0, delta0, c1, c2, nu, gamma, x, c0=None))]
#[allow(clippy::too_many_arguments)]
fn closed_form_state_ex1(
    rho0: f64,
    lambda0: f64,
    delta0: f64,
    c1: f64,
    c2: f64,
    nu: f64,
    gamma: f64,
    x: f64,
    c0: Option<f64>,
) -> PyResult<f64> {
    let mut p = StateExampleIParams::new(rho0, lambda0, delta0, c1, c2, nu, gamma).map_err(err)?;
    if let Some(c) = c0 {
        p = p.with_c0(c).map_err(err)?;
    }
    statedep::closed_form_state_ex1(&p, x).map_err(err)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn closed_form_state_ex2(rho0: f64, c1: f64, c2: f64, lambda0: f64, delta0: f64, nu: f64, x: f64) -> PyResult<f64> {
    let p = StateExampleIIParams::new(rho0, c1, c2, lambda0, delta0, nu).map_err(err)?;
    statedep::closed_form_state_ex2(&p, x).map_err(err)
}

/// `policy` is `"optimal"`, `"bangbang"`, `"bangbang M"` or a constant rate.
#[pyfunction]
fn ruin_probability_quadrature(model: &PyStateModel, nu: f64, policy: &str, x: f64) -> PyResult<f64> {
    statedep::ruin_probability_quadrature(&model.0, nu, parse_policy(policy)?, x).map_err(err)
}

/// Monte Carlo ruin probability under the constant rate `c`. Without a
/// barrier one is placed from the adjustment exponent.
#[pyfunction]
#[pyo3(signature = (law, params, c, x0, n_paths, seed, barrier=None))]
#[allow(clippy::too_many_arguments)]
fn simulate_constant<'py>(
    py: Python<'py>,
    law: &PyJumpLaw,
    params: &PyModelParams,
    c: f64,
    x0: f64,
    n_paths: usize,
    seed: u64,
    barrier: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let barrier = match barrier {
        Some(b) => b,
        None => {
            let k = montecarlo::adjustment_exponent(&law.0, &params.0, c, None).map_err(err)?;
            montecarlo::choose_barrier(k, 1e-4).map_err(err)?
        }
    };
    let cfg = SimConfig::new(n_paths, seed, barrier);
    let est = py
        .detach(|| montecarlo::simulate_constant(&law.0, &params.0, c, x0, &cfg))
        .map_err(err)?;
    to_py(py, &est)
}

/// Market simulation with spending `c` (None for maximal) and holding `a`.
#[pyfunction]
#[pyo3(signature = (law, params, market, c, a, x0, n_paths, seed, barrier))]
#[allow(clippy::too_many_arguments)]
fn simulate_market<'py>(
    py: Python<'py>,
    law: &PyJumpLaw,
    params: &PyModelParams,
    market: &PyMarketParams,
    c: Option<f64>,
    a: f64,
    x0: f64,
    n_paths: usize,
    seed: u64,
    barrier: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let inv = c.map_or(Investment::MaxInvest, Investment::Rate);
    let cfg = SimConfig::new(n_paths, seed, barrier);
    let est = py
        .detach(|| montecarlo::simulate_market(&law.0, &params.0, &market.0, inv, a, x0, &cfg))
        .map_err(err)?;
    to_py(py, &est)
}

/// Runs a CLI subcommand on configuration text; returns `(exit_code, output)`.
#[pyfunction]
fn run_command(py: Python<'_>, command: &str, config: &str) -> PyResult<(i32, String)> {
    let cfg = RunConfig::parse(config).and_then(|c| cli::resolve(&c)).map_err(err)?;
    let f = match command {
        "solve" => cli::cmd_solve,
        "curve" => cli::cmd_curve,
        "heatmap" => cli::cmd_heatmap,
        "verify" => cli::cmd_verify,
        "asymptotics" => cli::cmd_asymptotics,
        "simulate" => cli::cmd_simulate,
        _ => return Err(PyValueError::new_err(format!("unknown command {command:?}"))),
    };
    match py.detach(|| f(&cfg)) {
        Ok(out) => Ok((out.code, out.text)),
        Err(e) => Ok((cli::EXIT_ERROR, e.to_string())),
    }
}

#[pyfunction]
fn scenario_config(name: &str) -> PyResult<String> {
    cli::scenario(name).map(|c| c.to_text()).map_err(err)
}

#[pymodule]
fn dualrisk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyJumpLaw>()?;
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyMarketParams>()?;
    m.add_class::<PyStateModel>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_market, m)?)?;
    m.add_function(wrap_pyfunction!(implicit_c_star, m)?)?;
    m.add_function(wrap_pyfunction!(condition_lhs, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_state_ex1, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_state_ex2, m)?)?;
    m.add_function(wrap_pyfunction!(ruin_probability_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_constant, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_market, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_config, m)?)?;
    m.add("SCENARIOS", cli::SCENARIOS.to_vec())?;
    Ok(())
}
