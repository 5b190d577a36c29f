//! Python surface for the simulator. Structured values cross the boundary
//! as JSON strings so the Python side can use plain `json.loads` and the
//! schema stays identical to the CLI's files.

use std::collections::BTreeMap;
use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ibenet::cognitive::ActionKind;
use ibenet::motivational::{congruence_condition, evaluate_congruence, CongruenceBehaviour};
use ibenet::network::{NetworkConfig, SensorFrame};
use ibenet::scenario::Scenario;
use ibenet::Certainty;

fn run_err(e: ibenet::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn scenario_from(toml_text: &str, alpha: Option<f64>) -> PyResult<Scenario> {
    let scenario = Scenario::from_toml(toml_text).map_err(value_err)?;
    Ok(match alpha {
        Some(a) => scenario.with_alpha(a),
        None => scenario,
    })
}

/// Simulate one seeded run; returns the trace as JSON lines, one tick per
/// line, the same format `ibenet run --trace` writes.
#[pyfunction]
#[pyo3(signature = (scenario_toml, seed, alpha=None))]
fn run_scenario(scenario_toml: &str, seed: u64, alpha: Option<f64>) -> PyResult<String> {
    let scenario = scenario_from(scenario_toml, alpha)?;
    let trace = ibenet::harness::run_scenario(&scenario, seed).map_err(run_err)?;
    trace.to_json_lines().map_err(run_err)
}

/// Simulate one seeded run and measure the scenario's reaction-time query.
/// Returns `{"stimulus_tick", "action_tick", "rtime", "resolved"}` as JSON.
#[pyfunction]
#[pyo3(signature = (scenario_toml, seed, alpha=None))]
fn measure_rtime(scenario_toml: &str, seed: u64, alpha: Option<f64>) -> PyResult<String> {
    let scenario = scenario_from(scenario_toml, alpha)?;
    let query = scenario
        .rtime
        .clone()
        .ok_or_else(|| value_err("scenario has no [rtime] query"))?;
    let trace = ibenet::harness::run_scenario(&scenario, seed).map_err(run_err)?;
    let result = ibenet::harness::measure_rtime(&trace, &query).map_err(run_err)?;
    serde_json::to_string(&result).map_err(value_err)
}

/// Sweep the blending factor. Returns `(rows_csv, summary_json)` where the
/// CSV matches `ibenet sweep --out` and the summary carries the per-alpha
/// medians and their rank correlation.
#[pyfunction]
fn sweep(scenario_toml: &str, alphas: Vec<f64>, repeats: usize) -> PyResult<(String, String)> {
    let scenario = scenario_from(scenario_toml, None)?;
    let (rows, summary) =
        ibenet::harness::sweep_alpha(&scenario, &alphas, repeats).map_err(run_err)?;
    let mut csv = Vec::new();
    ibenet::harness::write_sweep_csv(&rows, &mut csv).map_err(run_err)?;
    let csv = String::from_utf8(csv).expect("csv is ascii");
    let summary = serde_json::to_string(&summary).map_err(value_err)?;
    Ok((csv, summary))
}

/// Evaluate one drive's activity for given inputs. Returns
/// `(raw, clamped, fires)`: the unclamped blend, its certainty, and
/// whether the firing condition holds.
#[pyfunction]
fn activity(
    alpha: f64,
    need: f64,
    couplings: BTreeMap<String, f64>,
    stimuli: BTreeMap<String, f64>,
    feedback: f64,
) -> PyResult<(f64, f64, bool)> {
    let beh =
        CongruenceBehaviour::new("drive", alpha, couplings, ActionKind::Eat).map_err(value_err)?;
    let o_e = Certainty::checked(need).map_err(value_err)?;
    let o_d = Certainty::checked(feedback).map_err(value_err)?;
    let o_s = stimuli
        .into_iter()
        .map(|(k, v)| Certainty::checked(v).map(|c| (k, c)))
        .collect::<Result<BTreeMap<_, _>, _>>()
        .map_err(value_err)?;
    let raw = evaluate_congruence(&beh, o_e, &o_s, o_d);
    let fires = congruence_condition(&beh, o_e, &o_s);
    Ok((raw, Certainty::clamped(raw).value(), fires))
}

/// Load and validate a scenario file, returning its canonical JSON form.
#[pyfunction]
fn load_scenario(path: &str) -> PyResult<String> {
    let scenario = Scenario::load(Path::new(path)).map_err(value_err)?;
    serde_json::to_string(&scenario).map_err(value_err)
}

/// The two-node selection network, stepped one sensor frame at a time.
#[pyclass]
struct Network {
    inner: ibenet::Network,
}

#[pymethods]
impl Network {
    /// `config_json` follows the scenario's `[network]` table: alpha,
    /// drives, and optional lambda/rho/contact_range/gain overrides.
    #[new]
    fn new(config_json: &str) -> PyResult<Self> {
        let config: NetworkConfig = serde_json::from_str(config_json).map_err(value_err)?;
        let inner = ibenet::Network::new(config).map_err(run_err)?;
        Ok(Network { inner })
    }

    /// Advance one decision cycle. `frame_json` carries `percepts` (kind,
    /// certainty, bearing, distance) and `internal` need values; the
    /// returned JSON is the cycle report with the selected action.
    fn step(&mut self, frame_json: &str) -> PyResult<String> {
        let frame: SensorFrame = serde_json::from_str(frame_json).map_err(value_err)?;
        let report = self.inner.step(&frame).map_err(run_err)?;
        serde_json::to_string(&report).map_err(value_err)
    }

    #[getter]
    fn tick(&self) -> u64 {
        self.inner.tick()
    }

    fn __repr__(&self) -> String {
        format!("Network(tick={})", self.inner.tick())
    }
}

#[pymodule]
fn ibenet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(measure_rtime, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(activity, m)?)?;
    m.add_function(wrap_pyfunction!(load_scenario, m)?)?;
    m.add_class::<Network>()?;
    Ok(())
}
