//! Python bindings: rate tables, histories, simulation, estimation and the
//! optimal replacement policy.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wearpolicy_core as core;
use wearpolicy_core::anneal::SaConfig;
use wearpolicy_core::dp::{self, PolicyGrid, ValueFunction};
use wearpolicy_core::landscape::LandscapeConfig;
use wearpolicy_core::sim::{SseObjective, StopCondition};
use wearpolicy_core::{datasets, evaluate, io, EventKind, FailureEvent, GridShape, Matrix};

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::NonTerminating { .. } | core::Error::IterationCap { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Binned wear-rate matrices A (part 1) and B (part 2).
#[pyclass(module = "wearpolicy", frozen, skip_from_py_object)]
#[derive(Clone)]
struct RateTable(core::RateTable);

#[pymethods]
impl RateTable {
    #[new]
    fn new(bin_width: u32, a: Vec<Vec<u32>>, b: Vec<Vec<u32>>) -> PyResult<Self> {
        core::RateTable::from_rows(bin_width, &a, &b).map(Self).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (a, b, bin_width=core::DEFAULT_BIN_WIDTH, bins=core::DEFAULT_BIN_COUNT))]
    fn uniform(a: u32, b: u32, bin_width: u32, bins: usize) -> PyResult<Self> {
        let shape = GridShape::new(bin_width, bins, bins).map_err(to_py)?;
        core::RateTable::uniform(shape, a, b).map(Self).map_err(to_py)
    }

    #[getter]
    fn bin_width(&self) -> u32 {
        self.0.bin_width()
    }

    #[getter]
    fn a(&self) -> Vec<Vec<u32>> {
        self.0.rows_of(Matrix::A)
    }

    #[getter]
    fn b(&self) -> Vec<Vec<u32>> {
        self.0.rows_of(Matrix::B)
    }

    /// Rates applied to a part pair with the given wear levels.
    fn rates_at(&self, d1: u32, d2: u32) -> (u32, u32) {
        self.0.rate_lookup(core::WearState { d1, d2 })
    }

    fn __eq__(&self, other: PyRef<'_, Self>) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("RateTable(bin_width={}, rows={}, cols={})", self.0.bin_width(), self.0.rows(), self.0.cols())
    }
}

/// Replacement costs and daily discount factor.
#[pyclass(module = "wearpolicy", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct CostModel(core::CostModel);

#[pymethods]
impl CostModel {
    #[new]
    #[pyo3(signature = (c1, c2, v, alpha=datasets::EXAMPLE_DISCOUNT))]
    fn new(c1: f64, c2: f64, v: f64, alpha: f64) -> PyResult<Self> {
        core::CostModel::new(c1, c2, v, alpha).map(Self).map_err(to_py)
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.0.c1
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.0.c2
    }

    #[getter]
    fn v(&self) -> f64 {
        self.0.v
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    fn __repr__(&self) -> String {
        let c = self.0;
        format!("CostModel(c1={}, c2={}, v={}, alpha={})", c.c1, c.c2, c.v, c.alpha)
    }
}

/// Wear limits at which each part must be replaced.
#[pyclass(module = "wearpolicy", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct Limits(core::Limits);

#[pymethods]
impl Limits {
    #[new]
    fn new(l1: u32, l2: u32) -> PyResult<Self> {
        core::Limits::new(l1, l2).map(Self).map_err(to_py)
    }

    #[getter]
    fn l1(&self) -> u32 {
        self.0.l1
    }

    #[getter]
    fn l2(&self) -> u32 {
        self.0.l2
    }

    fn __repr__(&self) -> String {
        format!("Limits(l1={}, l2={})", self.0.l1, self.0.l2)
    }
}

/// Replacement record: `(day, kind)` pairs with kind "1", "2" or "both".
#[pyclass(module = "wearpolicy", frozen, skip_from_py_object)]
#[derive(Clone)]
struct FailureHistory(core::FailureHistory);

#[pymethods]
impl FailureHistory {
    #[new]
    #[pyo3(signature = (events, horizon=None))]
    fn new(events: Vec<(u32, String)>, horizon: Option<u32>) -> PyResult<Self> {
        let events = events
            .into_iter()
            .map(|(time, kind)| {
                EventKind::parse(&kind)
                    .map(|which| FailureEvent { time, which })
                    .ok_or_else(|| PyValueError::new_err(format!("unknown event kind {kind:?}")))
            })
            .collect::<PyResult<Vec<_>>>()?;
        match horizon {
            Some(h) => core::FailureHistory::with_horizon(events, h),
            None => core::FailureHistory::new(events),
        }
        .map(Self)
        .map_err(to_py)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        io::read_history(text, "<string>").map(Self).map_err(to_py)
    }

    fn to_csv(&self) -> String {
        io::write_history(&self.0, "")
    }

    fn events(&self) -> Vec<(u32, &'static str)> {
        self.0.events().iter().map(|e| (e.time, e.which.label())).collect()
    }

    /// Replacements of part 1 and part 2, joint events counted for both.
    fn counts(&self) -> (usize, usize) {
        self.0.counts()
    }

    #[getter]
    fn horizon(&self) -> u32 {
        self.0.horizon()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("FailureHistory(events={}, horizon={})", self.0.len(), self.0.horizon())
    }
}

/// Optimal policy with its value function and structure diagnostics.
#[pyclass(module = "wearpolicy", frozen)]
struct Policy {
    values: ValueFunction,
    policy: PolicyGrid,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    residuals: Vec<f64>,
}

#[pymethods]
impl Policy {
    /// Action name at wear levels `(d1, d2)`.
    fn action(&self, d1: u32, d2: u32) -> PyResult<&'static str> {
        let l = self.policy.limits();
        if d1 > l.l1 || d2 > l.l2 {
            return Err(PyValueError::new_err(format!("state ({d1}, {d2}) is outside the grid")));
        }
        Ok(self.policy.get(d1, d2).name())
    }

    fn value(&self, d1: u32, d2: u32) -> PyResult<f64> {
        let l = self.values.limits();
        if d1 > l.l1 || d2 > l.l2 {
            return Err(PyValueError::new_err(format!("state ({d1}, {d2}) is outside the grid")));
        }
        Ok(self.values.get(d1, d2))
    }

    /// Number of states assigned to each action.
    fn action_counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for a in dp::Action::ALL {
            d.set_item(a.name(), self.policy.count(a))?;
        }
        Ok(d)
    }

    /// Whether every monotonicity and threshold check passes.
    fn structure_passed(&self) -> bool {
        dp::check_structure(&self.values, &self.policy).passed()
    }

    /// Per-part lists of `(threshold, kind)`, indexed by the other part's wear.
    fn thresholds(&self) -> PyResult<(Vec<(u32, &'static str)>, Vec<(u32, &'static str)>)> {
        let t = dp::thresholds(&self.policy).map_err(to_py)?;
        let list = |v: &[dp::Threshold]| v.iter().map(|t| (t.at, t.kind.label())).collect();
        Ok((list(&t.part1), list(&t.part2)))
    }

    fn policy_csv(&self) -> String {
        io::write_policy_grid(&self.policy, "")
    }

    fn values_csv(&self) -> String {
        io::write_value_grid(&self.values, "")
    }
}

/// Simulates limit replacement from fresh parts, for `days` days or until
/// each part reaches `counts` replacements.
#[pyfunction]
#[pyo3(signature = (rates, limits, days=None, counts=None, max_days=100_000))]
fn simulate(
    rates: &RateTable,
    limits: &Limits,
    days: Option<u32>,
    counts: Option<(usize, usize)>,
    max_days: u32,
) -> PyResult<FailureHistory> {
    let stop = match (days, counts) {
        (Some(d), None) => StopCondition::Days(d),
        (None, Some((n1, n2))) => StopCondition::Counts { n1, n2, max_days },
        _ => return Err(PyValueError::new_err("give exactly one of `days` or `counts`")),
    };
    let out = core::sim::simulate_limit_policy(&rates.0, limits.0, stop, false).map_err(to_py)?;
    Ok(FailureHistory(out.history))
}

/// Interval objective of `rates` against `history`.
#[pyfunction]
fn objective<'py>(
    py: Python<'py>,
    rates: &RateTable,
    limits: &Limits,
    history: &FailureHistory,
) -> PyResult<Bound<'py, PyDict>> {
    let v = core::sim::sse_objective(&rates.0, limits.0, &history.0).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("sse", v.sse)?;
    d.set_item("matched_events", v.matched_events)?;
    d.set_item("penalty_applied", v.penalty_applied)?;
    d.set_item("absolute_sse", v.absolute_sse)?;
    Ok(d)
}

/// Value iteration for the discounted replacement problem.
#[pyfunction]
#[pyo3(signature = (rates, costs, limits, tolerance=None))]
fn solve(rates: &RateTable, costs: &CostModel, limits: &Limits, tolerance: Option<f64>) -> PyResult<Policy> {
    let tol = tolerance.unwrap_or_else(|| costs.0.default_tolerance());
    let sol = dp::value_iteration(&rates.0, costs.0, limits.0, tol).map_err(to_py)?;
    let policy = dp::extract_policy(&sol.values, &rates.0, costs.0, limits.0);
    Ok(Policy { values: sol.values, policy, iterations: sol.iterations, residuals: sol.residuals })
}

/// Long-run mean daily cost of the history and of the policy, and the
/// percentage reduction.
#[pyfunction]
#[pyo3(signature = (policy, rates, costs, history, horizon=10_000))]
fn compare<'py>(
    py: Python<'py>,
    policy: &Policy,
    rates: &RateTable,
    costs: &CostModel,
    history: &FailureHistory,
    horizon: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let hist = evaluate::historical_cost(&history.0, costs.0).map_err(to_py)?;
    let opt = evaluate::policy_cost(&policy.policy, &rates.0, costs.0, horizon).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("historical_mean", hist.mean_cost_per_day)?;
    d.set_item("policy_mean", opt.mean_cost_per_day)?;
    d.set_item("reduction_pct", evaluate::compare(&opt, &hist).map_err(to_py)?)?;
    Ok(d)
}

/// Simulated-annealing estimate of the rate table behind `history`.
#[pyfunction]
#[pyo3(signature = (history, limits, seed=0, total_iters=30_000, iters_per_temp=20, cool=0.999, bin_width=core::DEFAULT_BIN_WIDTH, bins=core::DEFAULT_BIN_COUNT))]
#[allow(clippy::too_many_arguments)]
fn estimate<'py>(
    py: Python<'py>,
    history: &FailureHistory,
    limits: &Limits,
    seed: u64,
    total_iters: u32,
    iters_per_temp: u32,
    cool: f64,
    bin_width: u32,
    bins: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let config = SaConfig {
        seed,
        total_iters,
        iters_per_temp,
        cool,
        shape: GridShape::new(bin_width, bins, bins).map_err(to_py)?,
        record_trace: false,
        ..SaConfig::default()
    };
    config.validate().map_err(to_py)?;
    let run = py
        .detach(|| core::anneal::anneal(&history.0, limits.0, &config))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("rates", RateTable(run.best))?;
    d.set_item("objective", run.best_objective)?;
    d.set_item("initial_temperature", run.temperature.t0)?;
    d.set_item("accepted", run.accepted)?;
    Ok(d)
}

/// Amplitude, mean hill-climb length and lag-1 autocorrelation of the
/// objective landscape; undefined statistics come back as None.
#[pyfunction]
#[pyo3(signature = (history, limits, seed=0, population=1000, walk_starts=500, walk_steps=1000))]
fn landscape<'py>(
    py: Python<'py>,
    history: &FailureHistory,
    limits: &Limits,
    seed: u64,
    population: usize,
    walk_starts: usize,
    walk_steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let objective = SseObjective::new(&history.0, limits.0).map_err(to_py)?;
    let config = LandscapeConfig { population, walk_starts, walk_steps, seed, ..LandscapeConfig::default() };
    config.validate().map_err(to_py)?;
    let r = py.detach(|| core::landscape::analyze(&objective, &config)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("amplitude", r.amplitude)?;
    d.set_item("mean_walk_length", r.mean_walk_length)?;
    d.set_item("r1", r.r1)?;
    Ok(d)
}

/// LP formulation of the replacement problem in CPLEX LP format.
#[pyfunction]
fn export_lp(rates: &RateTable, costs: &CostModel, limits: &Limits) -> String {
    core::lp::build_replacement_lp(&rates.0, costs.0, limits.0).to_lp_string("")
}

#[pyfunction]
fn example1_history() -> FailureHistory {
    FailureHistory(datasets::example1_history())
}

#[pyfunction]
fn example2_history() -> FailureHistory {
    FailureHistory(datasets::example2_history())
}

#[pyfunction]
fn example1_rates() -> RateTable {
    RateTable(datasets::example1_rates())
}

#[pyfunction]
fn example2_rates() -> RateTable {
    RateTable(datasets::example2_rates())
}

#[pyfunction]
fn example_limits() -> Limits {
    Limits(datasets::EXAMPLE_LIMITS)
}

#[pymodule]
fn wearpolicy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<RateTable>()?;
    m.add_class::<CostModel>()?;
    m.add_class::<Limits>()?;
    m.add_class::<FailureHistory>()?;
    m.add_class::<Policy>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(landscape, m)?)?;
    m.add_function(wrap_pyfunction!(export_lp, m)?)?;
    m.add_function(wrap_pyfunction!(example1_history, m)?)?;
    m.add_function(wrap_pyfunction!(example2_history, m)?)?;
    m.add_function(wrap_pyfunction!(example1_rates, m)?)?;
    m.add_function(wrap_pyfunction!(example2_rates, m)?)?;
    m.add_function(wrap_pyfunction!(example_limits, m)?)?;
    Ok(())
}
