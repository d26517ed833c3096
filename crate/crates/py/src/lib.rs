//! Python bindings for `edge_slicer`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use edge_slicer::baselines::HeuristicParams;
use edge_slicer::config::{Config, TWO_SP_EDGE_NODE_JSON};
use edge_slicer::exact::DEFAULT_NODE_BUDGET;
use edge_slicer::report::{parse_algos, Algo, SolutionReport, SolveOptions};
use edge_slicer::simulate::{HoldingTime, SimConfig, SimReport};
use edge_slicer::stream::ItemOrder;
use edge_slicer::sweep::{SweepAxis, SweepSpec};
use edge_slicer::{ErlangObjective, Error, OfferedLoad};

fn to_py(e: Error) -> PyErr {
    if e.exit_code() == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// A validated problem instance.
#[pyclass(name = "Instance", module = "edge_slicer_py", frozen)]
struct PyInstance {
    config: Config,
    inner: edge_slicer::Instance,
}

impl PyInstance {
    fn from_config(config: Config) -> PyResult<Self> {
        let inner = config.to_instance().map_err(to_py)?;
        Ok(Self { config, inner })
    }
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::from_config(Config::from_json(text).map_err(to_py)?)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Self::from_config(Config::load(path).map_err(to_py)?)
    }

    /// The bundled two-SP edge node.
    #[staticmethod]
    fn reference() -> PyResult<Self> {
        Self::from_json(TWO_SP_EDGE_NODE_JSON)
    }

    fn to_json(&self) -> String {
        self.config.to_json_pretty()
    }

    /// Copy with one parameter overwritten, e.g. `with_param("sps[0].lambda", 30.0)`.
    fn with_param(&self, path: &str, value: f64) -> PyResult<Self> {
        let mut config = self.config.clone();
        config.set_param(path, value).map_err(to_py)?;
        Self::from_config(config)
    }

    #[getter]
    fn num_sps(&self) -> usize {
        self.inner.num_sps()
    }

    #[getter]
    fn dims(&self) -> usize {
        self.inner.dims()
    }

    /// Capacities in base units.
    #[getter]
    fn capacities(&self) -> Vec<u64> {
        self.inner.capacities().to_vec()
    }

    #[getter]
    fn sp_names(&self) -> Vec<String> {
        self.inner.sps().iter().map(|sp| sp.name.clone()).collect()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon()
    }

    fn eval(&self, n: Vec<u64>) -> PyResult<f64> {
        Ok(ErlangObjective::new(&self.inner).eval(&n).map_err(to_py)?.f)
    }

    fn blocking(&self, n: Vec<u64>) -> PyResult<Vec<f64>> {
        ErlangObjective::new(&self.inner).blocking(&n).map_err(to_py)
    }

    fn marginal_gain(&self, n: Vec<u64>, p: usize) -> PyResult<f64> {
        ErlangObjective::new(&self.inner).marginal_gain(&n, p).map_err(to_py)
    }

    fn is_feasible(&self, n: Vec<u64>) -> bool {
        self.inner.check_feasible(&n).is_ok()
    }

    #[pyo3(signature = (algo = "stream", order = "round-robin", alpha = 1.0, budget = DEFAULT_NODE_BUDGET))]
    fn solve(&self, algo: &str, order: &str, alpha: f64, budget: u64) -> PyResult<Solution> {
        let algo: Algo = algo.parse().map_err(to_py)?;
        let opts = SolveOptions {
            order: order.parse::<ItemOrder>().map_err(to_py)?,
            heuristic: HeuristicParams::new(alpha).map_err(to_py)?,
            node_budget: budget,
            ..SolveOptions::default()
        };
        let report = edge_slicer::solve(&self.inner, algo, &opts).map_err(to_py)?;
        Ok(Solution { report })
    }

    #[pyo3(signature = (n, horizon, seed = 42, replications = 1, warmup = 0.0, holding = "exp"))]
    fn simulate(
        &self,
        py: Python<'_>,
        n: Vec<u64>,
        horizon: f64,
        seed: u64,
        replications: usize,
        warmup: f64,
        holding: &str,
    ) -> PyResult<Simulation> {
        let cfg = SimConfig {
            horizon,
            warmup,
            seed,
            replications,
            holding: holding.parse::<HoldingTime>().map_err(to_py)?,
        };
        let inner = &self.inner;
        let report = py
            .detach(|| edge_slicer::simulate(inner, &n, &cfg))
            .map_err(to_py)?;
        Ok(Simulation { report })
    }

    /// Streaming guarantee check on the capacity-scaled copy; JSON report.
    #[pyo3(signature = (scale = 4, budget = DEFAULT_NODE_BUDGET))]
    fn verify(&self, scale: u64, budget: u64) -> PyResult<String> {
        json(&edge_slicer::verify(&self.inner, scale, budget).map_err(to_py)?)
    }

    /// Sweep as CSV text.
    #[pyo3(signature = (param, values, algos = "stream", param2 = None, values2 = None))]
    fn sweep_csv(
        &self,
        param: &str,
        values: &str,
        algos: &str,
        param2: Option<&str>,
        values2: Option<&str>,
    ) -> PyResult<String> {
        let axis2 = match (param2, values2) {
            (Some(p), Some(v)) => Some(SweepAxis::parse(p, v).map_err(to_py)?),
            (None, None) => None,
            _ => return Err(PyValueError::new_err("param2 and values2 go together")),
        };
        let mut spec = SweepSpec::new(
            SweepAxis::parse(param, values).map_err(to_py)?,
            axis2,
            parse_algos(algos).map_err(to_py)?,
        );
        spec.timing = false;
        let table = edge_slicer::run_sweep(&self.config, &spec).map_err(to_py)?;
        Ok(table.to_csv())
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(sps={:?}, capacities={:?})",
            self.sp_names(),
            self.inner.capacities()
        )
    }
}

#[pyclass(module = "edge_slicer_py", frozen)]
struct Solution {
    report: SolutionReport,
}

#[pymethods]
impl Solution {
    #[getter]
    fn algo(&self) -> String {
        self.report.algo.to_string()
    }

    #[getter]
    fn n(&self) -> Vec<u64> {
        self.report.n.clone()
    }

    #[getter]
    fn theta(&self) -> Vec<Vec<u64>> {
        self.report.theta.clone()
    }

    #[getter]
    fn f(&self) -> f64 {
        self.report.f
    }

    #[getter]
    fn per_sp_f(&self) -> Vec<f64> {
        self.report.per_sp_f.clone()
    }

    #[getter]
    fn blocking(&self) -> Vec<f64> {
        self.report.per_sp_blocking.clone()
    }

    #[getter]
    fn utilization(&self) -> Vec<f64> {
        self.report.utilization.clone()
    }

    #[getter]
    fn expected_utility(&self) -> f64 {
        self.report.expected_utility
    }

    #[getter]
    fn threshold_used(&self) -> Option<f64> {
        self.report.threshold_used
    }

    #[getter]
    fn proven_optimal(&self) -> Option<bool> {
        self.report.proven_optimal
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.report)
    }

    fn __repr__(&self) -> String {
        format!("Solution(algo={}, n={:?}, f={})", self.report.algo, self.report.n, self.report.f)
    }
}

#[pyclass(module = "edge_slicer_py", frozen)]
struct Simulation {
    report: SimReport,
}

#[pymethods]
impl Simulation {
    #[getter]
    fn empirical_f(&self) -> f64 {
        self.report.empirical_f
    }

    #[getter]
    fn blocking(&self) -> Vec<f64> {
        self.report.per_sp.iter().map(|s| s.empirical_blocking).collect()
    }

    #[getter]
    fn halfwidth(&self) -> Vec<f64> {
        self.report.per_sp.iter().map(|s| s.halfwidth).collect()
    }

    #[getter]
    fn arrivals(&self) -> Vec<u64> {
        self.report.per_sp.iter().map(|s| s.arrivals).collect()
    }

    #[getter]
    fn blocked(&self) -> Vec<u64> {
        self.report.per_sp.iter().map(|s| s.blocked).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.report)
    }
}

#[pyfunction]
fn erlang_b(a: f64, n: u64) -> PyResult<f64> {
    Ok(edge_slicer::erlang_b(OfferedLoad::new(a).map_err(to_py)?, n))
}

#[pyfunction]
fn erlang_b_direct(a: f64, n: u64) -> PyResult<f64> {
    Ok(edge_slicer::erlang_b_direct(OfferedLoad::new(a).map_err(to_py)?, n))
}

#[pymodule]
fn edge_slicer_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<Solution>()?;
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(erlang_b, m)?)?;
    m.add_function(wrap_pyfunction!(erlang_b_direct, m)?)?;
    Ok(())
}
