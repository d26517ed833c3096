//! Algorithm dispatch and the solution report shared by the CLI and sweeps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{greedy_heuristic, proportional_allocation, HeuristicParams};
use crate::error::{Error, Result};
use crate::exact::{solve_exact_erlang, solve_mdkp, DEFAULT_CELL_LIMIT, DEFAULT_NODE_BUDGET};
use crate::model::{theta_from_n, weights, Instance};
use crate::objective::{utility_from_f, ErlangObjective};
use crate::stream::{solve_stream, ItemOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Stream,
    Exact,
    Mdkp,
    Prop,
    Greedy,
}

impl Algo {
    pub const ALL: [Algo; 5] = [Algo::Stream, Algo::Exact, Algo::Mdkp, Algo::Prop, Algo::Greedy];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Stream => "stream",
            Algo::Exact => "exact",
            Algo::Mdkp => "mdkp",
            Algo::Prop => "prop",
            Algo::Greedy => "greedy",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm `{s}`")))
    }
}

/// Parses a comma-separated, non-empty algorithm list.
pub fn parse_algos(list: &str) -> Result<Vec<Algo>> {
    let algos = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Algo>>>()?;
    if algos.is_empty() {
        return Err(Error::InvalidSweep("algorithm set is empty".into()));
    }
    Ok(algos)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub order: ItemOrder,
    pub heuristic: HeuristicParams,
    pub node_budget: u64,
    pub cell_limit: u128,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            order: ItemOrder::RoundRobin,
            heuristic: HeuristicParams::default(),
            node_budget: DEFAULT_NODE_BUDGET,
            cell_limit: DEFAULT_CELL_LIMIT,
        }
    }
}

/// Everything reported about one allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub algo: Algo,
    pub n: Vec<u64>,
    pub theta: Vec<Vec<u64>>,
    pub f: f64,
    pub per_sp_f: Vec<f64>,
    pub per_sp_blocking: Vec<f64>,
    pub utilization: Vec<f64>,
    pub expected_utility: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold_used: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub proven_optimal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nodes_explored: Option<u64>,
    /// `Σ ξ_p·n_p` for the knapsack-based algorithms.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub linear_objective: Option<f64>,
    /// Per-copy rewards used by the greedy heuristic.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub xi: Option<Vec<f64>>,
    /// True when `xi` was not given and fell back to the arrival-rate weights.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub xi_is_default: Option<bool>,
}

impl SolutionReport {
    /// Report for an arbitrary feasible session vector.
    pub fn for_vector(instance: &Instance, algo: Algo, n: &[u64]) -> Result<Self> {
        let alloc = theta_from_n(instance, n)?;
        let obj = ErlangObjective::new(instance);
        let value = obj.eval(n)?;
        Ok(Self {
            algo,
            n: n.to_vec(),
            theta: alloc.theta,
            f: value.f,
            per_sp_f: value.per_sp,
            per_sp_blocking: obj.blocking(n)?,
            utilization: instance.utilization(n),
            expected_utility: utility_from_f(instance, value.f),
            threshold_used: None,
            proven_optimal: None,
            nodes_explored: None,
            linear_objective: None,
            xi: None,
            xi_is_default: None,
        })
    }
}

pub fn solve(instance: &Instance, algo: Algo, opts: &SolveOptions) -> Result<SolutionReport> {
    match algo {
        Algo::Stream => {
            let sol = solve_stream(instance, opts.order);
            let mut rep = SolutionReport::for_vector(instance, algo, &sol.n)?;
            rep.threshold_used = Some(sol.threshold_used);
            Ok(rep)
        }
        Algo::Exact => {
            let sol = solve_exact_erlang(instance, opts.node_budget);
            let mut rep = SolutionReport::for_vector(instance, algo, &sol.n)?;
            rep.proven_optimal = Some(sol.proven_optimal);
            rep.nodes_explored = Some(sol.nodes_explored);
            Ok(rep)
        }
        Algo::Mdkp => {
            let sol = solve_mdkp(instance, &weights(instance), opts.cell_limit)?;
            let mut rep = SolutionReport::for_vector(instance, algo, &sol.n)?;
            rep.proven_optimal = Some(sol.proven_optimal);
            rep.nodes_explored = Some(sol.nodes_explored);
            rep.linear_objective = Some(sol.objective);
            Ok(rep)
        }
        Algo::Prop => {
            let alloc = proportional_allocation(instance);
            let mut rep = SolutionReport::for_vector(instance, algo, &alloc.n)?;
            rep.theta = alloc.theta;
            Ok(rep)
        }
        Algo::Greedy => {
            let sol = greedy_heuristic(instance, &opts.heuristic)?;
            let mut rep = SolutionReport::for_vector(instance, algo, &sol.n)?;
            rep.nodes_explored = Some(sol.nodes_explored);
            rep.linear_objective = Some(sol.objective);
            rep.xi_is_default = Some(opts.heuristic.xi.is_none());
            rep.xi = Some(opts.heuristic.xi.clone().unwrap_or_else(|| weights(instance)));
            Ok(rep)
        }
    }
}

/// Formats a real with 12 significant digits, `.` as decimal separator and
/// no trailing zeros. Magnitudes outside `[1e-5, 1e15)` use exponent form.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
