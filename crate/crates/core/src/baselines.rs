//! Reference allocations the optimizers are compared against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::model::{full_pool_sessions_all, max_sessions, weights, Allocation, Instance};
use crate::objective::SessionVector;

/// Settings of the effective-capacity greedy heuristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicParams {
    /// Fraction of the winner's effective capacity committed per round.
    pub alpha: f64,
    /// Per-copy rewards; `None` uses the arrival-rate weights.
    pub xi: Option<Vec<f64>>,
}

impl HeuristicParams {
    pub fn new(alpha: f64) -> Result<Self> {
        let params = Self { alpha, xi: None };
        params.validate()?;
        Ok(params)
    }

    pub fn with_xi(mut self, xi: Vec<f64>) -> Result<Self> {
        self.xi = Some(xi);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if let Some(xi) = &self.xi {
            if xi.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidArgument("xi must be finite and non-negative".into()));
            }
        }
        Ok(())
    }
}

impl Default for HeuristicParams {
    fn default() -> Self {
        Self { alpha: 1.0, xi: None }
    }
}

/// Splits every resource in proportion to the arrival rates.
///
/// Each SP first receives `⌊w_p·K^r⌋` base units. The units left over on a
/// resource go one each to the SPs with the largest fractional parts, ties to
/// the smaller index.
pub fn proportional_allocation(instance: &Instance) -> Allocation {
    let w = weights(instance);
    let p_count = instance.num_sps();
    let mut theta = vec![vec![0u64; instance.dims()]; p_count];
    for (r, &k) in instance.capacities().iter().enumerate() {
        let exact: Vec<f64> = w.iter().map(|&wp| wp * k as f64).collect();
        let mut floors: Vec<u64> = exact.iter().map(|&x| (x.floor() as u64).min(k)).collect();
        while floors.iter().sum::<u64>() > k {
            // Only reachable through rounding of w; trim the largest share.
            let p = (0..p_count).max_by_key(|&p| (floors[p], std::cmp::Reverse(p))).unwrap();
            floors[p] -= 1;
        }
        let leftover = k - floors.iter().sum::<u64>();
        let mut order: Vec<usize> = (0..p_count).collect();
        order.sort_by(|&a, &b| {
            let fa = exact[a] - floors[a] as f64;
            let fb = exact[b] - floors[b] as f64;
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for i in 0..leftover as usize {
            floors[order[i % p_count]] += 1;
        }
        for (p, units) in floors.into_iter().enumerate() {
            theta[p][r] = units;
        }
    }
    let n = instance
        .sps()
        .iter()
        .zip(&theta)
        .map(|(sp, share)| max_sessions(share, &sp.demand).expect("validated demand"))
        .collect();
    Allocation { n, theta }
}

/// Copies of one SP that fit alone into `remaining`.
pub fn effective_capacity(remaining: &[u64], demand: &[u64]) -> u64 {
    remaining
        .iter()
        .zip(demand)
        .map(|(&k, &z)| if z == 0 { u64::MAX } else { k / z })
        .min()
        .unwrap_or(0)
}

/// Effective-capacity greedy for the linear knapsack relaxation.
///
/// Each round scores every eligible SP by `ξ_p·C̄_p`, where `C̄_p` is its
/// effective capacity in the residual pool, and commits
/// `min(N̄_p, max(1, ⌊α·C̄_p⌋))` copies of the best one. The returned
/// `objective` is `Σ ξ_p·n_p` and `nodes_explored` counts rounds.
pub fn greedy_heuristic(instance: &Instance, params: &HeuristicParams) -> Result<ExactSolution> {
    params.validate()?;
    let p_count = instance.num_sps();
    let xi = match &params.xi {
        Some(xi) if xi.len() != p_count => {
            return Err(Error::Length {
                got: xi.len(),
                expected: p_count,
            })
        }
        Some(xi) => xi.clone(),
        None => weights(instance),
    };
    let mut residual = instance.capacities().to_vec();
    let mut copies_left = full_pool_sessions_all(instance);
    let mut eligible = vec![true; p_count];
    let mut n = vec![0u64; p_count];
    let mut rounds = 0u64;
    loop {
        let mut pick: Option<(usize, u64, f64)> = None;
        for p in (0..p_count).filter(|&p| eligible[p]) {
            let c = effective_capacity(&residual, &instance.sps()[p].demand);
            if c == 0 || copies_left[p] == 0 {
                continue;
            }
            let score = xi[p] * c as f64;
            if pick.is_none_or(|(_, _, best)| score > best) {
                pick = Some((p, c, score));
            }
        }
        let Some((p, c, _)) = pick else { break };
        let take = copies_left[p].min(((params.alpha * c as f64).floor() as u64).max(1));
        for (k, &z) in residual.iter_mut().zip(&instance.sps()[p].demand) {
            *k -= take * z;
        }
        copies_left[p] -= take;
        n[p] += take;
        rounds += 1;
        if copies_left[p] == 0 || params.alpha == 1.0 {
            eligible[p] = false;
        }
    }
    let objective = n.iter().zip(&xi).map(|(&np, &x)| np as f64 * x).sum();
    Ok(ExactSolution {
        n: SessionVector(n),
        objective,
        nodes_explored: rounds,
        proven_optimal: false,
    })
}
