//! Ground-truth solvers for desk-scale instances.
//!
//! [`solve_exact_erlang`] maximizes the Erlang objective by depth-first
//! branch-and-bound over session counts. [`solve_mdkp_linear`] maximizes the
//! linear reward `Σ w_p·n_p` under the same knapsack constraints with an
//! unbounded-knapsack dynamic program over the capacity lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{full_pool_sessions_all, weights, Instance};
use crate::objective::{ErlangObjective, SessionVector};

/// Default node budget for [`solve_exact_erlang`].
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;
/// Default cap on DP table cells for [`solve_mdkp_linear`].
pub const DEFAULT_CELL_LIMIT: u128 = 100_000_000;
/// Objective values closer than this are treated as ties; the earlier
/// (lexicographically smaller) vector is kept.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub n: SessionVector,
    pub objective: f64,
    pub nodes_explored: u64,
    pub proven_optimal: bool,
}

struct ErlangSearch<'a> {
    instance: &'a Instance,
    weights: &'a [f64],
    /// `served[p][k] = 1 - B(k, A_p)` for `k ≤ N_p`.
    served: Vec<Vec<f64>>,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    current: Vec<u64>,
    best: Option<(f64, Vec<u64>)>,
}

impl ErlangSearch<'_> {
    fn fit(&self, p: usize, residual: &[u64]) -> u64 {
        let cap = residual
            .iter()
            .zip(&self.instance.sps()[p].demand)
            .map(|(&k, &z)| k / z)
            .min()
            .unwrap_or(0);
        cap.min(self.served[p].len() as u64 - 1)
    }

    fn leaf_value(&self) -> f64 {
        // Same per-SP terms and summation order as `ErlangObjective::eval`.
        self.current
            .iter()
            .enumerate()
            .map(|(p, &np)| self.weights[p] * self.served[p][np as usize])
            .sum()
    }

    fn upper_bound(&self, depth: usize, partial: f64, residual: &[u64]) -> f64 {
        partial
            + (depth..self.current.len())
                .map(|q| self.weights[q] * self.served[q][self.fit(q, residual) as usize])
                .sum::<f64>()
    }

    fn descend(&mut self, depth: usize, partial: f64, residual: &mut Vec<u64>) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if depth == self.current.len() {
            let f = self.leaf_value();
            let better = match &self.best {
                None => true,
                Some((best, _)) => f > best + TIE_TOLERANCE,
            };
            if better {
                self.best = Some((f, self.current.clone()));
            }
            return;
        }
        if let Some((best, _)) = &self.best {
            if self.upper_bound(depth, partial, residual) < best - TIE_TOLERANCE {
                return;
            }
        }
        let demand = self.instance.sps()[depth].demand.clone();
        let max_here = self.fit(depth, residual);
        for k in 0..=max_here {
            for (r, &z) in residual.iter_mut().zip(&demand) {
                *r -= k * z;
            }
            self.current[depth] = k;
            let gained = self.weights[depth] * self.served[depth][k as usize];
            self.descend(depth + 1, partial + gained, residual);
            for (r, &z) in residual.iter_mut().zip(&demand) {
                *r += k * z;
            }
            if self.exhausted {
                break;
            }
        }
        self.current[depth] = 0;
    }
}

fn served_table(a: f64, max_n: u64) -> Vec<f64> {
    // Mirrors `erlang::erlang_b` step by step so table entries are bit-identical.
    let mut out = Vec::with_capacity(max_n as usize + 1);
    out.push(0.0);
    let mut b = 1.0f64;
    for i in 1..=max_n {
        if a == 0.0 {
            b = 0.0;
        } else {
            let ab = a * b;
            b = ab / (i as f64 + ab);
        }
        out.push(1.0 - b);
    }
    out
}

/// Globally optimal session vector for the Erlang objective.
///
/// Children are visited in ascending `n_p`, SPs in index order, so ties resolve
/// to the lexicographically smallest optimum. A subtree is pruned when the
/// value so far plus every remaining SP's best attainable term within the
/// residual capacity cannot beat the incumbent. When the node budget runs out
/// the incumbent is returned with `proven_optimal = false`.
pub fn solve_exact_erlang(instance: &Instance, budget_limit: u64) -> ExactSolution {
    let obj = ErlangObjective::new(instance);
    let served = obj
        .loads()
        .iter()
        .zip(obj.saturation())
        .map(|(a, &np)| served_table(a.get(), np))
        .collect();
    let mut search = ErlangSearch {
        instance,
        weights: obj.weights(),
        served,
        budget: budget_limit,
        nodes: 0,
        exhausted: false,
        current: vec![0; instance.num_sps()],
        best: None,
    };
    let mut residual = instance.capacities().to_vec();
    search.descend(0, 0.0, &mut residual);
    let (objective, n) = search
        .best
        .take()
        .unwrap_or_else(|| (0.0, vec![0; instance.num_sps()]));
    ExactSolution {
        n: SessionVector(n),
        objective,
        nodes_explored: search.nodes.min(budget_limit),
        proven_optimal: !search.exhausted,
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Maximizes `Σ w_p·n_p` with the arrival-rate weights.
pub fn solve_mdkp_linear(instance: &Instance) -> Result<ExactSolution> {
    solve_mdkp(instance, &weights(instance), DEFAULT_CELL_LIMIT)
}

/// General (integer) multidimensional knapsack with per-copy `rewards`.
///
/// Each resource is first divided by the gcd of its demands, which leaves the
/// feasible set unchanged. If the reduced capacity lattice has more than
/// `cell_limit` cells, the session lattice `Π (N_p + 1)` is enumerated instead
/// when that is within the limit; otherwise the call fails.
pub fn solve_mdkp(instance: &Instance, rewards: &[f64], cell_limit: u128) -> Result<ExactSolution> {
    let p_count = instance.num_sps();
    if rewards.len() != p_count {
        return Err(Error::Length {
            got: rewards.len(),
            expected: p_count,
        });
    }
    let d = instance.dims();
    let divisors: Vec<u64> = (0..d)
        .map(|r| {
            instance
                .sps()
                .iter()
                .fold(0, |g, sp| gcd(g, sp.demand[r]))
        })
        .collect();
    let caps: Vec<usize> = instance
        .capacities()
        .iter()
        .zip(&divisors)
        .map(|(&k, &g)| (k / g) as usize)
        .collect();
    let demands: Vec<Vec<usize>> = instance
        .sps()
        .iter()
        .map(|sp| sp.demand.iter().zip(&divisors).map(|(&z, &g)| (z / g) as usize).collect())
        .collect();

    let cells: u128 = caps.iter().map(|&k| k as u128 + 1).product();
    if cells > cell_limit {
        let lattice: u128 = full_pool_sessions_all(instance)
            .iter()
            .map(|&n| n as u128 + 1)
            .product();
        if lattice <= cell_limit {
            return Ok(enumerate_linear(instance, rewards));
        }
        return Err(Error::CapacityExceeded {
            cells,
            limit: cell_limit,
        });
    }
    let cells = cells as usize;

    // Row-major strides, last resource fastest.
    let mut strides = vec![1usize; d];
    for r in (0..d.saturating_sub(1)).rev() {
        strides[r] = strides[r + 1] * (caps[r + 1] + 1);
    }
    let offsets: Vec<usize> = demands
        .iter()
        .map(|z| z.iter().zip(&strides).map(|(&zr, &s)| zr * s).sum())
        .collect();

    let mut value = vec![0.0f64; cells];
    let mut choice = vec![0u32; cells];
    let mut coord = vec![0usize; d];
    for idx in 0..cells {
        let mut best = 0.0;
        let mut pick = 0u32;
        for (p, z) in demands.iter().enumerate() {
            if z.iter().zip(&coord).all(|(&zr, &c)| zr <= c) {
                let cand = value[idx - offsets[p]] + rewards[p];
                if cand > best {
                    best = cand;
                    pick = p as u32 + 1;
                }
            }
        }
        value[idx] = best;
        choice[idx] = pick;
        // Advance the mixed-radix coordinate.
        for r in (0..d).rev() {
            coord[r] += 1;
            if coord[r] <= caps[r] {
                break;
            }
            coord[r] = 0;
        }
    }

    let mut n = vec![0u64; p_count];
    let mut idx = cells - 1;
    while choice[idx] != 0 {
        let p = choice[idx] as usize - 1;
        n[p] += 1;
        idx -= offsets[p];
    }
    let objective = n.iter().zip(rewards).map(|(&np, &w)| np as f64 * w).sum();
    Ok(ExactSolution {
        n: SessionVector(n),
        objective,
        nodes_explored: cells as u64,
        proven_optimal: true,
    })
}

fn enumerate_linear(instance: &Instance, rewards: &[f64]) -> ExactSolution {
    fn walk(
        instance: &Instance,
        rewards: &[f64],
        depth: usize,
        residual: &mut [u64],
        current: &mut Vec<u64>,
        best: &mut (f64, Vec<u64>),
        nodes: &mut u64,
    ) {
        *nodes += 1;
        if depth == current.len() {
            let v: f64 = current.iter().zip(rewards).map(|(&n, &w)| n as f64 * w).sum();
            if v > best.0 {
                *best = (v, current.clone());
            }
            return;
        }
        let demand = &instance.sps()[depth].demand;
        let fit = residual
            .iter()
            .zip(demand)
            .map(|(&k, &z)| k / z)
            .min()
            .unwrap_or(0);
        for k in 0..=fit {
            for (r, &z) in residual.iter_mut().zip(demand) {
                *r -= k * z;
            }
            current[depth] = k;
            walk(instance, rewards, depth + 1, residual, current, best, nodes);
            for (r, &z) in residual.iter_mut().zip(demand) {
                *r += k * z;
            }
        }
        current[depth] = 0;
    }
    let mut residual = instance.capacities().to_vec();
    let mut current = vec![0; instance.num_sps()];
    let mut best = (-1.0, current.clone());
    let mut nodes = 0;
    walk(instance, rewards, 0, &mut residual, &mut current, &mut best, &mut nodes);
    ExactSolution {
        n: SessionVector(best.1),
        objective: best.0,
        nodes_explored: nodes,
        proven_optimal: true,
    }
}
