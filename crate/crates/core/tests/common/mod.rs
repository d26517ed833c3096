//! Independent oracles and instance generators shared by integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use edge_slicer::config::try_simple_instance;
use edge_slicer::erlang::{erlang_b_direct, OfferedLoad};
use edge_slicer::Instance;

/// Caps on random instance shapes.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_sps: usize,
    pub max_dims: usize,
    pub max_capacity: u64,
    pub max_demand: u64,
    pub load: (f64, f64),
}

pub fn random_instance(rng: &mut ChaCha8Rng, shape: Shape) -> Instance {
    let p = rng.random_range(1..=shape.max_sps);
    let d = rng.random_range(1..=shape.max_dims);
    let caps: Vec<u64> = (0..d).map(|_| rng.random_range(1..=shape.max_capacity)).collect();
    let sps: Vec<(f64, f64, Vec<u64>)> = (0..p)
        .map(|_| {
            let a = rng.random_range(shape.load.0..=shape.load.1);
            let mu = rng.random_range(0.5..=2.0);
            let demand = caps
                .iter()
                .map(|&k| rng.random_range(1..=shape.max_demand.min(k)))
                .collect();
            (a * mu, mu, demand)
        })
        .collect();
    try_simple_instance(&caps, &sps).expect("generated instance is valid")
}

/// `N_p` recomputed from scratch.
pub fn saturation(inst: &Instance) -> Vec<u64> {
    inst.sps()
        .iter()
        .map(|sp| {
            inst.capacities()
                .iter()
                .zip(&sp.demand)
                .map(|(k, z)| k / z)
                .min()
                .unwrap()
        })
        .collect()
}

pub fn lattice_size(inst: &Instance) -> u128 {
    saturation(inst).iter().map(|&n| n as u128 + 1).product()
}

pub fn feasible(inst: &Instance, n: &[u64]) -> bool {
    (0..inst.dims()).all(|r| {
        let used: u64 = inst.sps().iter().zip(n).map(|(sp, &np)| sp.demand[r] * np).sum();
        used <= inst.capacities()[r]
    })
}

/// Every point of `Π [0, N_p]` in lexicographic order.
pub fn lattice(inst: &Instance) -> Vec<Vec<u64>> {
    let max = saturation(inst);
    let mut out = Vec::new();
    let mut cur = vec![0u64; max.len()];
    loop {
        out.push(cur.clone());
        let mut i = max.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < max[i] {
                cur[i] += 1;
                for c in &mut cur[i + 1..] {
                    *c = 0;
                }
                break;
            }
        }
    }
}

/// `f` via the log-space Erlang-B and arrival-rate weights.
pub fn naive_f(inst: &Instance, n: &[u64]) -> f64 {
    let total: f64 = inst.sps().iter().map(|sp| sp.lambda).sum();
    inst.sps()
        .iter()
        .zip(n)
        .map(|(sp, &np)| {
            let a = OfferedLoad::new(sp.lambda / sp.mu).unwrap();
            sp.lambda / total * (1.0 - erlang_b_direct(a, np))
        })
        .sum()
}

/// Brute-force optimum of `f`: lexicographically smallest among the vectors
/// within `tie` of the maximum.
pub fn naive_optimum(inst: &Instance, tie: f64) -> (Vec<u64>, f64) {
    let points: Vec<(Vec<u64>, f64)> = lattice(inst)
        .into_iter()
        .filter(|n| feasible(inst, n))
        .map(|n| {
            let f = naive_f(inst, &n);
            (n, f)
        })
        .collect();
    let best = points.iter().map(|(_, f)| *f).fold(f64::NEG_INFINITY, f64::max);
    points
        .into_iter()
        .find(|(_, f)| *f >= best - tie)
        .expect("zero vector is feasible")
}

/// Brute-force optimum of `Σ rewards_p·n_p`.
pub fn brute_force_linear(inst: &Instance, rewards: &[f64]) -> f64 {
    lattice(inst)
        .into_iter()
        .filter(|n| feasible(inst, n))
        .map(|n| n.iter().zip(rewards).map(|(&k, &w)| k as f64 * w).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn weights(inst: &Instance) -> Vec<f64> {
    let total: f64 = inst.sps().iter().map(|sp| sp.lambda).sum();
    inst.sps().iter().map(|sp| sp.lambda / total).collect()
}
