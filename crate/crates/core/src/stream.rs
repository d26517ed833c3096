//! Single-pass threshold streaming for monotone submodular maximization under
//! `d` knapsack constraints.
//!
//! Every candidate session `(sp, item)` is streamed once. A geometric grid of
//! guesses `v = base^l`, `base = 1 + (1+2d)·ε`, is kept alive between
//! `m/base` and `2·K_max·m`, where `m` is the largest singleton density seen
//! so far in base units. Each guess owns a partial solution and admits an
//! item when its marginal density clears `2v/(1+2d)` on every resource (with
//! consumption measured as a fraction of that resource's capacity) and the
//! item still fits. An item consuming at least half of some resource, whose
//! singleton density clears the same bar, replaces the partial solution and
//! closes that guess. The best partial solution over the grid is returned;
//! it achieves at least `(1/(1+2d) - ε)` of the optimum.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{full_pool_sessions_all, Instance};
use crate::objective::{ErlangObjective, GainTracker, ObjectiveValue, SessionVector};

/// Order in which candidate sessions are presented to the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemOrder {
    /// One item of each SP per cycle, SPs in ascending index.
    RoundRobin,
    /// All items of SP 0, then all of SP 1, ...
    Sequential,
    /// A fixed pseudo-random permutation of all items.
    Seeded(u64),
}

impl fmt::Display for ItemOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ItemOrder::RoundRobin => write!(f, "round-robin"),
            ItemOrder::Sequential => write!(f, "sequential"),
            ItemOrder::Seeded(s) => write!(f, "seeded:{s}"),
        }
    }
}

impl FromStr for ItemOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "round-robin" | "roundrobin" => Ok(ItemOrder::RoundRobin),
            "sequential" => Ok(ItemOrder::Sequential),
            _ => s
                .strip_prefix("seeded:")
                .and_then(|seed| seed.parse().ok())
                .map(ItemOrder::Seeded)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "unknown order `{s}` (expected round-robin, sequential or seeded:<u64>)"
                    ))
                }),
        }
    }
}

/// Every candidate session `(sp, item)` exactly once, in the requested order.
pub fn item_stream(instance: &Instance, order: ItemOrder) -> Vec<(usize, u64)> {
    let saturation = full_pool_sessions_all(instance);
    let total: u64 = saturation.iter().sum();
    let mut items = Vec::with_capacity(total as usize);
    match order {
        ItemOrder::RoundRobin => {
            let rounds = saturation.iter().copied().max().unwrap_or(0);
            for j in 0..rounds {
                for (p, &np) in saturation.iter().enumerate() {
                    if j < np {
                        items.push((p, j));
                    }
                }
            }
        }
        ItemOrder::Sequential | ItemOrder::Seeded(_) => {
            for (p, &np) in saturation.iter().enumerate() {
                items.extend((0..np).map(|j| (p, j)));
            }
            if let ItemOrder::Seeded(seed) = order {
                items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            }
        }
    }
    items
}

/// Geometric grid of optimum guesses `base^l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdGrid {
    base: f64,
    ln_base: f64,
    k_max: f64,
}

// Widens the admitted exponent range slightly so rounding in `ln` never drops
// a boundary level.
const GRID_SLACK: f64 = 1e-9;

impl ThresholdGrid {
    pub fn new(instance: &Instance) -> Self {
        let d = instance.dims() as f64;
        let base = 1.0 + (1.0 + 2.0 * d) * instance.epsilon();
        let k_max = instance.capacities().iter().copied().max().unwrap_or(1) as f64;
        Self {
            base,
            ln_base: base.ln(),
            k_max,
        }
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Inclusive exponent range `[lo, hi]` with `m/base ≤ base^l ≤ 2·K_max·m`.
    pub fn exponent_range(&self, m: f64) -> Option<(i64, i64)> {
        if !(m > 0.0 && m.is_finite()) {
            return None;
        }
        let lo = (m.ln() / self.ln_base - 1.0 - GRID_SLACK).ceil() as i64;
        let hi = ((2.0 * self.k_max * m).ln() / self.ln_base + GRID_SLACK).floor() as i64;
        (lo <= hi).then_some((lo, hi))
    }

    pub fn level(&self, exponent: i64) -> f64 {
        self.base.powi(exponent as i32)
    }

    pub fn levels(&self, m: f64) -> Vec<f64> {
        match self.exponent_range(m) {
            Some((lo, hi)) => (lo..=hi).map(|l| self.level(l)).collect(),
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSolution {
    pub n: SessionVector,
    pub f: ObjectiveValue,
    pub threshold_used: f64,
    pub items_scanned: u64,
}

/// Final state of one grid level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutcome {
    pub exponent: i64,
    pub threshold: f64,
    pub n: Vec<u64>,
    pub f: f64,
    /// Closed by a large singleton.
    pub closed: bool,
}

struct Level {
    threshold: f64,
    tracker: GainTracker,
    used: Vec<u64>,
    closed: bool,
}

pub fn solve_stream(instance: &Instance, order: ItemOrder) -> StreamSolution {
    solve_stream_detailed(instance, order).0
}

/// Runs the solver and also returns the outcome of every level alive at the
/// end of the stream.
pub fn solve_stream_detailed(
    instance: &Instance,
    order: ItemOrder,
) -> (StreamSolution, Vec<LevelOutcome>) {
    let obj = ErlangObjective::new(instance);
    let grid = ThresholdGrid::new(instance);
    let caps = instance.capacities();
    let d = instance.dims();
    let density_factor = 2.0 / (1.0 + 2.0 * d as f64);

    // Per SP: singleton value, densest raw weight, largest capacity fraction.
    let singles: Vec<f64> = (0..obj.num_sps()).map(|p| obj.singleton_value(p)).collect();
    let min_demand: Vec<u64> = instance
        .sps()
        .iter()
        .map(|sp| *sp.demand.iter().min().expect("d >= 1"))
        .collect();
    let max_fraction: Vec<f64> = instance
        .sps()
        .iter()
        .map(|sp| {
            sp.demand
                .iter()
                .zip(caps)
                .map(|(&z, &k)| z as f64 / k as f64)
                .fold(0.0, f64::max)
        })
        .collect();

    let mut m = 0.0f64;
    let mut levels: BTreeMap<i64, Level> = BTreeMap::new();
    let mut scanned = 0u64;

    for (p, _item) in item_stream(instance, order) {
        scanned += 1;
        let density = singles[p] / min_demand[p] as f64;
        if density > m {
            m = density;
            if let Some((lo, hi)) = grid.exponent_range(m) {
                levels = levels.split_off(&lo);
                for l in lo..=hi {
                    levels.entry(l).or_insert_with(|| Level {
                        threshold: grid.level(l),
                        tracker: obj.tracker(),
                        used: vec![0; d],
                        closed: false,
                    });
                }
            }
        }

        let demand = &instance.sps()[p].demand;
        let frac = max_fraction[p];
        for level in levels.values_mut().filter(|lv| !lv.closed) {
            let bar = density_factor * level.threshold;
            if frac >= 0.5 && singles[p] >= bar * frac {
                level.tracker.reset(&obj);
                level.tracker.add(&obj, p);
                level.used.clone_from(demand);
                level.closed = true;
                continue;
            }
            let fits = level
                .used
                .iter()
                .zip(demand)
                .zip(caps)
                .all(|((&u, &z), &k)| u + z <= k);
            if fits && level.tracker.gain(&obj, p) >= bar * frac {
                level.tracker.add(&obj, p);
                for (u, &z) in level.used.iter_mut().zip(demand) {
                    *u += z;
                }
            }
        }
    }

    let outcomes: Vec<LevelOutcome> = levels
        .iter()
        .map(|(&exponent, lv)| {
            let n = lv.tracker.counts();
            let f = obj.eval(&n).expect("level stays within capacity").f;
            LevelOutcome {
                exponent,
                threshold: lv.threshold,
                n,
                f,
                closed: lv.closed,
            }
        })
        .collect();

    // Largest f wins; ties go to the smaller threshold (earlier in the map).
    let best = outcomes
        .iter()
        .fold(None::<&LevelOutcome>, |best, o| match best {
            Some(b) if o.f <= b.f => Some(b),
            _ => Some(o),
        });
    let solution = match best {
        Some(o) => StreamSolution {
            n: SessionVector(o.n.clone()),
            f: obj.eval(&o.n).expect("feasible"),
            threshold_used: o.threshold,
            items_scanned: scanned,
        },
        None => {
            let n = vec![0; obj.num_sps()];
            StreamSolution {
                f: obj.eval(&n).expect("zero vector"),
                n: SessionVector(n),
                threshold_used: 0.0,
                items_scanned: scanned,
            }
        }
    };
    (solution, outcomes)
}
