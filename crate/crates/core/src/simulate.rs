//! Discrete-event Monte Carlo of each SP's loss system.
//!
//! Every SP is an independent `n_p`-server system without a waiting room:
//! Poisson arrivals, holding times with mean `1/μ_p`, and arrivals that find
//! all servers busy are blocked. Each (replication, SP) pair draws from its
//! own xoshiro256++ stream, obtained by successive jumps from the master
//! seed, so results do not depend on the thread count.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{weights, Instance};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959963984540054;
/// Batches per replication for the batch-means confidence interval.
const BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoldingTime {
    #[default]
    Exponential,
    Deterministic,
}

impl std::str::FromStr for HoldingTime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" | "exponential" => Ok(Self::Exponential),
            "det" | "deterministic" => Ok(Self::Deterministic),
            other => Err(Error::InvalidArgument(format!("unknown holding time `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Simulated seconds per replication.
    pub horizon: f64,
    /// Initial seconds excluded from the statistics.
    pub warmup: f64,
    pub seed: u64,
    pub replications: usize,
    pub holding: HoldingTime,
}

impl SimConfig {
    pub fn new(horizon: f64, seed: u64) -> Self {
        Self {
            horizon,
            warmup: 0.0,
            seed,
            replications: 1,
            holding: HoldingTime::Exponential,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.warmup.is_finite() && self.warmup >= 0.0) {
            return Err(Error::InvalidArgument("warmup must be finite and >= 0".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > self.warmup) {
            return Err(Error::InvalidArgument("horizon must be finite and exceed warmup".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("at least one replication is required".into()));
        }
        Ok(())
    }
}

/// Outcome of one replication for one SP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationStats {
    pub arrivals: u64,
    pub blocked: u64,
    pub blocking: f64,
    /// 95% batch-means half-width of `blocking`.
    pub halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpSimStats {
    pub name: String,
    pub servers: u64,
    /// Totals over all replications.
    pub arrivals: u64,
    pub blocked: u64,
    /// Mean of the per-replication estimates.
    pub empirical_blocking: f64,
    /// 95% half-width across replications, or the single replication's own.
    pub halfwidth: f64,
    pub replications: Vec<ReplicationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub per_sp: Vec<SpSimStats>,
    /// `Σ w_p·(1 - B̂_p)` with the configured weights.
    pub empirical_f: f64,
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn mean_and_halfwidth(samples: &[f64]) -> (f64, f64) {
    let k = samples.len() as f64;
    let mean = compensated_sum(samples.iter().copied()) / k;
    if samples.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean))) / (k - 1.0);
    (mean, Z_95 * (var / k).sqrt())
}

fn run_one(
    lambda: f64,
    mu: f64,
    servers: u64,
    cfg: &SimConfig,
    rng: &mut Xoshiro256PlusPlus,
) -> ReplicationStats {
    let interarrival = Exp::new(lambda).expect("positive rate");
    let service = Exp::new(mu).expect("positive rate");
    let window = cfg.horizon - cfg.warmup;
    let mut batch_arrivals = [0u64; BATCHES];
    let mut batch_blocked = [0u64; BATCHES];
    let mut busy: BinaryHeap<Reverse<OrderedFloat<f64>>> = BinaryHeap::with_capacity(servers as usize);
    let mut t = 0.0f64;
    loop {
        t += interarrival.sample(rng);
        if t >= cfg.horizon {
            break;
        }
        while busy.peek().is_some_and(|Reverse(d)| d.0 <= t) {
            busy.pop();
        }
        let blocked = busy.len() as u64 >= servers;
        if !blocked {
            let hold = match cfg.holding {
                HoldingTime::Exponential => service.sample(rng),
                HoldingTime::Deterministic => 1.0 / mu,
            };
            busy.push(Reverse(OrderedFloat(t + hold)));
        }
        if t >= cfg.warmup {
            let b = (((t - cfg.warmup) / window) * BATCHES as f64) as usize;
            let b = b.min(BATCHES - 1);
            batch_arrivals[b] += 1;
            batch_blocked[b] += blocked as u64;
        }
    }
    let arrivals: u64 = batch_arrivals.iter().sum();
    let blocked: u64 = batch_blocked.iter().sum();
    let blocking = if arrivals == 0 {
        // No observation; report the only value consistent with the server count.
        if servers == 0 { 1.0 } else { 0.0 }
    } else {
        blocked as f64 / arrivals as f64
    };
    let batch_b: Vec<f64> = batch_arrivals
        .iter()
        .zip(&batch_blocked)
        .filter(|(&a, _)| a > 0)
        .map(|(&a, &b)| b as f64 / a as f64)
        .collect();
    let halfwidth = if batch_b.len() == BATCHES {
        mean_and_halfwidth(&batch_b).1
    } else if arrivals > 0 {
        Z_95 * (blocking * (1.0 - blocking) / arrivals as f64).sqrt()
    } else {
        f64::INFINITY
    };
    ReplicationStats {
        arrivals,
        blocked,
        blocking,
        halfwidth,
    }
}

/// Simulates the loss systems implied by `n` on `instance`.
pub fn simulate(instance: &Instance, n: &[u64], cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    instance.check_feasible(n)?;
    let p_count = instance.num_sps();
    let mut master = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    let mut streams = Vec::with_capacity(cfg.replications * p_count);
    for _ in 0..cfg.replications * p_count {
        streams.push(master.clone());
        master.jump();
    }
    let runs: Vec<ReplicationStats> = streams
        .into_par_iter()
        .enumerate()
        .map(|(i, mut rng)| {
            let sp = &instance.sps()[i % p_count];
            run_one(sp.lambda, sp.mu, n[i % p_count], cfg, &mut rng)
        })
        .collect();

    let w = weights(instance);
    let per_sp: Vec<SpSimStats> = (0..p_count)
        .map(|p| {
            let reps: Vec<ReplicationStats> =
                runs.iter().skip(p).step_by(p_count).cloned().collect();
            let estimates: Vec<f64> = reps.iter().map(|r| r.blocking).collect();
            let (mean, spread) = mean_and_halfwidth(&estimates);
            SpSimStats {
                name: instance.sps()[p].name.clone(),
                servers: n[p],
                arrivals: reps.iter().map(|r| r.arrivals).sum(),
                blocked: reps.iter().map(|r| r.blocked).sum(),
                empirical_blocking: mean,
                halfwidth: if reps.len() >= 2 { spread } else { reps[0].halfwidth },
                replications: reps,
            }
        })
        .collect();
    let empirical_f = compensated_sum(
        per_sp
            .iter()
            .zip(&w)
            .map(|(s, &wp)| wp * (1.0 - s.empirical_blocking)),
    );
    Ok(SimReport {
        config: cfg.clone(),
        per_sp,
        empirical_f,
    })
}
