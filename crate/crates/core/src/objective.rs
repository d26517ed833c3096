//! Probability that a generic arriving user is served at the edge,
//! `f(n) = Σ_p w_p·(1 - B(n_p, A_p))`, and its marginal gains.
//!
//! Every candidate session of one SP is interchangeable, so the set function
//! over candidate sessions only depends on how many sessions each SP holds.
//! Count vectors are therefore the canonical representation; [`eval_item_set`]
//! adapts an explicit set of `(sp, item)` pairs onto it.

use std::collections::BTreeSet;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::erlang::{erlang_b, ErlangState, OfferedLoad};
use crate::error::{Error, Result};
use crate::model::{full_pool_sessions_all, weights, Instance};

/// Sessions held by each SP.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionVector(pub Vec<u64>);

impl Deref for SessionVector {
    type Target = [u64];

    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for SessionVector {
    fn from(v: Vec<u64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub f: f64,
    /// `f_p = w_p·(1 - B_p)`.
    pub per_sp: Vec<f64>,
}

/// Precomputed weights, loads and saturation points for one instance.
#[derive(Debug, Clone)]
pub struct ErlangObjective {
    weights: Vec<f64>,
    loads: Vec<OfferedLoad>,
    saturation: Vec<u64>,
}

impl ErlangObjective {
    pub fn new(instance: &Instance) -> Self {
        let loads = instance
            .sps()
            .iter()
            .map(|sp| OfferedLoad::new(sp.offered_load()).expect("validated instance"))
            .collect();
        Self {
            weights: weights(instance),
            loads,
            saturation: full_pool_sessions_all(instance),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn loads(&self) -> &[OfferedLoad] {
        &self.loads
    }

    /// `N_p` for every SP.
    pub fn saturation(&self) -> &[u64] {
        &self.saturation
    }

    pub fn num_sps(&self) -> usize {
        self.weights.len()
    }

    fn check(&self, n: &[u64]) -> Result<()> {
        if n.len() != self.num_sps() {
            return Err(Error::Length {
                got: n.len(),
                expected: self.num_sps(),
            });
        }
        for (p, (&np, &max)) in n.iter().zip(&self.saturation).enumerate() {
            if np > max {
                return Err(Error::OutOfBounds { sp: p, n: np, max });
            }
        }
        Ok(())
    }

    pub fn eval(&self, n: &[u64]) -> Result<ObjectiveValue> {
        self.check(n)?;
        let per_sp: Vec<f64> = n
            .iter()
            .enumerate()
            .map(|(p, &np)| self.weights[p] * (1.0 - erlang_b(self.loads[p], np)))
            .collect();
        Ok(ObjectiveValue {
            f: per_sp.iter().sum(),
            per_sp,
        })
    }

    /// Blocking probability of every SP under `n`.
    pub fn blocking(&self, n: &[u64]) -> Result<Vec<f64>> {
        self.check(n)?;
        Ok(n.iter()
            .zip(&self.loads)
            .map(|(&np, &a)| erlang_b(a, np))
            .collect())
    }

    /// `f(n + e_p) - f(n)`.
    pub fn marginal_gain(&self, n: &[u64], p: usize) -> Result<f64> {
        self.check(n)?;
        if p >= self.num_sps() {
            return Err(Error::SpIndex {
                index: p,
                count: self.num_sps(),
            });
        }
        if n[p] >= self.saturation[p] {
            return Err(Error::Saturated {
                sp: p,
                max: self.saturation[p],
            });
        }
        Ok(self.weights[p] * ErlangState::at(self.loads[p], n[p]).served_gain())
    }

    /// Value of a single session of SP `p` on its own.
    pub fn singleton_value(&self, p: usize) -> f64 {
        self.weights[p] * ErlangState::new(self.loads[p]).served_gain()
    }

    pub fn tracker(&self) -> GainTracker {
        GainTracker {
            states: self.loads.iter().map(|&a| ErlangState::new(a)).collect(),
            value: 0.0,
        }
    }
}

/// Incremental evaluator for a growing session vector.
///
/// Keeps one [`ErlangState`] per SP so each marginal gain costs O(1). One
/// tracker belongs to one solution under construction.
#[derive(Debug, Clone)]
pub struct GainTracker {
    states: Vec<ErlangState>,
    value: f64,
}

impl GainTracker {
    pub fn gain(&self, obj: &ErlangObjective, p: usize) -> f64 {
        obj.weights[p] * self.states[p].served_gain()
    }

    pub fn add(&mut self, obj: &ErlangObjective, p: usize) {
        self.value += self.gain(obj, p);
        self.states[p].advance();
    }

    pub fn count(&self, p: usize) -> u64 {
        self.states[p].servers()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.states.iter().map(ErlangState::servers).collect()
    }

    /// Running sum of accepted gains (equals `f` up to rounding).
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn reset(&mut self, obj: &ErlangObjective) {
        *self = obj.tracker();
    }
}

pub fn eval_f(instance: &Instance, n: &[u64]) -> Result<ObjectiveValue> {
    ErlangObjective::new(instance).eval(n)
}

pub fn marginal_gain(instance: &Instance, n: &[u64], p: usize) -> Result<f64> {
    ErlangObjective::new(instance).marginal_gain(n, p)
}

/// Expected utility of a generic user, `(U_E - U_C)·f(n) + U_C`.
pub fn expected_utility(instance: &Instance, n: &[u64]) -> Result<f64> {
    let f = eval_f(instance, n)?.f;
    Ok(utility_from_f(instance, f))
}

pub fn utility_from_f(instance: &Instance, f: f64) -> f64 {
    (instance.u_edge() - instance.u_cloud()) * f + instance.u_cloud()
}

/// Evaluates `f` on an explicit set of candidate sessions `(sp, item)`, with
/// `item < N_sp`. Duplicates count once.
pub fn eval_item_set(instance: &Instance, items: &[(usize, u64)]) -> Result<ObjectiveValue> {
    let obj = ErlangObjective::new(instance);
    let set: BTreeSet<(usize, u64)> = items.iter().copied().collect();
    let mut n = vec![0u64; obj.num_sps()];
    for &(p, j) in &set {
        if p >= n.len() {
            return Err(Error::SpIndex {
                index: p,
                count: n.len(),
            });
        }
        if j >= obj.saturation[p] {
            return Err(Error::OutOfBounds {
                sp: p,
                n: j + 1,
                max: obj.saturation[p],
            });
        }
        n[p] += 1;
    }
    obj.eval(&n)
}
