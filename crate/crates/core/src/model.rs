//! Domain types for a multi-tenant edge node: resource dimensions, the pool
//! of capacities, service-provider (SP) traffic profiles, and allocations.
//!
//! All resource quantities are integers in *base units* (millicores, MB, ...).
//! A [`ResourceKind`] carries the number of base units per display unit, so a
//! config may say `0.5` GB of RAM while the model works with `512` MB.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceKind {
    pub id: usize,
    pub label: String,
    /// Base units per display unit.
    pub unit_scale: u64,
}

/// Capacity of the edge node per resource dimension, in base units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourcePool {
    capacities: Vec<u64>,
}

impl ResourcePool {
    pub fn new(capacities: Vec<u64>) -> Result<Self> {
        if capacities.is_empty() {
            return Err(Error::config("capacities", "at least one resource is required"));
        }
        if let Some(r) = capacities.iter().position(|&c| c == 0) {
            return Err(Error::config(
                format!("capacities[{r}]"),
                "capacity must be at least one base unit",
            ));
        }
        Ok(Self { capacities })
    }

    pub fn capacities(&self) -> &[u64] {
        &self.capacities
    }

    pub fn dims(&self) -> usize {
        self.capacities.len()
    }
}

/// Traffic profile of one service provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpProfile {
    pub name: String,
    /// Arrival rate, users per second.
    pub lambda: f64,
    /// Service rate, users per second (inverse mean holding time).
    pub mu: f64,
    /// Per-session requirement, base units per resource.
    pub demand: Vec<u64>,
}

impl SpProfile {
    /// Offered load in erlangs.
    pub fn offered_load(&self) -> f64 {
        self.lambda / self.mu
    }
}

/// A complete, validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    kinds: Vec<ResourceKind>,
    pool: ResourcePool,
    sps: Vec<SpProfile>,
    epsilon: f64,
    u_edge: f64,
    u_cloud: f64,
}

impl Instance {
    pub fn new(
        kinds: Vec<ResourceKind>,
        pool: ResourcePool,
        sps: Vec<SpProfile>,
        epsilon: f64,
        u_edge: f64,
        u_cloud: f64,
    ) -> Result<Self> {
        let d = pool.dims();
        if kinds.len() != d {
            return Err(Error::config(
                "resources",
                format!("{} resource kinds for {} capacities", kinds.len(), d),
            ));
        }
        for (i, k) in kinds.iter().enumerate() {
            if k.id != i {
                return Err(Error::config(
                    format!("resources[{i}].id"),
                    format!("expected id {i}, found {}", k.id),
                ));
            }
            if k.unit_scale == 0 {
                return Err(Error::config(format!("resources[{i}].unit_scale"), "must be >= 1"));
            }
        }
        if sps.is_empty() {
            return Err(Error::config("sps", "at least one service provider is required"));
        }
        for (p, sp) in sps.iter().enumerate() {
            if !(sp.lambda.is_finite() && sp.lambda > 0.0) {
                return Err(Error::config(format!("sps[{p}].lambda"), "must be finite and > 0"));
            }
            if !(sp.mu.is_finite() && sp.mu > 0.0) {
                return Err(Error::config(format!("sps[{p}].mu"), "must be finite and > 0"));
            }
            if !sp.offered_load().is_finite() {
                return Err(Error::config(format!("sps[{p}]"), "offered load is not finite"));
            }
            if sp.demand.len() != d {
                return Err(Error::config(
                    format!("sps[{p}].demand"),
                    format!("expected {d} components, found {}", sp.demand.len()),
                ));
            }
            for (r, (&z, &k)) in sp.demand.iter().zip(pool.capacities()).enumerate() {
                if z == 0 {
                    return Err(Error::config(
                        format!("sps[{p}].demand[{r}]"),
                        "demand must be at least one base unit",
                    ));
                }
                if z > k {
                    return Err(Error::config(
                        format!("sps[{p}].demand[{r}]"),
                        format!("demand {z} exceeds capacity {k}"),
                    ));
                }
            }
        }
        if !(u_cloud.is_finite() && u_cloud > 0.0 && u_edge.is_finite() && u_edge > u_cloud) {
            return Err(Error::config("u_edge", "utilities must satisfy u_edge > u_cloud > 0"));
        }
        let eps_max = 1.0 / (1.0 + 2.0 * d as f64);
        if !(epsilon > 0.0 && epsilon < eps_max) {
            return Err(Error::config(
                "epsilon",
                format!("must lie in (0, {eps_max:.6}) for {d} resources, got {epsilon}"),
            ));
        }
        Ok(Self {
            kinds,
            pool,
            sps,
            epsilon,
            u_edge,
            u_cloud,
        })
    }

    pub fn kinds(&self) -> &[ResourceKind] {
        &self.kinds
    }

    pub fn pool(&self) -> &ResourcePool {
        &self.pool
    }

    pub fn capacities(&self) -> &[u64] {
        self.pool.capacities()
    }

    pub fn sps(&self) -> &[SpProfile] {
        &self.sps
    }

    pub fn sp(&self, p: usize) -> Result<&SpProfile> {
        self.sps.get(p).ok_or(Error::SpIndex {
            index: p,
            count: self.sps.len(),
        })
    }

    /// Number of service providers.
    pub fn num_sps(&self) -> usize {
        self.sps.len()
    }

    /// Number of resource dimensions.
    pub fn dims(&self) -> usize {
        self.pool.dims()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn u_edge(&self) -> f64 {
        self.u_edge
    }

    pub fn u_cloud(&self) -> f64 {
        self.u_cloud
    }

    pub fn offered_loads(&self) -> Vec<f64> {
        self.sps.iter().map(SpProfile::offered_load).collect()
    }

    /// Same instance with a different error parameter.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(
            self.kinds.clone(),
            self.pool.clone(),
            self.sps.clone(),
            epsilon,
            self.u_edge,
            self.u_cloud,
        )
    }

    /// Same instance with every capacity replaced (used for scaled replicas).
    pub fn with_capacities(&self, capacities: Vec<u64>) -> Result<Self> {
        Self::new(
            self.kinds.clone(),
            ResourcePool::new(capacities)?,
            self.sps.clone(),
            self.epsilon,
            self.u_edge,
            self.u_cloud,
        )
    }

    /// Checks `Σ_p n_p·z_p^r ≤ K^r` for every resource.
    pub fn check_feasible(&self, n: &[u64]) -> Result<()> {
        self.check_len(n)?;
        for (r, &cap) in self.capacities().iter().enumerate() {
            let needed: u128 = self
                .sps
                .iter()
                .zip(n)
                .map(|(sp, &np)| np as u128 * sp.demand[r] as u128)
                .sum();
            if needed > cap as u128 {
                return Err(Error::Infeasible {
                    resource: r,
                    needed,
                    capacity: cap,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_len(&self, n: &[u64]) -> Result<()> {
        if n.len() != self.sps.len() {
            return Err(Error::Length {
                got: n.len(),
                expected: self.sps.len(),
            });
        }
        Ok(())
    }

    /// Base units of each resource consumed by the sessions `n`.
    pub fn usage(&self, n: &[u64]) -> Vec<u64> {
        (0..self.dims())
            .map(|r| self.sps.iter().zip(n).map(|(sp, &np)| np * sp.demand[r]).sum())
            .collect()
    }

    /// Fraction of each resource consumed by the sessions `n`.
    pub fn utilization(&self, n: &[u64]) -> Vec<f64> {
        self.usage(n)
            .iter()
            .zip(self.capacities())
            .map(|(&u, &k)| u as f64 / k as f64)
            .collect()
    }
}

/// Session counts per SP together with the resource shares that host them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub n: Vec<u64>,
    /// `theta[p][r]`, base units of resource `r` given to SP `p`.
    pub theta: Vec<Vec<u64>>,
}

impl Allocation {
    /// Capacity left unassigned per resource.
    pub fn slack(&self, instance: &Instance) -> Vec<u64> {
        instance
            .capacities()
            .iter()
            .enumerate()
            .map(|(r, &k)| k - self.theta.iter().map(|row| row[r]).sum::<u64>())
            .collect()
    }
}

/// Largest number of sessions a share `theta` can host: `⌊min_r θ^r / z^r⌋`.
pub fn max_sessions(theta: &[u64], demand: &[u64]) -> Result<u64> {
    if theta.len() != demand.len() {
        return Err(Error::Length {
            got: theta.len(),
            expected: demand.len(),
        });
    }
    if let Some(r) = demand.iter().position(|&z| z == 0) {
        return Err(Error::ZeroDemand {
            sp: String::from("<anonymous>"),
            resource: r,
        });
    }
    Ok(theta
        .iter()
        .zip(demand)
        .map(|(&t, &z)| t / z)
        .min()
        .unwrap_or(0))
}

/// Sessions of SP `p` the whole pool could host (`N_p`).
pub fn full_pool_sessions(instance: &Instance, p: usize) -> Result<u64> {
    let sp = instance.sp(p)?;
    max_sessions(instance.capacities(), &sp.demand)
}

/// `N_p` for every SP.
pub fn full_pool_sessions_all(instance: &Instance) -> Vec<u64> {
    instance
        .sps()
        .iter()
        .map(|sp| {
            instance
                .capacities()
                .iter()
                .zip(&sp.demand)
                .map(|(&k, &z)| k / z)
                .min()
                .unwrap_or(0)
        })
        .collect()
}

/// Tight allocation `θ_p^r = n_p·z_p^r`.
pub fn theta_from_n(instance: &Instance, n: &[u64]) -> Result<Allocation> {
    instance.check_feasible(n)?;
    let theta = instance
        .sps()
        .iter()
        .zip(n)
        .map(|(sp, &np)| sp.demand.iter().map(|&z| np * z).collect())
        .collect();
    Ok(Allocation { n: n.to_vec(), theta })
}

/// Probability that a new arrival belongs to each SP, `λ_p / Σ λ`.
pub fn weights(instance: &Instance) -> Vec<f64> {
    let total: f64 = instance.sps().iter().map(|sp| sp.lambda).sum();
    instance.sps().iter().map(|sp| sp.lambda / total).collect()
}
