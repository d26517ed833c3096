//! JSON instance configuration.
//!
//! Capacities and demands are written in display units (vCPU, GB, ...). The
//! loader multiplies each value by its resource's `unit_scale` and rejects the
//! value when the product is not an integer.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, ResourceKind, ResourcePool, SpProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSpec {
    pub label: String,
    pub unit_scale: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpSpec {
    pub name: String,
    pub lambda: f64,
    pub mu: f64,
    pub demand: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub resources: Vec<ResourceSpec>,
    pub capacities: Vec<f64>,
    pub sps: Vec<SpSpec>,
    pub epsilon: f64,
    pub u_edge: f64,
    pub u_cloud: f64,
}

const INTEGRALITY_TOL: f64 = 1e-9;

fn to_base_units(value: f64, scale: u64, path: &str) -> Result<u64> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::config(path, format!("expected a finite non-negative value, got {value}")));
    }
    let product = value * scale as f64;
    let rounded = product.round();
    if (product - rounded).abs() > INTEGRALITY_TOL * rounded.max(1.0) {
        return Err(Error::config(
            path,
            format!("{value} x {scale} = {product} is not a whole number of base units"),
        ));
    }
    if rounded > u64::MAX as f64 / 4.0 {
        return Err(Error::config(path, "value too large"));
    }
    Ok(rounded as u64)
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("<json>", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Converts display units to base units and validates the instance.
    pub fn to_instance(&self) -> Result<Instance> {
        let d = self.resources.len();
        if self.capacities.len() != d {
            return Err(Error::config(
                "capacities",
                format!("expected {d} values, found {}", self.capacities.len()),
            ));
        }
        let kinds: Vec<ResourceKind> = self
            .resources
            .iter()
            .enumerate()
            .map(|(id, r)| {
                if r.unit_scale == 0 {
                    return Err(Error::config(format!("resources[{id}].unit_scale"), "must be >= 1"));
                }
                Ok(ResourceKind {
                    id,
                    label: r.label.clone(),
                    unit_scale: r.unit_scale,
                })
            })
            .collect::<Result<_>>()?;
        let capacities = self
            .capacities
            .iter()
            .zip(&kinds)
            .enumerate()
            .map(|(r, (&c, k))| to_base_units(c, k.unit_scale, &format!("capacities[{r}]")))
            .collect::<Result<Vec<_>>>()?;
        let sps = self
            .sps
            .iter()
            .enumerate()
            .map(|(p, sp)| {
                if sp.demand.len() != d {
                    return Err(Error::config(
                        format!("sps[{p}].demand"),
                        format!("expected {d} values, found {}", sp.demand.len()),
                    ));
                }
                let demand = sp
                    .demand
                    .iter()
                    .zip(&kinds)
                    .enumerate()
                    .map(|(r, (&z, k))| {
                        to_base_units(z, k.unit_scale, &format!("sps[{p}].demand[{r}]"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(SpProfile {
                    name: sp.name.clone(),
                    lambda: sp.lambda,
                    mu: sp.mu,
                    demand,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(
            kinds,
            ResourcePool::new(capacities)?,
            sps,
            self.epsilon,
            self.u_edge,
            self.u_cloud,
        )
    }

    /// Display-unit view of an instance.
    pub fn from_instance(instance: &Instance) -> Self {
        let kinds = instance.kinds();
        Config {
            resources: kinds
                .iter()
                .map(|k| ResourceSpec {
                    label: k.label.clone(),
                    unit_scale: k.unit_scale,
                })
                .collect(),
            capacities: instance
                .capacities()
                .iter()
                .zip(kinds)
                .map(|(&c, k)| c as f64 / k.unit_scale as f64)
                .collect(),
            sps: instance
                .sps()
                .iter()
                .map(|sp| SpSpec {
                    name: sp.name.clone(),
                    lambda: sp.lambda,
                    mu: sp.mu,
                    demand: sp
                        .demand
                        .iter()
                        .zip(kinds)
                        .map(|(&z, k)| z as f64 / k.unit_scale as f64)
                        .collect(),
                })
                .collect(),
            epsilon: instance.epsilon(),
            u_edge: instance.u_edge(),
            u_cloud: instance.u_cloud(),
        }
    }

    fn resource_index(&self, key: &str, path: &str) -> Result<usize> {
        if let Ok(i) = key.parse::<usize>() {
            if i < self.resources.len() {
                return Ok(i);
            }
        } else if let Some(i) = self.resources.iter().position(|r| r.label == key) {
            return Ok(i);
        }
        Err(Error::UnresolvablePath {
            path: path.to_string(),
            segment: format!("[{key}]"),
        })
    }

    /// Overwrites the scalar addressed by `path`.
    ///
    /// Accepted paths: `epsilon`, `u_edge`, `u_cloud`, `capacities[<r>]`,
    /// `sps[<p>].lambda`, `sps[<p>].mu` and `sps[<p>].demand[<r>]`, where
    /// `<r>` is a resource index or label.
    pub fn set_param(&mut self, path: &str, value: f64) -> Result<()> {
        let unresolved = |segment: &str| Error::UnresolvablePath {
            path: path.to_string(),
            segment: segment.to_string(),
        };
        let segments = split_path(path).ok_or_else(|| unresolved(path))?;
        match segments.as_slice() {
            [Segment::Field("epsilon")] => self.epsilon = value,
            [Segment::Field("u_edge")] => self.u_edge = value,
            [Segment::Field("u_cloud")] => self.u_cloud = value,
            [Segment::Field("capacities"), Segment::Index(key)] => {
                let r = self.resource_index(key, path)?;
                self.capacities[r] = value;
            }
            [Segment::Field("sps"), Segment::Index(key), rest @ ..] => {
                let p = key
                    .parse::<usize>()
                    .ok()
                    .or_else(|| self.sps.iter().position(|sp| sp.name == *key))
                    .filter(|&p| p < self.sps.len())
                    .ok_or_else(|| unresolved(&format!("[{key}]")))?;
                match rest {
                    [Segment::Field("lambda")] => self.sps[p].lambda = value,
                    [Segment::Field("mu")] => self.sps[p].mu = value,
                    [Segment::Field("demand"), Segment::Index(rkey)] => {
                        let r = self.resource_index(rkey, path)?;
                        self.sps[p].demand[r] = value;
                    }
                    [Segment::Field(other), ..] => return Err(unresolved(other)),
                    [Segment::Index(other), ..] => return Err(unresolved(&format!("[{other}]"))),
                    [] => return Err(unresolved(&format!("sps[{key}]"))),
                }
            }
            [Segment::Field(other), ..] => return Err(unresolved(other)),
            [Segment::Index(other), ..] => return Err(unresolved(&format!("[{other}]"))),
            [] => return Err(unresolved(path)),
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq)]
enum Segment<'a> {
    Field(&'a str),
    Index(&'a str),
}

fn split_path(path: &str) -> Option<Vec<Segment<'_>>> {
    let mut out = Vec::new();
    for part in path.split('.') {
        let (field, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if field.is_empty() {
            return None;
        }
        out.push(Segment::Field(field));
        while !rest.is_empty() {
            let close = rest.find(']')?;
            if !rest.starts_with('[') || close < 2 {
                return None;
            }
            out.push(Segment::Index(rest[1..close].trim()));
            rest = &rest[close + 1..];
        }
    }
    Some(out)
}

/// Two service providers sharing a 96 vCPU / 384 GB node.
pub const TWO_SP_EDGE_NODE_JSON: &str = include_str!("../configs/two_sp_edge_node.json");

/// The checked-in two-provider reference node as an [`Instance`].
pub fn two_sp_edge_node() -> Instance {
    Config::from_json(TWO_SP_EDGE_NODE_JSON)
        .and_then(|c| c.to_instance())
        .expect("bundled config is valid")
}

/// Builds an instance with unit-scale resources `r0, r1, ...`, epsilon 0.01
/// (or just below the admissible maximum when d is large) and utilities 2/1.
///
/// Each SP is given as `(lambda, mu, demand)`.
pub fn simple_instance(capacities: &[u64], sps: &[(f64, f64, Vec<u64>)]) -> Instance {
    try_simple_instance(capacities, sps).expect("valid simple instance")
}

pub fn try_simple_instance(capacities: &[u64], sps: &[(f64, f64, Vec<u64>)]) -> Result<Instance> {
    let d = capacities.len();
    let kinds = (0..d)
        .map(|id| ResourceKind {
            id,
            label: format!("r{id}"),
            unit_scale: 1,
        })
        .collect();
    let sps = sps
        .iter()
        .enumerate()
        .map(|(p, (lambda, mu, demand))| SpProfile {
            name: format!("sp{p}"),
            lambda: *lambda,
            mu: *mu,
            demand: demand.clone(),
        })
        .collect();
    let epsilon = (0.5 / (1.0 + 2.0 * d as f64)).min(0.01);
    Instance::new(
        kinds,
        ResourcePool::new(capacities.to_vec())?,
        sps,
        epsilon,
        2.0,
        1.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_has_reference_parameters() {
        let inst = two_sp_edge_node();
        assert_eq!(inst.capacities(), &[96_000, 393_216]);
        assert_eq!(inst.sps()[0].demand, vec![1000, 2048]);
        assert_eq!(inst.sps()[1].demand, vec![4000, 512]);
        assert_eq!(inst.sps()[0].lambda, 20.0);
        assert_eq!(inst.sps()[1].lambda, 5.0);
        assert_eq!(inst.sps()[0].mu, 1.0);
        assert_eq!(inst.sps()[1].mu, 10.0);
        assert_eq!(inst.epsilon(), 0.01);
    }

    #[test]
    fn non_integral_base_units_are_rejected_with_path() {
        let mut cfg = Config::from_json(TWO_SP_EDGE_NODE_JSON).unwrap();
        cfg.sps[1].demand[1] = 0.0001;
        match cfg.to_instance() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "sps[1].demand[1]"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn roundtrip_through_display_units() {
        let inst = two_sp_edge_node();
        let back = Config::from_instance(&inst).to_instance().unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn set_param_resolves_paths() {
        let mut cfg = Config::from_json(TWO_SP_EDGE_NODE_JSON).unwrap();
        cfg.set_param("sps[0].lambda", 7.0).unwrap();
        cfg.set_param("sps[1].demand[cpu]", 2.0).unwrap();
        cfg.set_param("capacities[1]", 128.0).unwrap();
        cfg.set_param("epsilon", 0.05).unwrap();
        assert_eq!(cfg.sps[0].lambda, 7.0);
        assert_eq!(cfg.sps[1].demand[0], 2.0);
        assert_eq!(cfg.capacities[1], 128.0);
        assert_eq!(cfg.epsilon, 0.05);
    }

    #[test]
    fn set_param_names_the_bad_segment() {
        let mut cfg = Config::from_json(TWO_SP_EDGE_NODE_JSON).unwrap();
        let seg = |r: Result<()>| match r {
            Err(Error::UnresolvablePath { segment, .. }) => segment,
            other => panic!("expected unresolvable path, got {other:?}"),
        };
        assert_eq!(seg(cfg.set_param("sps[5].lambda", 1.0)), "[5]");
        assert_eq!(seg(cfg.set_param("sps[0].lamda", 1.0)), "lamda");
        assert_eq!(seg(cfg.set_param("sps[0].demand[gpu]", 1.0)), "[gpu]");
        assert_eq!(seg(cfg.set_param("bogus", 1.0)), "bogus");
    }
}
