//! One- and two-parameter sweeps, emitted as long-format CSV, and the
//! approximation-bound check against the exact oracle.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exact::solve_exact_erlang;
use crate::model::Instance;
use crate::report::{format_real, solve, Algo, SolutionReport, SolveOptions};
use crate::stream::{solve_stream, ItemOrder};

/// Parses `v1,v2,...` or an inclusive range `start:stop:step`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::InvalidSweep(format!("`{spec}`: {msg}"));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(&format!("`{s}` is not a finite number")))
    };
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(bad("ranges are written start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step <= 0.0 {
            return Err(bad("step must be positive"));
        }
        let count = ((stop - start) / step + 1e-9).floor();
        if count < 0.0 {
            return Err(bad("empty range"));
        }
        if count >= 1e7 {
            return Err(bad("range too long"));
        }
        (0..=count as u64).map(|i| start + i as f64 * step).collect()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad("no values"));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn parse(path: &str, values: &str) -> Result<Self> {
        Ok(Self {
            path: path.to_string(),
            values: parse_values(values)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis1: SweepAxis,
    pub axis2: Option<SweepAxis>,
    pub algos: Vec<Algo>,
    pub options: SolveOptions,
    /// Record wall time; when off the column is written as 0.
    pub timing: bool,
}

impl SweepSpec {
    pub fn new(axis1: SweepAxis, axis2: Option<SweepAxis>, algos: Vec<Algo>) -> Self {
        Self {
            axis1,
            axis2,
            algos,
            options: SolveOptions::default(),
            timing: true,
        }
    }

    fn validate(&self, config: &Config) -> Result<()> {
        if self.algos.is_empty() {
            return Err(Error::InvalidSweep("algorithm set is empty".into()));
        }
        let mut probe = config.clone();
        for axis in std::iter::once(&self.axis1).chain(&self.axis2) {
            if axis.values.is_empty() {
                return Err(Error::InvalidSweep(format!("no values for `{}`", axis.path)));
            }
            probe.set_param(&axis.path, axis.values[0])?;
        }
        Ok(())
    }

    /// Grid points in lexicographic order (first axis outermost).
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        let mut out = Vec::new();
        for &v1 in &self.axis1.values {
            match &self.axis2 {
                Some(axis) => out.extend(axis.values.iter().map(|&v2| (v1, Some(v2)))),
                None => out.push((v1, None)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param1: f64,
    pub param2: Option<f64>,
    pub report: SolutionReport,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub param1: String,
    pub param2: Option<String>,
    pub sp_names: Vec<String>,
    pub resource_labels: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn header(&self) -> Vec<String> {
        let mut cols = vec!["param1".to_string(), "param2".into(), "algo".into(), "f".into()];
        cols.extend(self.sp_names.iter().map(|s| format!("f_{s}")));
        cols.extend(self.sp_names.iter().map(|s| format!("B_{s}")));
        cols.extend(self.resource_labels.iter().map(|s| format!("util_{s}")));
        cols.extend(self.sp_names.iter().map(|s| format!("n_{s}")));
        cols.push("wall_time_ms".into());
        cols
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header()).map_err(csv_error)?;
        for row in &self.rows {
            let rep = &row.report;
            let mut cells = vec![
                format_real(row.param1),
                row.param2.map(format_real).unwrap_or_default(),
                rep.algo.to_string(),
                format_real(rep.f),
            ];
            cells.extend(rep.per_sp_f.iter().map(|&v| format_real(v)));
            cells.extend(rep.per_sp_blocking.iter().map(|&v| format_real(v)));
            cells.extend(rep.utilization.iter().map(|&v| format_real(v)));
            cells.extend(rep.n.iter().map(u64::to_string));
            cells.push(format_real(row.wall_time_ms));
            w.write_record(&cells).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.into())
}

/// Runs every algorithm at every grid point. Points are solved in parallel on
/// the current rayon pool; rows come back in grid order, algorithms in the
/// order given.
pub fn run_sweep(config: &Config, spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate(config)?;
    let results: Vec<Result<Vec<SweepRow>>> = spec
        .points()
        .into_par_iter()
        .map(|(v1, v2)| {
            let mut cfg = config.clone();
            cfg.set_param(&spec.axis1.path, v1)?;
            if let (Some(axis), Some(v2)) = (&spec.axis2, v2) {
                cfg.set_param(&axis.path, v2)?;
            }
            let instance = cfg.to_instance()?;
            spec.algos
                .iter()
                .map(|&algo| {
                    let start = Instant::now();
                    let report = solve(&instance, algo, &spec.options)?;
                    let elapsed = start.elapsed().as_secs_f64() * 1e3;
                    if report.proven_optimal == Some(false) {
                        return Err(Error::BudgetExhausted {
                            budget: spec.options.node_budget,
                        });
                    }
                    Ok(SweepRow {
                        param1: v1,
                        param2: v2,
                        report,
                        wall_time_ms: if spec.timing { elapsed } else { 0.0 },
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(SweepTable {
        param1: spec.axis1.path.clone(),
        param2: spec.axis2.as_ref().map(|a| a.path.clone()),
        sp_names: config.sps.iter().map(|sp| sp.name.clone()).collect(),
        resource_labels: config.resources.iter().map(|r| r.label.clone()).collect(),
        rows,
    })
}

/// Absolute slack allowed when comparing a streamed value with the bound.
pub const BOUND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub order: String,
    pub n: Vec<u64>,
    pub f: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scale: u64,
    pub capacities: Vec<u64>,
    pub opt: f64,
    pub opt_n: Vec<u64>,
    pub nodes_explored: u64,
    /// `1/(1+2d) - ε`.
    pub ratio: f64,
    pub bound: f64,
    pub orders: Vec<OrderCheck>,
    pub pass: bool,
}

/// Orders checked by [`verify`].
pub const VERIFY_ORDERS: [ItemOrder; 3] =
    [ItemOrder::RoundRobin, ItemOrder::Sequential, ItemOrder::Seeded(1)];

/// Divides every capacity by `scale`, solves the result exactly and checks
/// the streaming value under each order in [`VERIFY_ORDERS`] against
/// `(1/(1+2d) - ε)·OPT`.
pub fn verify(instance: &Instance, scale: u64, node_budget: u64) -> Result<VerifyReport> {
    if scale == 0 {
        return Err(Error::InvalidArgument("scale must be at least 1".into()));
    }
    let caps: Vec<u64> = instance.capacities().iter().map(|&k| k / scale).collect();
    let scaled = instance.with_capacities(caps.clone())?;
    let exact = solve_exact_erlang(&scaled, node_budget);
    if !exact.proven_optimal {
        return Err(Error::BudgetExhausted { budget: node_budget });
    }
    let ratio = 1.0 / (1.0 + 2.0 * scaled.dims() as f64) - scaled.epsilon();
    let bound = ratio * exact.objective;
    let orders: Vec<OrderCheck> = VERIFY_ORDERS
        .iter()
        .map(|&order| {
            let sol = solve_stream(&scaled, order);
            OrderCheck {
                order: order.to_string(),
                n: sol.n.0.clone(),
                f: sol.f.f,
                pass: sol.f.f + BOUND_TOLERANCE >= bound,
            }
        })
        .collect();
    Ok(VerifyReport {
        scale,
        capacities: caps,
        opt: exact.objective,
        opt_n: exact.n.0,
        nodes_explored: exact.nodes_explored,
        ratio,
        bound,
        pass: orders.iter().all(|o| o.pass),
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{simple_instance, two_sp_edge_node, TWO_SP_EDGE_NODE_JSON};

    fn reference() -> Config {
        Config::from_json(TWO_SP_EDGE_NODE_JSON).unwrap()
    }

    #[test]
    fn value_parsing() {
        assert_eq!(parse_values("1,2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_values("5:40:5").unwrap().len(), 8);
        assert_eq!(parse_values("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_values("3:3:1").unwrap(), vec![3.0]);
        for bad in ["", "4:1:1", "1:2:0", "1:2", "a,b", "1:inf:1"] {
            assert!(parse_values(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn stream_beats_prop_at_reference_point() {
        let spec = SweepSpec::new(
            SweepAxis::parse("sps[0].lambda", "20").unwrap(),
            None,
            vec![Algo::Prop, Algo::Stream],
        );
        let table = run_sweep(&reference(), &spec).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[1].report.f >= table.rows[0].report.f);
    }

    #[test]
    fn grid_cardinality_and_order() {
        let spec = SweepSpec::new(
            SweepAxis::parse("sps[0].lambda", "5,10").unwrap(),
            Some(SweepAxis::parse("sps[sp2].lambda", "5,10").unwrap()),
            vec![Algo::Stream, Algo::Prop, Algo::Greedy],
        );
        let table = run_sweep(&reference(), &spec).unwrap();
        assert_eq!(table.rows.len(), 12);
        let keys: Vec<(f64, Option<f64>, Algo)> = table
            .rows
            .iter()
            .map(|r| (r.param1, r.param2, r.report.algo))
            .collect();
        assert_eq!(keys[0], (5.0, Some(5.0), Algo::Stream));
        assert_eq!(keys[3], (5.0, Some(10.0), Algo::Stream));
        assert_eq!(keys[11], (10.0, Some(10.0), Algo::Greedy));
    }

    #[test]
    fn sweep_errors() {
        let empty = SweepSpec::new(SweepAxis::parse("sps[0].lambda", "1").unwrap(), None, vec![]);
        assert!(matches!(run_sweep(&reference(), &empty), Err(Error::InvalidSweep(_))));
        let bad_path = SweepSpec::new(
            SweepAxis::parse("sps[0].lamda", "1").unwrap(),
            None,
            vec![Algo::Stream],
        );
        match run_sweep(&reference(), &bad_path) {
            Err(Error::UnresolvablePath { segment, .. }) => assert_eq!(segment, "lamda"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let mut spec = SweepSpec::new(
            SweepAxis::parse("sps[0].lambda", "20").unwrap(),
            None,
            vec![Algo::Prop],
        );
        spec.timing = false;
        let csv = run_sweep(&reference(), &spec).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "param1,param2,algo,f,f_sp1,f_sp2,B_sp1,B_sp2,util_cpu,util_ram,n_sp1,n_sp2,wall_time_ms"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "20");
        assert_eq!(row[1], "");
        assert_eq!(row[2], "prop");
        assert_eq!(&row[10..], ["76", "4", "0"]);
        assert!(lines.next().is_none());
    }

    #[test]
    fn verify_reference_node_at_quarter_scale() {
        let rep = verify(&two_sp_edge_node(), 4, 10_000_000).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.capacities, vec![24_000, 98_304]);
    }

    #[test]
    fn verify_single_sp_and_bad_scale() {
        let inst = simple_instance(&[12, 30], &[(6.0, 1.0, vec![1, 2])]);
        assert!(verify(&inst, 1, 1000).unwrap().pass);
        assert!(verify(&inst, 0, 1000).is_err());
        assert!(matches!(
            verify(&two_sp_edge_node(), 1, 5),
            Err(Error::BudgetExhausted { budget: 5 })
        ));
    }
}
