//! Checked-in sweep outputs and their tolerant comparison.

use std::fs;
use std::path::Path;

use crate::config::{Config, TWO_SP_EDGE_NODE_JSON};
use crate::error::Result;
use crate::report::{parse_algos, Algo};
use crate::sweep::{run_sweep, SweepAxis, SweepSpec};

/// Per-column absolute tolerance for real-valued columns.
pub const GOLDEN_TOLERANCE: f64 = 1e-9;
/// Columns excluded from comparison.
pub const IGNORED_COLUMNS: [&str; 1] = ["wall_time_ms"];

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenCase {
    pub name: &'static str,
    pub file: &'static str,
    pub param1: &'static str,
    pub values1: &'static str,
    pub param2: Option<(&'static str, &'static str)>,
    pub algos: &'static str,
}

impl GoldenCase {
    pub fn spec(&self) -> Result<SweepSpec> {
        let axis2 = match self.param2 {
            Some((path, values)) => Some(SweepAxis::parse(path, values)?),
            None => None,
        };
        let mut spec = SweepSpec::new(
            SweepAxis::parse(self.param1, self.values1)?,
            axis2,
            parse_algos(self.algos)?,
        );
        spec.timing = false;
        Ok(spec)
    }

    /// Equivalent command line, relative to the core crate directory.
    pub fn command(&self) -> String {
        let mut cmd = format!(
            "edge-slicer sweep --config configs/two_sp_edge_node.json --param '{}' --values {}",
            self.param1, self.values1
        );
        if let Some((path, values)) = self.param2 {
            cmd.push_str(&format!(" --param2 '{path}' --values2 {values}"));
        }
        cmd.push_str(&format!(" --algo {} --no-timing --out goldens/{}", self.algos, self.file));
        cmd
    }

    pub fn render(&self) -> Result<String> {
        let config = Config::from_json(TWO_SP_EDGE_NODE_JSON)?;
        Ok(run_sweep(&config, &self.spec()?)?.to_csv())
    }
}

pub fn cases() -> Vec<GoldenCase> {
    vec![
        GoldenCase {
            name: "lambda1",
            file: "sweep_lambda1.csv",
            param1: "sps[0].lambda",
            values1: "1:40:1",
            param2: None,
            algos: "stream,prop",
        },
        GoldenCase {
            name: "lambda_grid",
            file: "grid_lambda1_lambda2.csv",
            param1: "sps[0].lambda",
            values1: "5:40:5",
            param2: Some(("sps[1].lambda", "5:40:5")),
            algos: "stream",
        },
        GoldenCase {
            name: "cpu_demand1",
            file: "sweep_cpu_demand1.csv",
            param1: "sps[0].demand[cpu]",
            values1: "1:8:1",
            param2: None,
            algos: "stream,prop",
        },
        GoldenCase {
            name: "cpu_demand_grid",
            file: "grid_cpu_demand1_demand2.csv",
            param1: "sps[0].demand[cpu]",
            values1: "1:8:1",
            param2: Some(("sps[1].demand[cpu]", "1:8:1")),
            algos: "stream",
        },
    ]
}

/// Writes every golden into `dir`.
pub fn regenerate(dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for case in cases() {
        let path = dir.join(case.file);
        fs::write(&path, case.render()?)?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

/// Compares every golden in `dir` with a fresh run. Returns one entry per
/// case that drifted, listing each offending cell.
pub fn check(dir: &Path) -> Result<Vec<(String, Vec<String>)>> {
    let mut failures = Vec::new();
    for case in cases() {
        let expected = fs::read_to_string(dir.join(case.file))?;
        let drift = compare_csv(&expected, &case.render()?, GOLDEN_TOLERANCE);
        if !drift.is_empty() {
            failures.push((case.name.to_string(), drift));
        }
    }
    Ok(failures)
}

fn records(text: &str) -> std::result::Result<Vec<Vec<String>>, csv::Error> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect()
}

/// Cell-by-cell comparison. Cells that parse as reals on both sides are
/// compared with `tolerance`; everything else must match exactly.
pub fn compare_csv(expected: &str, actual: &str, tolerance: f64) -> Vec<String> {
    let (exp, act) = match (records(expected), records(actual)) {
        (Ok(e), Ok(a)) => (e, a),
        (Err(e), _) | (_, Err(e)) => return vec![format!("unreadable csv: {e}")],
    };
    let (Some(exp_head), Some(act_head)) = (exp.first(), act.first()) else {
        return vec!["missing header".to_string()];
    };
    if exp_head != act_head {
        return vec![format!("header: expected {exp_head:?}, got {act_head:?}")];
    }
    let mut drift = Vec::new();
    if exp.len() != act.len() {
        drift.push(format!("row count: expected {}, got {}", exp.len() - 1, act.len() - 1));
    }
    for (i, (e, a)) in exp.iter().zip(&act).enumerate().skip(1) {
        if e.len() != a.len() {
            drift.push(format!("row {i}: cell count {} vs {}", e.len(), a.len()));
            continue;
        }
        for ((col, ec), ac) in exp_head.iter().zip(e).zip(a) {
            if IGNORED_COLUMNS.contains(&col.as_str()) || ec == ac {
                continue;
            }
            let close = match (ec.parse::<f64>(), ac.parse::<f64>()) {
                (Ok(x), Ok(y)) => (x - y).abs() <= tolerance,
                _ => false,
            };
            if !close {
                drift.push(format!("row {i}, column {col}: expected {ec}, got {ac}"));
            }
        }
    }
    drift
}

/// The algorithms appearing in any golden.
pub fn golden_algos() -> Vec<Algo> {
    let mut all: Vec<Algo> = cases()
        .iter()
        .flat_map(|c| parse_algos(c.algos).expect("static list"))
        .collect();
    all.sort();
    all.dedup();
    all
}
