use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use edge_slicer::baselines::HeuristicParams;
use edge_slicer::config::{Config, TWO_SP_EDGE_NODE_JSON};
use edge_slicer::erlang::{erlang_b, OfferedLoad};
use edge_slicer::exact::{DEFAULT_CELL_LIMIT, DEFAULT_NODE_BUDGET};
use edge_slicer::goldens;
use edge_slicer::report::{format_real, parse_algos, solve, Algo, SolveOptions};
use edge_slicer::simulate::{simulate, HoldingTime, SimConfig};
use edge_slicer::stream::{solve_stream, ItemOrder};
use edge_slicer::sweep::{parse_values, run_sweep, verify, SweepAxis, SweepSpec, SweepTable};
use edge_slicer::{Error, Result};

#[derive(Parser)]
#[command(name = "edge-slicer", version, about = "Edge node slicing across service providers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with one algorithm.
    Solve(SolveArgs),
    /// Sweep one or two parameters and emit one row per point and algorithm.
    Sweep(SweepArgs),
    /// Monte Carlo estimate of the blocking probabilities of an allocation.
    Simulate(SimulateArgs),
    /// Check the streaming guarantee against the exact optimum on a scaled copy.
    Verify(VerifyArgs),
    /// Erlang-B blocking probability.
    Erlang(ErlangArgs),
    /// Regenerate or check the golden sweep files.
    Goldens(GoldenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// Instance configuration (JSON). Defaults to the bundled two-SP node.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SolverFlags {
    /// Item order for the streaming solver: round-robin, sequential or seeded:<u64>.
    #[arg(long, default_value = "round-robin")]
    order: ItemOrder,
    /// Greedy coefficient in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Per-copy greedy rewards, comma separated (default: arrival-rate weights).
    #[arg(long)]
    xi: Option<String>,
    /// Node budget of the exact branch-and-bound.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Largest knapsack table, in cells.
    #[arg(long, default_value_t = DEFAULT_CELL_LIMIT)]
    cell_limit: u128,
}

impl SolverFlags {
    fn options(&self) -> Result<SolveOptions> {
        let mut heuristic = HeuristicParams::new(self.alpha)?;
        if let Some(xi) = &self.xi {
            heuristic = heuristic.with_xi(parse_values(xi)?)?;
        }
        Ok(SolveOptions {
            order: self.order,
            heuristic,
            node_budget: self.budget,
            cell_limit: self.cell_limit,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "stream")]
    algo: Algo,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Parameter path, e.g. `sps[0].lambda` or `sps[sp1].demand[cpu]`.
    #[arg(long)]
    param: String,
    /// Values: `v1,v2,...` or `start:stop:step` (inclusive).
    #[arg(long)]
    values: String,
    #[arg(long, requires = "values2")]
    param2: Option<String>,
    #[arg(long, requires = "param2")]
    values2: Option<String>,
    /// Comma-separated subset of stream,exact,mdkp,prop,greedy.
    #[arg(long)]
    algo: String,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write 0 in the wall_time_ms column.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Sessions per SP, comma separated. Defaults to the streaming solution.
    #[arg(long)]
    n: Option<String>,
    #[arg(long, default_value_t = 1e6)]
    horizon: f64,
    #[arg(long, default_value_t = 0.0)]
    warmup: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replications: usize,
    /// exp or det.
    #[arg(long, default_value = "exp")]
    holding: HoldingTime,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Capacity divisor.
    #[arg(long, default_value_t = 4)]
    scale: u64,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct ErlangArgs {
    /// Offered load in erlangs.
    #[arg(long, conflicts_with_all = ["lambda", "mu"])]
    load: Option<f64>,
    #[arg(long, requires = "mu")]
    lambda: Option<f64>,
    #[arg(long, requires = "lambda")]
    mu: Option<f64>,
    /// Server counts: `n1,n2,...` or `start:stop:step`.
    #[arg(long)]
    n: String,
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct GoldenArgs {
    /// Directory holding the golden CSV files.
    #[arg(long, default_value = "goldens")]
    dir: PathBuf,
    /// Compare instead of rewriting.
    #[arg(long)]
    check: bool,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Config::from_json(TWO_SP_EDGE_NODE_JSON),
    }
}

fn open_out(out: &str) -> Result<Box<dyn Write>> {
    Ok(if out == "-" {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(out)?))
    })
}

fn write_json<T: serde::Serialize>(out: &str, value: &T) -> Result<()> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn unsupported(format: Format, what: &str) -> Error {
    let name = format.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    Error::InvalidArgument(format!("{what} does not support --format {name}"))
}

fn parse_counts(list: &str) -> Result<Vec<u64>> {
    parse_values(list)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(Error::InvalidArgument(format!("`{v}` is not a non-negative integer")))
            }
        })
        .collect()
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let config = load_config(args.common.config.as_deref())?;
    let instance = config.to_instance()?;
    let report = solve(&instance, args.algo, &args.solver.options()?)?;
    match args.format {
        Format::Json => write_json(&args.common.out, &report)?,
        Format::Csv => {
            let table = SweepTable {
                param1: String::new(),
                param2: None,
                sp_names: config.sps.iter().map(|s| s.name.clone()).collect(),
                resource_labels: config.resources.iter().map(|r| r.label.clone()).collect(),
                rows: vec![edge_slicer::sweep::SweepRow {
                    param1: 0.0,
                    param2: None,
                    report: report.clone(),
                    wall_time_ms: 0.0,
                }],
            };
            let mut w = open_out(&args.common.out)?;
            table.write_csv(&mut w)?;
            w.flush()?;
        }
        Format::Text => return Err(unsupported(args.format, "solve")),
    }
    if report.proven_optimal == Some(false) {
        return Err(Error::BudgetExhausted {
            budget: args.solver.budget,
        });
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let config = load_config(args.common.config.as_deref())?;
    let axis2 = match (&args.param2, &args.values2) {
        (Some(p), Some(v)) => Some(SweepAxis::parse(p, v)?),
        _ => None,
    };
    let mut spec = SweepSpec::new(
        SweepAxis::parse(&args.param, &args.values)?,
        axis2,
        parse_algos(&args.algo)?,
    );
    spec.options = args.solver.options()?;
    spec.timing = !args.no_timing;
    let table = run_sweep(&config, &spec)?;
    match args.format {
        Format::Csv => {
            let mut w = open_out(&args.common.out)?;
            table.write_csv(&mut w)?;
            w.flush()?;
        }
        Format::Json => write_json(&args.common.out, &table)?,
        Format::Text => return Err(unsupported(args.format, "sweep")),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let instance = load_config(args.common.config.as_deref())?.to_instance()?;
    let n = match &args.n {
        Some(list) => parse_counts(list)?,
        None => solve_stream(&instance, ItemOrder::RoundRobin).n.0,
    };
    instance.check_feasible(&n)?;
    let cfg = SimConfig {
        horizon: args.horizon,
        warmup: args.warmup,
        seed: args.seed,
        replications: args.replications,
        holding: args.holding,
    };
    let report = simulate(&instance, &n, &cfg)?;
    write_json(&args.common.out, &report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let instance = load_config(args.common.config.as_deref())?.to_instance()?;
    let report = verify(&instance, args.scale, args.budget)?;
    match args.format {
        Format::Json => write_json(&args.common.out, &report)?,
        Format::Text => {
            let mut w = open_out(&args.common.out)?;
            writeln!(w, "scale {} capacities {:?}", report.scale, report.capacities)?;
            writeln!(w, "OPT {} at n = {:?}", format_real(report.opt), report.opt_n)?;
            writeln!(w, "bound {} = {} x OPT", format_real(report.bound), format_real(report.ratio))?;
            for o in &report.orders {
                let verdict = if o.pass { "pass" } else { "FAIL" };
                writeln!(w, "stream[{}] {} at n = {:?}: {verdict}", o.order, format_real(o.f), o.n)?;
            }
            writeln!(w, "{}", if report.pass { "PASS" } else { "FAIL" })?;
            w.flush()?;
        }
        Format::Csv => return Err(unsupported(args.format, "verify")),
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_erlang(args: ErlangArgs) -> Result<ExitCode> {
    let load = match (args.load, args.lambda, args.mu) {
        (Some(a), _, _) => OfferedLoad::new(a)?,
        (None, Some(l), Some(m)) => OfferedLoad::from_rates(l, m)?,
        _ => return Err(Error::InvalidArgument("give --load or both --lambda and --mu".into())),
    };
    let rows: Vec<(u64, f64)> = parse_counts(&args.n)?
        .into_iter()
        .map(|n| (n, erlang_b(load, n)))
        .collect();
    match args.format {
        Format::Csv | Format::Text => {
            let mut w = open_out(&args.out)?;
            writeln!(w, "a,n,blocking")?;
            for (n, b) in rows {
                writeln!(w, "{},{n},{}", format_real(load.get()), format_real(b))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let value: Vec<serde_json::Value> = rows
                .into_iter()
                .map(|(n, b)| serde_json::json!({ "a": load.get(), "n": n, "blocking": b }))
                .collect();
            write_json(&args.out, &value)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_goldens(args: GoldenArgs) -> Result<ExitCode> {
    if args.check {
        let failures = goldens::check(&args.dir)?;
        for (name, drift) in &failures {
            eprintln!("{name}: {} drifting cell(s)", drift.len());
            for d in drift {
                eprintln!("  {d}");
            }
        }
        if failures.is_empty() {
            println!("all goldens match");
            return Ok(ExitCode::SUCCESS);
        }
        return Ok(ExitCode::from(1));
    }
    for path in goldens::regenerate(&args.dir)? {
        println!("wrote {path}");
    }
    Ok(ExitCode::SUCCESS)
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("EDGE_SLICER_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("EDGE_SLICER_THREADS=`{raw}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    init_threads()?;
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Erlang(a) => cmd_erlang(a),
        Command::Goldens(a) => cmd_goldens(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
