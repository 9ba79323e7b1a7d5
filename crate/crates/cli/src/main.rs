//! `privroute`: evaluate, search and generate drone delivery routes.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit codes:
//! 0 success, 1 I/O or internal error, 2 usage or bad parameter,
//! 3 invalid input (route, scenario, parse), 4 refused by a size guard.

mod fixtures;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use privroute::io::{front_rows, load_scenario, scenario_to_json, write_csv, ResultRecord, ResultRow};
use privroute::{
    evaluate, evaluate_heuristic, generate, min_avg_risk_sweep, pareto_front, posterior_matrix, unit_square_fixture,
    DroneSpec, Error, FixtureConfig, GeneratorConfig, HeuristicParams, InstantiateOptions, MotionModel, RiskObjective,
    Route, Scenario, Topology, TopologyParams,
};

#[derive(Parser, Debug)]
#[command(
    name = "privroute",
    version,
    about = "Privacy risk and wait-time analysis of drone delivery routes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a scenario file.
    Gen(GenArgs),
    /// Risks and waits of one route.
    Eval(EvalArgs),
    /// Observer posterior matrix of one route.
    Oracle(OracleArgs),
    /// Instantiate and evaluate a routing heuristic.
    Heuristic(HeuristicArgs),
    /// Exact privacy/wait Pareto front by exhaustive enumeration.
    Pareto(ParetoArgs),
    /// Minimum average risk over a grid of (n, c, n_d).
    Sweep(SweepArgs),
    /// Check the reference values the library is expected to reproduce.
    Fixtures,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FixtureName {
    Diagonal,
    Adjacent,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// uniform, two-clusters, hub-spoke or linear.
    #[arg(long, required_unless_present = "fixture", value_parser = parse_topology)]
    topology: Option<Topology>,
    /// Unit-square fixture instead of a generated map.
    #[arg(long, value_enum, conflicts_with_all = ["topology", "n", "decoys", "seed"])]
    fixture: Option<FixtureName>,
    #[arg(long, required_unless_present = "fixture")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    decoys: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side of the square map in meters.
    #[arg(long, default_value_t = 10_000.0)]
    extent: f64,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    cluster_radius: Option<f64>,
    #[arg(long)]
    hub_radius: Option<f64>,
    #[arg(long)]
    ring_inner: Option<f64>,
    #[arg(long)]
    ring_outer: Option<f64>,
    #[arg(long)]
    corridor_width: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MotionArgs {
    /// Overrides the scenario's speed (m/s).
    #[arg(long)]
    speed: Option<f64>,
    /// Overrides the scenario's stop duration (s).
    #[arg(long)]
    stop_duration: Option<f64>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Comma-separated stops, e.g. "v1,v2,a2,v3,a3,a1".
    #[arg(long)]
    route: String,
    #[arg(long)]
    capacity: usize,
    #[command(flatten)]
    motion: MotionArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    route: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Split,
    Reversal,
    Stuffing,
}

#[derive(Args, Debug)]
struct HeuristicArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    /// First tuple size (split) or number of exchanged stops (reversal).
    #[arg(long)]
    k: Option<usize>,
    /// Second tuple size for split; defaults to n - k.
    #[arg(long)]
    l: Option<usize>,
    /// Items kept aboard for stuffing; defaults to the capacity.
    #[arg(long)]
    c: Option<usize>,
    #[arg(long)]
    capacity: usize,
    /// Also choose which order plays each template position.
    #[arg(long)]
    relabel: bool,
    #[command(flatten)]
    motion: MotionArgs,
}

#[derive(Args, Debug)]
struct ParetoArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    capacity: usize,
    #[arg(long, default_value_t = 0)]
    decoy_budget: usize,
    /// Risk objective and wait objective, e.g. "avg-risk,avg-wait".
    #[arg(long, default_value = "avg-risk,avg-wait", value_parser = parse_objectives)]
    objectives: RiskObjective,
    /// Append rows for every heuristic that fits the capacity.
    #[arg(long)]
    with_heuristics: bool,
    #[command(flatten)]
    motion: MotionArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Inclusive range "A..B" or a single value.
    #[arg(long, value_parser = parse_range)]
    n: RangeInclusive<usize>,
    #[arg(long, value_parser = parse_range)]
    capacity: RangeInclusive<usize>,
    #[arg(long, value_parser = parse_range, default_value = "0")]
    decoys: RangeInclusive<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_objectives(s: &str) -> Result<RiskObjective, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let risk = match parts.as_slice() {
        [risk, "avg-wait"] | ["avg-wait", risk] => *risk,
        _ => return Err(format!("expected \"<risk>,avg-wait\", got {s:?}")),
    };
    match risk {
        "avg-risk" => Ok(RiskObjective::Average),
        "worst-risk" => Ok(RiskObjective::Worst),
        other => Err(format!("unknown risk objective {other:?} (avg-risk or worst-risk)")),
    }
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad range {s:?}"));
    let range = match s.split_once("..") {
        Some((a, b)) => num(a)?..=num(b.trim_start_matches('='))?,
        None => num(s)?..=num(s)?,
    };
    if range.is_empty() {
        return Err(format!("empty range {s:?}"));
    }
    Ok(range)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) => 2,
        Error::UnknownStop(_)
        | Error::InvalidRoute(_)
        | Error::InvalidScenario(_)
        | Error::Parse(_)
        | Error::Json(_)
        | Error::EmptyRisks => 3,
        Error::GuardExceeded { .. } => 4,
        Error::Io(_) | Error::Csv(_) | Error::Overflow(_) => 1,
    }
}

fn output(path: Option<&Path>) -> privroute::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn drone(scenario: &Scenario, capacity: usize, overrides: &MotionArgs) -> DroneSpec {
    let base = scenario.motion().unwrap_or_default();
    let motion = MotionModel {
        speed: overrides.speed.unwrap_or(base.speed),
        stop_duration: overrides.stop_duration.unwrap_or(base.stop_duration),
    };
    DroneSpec::with_motion(capacity, motion)
}

fn parse_route(s: &str) -> privroute::Result<Route> {
    s.parse()
}

fn print_json(value: &ResultRecord) -> privroute::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run_gen(args: GenArgs) -> privroute::Result<()> {
    let scenario = match args.fixture {
        Some(FixtureName::Diagonal) => unit_square_fixture(FixtureConfig::Diagonal),
        Some(FixtureName::Adjacent) => unit_square_fixture(FixtureConfig::Adjacent),
        None => {
            let topology = args.topology.expect("clap requires --topology");
            let n = args.n.expect("clap requires --n");
            let mut config = GeneratorConfig::new(topology, n, args.decoys, args.seed);
            config.extent = args.extent;
            config.params = TopologyParams {
                separation: args.separation,
                cluster_radius: args.cluster_radius,
                hub_radius: args.hub_radius,
                ring_inner: args.ring_inner,
                ring_outer: args.ring_outer,
                corridor_width: args.corridor_width,
            };
            generate(&config)?
        }
    };
    let mut out = output(args.out.as_deref())?;
    out.write_all(scenario_to_json(&scenario)?.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn run_eval(args: EvalArgs) -> privroute::Result<()> {
    let scenario = load_scenario(&args.scenario)?;
    let drone = drone(&scenario, args.capacity, &args.motion);
    let e = evaluate(&parse_route(&args.route)?, &scenario, &drone)?;
    print_json(&ResultRecord::new(&e, &scenario))
}

fn run_oracle(args: OracleArgs) -> privroute::Result<()> {
    let scenario = load_scenario(&args.scenario)?;
    let p = posterior_matrix(&parse_route(&args.route)?, &scenario)?;
    let mut out = BufWriter::new(io::stdout().lock());
    let header: Vec<String> = p.vendors().iter().map(|v| v.to_string()).collect();
    writeln!(out, "customer,{}", header.join(","))?;
    for (i, a) in p.customers().iter().enumerate() {
        let row: Vec<String> = p.row(i).iter().map(privroute::io::format_rational).collect();
        writeln!(out, "{a},{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn run_heuristic(args: HeuristicArgs) -> privroute::Result<()> {
    let scenario = load_scenario(&args.scenario)?;
    let n = scenario.order_count();
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required for this heuristic")))
    };
    let params = match args.kind {
        Kind::Split => {
            let k = need(args.k, "k")?;
            HeuristicParams::Split {
                n,
                k,
                l: args.l.unwrap_or(n.saturating_sub(k)),
            }
        }
        Kind::Reversal => HeuristicParams::Reversal {
            n,
            k: need(args.k, "k")?,
        },
        Kind::Stuffing => HeuristicParams::Stuffing {
            n,
            c: args.c.unwrap_or(args.capacity),
        },
    };
    let drone = drone(&scenario, args.capacity, &args.motion);
    let point = evaluate_heuristic(&params, &scenario, &drone, InstantiateOptions { relabel: args.relabel })?;
    if !point.instantiation.exact {
        eprintln!("note: within-group ordering is a nearest-neighbor approximation");
    }
    let mut record = ResultRecord::new(&point.evaluation, &scenario);
    record.exact_instantiation = Some(point.instantiation.exact);
    print_json(&record)
}

fn run_pareto(args: ParetoArgs) -> privroute::Result<()> {
    let scenario = load_scenario(&args.scenario)?;
    let drone = drone(&scenario, args.capacity, &args.motion);
    let front = pareto_front(&scenario, &drone, args.objectives, args.decoy_budget)?;
    let mut rows = front_rows(&front, args.capacity, args.decoy_budget);
    if args.with_heuristics {
        for params in HeuristicParams::all_within(scenario.order_count(), args.capacity) {
            let point = evaluate_heuristic(&params, &scenario, &drone, InstantiateOptions::default())?;
            rows.push(ResultRow::from_evaluation(
                &point.evaluation,
                args.capacity,
                args.decoy_budget,
                None,
            ));
        }
    }
    write_csv(output(args.out.as_deref())?, &rows)?;
    eprintln!(
        "{} front points from {} routes ({}, avg-wait)",
        front.points.len(),
        front.routes_evaluated,
        args.objectives.name()
    );
    Ok(())
}

fn run_sweep(args: SweepArgs) -> privroute::Result<()> {
    let cells = min_avg_risk_sweep(args.n, args.capacity, args.decoys)?;
    let rows: Vec<ResultRow> = cells.iter().map(ResultRow::from_sweep).collect();
    write_csv(output(args.out.as_deref())?, &rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Eval(a) => run_eval(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Heuristic(a) => run_heuristic(a),
        Command::Pareto(a) => run_pareto(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Fixtures => fixtures::run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..5").unwrap(), 2..=5);
        assert_eq!(parse_range("2..=5").unwrap(), 2..=5);
        assert_eq!(parse_range("3").unwrap(), 3..=3);
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("a..b").is_err());
    }

    #[test]
    fn objectives() {
        assert_eq!(parse_objectives("avg-risk,avg-wait").unwrap(), RiskObjective::Average);
        assert_eq!(parse_objectives("avg-wait, worst-risk").unwrap(), RiskObjective::Worst);
        assert!(parse_objectives("avg-risk").is_err());
        assert!(parse_objectives("max-risk,avg-wait").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
