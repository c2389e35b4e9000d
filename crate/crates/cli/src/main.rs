//! `ychan`: deterministic demos, region evaluation, optimization sweeps,
//! inequality audits and lattice Monte Carlo runs.
//!
//! Exit codes: 0 success, 2 input error, 3 infeasible or failed verification.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use ychan::dyc::{plan_rates, run_trace, search_plan, verify_plan_with, DycConfig, DycMessageSet, Strategies};
use ychan::lattice::{error_curve_csv, monte_carlo_sum_decode_with, NestedLatticeCode};
use ychan::model::PAIRS;
use ychan::region::{
    check_feasibility, corollary_region_contains, evaluate, maximize_objective, pinned_cases, proxy_contains,
    sweep_region, weight_directions, Allocation, AllocationInput, OptimizerOptions, Substream,
};
use ychan::{ChannelConfig, DycError, Execution, RateTuple};

#[derive(Parser)]
#[command(name = "ychan", version, about = "Y-channel rate-region and simulation toolkit")]
struct Cli {
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan, simulate and verify a deterministic Y-channel exchange.
    DycDemo(DycDemoArgs),
    /// Evaluate the achievable rates of one power allocation as CSV.
    Region(RegionArgs),
    /// Maximize a weighted sum rate over power allocations.
    Optimize(OptimizeArgs),
    /// Trace the region boundary along many weight directions as CSV.
    Sweep(SweepArgs),
    /// Check a rate tuple against the gap-form outer inequalities.
    Corollary(CorollaryArgs),
    /// Empirical sum-decoding error rate of a nested lattice code.
    LatticeMc(LatticeArgs),
}

#[derive(Args)]
struct DycDemoArgs {
    /// Relay levels reached by each user, n1 >= n2 >= n3.
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 4, 3])]
    levels: Vec<usize>,
    /// Bits per pair in the order R12,R13,R21,R23,R31,R32.
    #[arg(long, value_delimiter = ',', default_values_t = [0u32, 2, 2, 1, 0, 2])]
    rates: Vec<u32>,
    /// Verify every bit pattern instead of one random trace.
    #[arg(long)]
    exhaustive: bool,
    /// Search for a plan using only bi-directional and uni-directional flows.
    #[arg(long)]
    no_cyclic: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random patterns checked when the tuple is too large to enumerate.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Also write the trace JSON here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct RegionArgs {
    /// Channel JSON with fields h1, h2, h3, P.
    #[arg(long, required_unless_present = "pin")]
    config: Option<PathBuf>,
    /// Allocation JSON with optional "uplink" and "downlink" objects; zero when omitted.
    #[arg(long)]
    alloc: Option<PathBuf>,
    /// Evaluate the three built-in fidelity cases instead.
    #[arg(long, conflicts_with_all = ["config", "alloc"])]
    pin: bool,
    /// CSV destination, stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Six nonnegative weights for R12,R13,R21,R23,R31,R32.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0f64; 6])]
    weights: Vec<f64>,
    /// Objective evaluations, the baseline included.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON destination, stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of weight directions: six unit vectors, all ones, then random.
    #[arg(long, default_value_t = 16)]
    directions: usize,
    /// Objective evaluations per direction.
    #[arg(long, default_value_t = 4_000)]
    budget: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorollaryArgs {
    #[arg(long)]
    config: PathBuf,
    /// Rate tuple JSON with fields R12..R32.
    #[arg(long)]
    tuple: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LatticeArgs {
    /// Nesting ratio of fine to coarse lattice.
    #[arg(long, default_value_t = 4)]
    q: u64,
    /// Fine lattice scale.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// SNR grid in dB, `inf` for the noiseless point.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = default_snr_grid())]
    snr_db: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn default_snr_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=16).map(|k| -5.0 + 2.5 * k as f64).collect();
    grid.push(f64::INFINITY);
    grid
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Infeasible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }
}

type CliResult = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let loc = if at == "." { String::new() } else { format!(" at {at}") };
        Failure::Input(format!("{}{loc}: {}", path.display(), e.inner()))
    })
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn expect_len<T>(flag: &str, v: &[T], n: usize) -> CliResult {
    if v.len() == n {
        Ok(())
    } else {
        Err(Failure::Input(format!("--{flag} takes {n} comma-separated values, got {}", v.len())))
    }
}

fn dyc_demo(args: &DycDemoArgs, exec: Execution) -> CliResult {
    expect_len("levels", &args.levels, 3)?;
    expect_len("rates", &args.rates, 6)?;
    let cfg = DycConfig::new(args.levels[0], args.levels[1], args.levels[2]).map_err(input)?;
    let rates = RateTuple::from_array(std::array::from_fn(|i| args.rates[i]));
    let plan = if args.no_cyclic {
        search_plan(&cfg, &rates, Strategies::NO_CYCLIC).ok_or_else(|| {
            Failure::Infeasible("no plan without the cyclic strategy reaches this tuple".into())
        })?
    } else {
        plan_rates(&cfg, &rates).map_err(|e| match e {
            DycError::Infeasible(m) => Failure::Infeasible(m),
            other => Failure::Infeasible(other.to_string()),
        })?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let trace = run_trace(&plan, &DycMessageSet::random(&rates, &mut rng)).map_err(|e| Failure::Infeasible(e.to_string()))?;
    let verification = if args.exhaustive {
        Some(verify_plan_with(exec, &plan, args.trials, args.seed).map_err(|e| Failure::Infeasible(e.to_string()))?)
    } else {
        None
    };
    if let Some(p) = &args.trace {
        emit(Some(p), &to_json(&trace))?;
    }
    let passed = trace.success && verification.as_ref().is_none_or(|v| v.passed);
    emit(None, &to_json(&serde_json::json!({ "trace": trace, "verification": verification, "passed": passed })))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Infeasible("recovery failed".into()))
    }
}

/// Appends the CSV rows for one configuration; returns whether it is feasible.
fn region_rows(csv: &mut String, case: &str, cfg: &ChannelConfig, alloc: &Allocation) -> Result<bool, Failure> {
    let up = alloc.coupled(cfg).map_err(input)?;
    let eval = evaluate(cfg, &up, &alloc.downlink);
    let mut row = |section: &str, name: &str, ub: Option<f64>, db: Option<f64>, value: f64| {
        let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        writeln!(csv, "{case},{section},{name},{},{},{value}", cell(ub), cell(db)).unwrap();
    };
    for (name, v) in eval.uplink.constraints() {
        row("uplink", name, None, None, v);
    }
    for (name, v) in eval.downlink.constraints() {
        row("downlink", name, None, None, v);
    }
    let (ub, db) = (eval.uplink.substreams(), eval.downlink.substreams());
    for s in Substream::ALL {
        row("substream", s.name(), Some(ub.get(s)), Some(db.get(s)), eval.effective.get(s));
    }
    for (&(i, j), v) in PAIRS.iter().zip(eval.rates.to_array()) {
        row("rate", &format!("R{}{}", i.number(), j.number()), None, None, v);
    }
    let feas = check_feasibility(&up, &alloc.downlink, cfg);
    for (name, v) in ["P1", "P2", "P3", "downlink"].iter().zip(feas.slack) {
        row("feasibility", name, None, None, v);
    }
    for c in proxy_contains(cfg, &eval.rates).inequalities {
        row("proxy", &c.label, None, None, c.slack);
    }
    Ok(feas.feasible)
}

fn region(args: &RegionArgs) -> CliResult {
    let mut csv = String::from("case,section,name,uplink_bound,downlink_bound,value\n");
    let mut infeasible = Vec::new();
    if args.pin {
        for case in pinned_cases() {
            if !region_rows(&mut csv, case.name, &case.config, &case.allocation)? {
                infeasible.push(case.name.to_string());
            }
        }
    } else {
        let cfg: ChannelConfig = read_json(args.config.as_deref().expect("required without --pin"))?;
        let alloc = match &args.alloc {
            Some(p) => read_json::<AllocationInput>(p)?.resolve(&cfg).map_err(input)?.0,
            None => Allocation::default(),
        };
        if !region_rows(&mut csv, "input", &cfg, &alloc)? {
            infeasible.push("input".to_string());
        }
    }
    emit(args.out.as_deref(), &csv)?;
    if infeasible.is_empty() {
        Ok(())
    } else {
        Err(Failure::Infeasible(format!("allocation exceeds the power budget: {}", infeasible.join(", "))))
    }
}

fn weights(v: &[f64]) -> Result<[f64; 6], Failure> {
    expect_len("weights", v, 6)?;
    Ok(std::array::from_fn(|i| v[i]))
}

fn optimize(args: &OptimizeArgs, exec: Execution) -> CliResult {
    if args.budget == 0 || args.restarts == 0 {
        return Err(Failure::Input("budget and restarts must be at least 1".into()));
    }
    let cfg: ChannelConfig = read_json(&args.config)?;
    let opts = OptimizerOptions { budget: args.budget, seed: args.seed, restarts: args.restarts, execution: exec };
    let best = maximize_objective(&cfg, &weights(&args.weights)?, &opts).map_err(input)?;
    emit(args.out.as_deref(), &to_json(&best))
}

fn sweep(args: &SweepArgs, exec: Execution) -> CliResult {
    if args.budget == 0 || args.restarts == 0 {
        return Err(Failure::Input("budget and restarts must be at least 1".into()));
    }
    let cfg: ChannelConfig = read_json(&args.config)?;
    let opts = OptimizerOptions { budget: args.budget, seed: args.seed, restarts: args.restarts, execution: exec };
    let points = sweep_region(&cfg, &weight_directions(args.directions, args.seed), &opts).map_err(input)?;
    let mut csv = String::from("w12,w13,w21,w23,w31,w32,R12,R13,R21,R23,R31,R32,objective\n");
    for p in points {
        let cells: Vec<String> =
            p.weights.iter().chain(p.rates.to_array().iter()).chain([p.objective].iter()).map(f64::to_string).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    emit(args.out.as_deref(), &csv)
}

#[derive(Serialize)]
struct InequalityRow {
    label: String,
    lhs: f64,
    rhs: f64,
    slack: f64,
    proxy_rhs: f64,
    proxy_slack: f64,
}

#[derive(Serialize)]
struct CorollaryReport {
    member: bool,
    proxy_member: bool,
    inequalities: Vec<InequalityRow>,
    violated: Vec<String>,
}

fn corollary(args: &CorollaryArgs) -> CliResult {
    let cfg: ChannelConfig = read_json(&args.config)?;
    let tuple: RateTuple = read_json(&args.tuple)?;
    tuple.validate().map_err(input)?;
    let gap = corollary_region_contains(&cfg, &tuple);
    let proxy = proxy_contains(&cfg, &tuple);
    let violated = gap.violated().into_iter().map(|k| gap.inequalities[k].label.clone()).collect();
    let inequalities = gap
        .inequalities
        .iter()
        .zip(&proxy.inequalities)
        .map(|(g, p)| InequalityRow {
            label: g.label.clone(),
            lhs: g.lhs,
            rhs: g.rhs,
            slack: g.slack,
            proxy_rhs: p.rhs,
            proxy_slack: p.slack,
        })
        .collect();
    let report = CorollaryReport { member: gap.member, proxy_member: proxy.member, inequalities, violated };
    emit(args.out.as_deref(), &to_json(&report))
}

fn lattice_mc(args: &LatticeArgs, exec: Execution) -> CliResult {
    if args.trials == 0 {
        return Err(Failure::Input("trials must be at least 1".into()));
    }
    if let Some(bad) = args.snr_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
        return Err(Failure::Input(format!("invalid SNR {bad}")));
    }
    let code = NestedLatticeCode::new(args.dim, args.gamma, args.q).map_err(input)?;
    let points = monte_carlo_sum_decode_with(exec, &code, &args.snr_db, args.trials, args.seed);
    emit(args.out.as_deref(), &error_curve_csv(&points))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let result = match &cli.command {
        Command::DycDemo(a) => dyc_demo(a, exec),
        Command::Region(a) => region(a),
        Command::Optimize(a) => optimize(a, exec),
        Command::Sweep(a) => sweep(a, exec),
        Command::Corollary(a) => corollary(a),
        Command::LatticeMc(a) => lattice_mc(a, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(m) => eprintln!("error: {m}"),
                Failure::Infeasible(m) => eprintln!("infeasible: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
