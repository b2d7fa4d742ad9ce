//! `mps`: solve, decompose, sample and audit random assignment markets with
//! minimum quotas. Every command prints a single JSON document on stdout.
//!
//! Exit status: 0 on success or a passing audit, 1 on a failing audit,
//! 2 on any input or validation error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use mps_core::decompose::{decompose, sample_index, AssignmentJson};
use mps_core::eating::{mps_general, mps_unit, EatingTrace, TraceJson};
use mps_core::fosd::{fosd_compare, FosdResult};
use mps_core::market::{parse_market, Market, RandomAllocation};
use mps_core::oracles::{
    audit_market, enumerate_allowable, envy_free, rsd, sd_efficient, sweep, AuditReport, EnumerationCap, LpCertificate,
    SweepParams, SweepSummary, Witness,
};
use mps_core::polytope::{delta_d_system, lcs_system_general, lcs_system_unit, Pruning, SystemCap, SystemJson};
use mps_core::rational;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "mps", version, about = "Minimums probabilistic serial random assignment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the mechanism and print the random allocation.
    Solve {
        market: PathBuf,
        /// Include the eating trace.
        #[arg(long)]
        trace: bool,
        /// Use the general-demand engine even when d = 1.
        #[arg(long)]
        general_d: bool,
    },
    /// Decompose the mechanism's output (or a given allocation) into a lottery.
    Decompose {
        market: PathBuf,
        /// Allocation file: a matrix of "p/q" strings or `solve` output.
        #[arg(long)]
        allocation: Option<PathBuf>,
        #[arg(long)]
        general_d: bool,
    },
    /// Draw one deterministic assignment from the lottery.
    Sample {
        market: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        general_d: bool,
    },
    /// Audit the mechanism on one market, a given allocation, or a sweep.
    Audit {
        /// Market file; omit with --sweep.
        #[arg(required_unless_present = "sweep")]
        market: Option<PathBuf>,
        #[arg(long, conflicts_with = "sweep")]
        allocation: Option<PathBuf>,
        /// Include the completable-sub-allocation inequality system.
        #[arg(long)]
        emit_system: bool,
        /// Audit every feasible market of the given shape.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=6))]
        agents: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=5))]
        objects: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        demand: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        max_cap: u64,
    },
    /// Brute-force oracles: allowable-allocation enumeration and the SD-efficiency LP.
    Oracle {
        market: PathBuf,
        #[arg(long)]
        allocation: Option<PathBuf>,
        /// List every allowable allocation, not just the count.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        max_agents: u64,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        max_objects: u64,
    },
    /// Compare the mechanism with random serial dictatorship agent by agent.
    Compare { market: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Audit(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Pretty-printed JSON in struct field order.
type Outcome = Result<String, Failure>;

fn load_market(path: &Path) -> Result<Market, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let (market, _warnings) = parse_market(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    info!("{}: {} agents, {} objects, d = {}", path.display(), market.num_agents(), market.num_objects(), market.demand());
    Ok(market)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AllocationFile {
    Solved { allocation: RandomAllocation },
    Matrix(RandomAllocation),
}

fn load_allocation(path: &Path, market: &Market) -> Result<RandomAllocation, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let mu = match serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))? {
        AllocationFile::Solved { allocation } | AllocationFile::Matrix(allocation) => allocation,
    };
    mu.check_shape(market)?;
    Ok(mu)
}

fn run_engine(market: &Market, general_d: bool) -> Result<(RandomAllocation, EatingTrace), Failure> {
    Ok(if general_d || market.demand() > 1 { mps_general(market)? } else { mps_unit(market)? })
}

fn to_json(v: impl Serialize) -> Outcome {
    serde_json::to_string_pretty(&v).map_err(|e| Failure::Input(e.to_string()))
}

#[derive(Serialize)]
struct Solved<'a> {
    agents: &'a [String],
    objects: Vec<&'a str>,
    allocation: &'a RandomAllocation,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<TraceJson>,
}

fn object_ids(market: &Market) -> Vec<&str> {
    market.objects().iter().map(|o| o.id.as_str()).collect()
}

fn solve(path: &Path, trace: bool, general_d: bool) -> Outcome {
    let market = load_market(path)?;
    let (mu, t) = run_engine(&market, general_d)?;
    to_json(Solved {
        agents: market.agents(),
        objects: object_ids(&market),
        allocation: &mu,
        trace: trace.then(|| t.to_json(&market)),
    })
}

fn decompose_cmd(path: &Path, allocation: Option<&Path>, general_d: bool) -> Outcome {
    let market = load_market(path)?;
    let mu = match allocation {
        Some(p) => load_allocation(p, &market)?,
        None => run_engine(&market, general_d)?.0,
    };
    let lottery = decompose(&market, &mu)?;
    to_json(lottery.to_json(&market))
}

#[derive(Serialize)]
struct Sampled<'a> {
    seed: u64,
    part: usize,
    #[serde(with = "rational::serde_str")]
    weight: rational::Rational,
    assignment: AssignmentJson<'a>,
}

fn sample_cmd(path: &Path, seed: u64, general_d: bool) -> Outcome {
    let market = load_market(path)?;
    let (mu, _) = run_engine(&market, general_d)?;
    let lottery = decompose(&market, &mu)?;
    let part = sample_index(&lottery, seed);
    let chosen = &lottery.parts[part];
    to_json(Sampled { seed, part, weight: chosen.weight.clone(), assignment: AssignmentJson(&chosen.alloc, &market) })
}

#[derive(Serialize)]
struct Audited {
    allocation: RandomAllocation,
    reports: Vec<AuditReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    system: Option<SystemJson>,
}

fn audit_allocation(market: &Market, mu: &RandomAllocation) -> Result<Vec<AuditReport>, Failure> {
    let mut reports = Vec::new();
    match delta_d_system(market).violation(mu) {
        Some(reason) => reports.push(AuditReport::fail("implementable", 1, Witness::NotImplementable { reason })),
        None => {
            reports.push(AuditReport::pass("implementable", 1));
            let cert = sd_efficient(market, mu)?;
            reports.push(match cert.improving_allocation {
                None => AuditReport::pass("sd_efficiency", 1),
                Some(allocation) => AuditReport::fail("sd_efficiency", 1, Witness::Improvement { allocation }),
            });
        }
    }
    reports.push(envy_free(market, mu)?);
    Ok(reports)
}

fn audit(path: &Path, allocation: Option<&Path>, emit_system: bool) -> Outcome {
    let market = load_market(path)?;
    let (mu, reports) = match allocation {
        Some(p) => {
            let mu = load_allocation(p, &market)?;
            let reports = audit_allocation(&market, &mu)?;
            (mu, reports)
        }
        None => {
            let audit = audit_market(&market)?;
            (audit.allocation, audit.reports)
        }
    };
    let system = if !emit_system {
        None
    } else if market.demand() == 1 {
        Some(lcs_system_unit(&market)?.to_json(&market))
    } else {
        Some(lcs_system_general(&market, SystemCap::default(), Pruning::Dominated)?.to_json(&market))
    };
    let failed = reports.iter().filter(|r| !r.passed()).map(|r| r.property.clone()).collect::<Vec<_>>();
    let value = to_json(Audited { allocation: mu, reports, system })?;
    if failed.is_empty() {
        Ok(value)
    } else {
        print_json(&value);
        Err(Failure::Audit(format!("failed: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct Swept {
    params: SweepParams,
    summary: SweepSummary,
}

fn audit_sweep(params: SweepParams) -> Outcome {
    let summary = sweep(params, |_, _| {})?;
    let failures = summary.failures;
    let value = to_json(Swept { params, summary })?;
    if failures == 0 {
        Ok(value)
    } else {
        print_json(&value);
        Err(Failure::Audit(format!("{failures} markets failed")))
    }
}

#[derive(Serialize)]
struct OracleOut<'a> {
    allowable_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    allowable: Option<Vec<AssignmentJson<'a>>>,
    allocation: RandomAllocation,
    efficiency: LpCertificate,
}

fn oracle(path: &Path, allocation: Option<&Path>, list: bool, cap: EnumerationCap) -> Outcome {
    let market = load_market(path)?;
    let all = enumerate_allowable(&market, cap)?;
    let mu = match allocation {
        Some(p) => load_allocation(p, &market)?,
        None => run_engine(&market, false)?.0,
    };
    let efficiency = sd_efficient(&market, &mu)?;
    to_json(OracleOut {
        allowable_count: all.len(),
        allowable: list.then(|| all.iter().map(|a| AssignmentJson(a, &market)).collect()),
        allocation: mu,
        efficiency,
    })
}

#[derive(Serialize)]
struct AgentVerdict<'a> {
    agent: &'a str,
    verdict: &'static str,
}

#[derive(Serialize)]
struct Compared<'a> {
    agents: &'a [String],
    objects: Vec<&'a str>,
    mps: RandomAllocation,
    rsd: RandomAllocation,
    verdicts: Vec<AgentVerdict<'a>>,
}

fn compare(path: &Path) -> Outcome {
    let market = load_market(path)?;
    let (mu, _) = mps_unit(&market)?;
    let nu = rsd(&market)?;
    let verdicts = (0..market.num_agents())
        .map(|i| {
            let verdict = match fosd_compare(market.prefs(i), mu.row(i), nu.row(i))? {
                FosdResult::StrictlyDominates => "MPS dominates RSD",
                FosdResult::StrictlyDominated => "RSD dominates MPS",
                FosdResult::Equal => "equal",
                FosdResult::Incomparable => "incomparable",
            };
            Ok(AgentVerdict { agent: &market.agents()[i], verdict })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    to_json(Compared { agents: market.agents(), objects: object_ids(&market), mps: mu, rsd: nu, verdicts })
}

/// Writes to stdout, ignoring a closed pipe.
fn print_json(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve { market, trace, general_d } => solve(&market, trace, general_d),
        Command::Decompose { market, allocation, general_d } => decompose_cmd(&market, allocation.as_deref(), general_d),
        Command::Sample { market, seed, general_d } => sample_cmd(&market, seed, general_d),
        Command::Audit { sweep: true, agents, objects, demand, max_cap, emit_system, .. } => {
            if emit_system {
                return Err(Failure::Input("--emit-system needs a market file".into()));
            }
            audit_sweep(SweepParams { agents: agents as usize, objects: objects as usize, demand, max_cap })
        }
        Command::Audit { market, allocation, emit_system, .. } => {
            let market = market.ok_or_else(|| Failure::Input("missing market file".into()))?;
            audit(&market, allocation.as_deref(), emit_system)
        }
        Command::Oracle { market, allocation, list, max_agents, max_objects } => oracle(
            &market,
            allocation.as_deref(),
            list,
            EnumerationCap { max_agents: max_agents as usize, max_objects: max_objects as usize },
        ),
        Command::Compare { market } => compare(&market),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(value) => {
            print_json(&value);
            ExitCode::SUCCESS
        }
        Err(Failure::Audit(msg)) => {
            eprintln!("audit failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
