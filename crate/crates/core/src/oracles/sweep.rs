//! Full property audit of one market, and exhaustive sweeps over small
//! market families.

use serde::Serialize;

use super::{
    anonymity_audit_against, envy_free, permutations, sd_efficient, weak_sp_audit_with, AuditReport, MisreportCap,
    Witness,
};
use crate::decompose::{decompose, sample_index, Lottery};
use crate::eating::mps;
use crate::error::Result;
use crate::market::{validate_feasibility, Market, RandomAllocation};
use crate::polytope::delta_d_system;

#[derive(Debug, Clone, Serialize)]
pub struct MarketAudit {
    #[serde(skip)]
    pub allocation: RandomAllocation,
    /// Decomposition of `allocation`; empty when it is not implementable.
    #[serde(skip)]
    pub lottery: Lottery,
    pub steps: usize,
    pub global_min_steps: usize,
    pub lottery_parts: usize,
    pub reports: Vec<AuditReport>,
}

impl MarketAudit {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(AuditReport::passed)
    }

    pub fn report(&self, property: &str) -> Option<&AuditReport> {
        self.reports.iter().find(|r| r.property == property)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditReport> {
        self.reports.iter().filter(|r| !r.passed())
    }
}

/// Runs the mechanism and checks implementability, SD efficiency, envy
/// freeness, anonymity over every agent permutation (up to 6 agents),
/// weak strategyproofness (unit demand, up to 5 objects), the trace
/// invariants and the lottery decomposition.
pub fn audit_market(market: &Market) -> Result<MarketAudit> {
    let (mu, trace) = mps(market)?;
    let (n, k) = (market.num_agents(), market.num_objects());
    let mut reports = Vec::new();

    reports.push(match delta_d_system(market).violation(&mu) {
        None => AuditReport::pass("implementable", 1),
        Some(reason) => AuditReport::fail("implementable", 1, Witness::NotImplementable { reason }),
    });
    if !reports[0].passed() {
        return Ok(MarketAudit {
            allocation: mu,
            lottery: Lottery::default(),
            steps: trace.steps.len(),
            global_min_steps: 0,
            lottery_parts: 0,
            reports,
        });
    }

    let cert = sd_efficient(market, &mu)?;
    reports.push(match cert.improving_allocation {
        None => AuditReport::pass("sd_efficiency", 1),
        Some(allocation) => AuditReport::fail("sd_efficiency", 1, Witness::Improvement { allocation }),
    });
    reports.push(envy_free(market, &mu)?);

    if n <= 6 {
        let mut anon = AuditReport::pass("anonymity", 0);
        for pi in permutations(n).into_iter().skip(1) {
            let r = anonymity_audit_against(market, &mu, &pi)?;
            anon.checked += 1;
            if !r.passed() {
                anon.verdict = r.verdict;
                anon.witness = r.witness;
                break;
            }
        }
        reports.push(anon);
    }
    if market.demand() == 1 && k <= MisreportCap::default().max_objects {
        reports.push(weak_sp_audit_with(market, Some(&mu), MisreportCap::default())?);
    }

    let global_min_steps = trace.global_min_steps();
    let step_bound_ok = market.demand() > 1 || trace.steps.len() <= 2 * k + 2;
    let times_ok = trace.steps.windows(2).all(|w| w[0].end == w[1].start)
        && trace.steps.iter().all(|s| s.start <= s.end)
        && trace.steps.last().is_some_and(|s| s.end == trace.horizon);
    let trace_ok = trace.integrate(n, k) == mu && global_min_steps <= 1 && step_bound_ok && times_ok;
    reports.push(if trace_ok {
        AuditReport::pass("trace", 1)
    } else {
        AuditReport::fail(
            "trace",
            1,
            Witness::NotImplementable { reason: format!("{} steps, F set {} times", trace.steps.len(), global_min_steps) },
        )
    });

    let lottery = decompose(market, &mu)?;
    let sound = lottery.implements(market, &mu) && sample_index(&lottery, 7) == sample_index(&lottery, 7);
    reports.push(if sound {
        AuditReport::pass("decomposition", 1)
    } else {
        AuditReport::fail("decomposition", 1, Witness::NotImplementable { reason: "lottery does not reproduce μ".into() })
    });

    let lottery_parts = lottery.parts.len();
    Ok(MarketAudit { allocation: mu, lottery, steps: trace.steps.len(), global_min_steps, lottery_parts, reports })
}

/// Market family: `agents × objects`, common demand, and every quota
/// profile `0 ≤ m_j ≤ c_j ≤ min(max_cap, agents)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepParams {
    pub agents: usize,
    pub objects: usize,
    pub demand: u64,
    pub max_cap: u64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepSummary {
    pub markets: usize,
    pub infeasible_skipped: usize,
    pub failures: usize,
    pub max_steps: usize,
    /// The first failing market file and its failed reports.
    pub first_failure: Option<(serde_json::Value, Vec<AuditReport>)>,
}

/// Audits every feasible market with every strict preference profile.
/// `each` sees every audited market.
pub fn sweep(params: SweepParams, mut each: impl FnMut(&Market, &MarketAudit)) -> Result<SweepSummary> {
    let quotas: Vec<(u64, u64)> = (1..=params.max_cap.min(params.agents as u64))
        .flat_map(|c| (0..=c).map(move |m| (m, c)))
        .collect();
    let orders = permutations(params.objects);
    let mut summary = SweepSummary::default();

    for profile in product(quotas.len(), params.objects) {
        let q: Vec<(u64, u64)> = profile.iter().map(|&x| quotas[x]).collect();
        let probe = Market::anonymous(&q, params.demand, vec![orders[0].clone(); params.agents])?;
        let per_profile = orders.len().pow(params.agents as u32);
        if !validate_feasibility(&probe).feasible {
            summary.infeasible_skipped += per_profile;
            continue;
        }
        for prefs in product(orders.len(), params.agents) {
            let market = Market::anonymous(&q, params.demand, prefs.iter().map(|&p| orders[p].clone()).collect())?;
            let audit = audit_market(&market)?;
            summary.markets += 1;
            summary.max_steps = summary.max_steps.max(audit.steps);
            if !audit.passed() {
                summary.failures += 1;
                if summary.first_failure.is_none() {
                    summary.first_failure = Some((
                        serde_json::to_value(market.to_file()).unwrap_or_default(),
                        audit.failures().cloned().collect(),
                    ));
                }
            }
            each(&market, &audit);
        }
    }
    Ok(summary)
}

/// All tuples in `0..base` of length `len`, lexicographic.
fn product(base: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = base.pow(len as u32);
    (0..total).map(move |mut x| {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = x % base;
            x /= base;
        }
        out
    })
}
