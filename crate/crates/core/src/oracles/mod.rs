//! Independent verifiers for the mechanism's claimed properties.
//!
//! Everything here is brute force or LP based and deliberately shares no
//! code path with the eating engines beyond calling them as black boxes.

mod efficiency;
mod enumerate;
mod fairness;
mod incentives;
mod rsd;
mod sweep;

use serde::Serialize;

use crate::market::{Market, RandomAllocation};
use crate::rational::{self, Rational};

pub use efficiency::{sd_efficient, LpCertificate, LpStatus};
pub use enumerate::{enumerate_allowable, EnumerationCap};
pub use fairness::{anonymity_audit, anonymity_audit_against, envy_free};
pub use incentives::{weak_sp_audit, weak_sp_audit_with, MisreportCap};
pub use rsd::{rsd, rsd_with_cap};
pub use sweep::{audit_market, sweep, MarketAudit, SweepParams, SweepSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Counterexample attached to a failed audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `agent` strictly prefers `envied`'s lottery to their own.
    Envy {
        agent: usize,
        envied: usize,
        #[serde(serialize_with = "ser_row")]
        own: Vec<Rational>,
        #[serde(serialize_with = "ser_row")]
        other: Vec<Rational>,
    },
    /// Reporting `report` gives `agent` a lottery that strictly dominates
    /// the truthful one.
    Misreport {
        agent: usize,
        report: Vec<usize>,
        #[serde(serialize_with = "ser_row")]
        truthful: Vec<Rational>,
        #[serde(serialize_with = "ser_row")]
        manipulated: Vec<Rational>,
    },
    /// Running on the permuted profile did not permute the output.
    Permutation { pi: Vec<usize> },
    /// An implementable allocation every agent weakly prefers.
    Improvement { allocation: RandomAllocation },
    NotImplementable { reason: String },
}

fn ser_row<S: serde::Serializer>(row: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(row.iter().map(rational::format))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub property: String,
    pub verdict: Verdict,
    /// Number of cases examined.
    pub checked: usize,
    pub witness: Option<Witness>,
}

impl AuditReport {
    pub fn pass(property: &str, checked: usize) -> Self {
        AuditReport { property: property.into(), verdict: Verdict::Pass, checked, witness: None }
    }

    pub fn fail(property: &str, checked: usize, witness: Witness) -> Self {
        AuditReport { property: property.into(), verdict: Verdict::Fail, checked, witness: Some(witness) }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("successor exists");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Renders a market's matrix as id-labelled rows for reports.
pub fn labelled_rows(market: &Market, mu: &RandomAllocation) -> Vec<(String, Vec<String>)> {
    market
        .agents()
        .iter()
        .zip(mu.rows())
        .map(|(a, r)| (a.clone(), r.iter().map(rational::format).collect()))
        .collect()
}
