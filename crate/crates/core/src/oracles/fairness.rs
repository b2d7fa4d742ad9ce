use super::{AuditReport, Witness};
use crate::eating::mps;
use crate::error::Result;
use crate::fosd::{fosd_compare, FosdResult};
use crate::market::{Market, RandomAllocation};

/// No agent's row is strictly dominated, in their own ranking, by another row.
pub fn envy_free(market: &Market, mu: &RandomAllocation) -> Result<AuditReport> {
    mu.check_shape(market)?;
    let n = market.num_agents();
    let mut checked = 0;
    for i in 0..n {
        for other in (0..n).filter(|&o| o != i) {
            checked += 1;
            if fosd_compare(market.prefs(i), mu.row(i), mu.row(other))? == FosdResult::StrictlyDominated {
                return Ok(AuditReport::fail(
                    "envy_free",
                    checked,
                    Witness::Envy { agent: i, envied: other, own: mu.row(i).to_vec(), other: mu.row(other).to_vec() },
                ));
            }
        }
    }
    Ok(AuditReport::pass("envy_free", checked))
}

/// Runs the mechanism on the profile re-indexed by `pi` and checks that the
/// output is the same re-indexing of the original output.
pub fn anonymity_audit(market: &Market, pi: &[usize]) -> Result<AuditReport> {
    let (mu, _) = mps(market)?;
    anonymity_audit_against(market, &mu, pi)
}

/// As [`anonymity_audit`], with the unpermuted output supplied.
pub fn anonymity_audit_against(market: &Market, mu: &RandomAllocation, pi: &[usize]) -> Result<AuditReport> {
    let (permuted, _) = mps(&market.permute_agents(pi))?;
    Ok(if permuted == mu.permute_rows(pi) {
        AuditReport::pass("anonymity", 1)
    } else {
        AuditReport::fail("anonymity", 1, Witness::Permutation { pi: pi.to_vec() })
    })
}
