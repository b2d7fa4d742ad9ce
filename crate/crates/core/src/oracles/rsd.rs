//! Random serial dictatorship baseline with feasibility-aware picks.

use num_traits::{One, Zero};

use super::permutations;
use crate::error::{Error, Result};
use crate::market::{require_feasible, Market, RandomAllocation};
use crate::polytope::{solve_circulation, CirculationNetwork};
use crate::rational::{int, Rational};

pub fn rsd(market: &Market) -> Result<RandomAllocation> {
    rsd_with_cap(market, 7)
}

/// Averages serial dictatorship over all `|N|!` priority orders. Each agent
/// takes their best object with spare capacity whose choice leaves the rest
/// of the market completable.
pub fn rsd_with_cap(market: &Market, max_agents: usize) -> Result<RandomAllocation> {
    if market.demand() != 1 {
        return Err(Error::RequiresUnitDemand(market.demand()));
    }
    if market.num_agents() > max_agents {
        return Err(Error::SizeCap(format!("priority enumeration limited to {max_agents} agents")));
    }
    require_feasible(market)?;
    let (n, k) = (market.num_agents(), market.num_objects());
    let mut counts = vec![vec![0u64; k]; n];
    let orders = permutations(n);
    for order in &orders {
        let mut taken = vec![0u64; k];
        for (pos, &i) in order.iter().enumerate() {
            let left = (n - pos - 1) as u64;
            let pick = market
                .prefs(i)
                .iter()
                .copied()
                .find(|&j| {
                    taken[j] < market.cap(j) && {
                        taken[j] += 1;
                        let ok = completable(market, &taken, left);
                        taken[j] -= 1;
                        ok
                    }
                })
                .ok_or_else(|| Error::Internal(format!("agent {i} has no feasible pick")))?;
            taken[pick] += 1;
            counts[i][pick] += 1;
        }
    }
    let total = int(orders.len() as i64);
    Ok(RandomAllocation::from_matrix(
        counts.iter().map(|r| r.iter().map(|&c| int(c as i64) / &total).collect()).collect(),
    ))
}

/// Whether `left` more unit-demand agents can be placed given `taken`.
fn completable(market: &Market, taken: &[u64], left: u64) -> bool {
    let k = market.num_objects();
    let n = left as usize;
    // Nodes: s = 0, t = 1, remaining agents, objects.
    let mut net = CirculationNetwork::new(2 + n + k);
    for a in 0..n {
        net.add_arc(0, 2 + a, Rational::one(), Rational::one());
        for j in 0..k {
            net.add_arc(2 + a, 2 + n + j, Rational::zero(), Rational::one());
        }
    }
    for (j, &t) in taken.iter().enumerate() {
        let lo = market.min(j).saturating_sub(t);
        let hi = market.cap(j).saturating_sub(t);
        net.add_arc(2 + n + j, 1, int(lo as i64), int(hi as i64));
    }
    net.add_arc(1, 0, int(left as i64), int(left as i64));
    solve_circulation(&net).is_some()
}
