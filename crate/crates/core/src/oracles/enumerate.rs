use crate::error::{Error, Result};
use crate::market::{DeterministicAllocation, Market};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCap {
    pub max_agents: usize,
    pub max_objects: usize,
}

impl Default for EnumerationCap {
    fn default() -> Self {
        EnumerationCap { max_agents: 5, max_objects: 5 }
    }
}

/// Every allowable deterministic allocation, by backtracking over each
/// agent's `d`-subset of objects with capacity pruning.
pub fn enumerate_allowable(market: &Market, cap: EnumerationCap) -> Result<Vec<DeterministicAllocation>> {
    if market.num_agents() > cap.max_agents || market.num_objects() > cap.max_objects {
        return Err(Error::SizeCap(format!(
            "enumeration limited to {} agents and {} objects",
            cap.max_agents, cap.max_objects
        )));
    }
    let k = market.num_objects();
    let subsets = subsets_of_size(k, market.demand() as usize);
    let mut counts = vec![0u64; k];
    let mut chosen: Vec<usize> = Vec::with_capacity(market.num_agents());
    let mut out = Vec::new();
    walk(market, &subsets, &mut counts, &mut chosen, &mut out);
    Ok(out)
}

fn walk(
    market: &Market,
    subsets: &[Vec<usize>],
    counts: &mut [u64],
    chosen: &mut Vec<usize>,
    out: &mut Vec<DeterministicAllocation>,
) {
    let n = market.num_agents();
    let k = market.num_objects();
    if chosen.len() == n {
        if (0..k).all(|j| counts[j] >= market.min(j)) {
            let assignment: Vec<Vec<usize>> = chosen.iter().map(|&s| subsets[s].clone()).collect();
            out.push(DeterministicAllocation::from_assignment(k, &assignment));
        }
        return;
    }
    // Remaining agents can still cover each missing minimum.
    let remaining = (n - chosen.len()) as u64;
    if (0..k).any(|j| counts[j] + remaining < market.min(j)) {
        return;
    }
    for (s, set) in subsets.iter().enumerate() {
        if set.iter().any(|&j| counts[j] >= market.cap(j)) {
            continue;
        }
        for &j in set {
            counts[j] += 1;
        }
        chosen.push(s);
        walk(market, subsets, counts, chosen, out);
        chosen.pop();
        for &j in set {
            counts[j] -= 1;
        }
    }
}

fn subsets_of_size(k: usize, d: usize) -> Vec<Vec<usize>> {
    (0u32..1 << k)
        .filter(|m| m.count_ones() as usize == d)
        .map(|m| (0..k).filter(|&j| m >> j & 1 == 1).collect())
        .collect()
}
