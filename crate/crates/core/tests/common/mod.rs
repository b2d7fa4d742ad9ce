#![allow(dead_code)]

use std::path::PathBuf;

use mps_core::decompose::SplitMix64;
use mps_core::market::{parse_market, validate_feasibility, Market, RandomAllocation};
use mps_core::rational::{int, ratio, Rational};

pub fn fixture(name: &str) -> Market {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_market(&text).unwrap().0
}

pub fn matrix(rows: &[&[(i64, i64)]]) -> RandomAllocation {
    RandomAllocation::from_matrix(rows.iter().map(|r| r.iter().map(|&(p, q)| ratio(p, q)).collect()).collect())
}

/// Seeded generator for random markets and sub-allocations.
pub struct Gen(SplitMix64);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(SplitMix64::new(seed))
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.0.next_u64() % (hi - lo + 1)
    }

    pub fn coin(&mut self) -> bool {
        self.0.next_u64() & 1 == 1
    }

    pub fn shuffle<T>(&mut self, v: &mut [T]) {
        for i in (1..v.len()).rev() {
            let j = self.range(0, i as u64) as usize;
            v.swap(i, j);
        }
    }

    /// Random market with `n` agents, `k` objects and demand `d`; quotas
    /// are redrawn until the market is feasible.
    pub fn market_with(&mut self, n: usize, k: usize, d: u64) -> Market {
        loop {
            let quotas: Vec<(u64, u64)> = (0..k)
                .map(|_| {
                    let cap = self.range(1, n as u64);
                    let min = if self.range(0, 2) == 0 { self.range(0, cap) } else { 0 };
                    (min, cap)
                })
                .collect();
            let prefs = (0..n)
                .map(|_| {
                    let mut p: Vec<usize> = (0..k).collect();
                    self.shuffle(&mut p);
                    p
                })
                .collect();
            let market = Market::anonymous(&quotas, d, prefs).unwrap();
            if validate_feasibility(&market).feasible {
                return market;
            }
        }
    }

    /// Random feasible market with `|N|, |O| ≤ max` and `d ≤ |O|`.
    pub fn market(&mut self, max: usize, d: u64) -> Market {
        let n = self.range(1, max as u64) as usize;
        let k = self.range(d.max(1), (max as u64).max(d)) as usize;
        self.market_with(n, k, d)
    }

    /// Random matrix with entries in `[0, 1]` and row sums at most `d`.
    /// Small denominators keep boundary cases frequent.
    pub fn sub_allocation(&mut self, market: &Market) -> RandomAllocation {
        let (n, k, d) = (market.num_agents(), market.num_objects(), market.demand() as i64);
        let q = self.range(1, 4) as i64;
        let scale = self.range(1, 4) as i64;
        let rows = (0..n)
            .map(|_| {
                let mut row: Vec<Rational> =
                    (0..k).map(|_| if self.coin() { int(0) } else { ratio(self.range(0, q as u64) as i64, q) }).collect();
                let sum: Rational = row.iter().sum();
                if sum > int(d) {
                    for x in &mut row {
                        *x = &*x * int(d) / &sum;
                    }
                }
                for x in &mut row {
                    *x = &*x * ratio(scale, 4);
                }
                row
            })
            .collect();
        RandomAllocation::from_matrix(rows)
    }
}

pub mod strategy {
    use mps_core::market::{validate_feasibility, Market, RandomAllocation};
    use mps_core::rational::ratio;
    use proptest::prelude::*;

    /// Any syntactically valid market; may be infeasible. Half of the
    /// minimums are zero so that feasible draws stay common.
    pub fn any_market(max_agents: usize, max_objects: usize, d: u64) -> impl Strategy<Value = Market> {
        let min_objects = d.max(1) as usize;
        (1..=max_agents, min_objects..=max_objects.max(min_objects))
            .prop_flat_map(move |(n, k)| {
                let quota = (1..=n as u64).prop_flat_map(|c| (prop_oneof![Just(0), 0..=c], Just(c)));
                let order: Vec<usize> = (0..k).collect();
                (proptest::collection::vec(quota, k), proptest::collection::vec(Just(order).prop_shuffle(), n))
            })
            .prop_map(move |(quotas, prefs)| Market::anonymous(&quotas, d, prefs).expect("valid by construction"))
    }

    pub fn market(max_agents: usize, max_objects: usize, d: u64) -> impl Strategy<Value = Market> {
        any_market(max_agents, max_objects, d).prop_filter("infeasible", |m| validate_feasibility(m).feasible)
    }

    /// A market together with a matrix in `[0, 1]` whose rows sum to at most `d`.
    pub fn market_and_sub_allocation(
        max_agents: usize,
        max_objects: usize,
        d: u64,
    ) -> impl Strategy<Value = (Market, RandomAllocation)> {
        market(max_agents, max_objects, d).prop_flat_map(|m| {
            let (n, k, d) = (m.num_agents(), m.num_objects(), m.demand() as i64);
            let row = proptest::collection::vec(0i64..=4, k);
            (Just(m), proptest::collection::vec(row, n), 1i64..=4).prop_map(move |(m, rows, denom)| {
                let rows = rows
                    .into_iter()
                    .map(|r| {
                        let total: i64 = r.iter().map(|&x| x.min(denom)).sum();
                        // Scale the row down when it exceeds the demand.
                        let (num, den) = if total > d * denom { (d * denom, total) } else { (1, 1) };
                        r.into_iter().map(|x| ratio(x.min(denom), denom) * ratio(num, den)).collect()
                    })
                    .collect();
                (m, RandomAllocation::from_matrix(rows))
            })
        })
    }
}
