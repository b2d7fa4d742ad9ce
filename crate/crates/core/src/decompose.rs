//! Writing an implementable random allocation as a lottery over allowable
//! deterministic allocations, and drawing from that lottery.
//!
//! Extraction loop: while the residual `μ` is fractional, find an integral
//! circulation `M` in the network whose cell arcs are fixed where `μ_ij` is
//! integral and `[0, 1]` otherwise, and whose column arcs are
//! `[⌊μ_j⌋, ⌈μ_j⌉]`. `μ` itself is a fractional circulation of that network,
//! so an integral one exists and `M` is allowable. The largest step
//! `λ` keeping every fractional cell and column of `(μ − λM)/(1 − λ)` inside
//! its unit interval makes at least one more cell or column integral, and
//! integral ones stay put. The number of parts is therefore at most the
//! number of fractional cells plus fractional columns plus one.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::market::{DeterministicAllocation, Market, RandomAllocation};
use crate::polytope::{delta_d_system, market_network, solve_circulation};
use crate::rational::{self, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LotteryPart {
    pub weight: Rational,
    pub alloc: DeterministicAllocation,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lottery {
    pub parts: Vec<LotteryPart>,
}

impl Lottery {
    pub fn total_weight(&self) -> Rational {
        self.parts.iter().map(|p| &p.weight).sum()
    }

    /// `Σ weight · alloc`.
    pub fn expectation(&self, agents: usize, objects: usize) -> RandomAllocation {
        let mut mu = RandomAllocation::zeros(agents, objects);
        for p in &self.parts {
            for i in 0..agents {
                for j in 0..objects {
                    if p.alloc.get(i, j) {
                        mu.add(i, j, &p.weight);
                    }
                }
            }
        }
        mu
    }

    /// Weights positive and summing to one, every part allowable, and the
    /// expectation equal to `target`.
    pub fn implements(&self, market: &Market, target: &RandomAllocation) -> bool {
        self.total_weight().is_one()
            && self.parts.iter().all(|p| p.weight.is_positive() && p.alloc.is_allowable(market))
            && self.expectation(market.num_agents(), market.num_objects()) == *target
    }

    pub fn to_json<'a>(&'a self, market: &'a Market) -> LotteryJson<'a> {
        LotteryJson { lottery: self, market }
    }
}

/// `{"parts":[{"weight":"p/q","assignment":{agent:[objects]}}]}` with agents
/// in market order.
pub struct LotteryJson<'a> {
    lottery: &'a Lottery,
    market: &'a Market,
}

impl Serialize for LotteryJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let parts: Vec<PartJson> = self
            .lottery
            .parts
            .iter()
            .map(|p| PartJson { weight: rational::format(&p.weight), assignment: AssignmentJson(&p.alloc, self.market) })
            .collect();
        let mut st = s.serialize_struct("Lottery", 1)?;
        st.serialize_field("parts", &parts)?;
        st.end()
    }
}

#[derive(Serialize)]
struct PartJson<'a> {
    weight: String,
    assignment: AssignmentJson<'a>,
}

/// One deterministic allocation as `{agent: [objects]}` in market order.
pub struct AssignmentJson<'a>(pub &'a DeterministicAllocation, pub &'a Market);

impl Serialize for AssignmentJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (alloc, market) = (self.0, self.1);
        let mut map = s.serialize_map(Some(market.num_agents()))?;
        for (i, agent) in market.agents().iter().enumerate() {
            let objs: Vec<&str> = alloc.assigned(i).into_iter().map(|j| market.objects()[j].id.as_str()).collect();
            map.serialize_entry(agent, &objs)?;
        }
        map.end()
    }
}

/// Decomposes `mu` into a lottery over allowable deterministic allocations.
pub fn decompose(market: &Market, mu: &RandomAllocation) -> Result<Lottery> {
    mu.check_shape(market)?;
    if let Some(v) = delta_d_system(market).violation(mu) {
        return Err(Error::NotImplementable(v));
    }
    let (n, k) = (market.num_agents(), market.num_objects());
    let mut residual = mu.clone();
    let mut mass = Rational::one();
    let mut parts = Vec::new();
    let limit = n * k + k + 1;

    loop {
        let vertex = extract_vertex(market, &residual)?;
        let lambda = step_length(&residual, &vertex);
        parts.push(LotteryPart { weight: &mass * &lambda, alloc: vertex.clone() });
        if lambda.is_one() {
            break;
        }
        let keep = Rational::one() - &lambda;
        for i in 0..n {
            for j in 0..k {
                let m = if vertex.get(i, j) { lambda.clone() } else { Rational::zero() };
                let next = (residual.get(i, j) - m) / &keep;
                residual.set(i, j, next);
            }
        }
        mass *= keep;
        if parts.len() > limit {
            return Err(Error::Internal("decomposition failed to make progress".into()));
        }
    }
    let lottery = Lottery { parts };
    debug_assert!(lottery.implements(market, mu));
    Ok(lottery)
}

/// Integral circulation rounding `mu` cell- and column-wise. Tries to push
/// the largest fractional cell to 1 first; falls back to the plain network.
fn extract_vertex(market: &Market, mu: &RandomAllocation) -> Result<DeterministicAllocation> {
    let (n, k) = (market.num_agents(), market.num_objects());
    let columns: Vec<Rational> = (0..k).map(|j| mu.column_sum(j)).collect();
    let favored = (0..n)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|&(i, j)| !mu.get(i, j).is_integer())
        .max_by(|a, b| mu.get(a.0, a.1).cmp(mu.get(b.0, b.1)).then(b.cmp(a)));

    let attempt = |force: Option<(usize, usize)>| {
        let (net, arcs) = market_network(
            market,
            |i, j| {
                let x = mu.get(i, j);
                if x.is_integer() {
                    (x.clone(), x.clone())
                } else if force == Some((i, j)) {
                    (Rational::one(), Rational::one())
                } else {
                    (Rational::zero(), Rational::one())
                }
            },
            |j| (columns[j].floor(), columns[j].ceil()),
        );
        solve_circulation(&net).map(|flow| {
            DeterministicAllocation::from_matrix(
                (0..n).map(|i| (0..k).map(|j| flow.flow(arcs.cell(i, j)).is_one()).collect()).collect(),
            )
        })
    };
    favored
        .and_then(|cell| attempt(Some(cell)))
        .or_else(|| attempt(None))
        .ok_or_else(|| Error::Internal("no integral rounding of an implementable allocation".into()))
}

/// Largest `λ ≤ 1` keeping each fractional cell and column of
/// `(μ − λM)/(1 − λ)` between the floor and ceiling of its current value.
fn step_length(mu: &RandomAllocation, m: &DeterministicAllocation) -> Rational {
    let mut lambda = Rational::one();
    for i in 0..mu.num_agents() {
        for j in 0..mu.num_objects() {
            let x = mu.get(i, j);
            if x.is_integer() {
                continue;
            }
            let bound = if m.get(i, j) { x.clone() } else { Rational::one() - x };
            lambda = lambda.min(bound);
        }
    }
    for j in 0..mu.num_objects() {
        let col = mu.column_sum(j);
        if col.is_integer() {
            continue;
        }
        let f = rational::frac(&col);
        let bound = if int(m.column_count(j) as i64) > col { f } else { Rational::one() - f };
        lambda = lambda.min(bound);
    }
    lambda
}

/// SplitMix64: `state += 0x9E3779B97F4A7C15`, then
/// `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
/// `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`, output `z ^ (z >> 31)`
/// (wrapping arithmetic).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Index of the part drawn with `seed`: the first SplitMix64 output `x`
/// gives the exact point `u = x / 2^64 ∈ [0, 1)`, and the drawn part is the
/// first whose cumulative weight exceeds `u`.
pub fn sample_index(lottery: &Lottery, seed: u64) -> usize {
    Sampler::new(lottery).index(seed)
}

/// Precomputed integer thresholds for repeated draws from one lottery.
/// `u < W` holds iff `x < ⌈W · 2^64⌉`, so draws match [`sample_index`] exactly.
#[derive(Debug, Clone)]
pub struct Sampler {
    thresholds: Vec<u128>,
}

impl Sampler {
    pub fn new(lottery: &Lottery) -> Self {
        let scale = Rational::from_integer(num_bigint::BigInt::from(1u8) << 64);
        let cap = 1u128 << 64;
        let mut acc = Rational::zero();
        let thresholds = lottery
            .parts
            .iter()
            .map(|p| {
                acc += &p.weight;
                let t = (&acc * &scale).ceil().to_integer();
                t.to_u128().map_or(cap, |t| t.min(cap))
            })
            .collect();
        Sampler { thresholds }
    }

    pub fn index(&self, seed: u64) -> usize {
        let x = SplitMix64::new(seed).next_u64() as u128;
        self.thresholds.iter().position(|&t| x < t).unwrap_or(self.thresholds.len().saturating_sub(1))
    }
}

pub fn sample(lottery: &Lottery, seed: u64) -> &DeterministicAllocation {
    &lottery.parts[sample_index(lottery, seed)].alloc
}
