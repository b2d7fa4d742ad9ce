//! Market primitives: agents, objects with minimum quotas and capacities,
//! a common demand `d`, and a strict preference profile.
//!
//! Agent and object order as given at construction is the index order of
//! every matrix in the crate.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, MarketError, Result};
use crate::polytope::{self, Circulation};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: String,
    pub min: u64,
    pub cap: u64,
}

impl ObjectSpec {
    pub fn new(id: impl Into<String>, min: u64, cap: u64) -> Self {
        ObjectSpec { id: id.into(), min, cap }
    }
}

/// Non-fatal adjustments made while building a market.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Warning {
    /// A capacity above the number of agents was lowered to `|N|`.
    CapClamped { object: String, requested: u64, clamped: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    agents: Vec<String>,
    objects: Vec<ObjectSpec>,
    demand: u64,
    /// Object indices, most preferred first.
    prefs: Vec<Vec<usize>>,
    /// `ranks[i][j]` is the position of object `j` in agent `i`'s list.
    ranks: Vec<Vec<usize>>,
}

impl Market {
    /// Builds and validates a market from index-based preference lists.
    pub fn new(
        agents: Vec<String>,
        objects: Vec<ObjectSpec>,
        demand: u64,
        prefs: Vec<Vec<usize>>,
    ) -> Result<(Market, Vec<Warning>), MarketError> {
        if agents.is_empty() {
            return Err(MarketError::NoAgents);
        }
        if objects.is_empty() {
            return Err(MarketError::NoObjects);
        }
        check_unique(agents.iter(), MarketError::DuplicateAgent)?;
        check_unique(objects.iter().map(|o| &o.id), MarketError::DuplicateObject)?;
        if demand == 0 || demand as usize > objects.len() {
            return Err(MarketError::DemandOutOfRange { d: demand, objects: objects.len() });
        }
        if prefs.len() != agents.len() {
            return Err(MarketError::Syntax(format!(
                "{} preference lists for {} agents",
                prefs.len(),
                agents.len()
            )));
        }

        let n = agents.len() as u64;
        let mut warnings = Vec::new();
        let mut objects = objects;
        for o in &mut objects {
            if o.cap == 0 {
                return Err(MarketError::ZeroCapacity(o.id.clone()));
            }
            if o.min > o.cap {
                return Err(MarketError::MinExceedsCap { object: o.id.clone(), min: o.min, cap: o.cap });
            }
            if o.cap > n {
                warnings.push(Warning::CapClamped { object: o.id.clone(), requested: o.cap, clamped: n });
                o.cap = n;
                if o.min > o.cap {
                    return Err(MarketError::MinExceedsCap { object: o.id.clone(), min: o.min, cap: o.cap });
                }
            }
        }

        let k = objects.len();
        let mut ranks = Vec::with_capacity(prefs.len());
        for (agent, list) in agents.iter().zip(&prefs) {
            let mut rank = vec![usize::MAX; k];
            for (pos, &j) in list.iter().enumerate() {
                let Some(slot) = rank.get_mut(j) else {
                    return Err(MarketError::UnknownObject { agent: agent.clone(), object: format!("#{j}") });
                };
                if *slot != usize::MAX {
                    return Err(MarketError::DuplicatePreference {
                        agent: agent.clone(),
                        object: objects[j].id.clone(),
                    });
                }
                *slot = pos;
            }
            let missing: Vec<String> =
                (0..k).filter(|&j| rank[j] == usize::MAX).map(|j| objects[j].id.clone()).collect();
            if !missing.is_empty() {
                return Err(MarketError::IncompletePreferences { agent: agent.clone(), missing });
            }
            ranks.push(rank);
        }

        for w in &warnings {
            log::warn!("{w:?}");
        }
        Ok((Market { agents, objects, demand, prefs, ranks }, warnings))
    }

    /// Convenience constructor with generated ids `a1..`, `o1..`.
    pub fn anonymous(
        quotas: &[(u64, u64)],
        demand: u64,
        prefs: Vec<Vec<usize>>,
    ) -> Result<Market, MarketError> {
        let agents = (1..=prefs.len()).map(|i| format!("a{i}")).collect();
        let objects = quotas
            .iter()
            .enumerate()
            .map(|(j, &(min, cap))| ObjectSpec::new(format!("o{}", j + 1), min, cap))
            .collect();
        Market::new(agents, objects, demand, prefs).map(|(m, _)| m)
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn objects(&self) -> &[ObjectSpec] {
        &self.objects
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn demand(&self) -> u64 {
        self.demand
    }

    pub fn min(&self, j: usize) -> u64 {
        self.objects[j].min
    }

    pub fn cap(&self, j: usize) -> u64 {
        self.objects[j].cap
    }

    /// Agent `i`'s object indices, best first.
    pub fn prefs(&self, i: usize) -> &[usize] {
        &self.prefs[i]
    }

    pub fn rank(&self, i: usize, j: usize) -> usize {
        self.ranks[i][j]
    }

    /// Indices of objects with a positive minimum (`O_m`).
    pub fn minimum_objects(&self) -> Vec<usize> {
        (0..self.num_objects()).filter(|&j| self.objects[j].min > 0).collect()
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    /// The same market with agent `i` reporting `report` instead.
    pub fn with_report(&self, i: usize, report: Vec<usize>) -> Result<Market, MarketError> {
        let mut prefs = self.prefs.clone();
        prefs[i] = report;
        Market::new(self.agents.clone(), self.objects.clone(), self.demand, prefs).map(|(m, _)| m)
    }

    /// Re-indexes agents: agent `k` of the result is agent `pi[k]` of `self`.
    pub fn permute_agents(&self, pi: &[usize]) -> Market {
        assert_eq!(pi.len(), self.num_agents(), "permutation length");
        Market {
            agents: pi.iter().map(|&k| self.agents[k].clone()).collect(),
            objects: self.objects.clone(),
            demand: self.demand,
            prefs: pi.iter().map(|&k| self.prefs[k].clone()).collect(),
            ranks: pi.iter().map(|&k| self.ranks[k].clone()).collect(),
        }
    }

    pub fn to_file(&self) -> MarketFile {
        MarketFile {
            d: self.demand,
            objects: self.objects.clone(),
            agents: self
                .agents
                .iter()
                .zip(&self.prefs)
                .map(|(id, p)| AgentEntry {
                    id: id.clone(),
                    prefs: p.iter().map(|&j| self.objects[j].id.clone()).collect(),
                })
                .collect(),
        }
    }
}

fn check_unique<'a>(
    ids: impl Iterator<Item = &'a String>,
    err: impl Fn(String) -> MarketError,
) -> Result<(), MarketError> {
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(err(id.clone()));
        }
    }
    Ok(())
}

/// On-disk market description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub d: u64,
    pub objects: Vec<ObjectSpec>,
    pub agents: Vec<AgentEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub id: String,
    pub prefs: Vec<String>,
}

impl MarketFile {
    pub fn into_market(self) -> Result<(Market, Vec<Warning>), MarketError> {
        let index: HashMap<&str, usize> =
            self.objects.iter().enumerate().map(|(j, o)| (o.id.as_str(), j)).collect();
        let mut prefs = Vec::with_capacity(self.agents.len());
        for a in &self.agents {
            let list = a
                .prefs
                .iter()
                .map(|o| {
                    index.get(o.as_str()).copied().ok_or_else(|| MarketError::UnknownObject {
                        agent: a.id.clone(),
                        object: o.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            prefs.push(list);
        }
        let agents = self.agents.into_iter().map(|a| a.id).collect();
        Market::new(agents, self.objects, self.d, prefs)
    }
}

/// Parses a JSON market file and validates it. Capacities above `|N|` are
/// clamped and reported as warnings.
pub fn parse_market(text: &str) -> Result<(Market, Vec<Warning>), MarketError> {
    let file: MarketFile = serde_json::from_str(text).map_err(|e| MarketError::Syntax(e.to_string()))?;
    file.into_market()
}

/// A 0/1 agent × object matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicAllocation {
    entries: Vec<Vec<bool>>,
}

impl DeterministicAllocation {
    pub fn from_matrix(entries: Vec<Vec<bool>>) -> Self {
        DeterministicAllocation { entries }
    }

    /// Builds from per-agent object lists.
    pub fn from_assignment(num_objects: usize, assignment: &[Vec<usize>]) -> Self {
        let entries = assignment
            .iter()
            .map(|objs| {
                let mut row = vec![false; num_objects];
                for &j in objs {
                    row[j] = true;
                }
                row
            })
            .collect();
        DeterministicAllocation { entries }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.entries
    }

    pub fn assigned(&self, i: usize) -> Vec<usize> {
        (0..self.entries[i].len()).filter(|&j| self.entries[i][j]).collect()
    }

    pub fn column_count(&self, j: usize) -> u64 {
        self.entries.iter().filter(|r| r[j]).count() as u64
    }

    /// Column counts `(M_1, ..., M_|O|)`.
    pub fn marginals(&self) -> Vec<u64> {
        let k = self.entries.first().map_or(0, Vec::len);
        (0..k).map(|j| self.column_count(j)).collect()
    }

    /// Checks Demand, Min and Cap against `market`.
    pub fn is_allowable(&self, market: &Market) -> bool {
        self.entries.len() == market.num_agents()
            && self.entries.iter().all(|r| {
                r.len() == market.num_objects() && r.iter().filter(|&&x| x).count() as u64 == market.demand()
            })
            && (0..market.num_objects()).all(|j| {
                let c = self.column_count(j);
                market.min(j) <= c && c <= market.cap(j)
            })
    }

    pub fn to_random(&self) -> RandomAllocation {
        RandomAllocation::from_matrix(
            self.entries
                .iter()
                .map(|r| r.iter().map(|&x| if x { rational::one() } else { rational::zero() }).collect())
                .collect(),
        )
    }
}

/// An agent × object matrix of probability shares.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandomAllocation {
    #[serde(with = "rational::serde_matrix")]
    entries: Vec<Vec<Rational>>,
}

impl RandomAllocation {
    pub fn zeros(agents: usize, objects: usize) -> Self {
        RandomAllocation { entries: vec![vec![Rational::zero(); objects]; agents] }
    }

    pub fn from_matrix(entries: Vec<Vec<Rational>>) -> Self {
        RandomAllocation { entries }
    }

    pub fn num_agents(&self) -> usize {
        self.entries.len()
    }

    pub fn num_objects(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.entries[i][j] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, delta: &Rational) {
        self.entries[i][j] += delta;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn row_sum(&self, i: usize) -> Rational {
        self.entries[i].iter().sum()
    }

    /// `μ_j`, the total share of object `j`.
    pub fn column_sum(&self, j: usize) -> Rational {
        self.entries.iter().map(|r| &r[j]).sum()
    }

    pub fn entries_in_unit_interval(&self) -> bool {
        self.entries.iter().flatten().all(rational::is_unit_interval)
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().flatten().all(|x| x.is_integer())
    }

    /// Rows re-indexed so that row `k` of the result is row `pi[k]` of `self`.
    pub fn permute_rows(&self, pi: &[usize]) -> RandomAllocation {
        RandomAllocation { entries: pi.iter().map(|&k| self.entries[k].clone()).collect() }
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.entries.iter().map(|r| r.iter().map(rational::format).collect()).collect()
    }

    /// Shape check against a market.
    pub fn check_shape(&self, market: &Market) -> Result<()> {
        if self.entries.len() != market.num_agents()
            || self.entries.iter().any(|r| r.len() != market.num_objects())
        {
            return Err(Error::Dimension(format!(
                "expected {}x{} matrix",
                market.num_agents(),
                market.num_objects()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    /// Authoritative verdict from the zero sub-allocation circulation.
    pub feasible: bool,
    /// `Σ c_j ≥ N·d`.
    pub capacity_covers_demand: bool,
    /// `Σ m_j ≤ N`.
    pub minimums_within_agents: bool,
}

pub fn validate_feasibility(market: &Market) -> FeasibilityReport {
    let n = market.num_agents() as u64;
    let cap_total: u64 = market.objects().iter().map(|o| o.cap).sum();
    let min_total: u64 = market.objects().iter().map(|o| o.min).sum();
    let zero = RandomAllocation::zeros(market.num_agents(), market.num_objects());
    FeasibilityReport {
        feasible: polytope::lcs_member(market, &zero),
        capacity_covers_demand: cap_total >= n * market.demand(),
        minimums_within_agents: min_total <= n,
    }
}

/// Some allowable deterministic allocation, if the market admits one.
pub fn feasible_witness(market: &Market) -> Option<DeterministicAllocation> {
    let (net, arcs) = polytope::market_network(
        market,
        |_, _| (Rational::zero(), Rational::one()),
        |j| (rational::int(market.min(j) as i64), rational::int(market.cap(j) as i64)),
    );
    let flow: Circulation = polytope::solve_circulation(&net)?;
    let entries = (0..market.num_agents())
        .map(|i| (0..market.num_objects()).map(|j| flow.flow(arcs.cell(i, j)).is_one()).collect())
        .collect();
    Some(DeterministicAllocation::from_matrix(entries))
}

pub(crate) fn require_feasible(market: &Market) -> Result<()> {
    if validate_feasibility(market).feasible {
        Ok(())
    } else {
        Err(Error::Infeasible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMUMS_MARKET: &str = r#"{
        "d": 1,
        "objects": [
            {"id": "o1", "min": 1, "cap": 2},
            {"id": "o2", "min": 1, "cap": 2},
            {"id": "o3", "min": 0, "cap": 2}
        ],
        "agents": [
            {"id": "1", "prefs": ["o1", "o2", "o3"]},
            {"id": "2", "prefs": ["o1", "o2", "o3"]},
            {"id": "3", "prefs": ["o3", "o1", "o2"]}
        ]
    }"#;

    #[test]
    fn parses_minimums_market() {
        let (m, warnings) = parse_market(MINIMUMS_MARKET).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(m.num_agents(), 3);
        assert_eq!(m.num_objects(), 3);
        assert_eq!(m.demand(), 1);
        assert_eq!(m.prefs(2), &[2, 0, 1]);
        assert_eq!(m.rank(2, 1), 2);
        assert_eq!(m.minimum_objects(), vec![0, 1]);
    }

    #[test]
    fn single_agent_single_object() {
        let text = r#"{"d":1,"objects":[{"id":"x","min":0,"cap":1}],"agents":[{"id":"a","prefs":["x"]}]}"#;
        let (m, _) = parse_market(text).unwrap();
        assert_eq!((m.num_agents(), m.num_objects()), (1, 1));
        assert!(validate_feasibility(&m).feasible);
    }

    #[test]
    fn incomplete_preference_list() {
        let text = MINIMUMS_MARKET.replace(r#"["o3", "o1", "o2"]"#, r#"["o1", "o2"]"#);
        let err = parse_market(&text).unwrap_err();
        assert!(matches!(err, MarketError::IncompletePreferences { ref missing, .. } if missing == &["o3"]));
        assert!(err.to_string().contains("incomplete preference list"));
    }

    #[test]
    fn rejects_bad_inputs() {
        let dup = MINIMUMS_MARKET.replace(r#"["o3", "o1", "o2"]"#, r#"["o3", "o1", "o1"]"#);
        assert!(matches!(parse_market(&dup), Err(MarketError::DuplicatePreference { .. })));
        let unknown = MINIMUMS_MARKET.replace(r#"["o3", "o1", "o2"]"#, r#"["o3", "o1", "o9"]"#);
        assert!(matches!(parse_market(&unknown), Err(MarketError::UnknownObject { .. })));
        let min_cap = MINIMUMS_MARKET.replace(r#""min": 1, "cap": 2"#, r#""min": 3, "cap": 2"#);
        assert!(matches!(parse_market(&min_cap), Err(MarketError::MinExceedsCap { .. })));
        let d0 = MINIMUMS_MARKET.replace(r#""d": 1"#, r#""d": 0"#);
        assert!(matches!(parse_market(&d0), Err(MarketError::DemandOutOfRange { .. })));
        let d4 = MINIMUMS_MARKET.replace(r#""d": 1"#, r#""d": 4"#);
        assert!(matches!(parse_market(&d4), Err(MarketError::DemandOutOfRange { .. })));
        assert!(matches!(parse_market("{"), Err(MarketError::Syntax(_))));
    }

    #[test]
    fn clamps_capacity_with_warning() {
        let text = MINIMUMS_MARKET.replace(r#""min": 0, "cap": 2"#, r#""min": 0, "cap": 10"#);
        let (m, warnings) = parse_market(&text).unwrap();
        assert_eq!(m.cap(2), 3);
        assert_eq!(
            warnings,
            vec![Warning::CapClamped { object: "o3".into(), requested: 10, clamped: 3 }]
        );
    }

    #[test]
    fn feasibility_examples() {
        let (quota_market, _) = parse_market(MINIMUMS_MARKET).unwrap();
        let r = validate_feasibility(&quota_market);
        assert!(r.feasible && r.capacity_covers_demand && r.minimums_within_agents);

        let too_many_mins = Market::anonymous(&[(1, 1), (1, 1), (1, 1)], 1, vec![vec![0, 1, 2]; 2]).unwrap();
        let r = validate_feasibility(&too_many_mins);
        assert!(!r.feasible);
        assert!(!r.minimums_within_agents);

        // N = 2, d = 2, {a, b, c} with m_c = 1: both agents taking {a, c} works.
        let m = Market::anonymous(&[(0, 2), (0, 2), (1, 2)], 2, vec![vec![0, 1, 2]; 2]).unwrap();
        assert!(validate_feasibility(&m).feasible);
        let w = feasible_witness(&m).unwrap();
        assert!(w.is_allowable(&m));
        let hand = DeterministicAllocation::from_assignment(3, &[vec![0, 2], vec![0, 2]]);
        assert!(hand.is_allowable(&m));
    }

    #[test]
    fn minimum_bound_is_not_necessary_for_multi_unit_demand() {
        // One agent taking both objects meets Σm = 2 > N = 1.
        let m = Market::anonymous(&[(1, 1), (1, 1)], 2, vec![vec![0, 1]]).unwrap();
        let r = validate_feasibility(&m);
        assert!(!r.minimums_within_agents);
        assert!(r.feasible);
    }

    #[test]
    fn file_round_trip() {
        let (m, _) = parse_market(MINIMUMS_MARKET).unwrap();
        let text = serde_json::to_string(&m.to_file()).unwrap();
        let (back, _) = parse_market(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn permute_and_report() {
        let (m, _) = parse_market(MINIMUMS_MARKET).unwrap();
        let p = m.permute_agents(&[2, 0, 1]);
        assert_eq!(p.prefs(0), m.prefs(2));
        assert_eq!(p.agents()[0], "3");
        let r = m.with_report(0, vec![2, 1, 0]).unwrap();
        assert_eq!(r.rank(0, 2), 0);
        assert!(m.with_report(0, vec![2, 1]).is_err());
    }
}
