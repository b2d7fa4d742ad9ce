//! Inequality systems for implementable allocations and for their lower
//! contour set, plus the circulation-based membership test.

use num_traits::{One, Signed, Zero};

use super::circulation::{solve_circulation, CirculationNetwork};
use super::constraint::{Constraint, ConstraintSystem};
use crate::error::{Error, Result};
use crate::market::{require_feasible, Market, RandomAllocation};
use crate::rational::{self, int, Rational};

/// Row-sum equalities, capacity rows and minimum rows describing the set of
/// implementable random allocations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaDSystem {
    /// `Σ_j μ_ij = d` per agent.
    pub equalities: Vec<Constraint>,
    /// `μ_j ≤ c_j` per object.
    pub upper: ConstraintSystem,
    /// `μ_j ≥ m_j` per minimum object (read as lower bounds).
    pub lower: Vec<Constraint>,
}

impl DeltaDSystem {
    /// Returns the first violated condition, if any.
    pub fn violation(&self, mu: &RandomAllocation) -> Option<String> {
        if !mu.entries_in_unit_interval() {
            return Some("entry outside [0, 1]".into());
        }
        if let Some(r) = self.equalities.iter().find(|r| r.lhs(mu) != r.bound) {
            return Some(format!("{} ≠ {}", r.label, rational::format(&r.bound)));
        }
        if let Some(r) = self.upper.rows.iter().find(|r| !r.holds(mu)) {
            return Some(format!("{} > {}", r.label, rational::format(&r.bound)));
        }
        if let Some(r) = self.lower.iter().find(|r| r.lhs(mu) < r.bound) {
            return Some(format!("{} < {}", r.label, rational::format(&r.bound)));
        }
        None
    }

    pub fn contains(&self, mu: &RandomAllocation) -> bool {
        self.violation(mu).is_none()
    }
}

pub fn delta_d_system(market: &Market) -> DeltaDSystem {
    let (n, k) = (market.num_agents(), market.num_objects());
    let d = int(market.demand() as i64);
    let equalities = (0..n)
        .map(|i| Constraint::unit(format!("Demand {}", market.agents()[i]), (0..k).map(|j| (i, j)), d.clone()))
        .collect();
    let upper = ConstraintSystem {
        rows: (0..k)
            .map(|j| {
                Constraint::unit(
                    format!("Cap {}", market.objects()[j].id),
                    (0..n).map(|i| (i, j)),
                    int(market.cap(j) as i64),
                )
            })
            .collect(),
    };
    let lower = market
        .minimum_objects()
        .into_iter()
        .map(|j| {
            Constraint::unit(
                format!("Min {}", market.objects()[j].id),
                (0..n).map(|i| (i, j)),
                int(market.min(j) as i64),
            )
        })
        .collect();
    DeltaDSystem { equalities, upper, lower }
}

/// Membership in the set of implementable random allocations (shape-checked).
pub fn in_delta_d(market: &Market, mu: &RandomAllocation) -> bool {
    mu.check_shape(market).is_ok() && delta_d_system(market).contains(mu)
}

pub(crate) fn set_label(market: &Market, mask: u64) -> String {
    let ids: Vec<&str> = (0..market.num_objects())
        .filter(|&j| mask >> j & 1 == 1)
        .map(|j| market.objects()[j].id.as_str())
        .collect();
    format!("{{{}}}", ids.join(","))
}

fn agent_set_label(market: &Market, mask: u64) -> String {
    let ids: Vec<&str> =
        (0..market.num_agents()).filter(|&i| mask >> i & 1 == 1).map(|i| market.agents()[i].as_str()).collect();
    format!("{{{}}}", ids.join(","))
}

/// Sub-allocation system for unit demand: relaxed demand rows, capacity rows
/// and one `Min-III` row per subset `S` of the minimum objects.
pub fn lcs_system_unit(market: &Market) -> Result<ConstraintSystem> {
    if market.demand() != 1 {
        return Err(Error::RequiresUnitDemand(market.demand()));
    }
    require_feasible(market)?;
    let (n, k) = (market.num_agents(), market.num_objects());
    if market.minimum_objects().len() > 30 {
        return Err(Error::SizeCap("more than 30 minimum objects".into()));
    }
    let mut rows = Vec::new();
    for i in 0..n {
        rows.push(Constraint::unit(format!("Demand {}", market.agents()[i]), (0..k).map(|j| (i, j)), Rational::one()));
    }
    for j in 0..k {
        rows.push(Constraint::unit(
            format!("Cap {}", market.objects()[j].id),
            (0..n).map(|i| (i, j)),
            int(market.cap(j) as i64),
        ));
    }
    let om = market.minimum_objects();
    for sub in 0u64..(1 << om.len()) {
        let mut s_mask = 0u64;
        let mut min_sum = 0i64;
        for (b, &j) in om.iter().enumerate() {
            if sub >> b & 1 == 1 {
                s_mask |= 1 << j;
                min_sum += market.min(j) as i64;
            }
        }
        let bound = n as i64 - min_sum;
        if bound < 0 {
            return Err(Error::Infeasible);
        }
        let cells: Vec<_> =
            (0..k).filter(|&j| s_mask >> j & 1 == 0).flat_map(|j| (0..n).map(move |i| (i, j))).collect();
        rows.push(Constraint::unit(format!("Min-III S={}", set_label(market, s_mask)), cells, int(bound)));
    }
    Ok(ConstraintSystem { rows })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinIvStatus {
    /// `Σ_j max{m_j, μ_j}`.
    pub total: Rational,
    pub holds: bool,
    /// The sum equals `N` exactly.
    pub tight: bool,
}

/// Evaluates the compact minimum condition `Σ_j max{m_j, μ_j} ≤ N`.
pub fn check_min_iv(market: &Market, mu: &RandomAllocation) -> MinIvStatus {
    let total: Rational = (0..market.num_objects())
        .map(|j| {
            let m = int(market.min(j) as i64);
            let col = mu.column_sum(j);
            if col > m {
                col
            } else {
                m
            }
        })
        .sum();
    let n = int(market.num_agents() as i64);
    MinIvStatus { holds: total <= n, tight: total == n, total }
}

/// Full unit-demand membership through the compact form: relaxed demand,
/// capacities and the minimum condition.
pub fn unit_member_compact(market: &Market, mu: &RandomAllocation) -> bool {
    mu.rows().iter().flatten().all(|x| !x.is_negative())
        && (0..market.num_agents()).all(|i| mu.row_sum(i) <= Rational::one())
        && (0..market.num_objects()).all(|j| mu.column_sum(j) <= int(market.cap(j) as i64))
        && check_min_iv(market, mu).holds
}

/// Instance size limit for the exponential row families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemCap {
    pub max_agents: usize,
    pub max_objects: usize,
}

impl Default for SystemCap {
    fn default() -> Self {
        SystemCap { max_agents: 8, max_objects: 8 }
    }
}

impl SystemCap {
    pub fn check(&self, market: &Market) -> Result<()> {
        if market.num_agents() > self.max_agents || market.num_objects() > self.max_objects {
            return Err(Error::SizeCap(format!(
                "{} agents x {} objects exceeds {} x {}",
                market.num_agents(),
                market.num_objects(),
                self.max_agents,
                self.max_objects
            )));
        }
        if market.num_agents() > 30 || market.num_objects() > 30 {
            return Err(Error::SizeCap("row families support at most 30 agents and 30 objects".into()));
        }
        Ok(())
    }
}

/// A unit-coefficient row over the rectangle `agents × objects` (bit masks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectRow {
    pub label: String,
    pub agents: u64,
    pub objects: u64,
    pub bound: i64,
}

impl RectRow {
    pub fn cell_count(&self) -> u32 {
        self.agents.count_ones() * self.objects.count_ones()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.agents >> i & 1 == 1 && self.objects >> j & 1 == 1
    }

    pub fn lhs(&self, mu: &RandomAllocation) -> Rational {
        let mut s = Rational::zero();
        for i in bits(self.agents) {
            for j in bits(self.objects) {
                s += mu.get(i, j);
            }
        }
        s
    }

    fn dominates(&self, other: &RectRow) -> bool {
        self.bound <= other.bound
            && other.agents & !self.agents == 0
            && other.objects & !self.objects == 0
    }

    pub fn to_constraint(&self) -> Constraint {
        let cells: Vec<_> = bits(self.agents).flat_map(|i| bits(self.objects).map(move |j| (i, j))).collect();
        Constraint::unit(self.label.clone(), cells, int(self.bound))
    }
}

pub(crate) fn bits(mask: u64) -> impl Iterator<Item = usize> + Clone {
    (0..64).filter(move |b| mask >> b & 1 == 1)
}

/// Which redundant rows to drop from the general-demand family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pruning {
    None,
    /// Drop rows that can never bind short of every cell reaching 1.
    Trivial,
    /// `Trivial`, plus rows whose cells are covered by a row with a bound no larger.
    #[default]
    Dominated,
}

/// Dominance pruning is quadratic; above this many rows only trivial pruning runs.
const DOMINANCE_LIMIT: usize = 8192;

/// The two general-demand row families (`Cap-V`, `Min-V`) as rectangles.
pub fn general_rows(market: &Market, cap: SystemCap, pruning: Pruning) -> Result<Vec<RectRow>> {
    cap.check(market)?;
    let (n, k) = (market.num_agents(), market.num_objects());
    let d = market.demand() as i64;
    let all_agents: u64 = (1 << n) - 1;
    let all_objects: u64 = (1 << k) - 1;
    let om_mask: u64 = market.minimum_objects().iter().fold(0, |m, &j| m | 1 << j);
    let mut rows = Vec::new();

    for t in 0..=all_agents {
        let t_size = t.count_ones() as i64;
        let rest = all_agents & !t;
        for s in 0..=all_objects {
            let s_size = s.count_ones() as i64;
            let cap_sum: i64 = bits(s).map(|j| market.cap(j) as i64).sum();
            rows.push(RectRow {
                label: format!("Cap-V S={},T={}", set_label(market, s), agent_set_label(market, t)),
                agents: rest,
                objects: s,
                bound: t_size * (k as i64 - s_size - d) + cap_sum,
            });
            if s & !om_mask == 0 {
                let min_sum: i64 = bits(s).map(|j| market.min(j) as i64).sum();
                rows.push(RectRow {
                    label: format!("Min-V S={},T={}", set_label(market, s), agent_set_label(market, t)),
                    agents: t,
                    objects: all_objects & !s,
                    bound: t_size * d + (n as i64 - t_size) * s_size - min_sum,
                });
            }
        }
    }

    if rows.iter().any(|r| r.bound < 0) {
        return Err(Error::Infeasible);
    }
    if pruning == Pruning::None {
        return Ok(rows);
    }
    rows.retain(|r| r.cell_count() > 0 && (r.bound as u64) < r.cell_count() as u64);
    if pruning == Pruning::Dominated && rows.len() <= DOMINANCE_LIMIT {
        let mut keep = vec![true; rows.len()];
        for a in 0..rows.len() {
            if !keep[a] {
                continue;
            }
            for b in 0..rows.len() {
                if a != b && keep[b] && rows[b].dominates(&rows[a]) {
                    keep[a] = false;
                    break;
                }
            }
        }
        let mut it = keep.into_iter();
        rows.retain(|_| it.next().unwrap());
    }
    Ok(rows)
}

/// General-demand sub-allocation system.
pub fn lcs_system_general(market: &Market, cap: SystemCap, pruning: Pruning) -> Result<ConstraintSystem> {
    require_feasible(market)?;
    let rows = general_rows(market, cap, pruning)?;
    Ok(ConstraintSystem { rows: rows.iter().map(RectRow::to_constraint).collect() })
}

/// Arc indices of a market network.
#[derive(Debug, Clone)]
pub struct MarketArcs {
    num_objects: usize,
    cells: Vec<usize>,
    columns: Vec<usize>,
}

impl MarketArcs {
    pub fn cell(&self, i: usize, j: usize) -> usize {
        self.cells[i * self.num_objects + j]
    }

    pub fn column(&self, j: usize) -> usize {
        self.columns[j]
    }
}

/// Network `s → agent [d, d]`, `agent → object` (cell bounds), `object → t`
/// (column bounds), `t → s [N·d, N·d]`. Nodes: `s = 0`, `t = 1`, agents, objects.
pub fn market_network(
    market: &Market,
    cell: impl Fn(usize, usize) -> (Rational, Rational),
    column: impl Fn(usize) -> (Rational, Rational),
) -> (CirculationNetwork, MarketArcs) {
    let (n, k) = (market.num_agents(), market.num_objects());
    let d = int(market.demand() as i64);
    let agent = |i: usize| 2 + i;
    let object = |j: usize| 2 + n + j;
    let mut net = CirculationNetwork::new(2 + n + k);
    for i in 0..n {
        net.add_arc(0, agent(i), d.clone(), d.clone());
    }
    let mut cells = Vec::with_capacity(n * k);
    for i in 0..n {
        for j in 0..k {
            let (lo, hi) = cell(i, j);
            cells.push(net.add_arc(agent(i), object(j), lo, hi));
        }
    }
    let columns = (0..k)
        .map(|j| {
            let (lo, hi) = column(j);
            net.add_arc(object(j), 1, lo, hi)
        })
        .collect();
    let total = &d * int(n as i64);
    net.add_arc(1, 0, total.clone(), total);
    (net, MarketArcs { num_objects: k, cells, columns })
}

/// Whether `nu` can be completed to an implementable allocation, decided by
/// a feasible circulation with cell lower bounds `ν_ij`.
pub fn lcs_member(market: &Market, nu: &RandomAllocation) -> bool {
    if nu.check_shape(market).is_err() || !nu.entries_in_unit_interval() {
        return false;
    }
    let (net, _) = market_network(
        market,
        |i, j| (nu.get(i, j).clone(), Rational::one()),
        |j| (int(market.min(j) as i64), int(market.cap(j) as i64)),
    );
    solve_circulation(&net).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, zero};

    fn minimums_market() -> Market {
        Market::anonymous(&[(1, 2), (1, 2), (0, 2)], 1, vec![vec![0, 1, 2], vec![0, 1, 2], vec![2, 0, 1]]).unwrap()
    }

    fn minimums_mps() -> RandomAllocation {
        RandomAllocation::from_matrix(vec![
            vec![ratio(2, 3), ratio(1, 3), zero()],
            vec![ratio(2, 3), ratio(1, 3), zero()],
            vec![zero(), ratio(1, 3), ratio(2, 3)],
        ])
    }

    fn minimums_unit_ids() -> Market {
        // Market::anonymous names agents a1.. and objects o1..
        minimums_market()
    }

    #[test]
    fn delta_d_shape_for_minimums_market() {
        let m = minimums_market();
        let sys = delta_d_system(&m);
        assert_eq!(sys.equalities.len(), 3);
        assert!(sys.equalities.iter().all(|r| r.bound == int(1)));
        assert_eq!(sys.upper.len(), 3);
        assert!(sys.upper.rows.iter().all(|r| r.bound == int(2)));
        assert_eq!(sys.lower.len(), 2);
        assert_eq!(sys.lower[0].label, "Min o1");
        assert_eq!(sys.lower[1].label, "Min o2");
        assert!(sys.contains(&minimums_mps()));
    }

    #[test]
    fn delta_d_without_minimums_has_no_lower_rows() {
        let m = Market::anonymous(&[(0, 1), (0, 1)], 1, vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert!(delta_d_system(&m).lower.is_empty());
    }

    #[test]
    fn unit_system_for_minimums_market() {
        let m = minimums_unit_ids();
        let sys = lcs_system_unit(&m).unwrap();
        assert_eq!(sys.len(), 4 + 3 + 3);
        let s12 = sys.find("Min-III S={o1,o2}").unwrap();
        assert_eq!(s12.cells(), vec![(0, 2), (1, 2), (2, 2)]);
        assert_eq!(s12.bound, int(1));
        let s2 = sys.find("Min-III S={o2}").unwrap();
        assert_eq!(s2.cells(), vec![(0, 0), (0, 2), (1, 0), (1, 2), (2, 0), (2, 2)]);
        assert_eq!(s2.bound, int(2));
        let s1 = sys.find("Min-III S={o1}").unwrap();
        assert_eq!(s1.cells(), vec![(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2)]);
        assert_eq!(s1.bound, int(2));
        assert!(sys.rows.iter().all(Constraint::is_nonnegative));
        assert!(sys.contains(&RandomAllocation::zeros(3, 3)));
        assert!(sys.contains(&minimums_mps()));
    }

    #[test]
    fn unit_system_without_minimums() {
        let m = Market::anonymous(&[(0, 1), (0, 2)], 1, vec![vec![0, 1]; 2]).unwrap();
        let sys = lcs_system_unit(&m).unwrap();
        let min_rows: Vec<_> = sys.rows.iter().filter(|r| r.label.starts_with("Min-III")).collect();
        assert_eq!(min_rows.len(), 1);
        assert_eq!(min_rows[0].label, "Min-III S={}");
        assert_eq!(min_rows[0].cells().len(), 4);
        assert_eq!(min_rows[0].bound, int(2));
    }

    #[test]
    fn unit_system_rejects_infeasible_and_multi_unit() {
        let bad = Market::anonymous(&[(1, 1), (1, 1), (1, 1)], 1, vec![vec![0, 1, 2]; 2]).unwrap();
        assert_eq!(lcs_system_unit(&bad), Err(Error::Infeasible));
        let d2 = Market::anonymous(&[(0, 2), (0, 2)], 2, vec![vec![0, 1]; 2]).unwrap();
        assert_eq!(lcs_system_unit(&d2), Err(Error::RequiresUnitDemand(2)));
    }

    #[test]
    fn min_iv_examples() {
        let m = minimums_market();
        let at_end = check_min_iv(&m, &minimums_mps());
        assert_eq!(at_end.total, int(3));
        assert!(at_end.holds && at_end.tight);
        let at_zero = check_min_iv(&m, &RandomAllocation::zeros(3, 3));
        assert_eq!(at_zero.total, int(2));
        assert!(at_zero.holds && !at_zero.tight);
    }

    #[test]
    fn min_v_demand_row() {
        let m = Market::anonymous(&[(0, 2), (0, 2), (1, 2)], 2, vec![vec![0, 1, 2]; 2]).unwrap();
        let rows = general_rows(&m, SystemCap::default(), Pruning::None).unwrap();
        let demand = rows.iter().find(|r| r.label == "Min-V S={},T={a1}").unwrap();
        assert_eq!((demand.agents, demand.objects, demand.bound), (0b01, 0b111, 2));
    }

    #[test]
    fn min_v_row_for_multi_unit_example() {
        // T = N, S = {c}: μ over {a, b} ≤ 2·2 + 0·1 − 1 = 3.
        let m = Market::anonymous(&[(0, 2), (0, 2), (1, 2)], 2, vec![vec![0, 1, 2]; 2]).unwrap();
        let rows = general_rows(&m, SystemCap::default(), Pruning::Dominated).unwrap();
        let r = rows.iter().find(|r| r.label == "Min-V S={o3},T={a1,a2}").unwrap();
        assert_eq!((r.agents, r.objects, r.bound), (0b11, 0b011, 3));
    }

    #[test]
    fn unit_rows_are_dominated_by_general_rows() {
        let m = minimums_market();
        let unit = lcs_system_unit(&m).unwrap();
        let general = lcs_system_general(&m, SystemCap::default(), Pruning::Dominated).unwrap();
        for row in &unit.rows {
            if row.bound >= int(row.cells().len() as i64) {
                continue;
            }
            assert!(
                general.rows.iter().any(|g| {
                    let cells = g.cells();
                    g.bound <= row.bound && row.cells().iter().all(|c| cells.contains(c))
                }),
                "{} is not implied by a single general row",
                row.label
            );
        }
    }

    #[test]
    fn size_cap_is_enforced() {
        let m = Market::anonymous(&[(0, 3); 3], 1, vec![vec![0, 1, 2]; 3]).unwrap();
        let cap = SystemCap { max_agents: 2, max_objects: 8 };
        assert!(matches!(general_rows(&m, cap, Pruning::Trivial), Err(Error::SizeCap(_))));
    }

    #[test]
    fn lcs_member_examples() {
        let m = minimums_market();
        assert!(lcs_member(&m, &minimums_mps()));
        assert!(lcs_member(&m, &RandomAllocation::zeros(3, 3)));

        // Agent 1 on o3 can be completed by 2 → o1, 3 → o2.
        let mut nu = RandomAllocation::zeros(3, 3);
        nu.set(0, 2, int(1));
        assert!(lcs_member(&m, &nu));

        // Column o1 above its capacity.
        let mut over = RandomAllocation::zeros(3, 3);
        for i in 0..3 {
            over.set(i, 0, int(1));
        }
        assert!(!lcs_member(&m, &over));

        let ones = RandomAllocation::from_matrix(vec![vec![int(1); 3]; 3]);
        assert!(!lcs_member(&m, &ones));
    }
}
