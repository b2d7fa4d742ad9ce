use num_traits::{One, Signed, Zero};

use super::{Cause, EatingTrace, StepRecord};
use crate::error::{Error, Result};
use crate::market::{require_feasible, Market, RandomAllocation};
use crate::rational::{int, Rational};

/// State at the start of a step: time `t^{s-1}`, the running allocation,
/// the open objects `O^{s-1}`, the objects below their minimum
/// `O_m^{s-1}` and the flag `F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitState {
    pub time: Rational,
    pub mu: RandomAllocation,
    pub available: Vec<bool>,
    pub deficient: Vec<bool>,
    pub flag: bool,
}

impl UnitState {
    pub fn initial(market: &Market) -> Self {
        UnitState {
            time: Rational::zero(),
            mu: RandomAllocation::zeros(market.num_agents(), market.num_objects()),
            available: vec![true; market.num_objects()],
            deficient: (0..market.num_objects()).map(|j| market.min(j) > 0).collect(),
            flag: false,
        }
    }

    /// Each agent's most preferred open object, or `None` if nothing is open.
    pub fn eaters(&self, market: &Market) -> Vec<Option<usize>> {
        (0..market.num_agents())
            .map(|i| market.prefs(i).iter().copied().find(|&j| self.available[j]))
            .collect()
    }
}

/// The end of the current step and every event that happens there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breakpoint {
    pub time: Rational,
    pub causes: Vec<Cause>,
    /// `n(j, O^{s-1})` for every object.
    pub eater_counts: Vec<u64>,
    /// Object eaten by each agent.
    pub eating: Vec<usize>,
}

/// Computes `t^s` as the minimum of the capacity times of open objects that
/// have met their minimum, the minimum times of deficient objects, the
/// global minimum time and 1.
pub fn next_breakpoint(market: &Market, state: &UnitState) -> Result<Breakpoint> {
    let k = market.num_objects();
    if state.time >= Rational::one() {
        return Err(Error::InconsistentState("step requested at or after the horizon".into()));
    }
    if let Some(j) = (0..k).find(|&j| state.deficient[j] && !state.available[j]) {
        return Err(Error::InconsistentState(format!("deficient object {j} is closed")));
    }
    let eating: Vec<usize> = state
        .eaters(market)
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.ok_or_else(|| Error::Internal(format!("agent {i} has no available object before t = 1"))))
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; k];
    for &j in &eating {
        counts[j] += 1;
    }
    let columns: Vec<Rational> = (0..k).map(|j| state.mu.column_sum(j)).collect();

    let mut candidates: Vec<(Rational, Cause)> = Vec::new();
    let ahead = |gap: Rational, eaters: u64, what: &str| -> Result<Rational> {
        if gap.is_negative() {
            return Err(Error::InconsistentState(format!("{what} already exceeded")));
        }
        Ok(&state.time + gap / int(eaters as i64))
    };
    for j in 0..k {
        if !state.available[j] || counts[j] == 0 {
            continue;
        }
        if state.deficient[j] {
            let gap = int(market.min(j) as i64) - &columns[j];
            candidates.push((ahead(gap, counts[j], "minimum")?, Cause::MinSatisfied(j)));
        } else {
            let gap = int(market.cap(j) as i64) - &columns[j];
            candidates.push((ahead(gap, counts[j], "capacity")?, Cause::CapClose(j)));
        }
    }
    let outside_eaters: u64 = (0..k).filter(|&j| !state.deficient[j]).map(|j| counts[j]).sum();
    // The global condition always holds with equality at t = 1, so only earlier times count.
    if outside_eaters > 0 {
        let mut slack = int(market.num_agents() as i64);
        for (j, column) in columns.iter().enumerate() {
            if state.deficient[j] {
                slack -= int(market.min(j) as i64);
            } else {
                slack -= column;
            }
        }
        let t_o = ahead(slack, outside_eaters, "global minimum condition")?;
        if t_o < Rational::one() {
            candidates.push((t_o, Cause::GlobalMin));
        }
    }
    candidates.push((Rational::one(), Cause::Horizon));

    let time = candidates.iter().map(|(t, _)| t).min().cloned().expect("horizon is always a candidate");
    let causes = candidates.into_iter().filter(|(t, _)| *t == time).map(|(_, c)| c).collect();
    Ok(Breakpoint { time, causes, eater_counts: counts, eating })
}

/// Runs the unit-demand algorithm to `t = 1`.
pub fn mps_unit(market: &Market) -> Result<(RandomAllocation, EatingTrace)> {
    if market.demand() != 1 {
        return Err(Error::RequiresUnitDemand(market.demand()));
    }
    require_feasible(market)?;
    let k = market.num_objects();
    let horizon = Rational::one();
    let mut state = UnitState::initial(market);
    let mut steps = Vec::new();
    let mut tau = None;
    let mut closing: Vec<Option<Rational>> = vec![None; k];

    while state.time < horizon {
        let bp = next_breakpoint(market, &state)?;
        let record_available: Vec<usize> = (0..k).filter(|&j| state.available[j]).collect();
        let record_deficient: Vec<usize> = (0..k).filter(|&j| state.deficient[j]).collect();

        if bp.causes.contains(&Cause::GlobalMin) {
            if state.flag {
                return Err(Error::Internal("global minimum condition bound twice".into()));
            }
            state.flag = true;
            tau = Some(bp.time.clone());
        }
        let mut deficient = state.deficient.clone();
        for c in &bp.causes {
            if let Cause::MinSatisfied(j) = c {
                deficient[*j] = false;
            }
        }
        let available = if state.flag {
            deficient.clone()
        } else {
            let mut a = state.available.clone();
            for c in &bp.causes {
                if let Cause::CapClose(j) = c {
                    a[*j] = false;
                }
            }
            a
        };

        let dt = &bp.time - &state.time;
        for (i, &j) in bp.eating.iter().enumerate() {
            state.mu.add(i, j, &dt);
        }
        for j in 0..k {
            if state.available[j] && !available[j] {
                closing[j] = Some(bp.time.clone());
            }
        }
        steps.push(StepRecord {
            start: state.time.clone(),
            end: bp.time.clone(),
            available: record_available,
            deficient: record_deficient,
            available_by_agent: None,
            eating: bp.eating,
            causes: bp.causes,
        });
        state.time = bp.time;
        state.available = available;
        state.deficient = deficient;
    }

    let closing_times = closing.into_iter().map(|t| t.unwrap_or_else(|| horizon.clone())).collect();
    Ok((state.mu, EatingTrace { steps, tau, closing_times, horizon }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::in_delta_d;
    use crate::rational::{ratio, zero};

    fn no_minimums() -> Market {
        Market::anonymous(
            &[(0, 1); 4],
            1,
            vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![1, 0, 3, 2]],
        )
        .unwrap()
    }

    fn minimums_market() -> Market {
        Market::anonymous(&[(1, 2), (1, 2), (0, 2)], 1, vec![vec![0, 1, 2], vec![0, 1, 2], vec![2, 0, 1]]).unwrap()
    }

    fn matrix(rows: &[&[(i64, i64)]]) -> RandomAllocation {
        RandomAllocation::from_matrix(rows.iter().map(|r| r.iter().map(|&(p, q)| ratio(p, q)).collect()).collect())
    }

    #[test]
    fn first_breakpoint_no_minimums() {
        let m = no_minimums();
        let bp = next_breakpoint(&m, &UnitState::initial(&m)).unwrap();
        assert_eq!(bp.time, ratio(1, 2));
        assert_eq!(bp.causes, vec![Cause::CapClose(0), Cause::CapClose(1)]);
        assert_eq!(bp.eater_counts, vec![2, 2, 0, 0]);
    }

    #[test]
    fn first_breakpoint_minimums_market() {
        // t_m(o1) = 1/2, t_m(o2) = ∞, t_c(o3) = 2, t_O = (3 − 2 − 0)/1 = 1.
        let m = minimums_market();
        let bp = next_breakpoint(&m, &UnitState::initial(&m)).unwrap();
        assert_eq!(bp.time, ratio(1, 2));
        assert_eq!(bp.causes, vec![Cause::MinSatisfied(0)]);
        assert_eq!(bp.eater_counts, vec![2, 0, 1]);
    }

    #[test]
    fn single_agent_single_object_hits_horizon() {
        let m = Market::anonymous(&[(0, 1)], 1, vec![vec![0]]).unwrap();
        let bp = next_breakpoint(&m, &UnitState::initial(&m)).unwrap();
        assert_eq!(bp.time, int(1));
        assert_eq!(bp.causes, vec![Cause::CapClose(0), Cause::Horizon]);
        let (mu, trace) = mps_unit(&m).unwrap();
        assert_eq!(mu.get(0, 0), &int(1));
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn inconsistent_state_is_rejected() {
        let m = minimums_market();
        let mut s = UnitState::initial(&m);
        s.time = int(1);
        assert!(matches!(next_breakpoint(&m, &s), Err(Error::InconsistentState(_))));
        let mut s = UnitState::initial(&m);
        s.mu.set(0, 2, int(1));
        s.mu.set(1, 2, int(1));
        s.mu.set(2, 2, int(1));
        assert!(matches!(next_breakpoint(&m, &s), Err(Error::InconsistentState(_))));
    }

    #[test]
    fn minimums_market_allocation_and_trace() {
        let m = minimums_market();
        let (mu, trace) = mps_unit(&m).unwrap();
        assert_eq!(mu, matrix(&[&[(2, 3), (1, 3), (0, 1)], &[(2, 3), (1, 3), (0, 1)], &[(0, 1), (1, 3), (2, 3)]]));
        assert_eq!(trace.tau, Some(ratio(2, 3)));
        let ends: Vec<_> = trace.steps.iter().map(|s| s.end.clone()).collect();
        assert_eq!(ends, vec![ratio(1, 2), ratio(2, 3), int(1)]);
        assert_eq!(trace.steps[1].causes, vec![Cause::GlobalMin]);
        assert_eq!(trace.steps[2].available, vec![1]);
        assert_eq!(trace.steps[2].eating, vec![1, 1, 1]);
        assert_eq!(trace.closing_times, vec![ratio(2, 3), int(1), ratio(2, 3)]);
        assert_eq!(trace.integrate(3, 3), mu);
    }

    #[test]
    fn no_minimums_reduces_to_ps() {
        let (mu, trace) = mps_unit(&no_minimums()).unwrap();
        let h = (1, 2);
        let z = (0, 1);
        assert_eq!(mu, matrix(&[&[h, z, h, z], &[h, z, h, z], &[z, h, z, h], &[z, h, z, h]]));
        assert!(trace.tau.is_none());
    }

    #[test]
    fn global_minimum_switches_everyone() {
        // t_O = (2 − 1)/2 = 1/2, then both agents move to b.
        let m = Market::anonymous(&[(0, 2), (1, 2)], 1, vec![vec![0, 1]; 2]).unwrap();
        let (mu, trace) = mps_unit(&m).unwrap();
        let h = (1, 2);
        assert_eq!(mu, matrix(&[&[h, h], &[h, h]]));
        assert_eq!(trace.tau, Some(ratio(1, 2)));
        assert_eq!(trace.steps[0].causes, vec![Cause::GlobalMin]);
        assert_eq!(trace.steps[1].available, vec![1]);
    }

    #[test]
    fn minimums_exhausting_agents_from_the_start() {
        // Σm = N: the global condition binds at t = 0 for the agent on c.
        let m = Market::anonymous(&[(1, 2), (1, 2), (0, 2)], 1, vec![vec![2, 0, 1], vec![0, 1, 2]]).unwrap();
        let (mu, trace) = mps_unit(&m).unwrap();
        assert!(in_delta_d(&m, &mu));
        assert_eq!(trace.tau, Some(zero()));
        assert_eq!(mu.column_sum(2), zero());
    }

    #[test]
    fn rejects_multi_unit_and_infeasible() {
        let d2 = Market::anonymous(&[(0, 2), (0, 2)], 2, vec![vec![0, 1]; 2]).unwrap();
        assert_eq!(mps_unit(&d2).unwrap_err(), Error::RequiresUnitDemand(2));
        let bad = Market::anonymous(&[(1, 1), (1, 1), (1, 1)], 1, vec![vec![0, 1, 2]; 2]).unwrap();
        assert_eq!(mps_unit(&bad).unwrap_err(), Error::Infeasible);
    }
}
