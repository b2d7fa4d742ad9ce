use num_traits::{One, Zero};

use super::{Cause, EatingTrace, StepRecord};
use crate::error::{Error, Result};
use crate::market::{require_feasible, Market, RandomAllocation};
use crate::polytope::{bits, general_rows, Pruning, RectRow, SystemCap};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GeneralOptions {
    pub cap: SystemCap,
    pub pruning: Pruning,
}

pub fn mps_general(market: &Market) -> Result<(RandomAllocation, EatingTrace)> {
    mps_general_with(market, GeneralOptions::default())
}

/// Continuous eating on `[0, d]`. An agent eats their best object `j` with
/// `μ_ij < 1` such that no row containing cell `(i, j)` binds. Between
/// events every row value is affine in time, so the next event is the exact
/// minimum of row binding times, cell saturations and the horizon.
pub fn mps_general_with(market: &Market, opts: GeneralOptions) -> Result<(RandomAllocation, EatingTrace)> {
    opts.cap.check(market)?;
    require_feasible(market)?;
    let rows = general_rows(market, opts.cap, opts.pruning)?;
    let (n, k) = (market.num_agents(), market.num_objects());
    let horizon = int(market.demand() as i64);

    let mut mu = RandomAllocation::zeros(n, k);
    let mut lhs: Vec<Rational> = vec![Rational::zero(); rows.len()];
    let mut time = Rational::zero();
    let mut steps = Vec::new();
    let mut closing: Vec<Option<Rational>> = vec![None; k];

    while time < horizon {
        let open = open_cells(market, &rows, &lhs, &mu);
        let eating: Vec<usize> = (0..n)
            .map(|i| {
                market.prefs(i).iter().copied().find(|&j| open[i] >> j & 1 == 1).ok_or_else(|| {
                    Error::Internal(format!("agent {i} stalled at t = {time} with every object unavailable"))
                })
            })
            .collect::<Result<_>>()?;

        let mut candidates: Vec<(Rational, Cause)> = Vec::new();
        let rates: Vec<i64> = rows
            .iter()
            .map(|r| bits(r.agents).filter(|&i| r.objects >> eating[i] & 1 == 1).count() as i64)
            .collect();
        for ((row, value), &rate) in rows.iter().zip(&lhs).zip(&rates) {
            if rate > 0 {
                let t = &time + (int(row.bound) - value) / int(rate);
                candidates.push((t, Cause::RowBinds(row.label.clone())));
            }
        }
        for (i, &j) in eating.iter().enumerate() {
            let t = &time + Rational::one() - mu.get(i, j);
            candidates.push((t, Cause::CellFull { agent: i, object: j }));
        }
        candidates.push((horizon.clone(), Cause::Horizon));
        let end = candidates.iter().map(|(t, _)| t).min().cloned().expect("horizon is always a candidate");
        if end < time {
            return Err(Error::Internal("general eating produced a row above its bound".into()));
        }
        let causes: Vec<Cause> = candidates.into_iter().filter(|(t, _)| *t == end).map(|(_, c)| c).collect();

        let dt = &end - &time;
        for (i, &j) in eating.iter().enumerate() {
            mu.add(i, j, &dt);
        }
        for (value, &rate) in lhs.iter_mut().zip(&rates) {
            if rate > 0 {
                *value += &dt * int(rate);
            }
        }

        let open_any: u64 = open.iter().fold(0, |a, &m| a | m);
        let after = open_cells(market, &rows, &lhs, &mu);
        let after_any: u64 = after.iter().fold(0, |a, &m| a | m);
        for (j, slot) in closing.iter_mut().enumerate() {
            if slot.is_none() && open_any >> j & 1 == 1 && after_any >> j & 1 == 0 {
                *slot = Some(end.clone());
            }
        }
        steps.push(StepRecord {
            start: time.clone(),
            end: end.clone(),
            available: (0..k).filter(|&j| open_any >> j & 1 == 1).collect(),
            deficient: Vec::new(),
            available_by_agent: Some(open.iter().map(|&m| (0..k).filter(|&j| m >> j & 1 == 1).collect()).collect()),
            eating,
            causes,
        });
        time = end;
    }

    let closing_times = closing.into_iter().map(|t| t.unwrap_or_else(|| horizon.clone())).collect();
    Ok((mu, EatingTrace { steps, tau: None, closing_times, horizon }))
}

/// Per-agent bit mask of cells that are below 1 and in no binding row.
fn open_cells(market: &Market, rows: &[RectRow], lhs: &[Rational], mu: &RandomAllocation) -> Vec<u64> {
    let (n, k) = (market.num_agents(), market.num_objects());
    let mut open: Vec<u64> = (0..n)
        .map(|i| (0..k).filter(|&j| *mu.get(i, j) < Rational::one()).fold(0u64, |m, j| m | 1 << j))
        .collect();
    for (row, value) in rows.iter().zip(lhs) {
        if *value == int(row.bound) {
            for i in bits(row.agents) {
                open[i] &= !row.objects;
            }
        }
    }
    open
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eating::mps_unit;
    use crate::polytope::in_delta_d;
    use crate::rational::ratio;

    #[test]
    fn cells_saturate_at_one() {
        let m = Market::anonymous(&[(0, 2); 3], 2, vec![vec![0, 1, 2]; 2]).unwrap();
        let (mu, trace) = mps_general(&m).unwrap();
        for i in 0..2 {
            assert_eq!(mu.row(i), &[int(1), int(1), int(0)]);
        }
        assert_eq!(trace.steps[0].end, int(1));
        assert!(trace.steps[0].causes.contains(&Cause::CellFull { agent: 0, object: 0 }));
        assert_eq!(trace.horizon, int(2));
    }

    #[test]
    fn minimum_row_binds_at_three_halves() {
        // μ over {a, b} ≤ 3 binds at t = 3/2; both agents finish on c.
        let m = Market::anonymous(&[(0, 2), (0, 2), (1, 2)], 2, vec![vec![0, 1, 2]; 2]).unwrap();
        let (mu, trace) = mps_general(&m).unwrap();
        for i in 0..2 {
            assert_eq!(mu.row(i), &[int(1), ratio(1, 2), ratio(1, 2)]);
        }
        assert_eq!(mu.column_sum(2), int(1));
        let bind = trace.steps.iter().find(|s| s.causes.iter().any(|c| matches!(c, Cause::RowBinds(_)))).unwrap();
        assert_eq!(bind.end, ratio(3, 2));
        assert!(bind.causes.contains(&Cause::RowBinds("Min-V S={o3},T={a1,a2}".into())));
        assert!(in_delta_d(&m, &mu));
        assert_eq!(trace.integrate(2, 3), mu);
    }

    #[test]
    fn agrees_with_unit_engine_on_minimums_market() {
        let m = Market::anonymous(&[(1, 2), (1, 2), (0, 2)], 1, vec![vec![0, 1, 2], vec![0, 1, 2], vec![2, 0, 1]])
            .unwrap();
        assert_eq!(mps_general(&m).unwrap().0, mps_unit(&m).unwrap().0);
    }

    #[test]
    fn size_cap() {
        let m = Market::anonymous(&[(0, 3); 3], 1, vec![vec![0, 1, 2]; 3]).unwrap();
        let opts = GeneralOptions { cap: SystemCap { max_agents: 2, max_objects: 2 }, ..Default::default() };
        assert!(matches!(mps_general_with(&m, opts), Err(Error::SizeCap(_))));
    }

    #[test]
    fn pruning_does_not_change_output() {
        let m = Market::anonymous(&[(1, 2), (0, 1), (1, 2), (0, 2)], 2, vec![vec![0, 1, 2, 3], vec![3, 2, 1, 0]])
            .unwrap();
        let a = mps_general_with(&m, GeneralOptions { pruning: Pruning::None, ..Default::default() }).unwrap().0;
        let b = mps_general_with(&m, GeneralOptions { pruning: Pruning::Dominated, ..Default::default() }).unwrap().0;
        assert_eq!(a, b);
        assert!(in_delta_d(&m, &a));
    }
}
