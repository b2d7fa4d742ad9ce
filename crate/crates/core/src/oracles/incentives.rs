use super::{permutations, AuditReport, Witness};
use crate::eating::mps_unit;
use crate::error::{Error, Result};
use crate::fosd::{fosd_compare, FosdResult};
use crate::market::{Market, RandomAllocation};

/// Largest object count for which every misreport is tried (5! = 120 per agent).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MisreportCap {
    pub max_objects: usize,
}

impl Default for MisreportCap {
    fn default() -> Self {
        MisreportCap { max_objects: 5 }
    }
}

pub fn weak_sp_audit(market: &Market) -> Result<AuditReport> {
    weak_sp_audit_with(market, None, MisreportCap::default())
}

/// Tries every unilateral misreport under unit demand and fails if one gives
/// the misreporting agent a lottery strictly dominating their truthful one.
/// `truthful` may carry the already computed truthful output.
pub fn weak_sp_audit_with(
    market: &Market,
    truthful: Option<&RandomAllocation>,
    cap: MisreportCap,
) -> Result<AuditReport> {
    if market.demand() != 1 {
        return Err(Error::RequiresUnitDemand(market.demand()));
    }
    if market.num_objects() > cap.max_objects {
        return Err(Error::SizeCap(format!("misreport audit limited to {} objects", cap.max_objects)));
    }
    let owned;
    let truth = match truthful {
        Some(mu) => mu,
        None => {
            owned = mps_unit(market)?.0;
            &owned
        }
    };
    let reports = permutations(market.num_objects());
    let mut checked = 0;
    for i in 0..market.num_agents() {
        for report in &reports {
            if report.as_slice() == market.prefs(i) {
                continue;
            }
            checked += 1;
            let lied = market.with_report(i, report.clone())?;
            let (mu, _) = mps_unit(&lied)?;
            if fosd_compare(market.prefs(i), mu.row(i), truth.row(i))? == FosdResult::StrictlyDominates {
                return Ok(AuditReport::fail(
                    "weak_strategyproofness",
                    checked,
                    Witness::Misreport {
                        agent: i,
                        report: report.clone(),
                        truthful: truth.row(i).to_vec(),
                        manipulated: mu.row(i).to_vec(),
                    },
                ));
            }
        }
    }
    Ok(AuditReport::pass("weak_strategyproofness", checked))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimums_market_all_misreports() {
        let m = Market::anonymous(&[(1, 2), (1, 2), (0, 2)], 1, vec![vec![0, 1, 2], vec![0, 1, 2], vec![2, 0, 1]])
            .unwrap();
        let r = weak_sp_audit(&m).unwrap();
        assert!(r.passed());
        assert_eq!(r.checked, 3 * 5);
    }

    #[test]
    fn no_minimums_all_misreports() {
        let m = Market::anonymous(
            &[(0, 1); 4],
            1,
            vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![1, 0, 3, 2]],
        )
        .unwrap();
        let r = weak_sp_audit(&m).unwrap();
        assert!(r.passed());
        assert_eq!(r.checked, 4 * 23);
    }

    #[test]
    fn requires_unit_demand_and_small_instances() {
        let d2 = Market::anonymous(&[(0, 2); 2], 2, vec![vec![0, 1]; 2]).unwrap();
        assert_eq!(weak_sp_audit(&d2).unwrap_err(), Error::RequiresUnitDemand(2));
        let wide = Market::anonymous(&[(0, 1); 6], 1, vec![vec![0, 1, 2, 3, 4, 5]]).unwrap();
        assert!(matches!(weak_sp_audit(&wide), Err(Error::SizeCap(_))));
    }
}
