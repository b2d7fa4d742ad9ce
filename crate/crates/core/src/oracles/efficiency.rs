//! SD-efficiency check by linear programming.
//!
//! With prefix sums `P_ik(ν) = Σ_{j ranked ≤ k by i} ν_ij`, the program
//!
//! ```text
//! maximize   Σ_i Σ_{k<|O|} (P_ik(ν) − P_ik(μ))
//! subject to ν implementable, P_ik(ν) ≥ P_ik(μ) for all i, k
//! ```
//!
//! has optimum zero exactly when no implementable `ν` weakly dominates `μ`
//! for everyone and strictly for someone. The slack variables of the plain
//! formulation are eliminated by substituting `s_ik = P_ik(ν) − P_ik(μ)`.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fosd::{fosd_compare, prefix_sums, FosdResult};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::market::{Market, RandomAllocation};
use crate::polytope::delta_d_system;
use crate::rational::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    OptimumZero,
    ImprovementFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpCertificate {
    pub status: LpStatus,
    /// Total prefix-sum gain at the optimum.
    #[serde(with = "crate::rational::serde_str")]
    pub gain: Rational,
    pub improving_allocation: Option<RandomAllocation>,
}

impl LpCertificate {
    pub fn is_efficient(&self) -> bool {
        self.status == LpStatus::OptimumZero
    }
}

pub fn sd_efficient(market: &Market, mu: &RandomAllocation) -> Result<LpCertificate> {
    mu.check_shape(market)?;
    let system = delta_d_system(market);
    if let Some(v) = system.violation(mu) {
        return Err(Error::NotImplementable(v));
    }
    let (n, k) = (market.num_agents(), market.num_objects());
    let var = |i: usize, j: usize| i * k + j;
    let mut lp = LinearProgram::new(n * k);

    for row in &system.equalities {
        lp.add(row.terms.iter().map(|t| (var(t.agent, t.object), t.coeff.clone())).collect(), Relation::Eq, row.bound.clone());
    }
    for row in &system.upper.rows {
        lp.add(row.terms.iter().map(|t| (var(t.agent, t.object), t.coeff.clone())).collect(), Relation::Le, row.bound.clone());
    }
    for row in &system.lower {
        lp.add(row.terms.iter().map(|t| (var(t.agent, t.object), t.coeff.clone())).collect(), Relation::Ge, row.bound.clone());
    }
    if market.demand() > 1 {
        for i in 0..n {
            for j in 0..k {
                lp.add(vec![(var(i, j), int(1))], Relation::Le, int(1));
            }
        }
    }
    let mut baseline = Rational::zero();
    for i in 0..n {
        let prefs = market.prefs(i);
        let sums = prefix_sums(prefs, mu.row(i));
        for len in 1..k {
            let terms = prefs[..len].iter().map(|&j| (var(i, j), int(1))).collect();
            lp.add(terms, Relation::Ge, sums[len - 1].clone());
            baseline += &sums[len - 1];
        }
        // The object at position p lies in the prefixes of length p+1..k-1.
        for (pos, &j) in prefs.iter().enumerate() {
            let appearances = (k - 1).saturating_sub(pos);
            lp.objective[var(i, j)] = int(appearances as i64);
        }
    }

    let (value, x) = match lp.solve() {
        LpOutcome::Optimal { value, x } => (value, x),
        other => return Err(Error::Internal(format!("efficiency LP returned {other:?} at a feasible point"))),
    };
    let gain = value - baseline;
    if gain.is_zero() {
        return Ok(LpCertificate { status: LpStatus::OptimumZero, gain, improving_allocation: None });
    }
    let nu = RandomAllocation::from_matrix((0..n).map(|i| (0..k).map(|j| x[var(i, j)].clone()).collect()).collect());

    // The certificate must re-validate on its own.
    if let Some(v) = system.violation(&nu) {
        return Err(Error::Internal(format!("improving allocation not implementable: {v}")));
    }
    let mut strict = false;
    for i in 0..n {
        match fosd_compare(market.prefs(i), nu.row(i), mu.row(i))? {
            FosdResult::Equal => {}
            FosdResult::StrictlyDominates => strict = true,
            other => return Err(Error::Internal(format!("improving allocation is {other:?} for agent {i}"))),
        }
    }
    if !strict {
        return Err(Error::Internal("positive LP gain without a strict improvement".into()));
    }
    Ok(LpCertificate { status: LpStatus::ImprovementFound, gain, improving_allocation: Some(nu) })
}
