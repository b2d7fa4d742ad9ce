//! First-order stochastic dominance between two lotteries over objects,
//! judged by one agent's ranking.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FosdResult {
    Equal,
    StrictlyDominates,
    StrictlyDominated,
    Incomparable,
}

impl FosdResult {
    pub fn reverse(self) -> Self {
        match self {
            FosdResult::StrictlyDominates => FosdResult::StrictlyDominated,
            FosdResult::StrictlyDominated => FosdResult::StrictlyDominates,
            other => other,
        }
    }

    /// `a ≥_FOSD b` (dominates or equal).
    pub fn weakly_dominates(self) -> bool {
        matches!(self, FosdResult::Equal | FosdResult::StrictlyDominates)
    }
}

/// Compares rows `a` and `b` through prefix sums in the order `prefs`
/// (object indices, best first).
pub fn fosd_compare(prefs: &[usize], a: &[Rational], b: &[Rational]) -> Result<FosdResult> {
    if a.len() != b.len() || prefs.len() != a.len() {
        return Err(Error::Dimension(format!(
            "lotteries of length {} and {} under a ranking of {} objects",
            a.len(),
            b.len(),
            prefs.len()
        )));
    }
    let mut sum_a = Rational::default();
    let mut sum_b = Rational::default();
    let (mut a_ahead, mut b_ahead) = (false, false);
    for &j in prefs {
        sum_a += &a[j];
        sum_b += &b[j];
        if sum_a > sum_b {
            a_ahead = true;
        } else if sum_b > sum_a {
            b_ahead = true;
        }
    }
    // Prefix sums all equal forces a == b entrywise.
    Ok(match (a_ahead, b_ahead) {
        (false, false) => FosdResult::Equal,
        (true, false) => FosdResult::StrictlyDominates,
        (false, true) => FosdResult::StrictlyDominated,
        (true, true) => FosdResult::Incomparable,
    })
}

/// Prefix sums of `row` in the order `prefs`.
pub fn prefix_sums(prefs: &[usize], row: &[Rational]) -> Vec<Rational> {
    let mut acc = Rational::default();
    prefs
        .iter()
        .map(|&j| {
            acc += &row[j];
            acc.clone()
        })
        .collect()
}
