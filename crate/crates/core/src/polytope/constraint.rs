use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::market::{Market, RandomAllocation};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub agent: usize,
    pub object: usize,
    pub coeff: Rational,
}

/// `Σ coeff·μ_ij ≤ bound` (or `≥ bound` where a caller says so).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<Term>,
    pub bound: Rational,
}

impl Constraint {
    /// A row with unit coefficients on the given cells.
    pub fn unit(label: impl Into<String>, cells: impl IntoIterator<Item = (usize, usize)>, bound: Rational) -> Self {
        Constraint {
            label: label.into(),
            terms: cells
                .into_iter()
                .map(|(agent, object)| Term { agent, object, coeff: rational::one() })
                .collect(),
            bound,
        }
    }

    pub fn lhs(&self, mu: &RandomAllocation) -> Rational {
        self.terms.iter().map(|t| &t.coeff * mu.get(t.agent, t.object)).sum()
    }

    pub fn holds(&self, mu: &RandomAllocation) -> bool {
        self.lhs(mu) <= self.bound
    }

    pub fn binds(&self, mu: &RandomAllocation) -> bool {
        self.lhs(mu) == self.bound
    }

    pub fn contains(&self, agent: usize, object: usize) -> bool {
        self.terms.iter().any(|t| t.agent == agent && t.object == object && !t.coeff.is_zero())
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.bound.is_negative() && self.terms.iter().all(|t| !t.coeff.is_negative())
    }

    /// Cells as a sorted list, ignoring coefficients.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut c: Vec<_> = self.terms.iter().map(|t| (t.agent, t.object)).collect();
        c.sort_unstable();
        c
    }
}

/// A list of nonnegative upper-bound rows `A μ ≤ b`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub rows: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Every row holds and `μ ≥ 0`.
    pub fn contains(&self, mu: &RandomAllocation) -> bool {
        mu.rows().iter().flatten().all(|x| !x.is_negative()) && self.rows.iter().all(|r| r.holds(mu))
    }

    pub fn binding<'a>(&'a self, mu: &'a RandomAllocation) -> impl Iterator<Item = &'a Constraint> + 'a {
        self.rows.iter().filter(move |r| r.binds(mu))
    }

    pub fn find(&self, label: &str) -> Option<&Constraint> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn to_json(&self, market: &Market) -> SystemJson {
        SystemJson { rows: self.rows.iter().map(|r| RowJson::new(r, market)).collect() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemJson {
    pub rows: Vec<RowJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RowJson {
    pub label: String,
    pub terms: Vec<TermJson>,
    pub bound: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermJson {
    pub agent: String,
    pub object: String,
    pub coeff: String,
}

impl RowJson {
    pub fn new(row: &Constraint, market: &Market) -> Self {
        RowJson {
            label: row.label.clone(),
            terms: row
                .terms
                .iter()
                .map(|t| TermJson {
                    agent: market.agents()[t.agent].clone(),
                    object: market.objects()[t.object].id.clone(),
                    coeff: rational::format(&t.coeff),
                })
                .collect(),
            bound: rational::format(&row.bound),
        }
    }
}
