//! The minimums probabilistic serial eating process.
//!
//! [`mps_unit`] is the discrete step algorithm for unit demand; each step
//! ends at the earliest capacity closure, minimum satisfaction, global
//! minimum binding or the horizon. [`mps_general`] simulates the continuous
//! process for any demand `d` against the explicit general-demand row family,
//! with availability tracked per agent and object.
//!
//! Both engines return the final matrix and an [`EatingTrace`].

mod general;
mod unit;

use serde::Serialize;

use crate::market::{Market, RandomAllocation};
use crate::rational::{self, Rational};

pub use general::{mps_general, mps_general_with, GeneralOptions};
pub use unit::{mps_unit, next_breakpoint, Breakpoint, UnitState};

/// Why a step ended.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cause {
    /// Object reached its capacity.
    CapClose(usize),
    /// Object reached its minimum.
    MinSatisfied(usize),
    /// The market-wide minimum condition became binding (flag F set).
    GlobalMin,
    /// General demand: a named row became binding.
    RowBinds(String),
    /// General demand: agent's share of an object reached 1.
    CellFull { agent: usize, object: usize },
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub start: Rational,
    pub end: Rational,
    /// Objects open at the start of the step (open to at least one agent for
    /// general demand).
    pub available: Vec<usize>,
    /// Objects still below their minimum (unit demand only).
    pub deficient: Vec<usize>,
    /// Per-agent open objects (general demand only).
    pub available_by_agent: Option<Vec<Vec<usize>>>,
    /// Object each agent eats during the step.
    pub eating: Vec<usize>,
    pub causes: Vec<Cause>,
}

impl StepRecord {
    pub fn duration(&self) -> Rational {
        &self.end - &self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EatingTrace {
    pub steps: Vec<StepRecord>,
    /// Time at which the global minimum condition bound, if it did.
    pub tau: Option<Rational>,
    /// First time each object was closed to every agent; the horizon for
    /// objects open until the end.
    pub closing_times: Vec<Rational>,
    pub horizon: Rational,
}

impl EatingTrace {
    /// Replays the eating assignments: `Σ_steps duration · [agent eats j]`.
    pub fn integrate(&self, agents: usize, objects: usize) -> RandomAllocation {
        let mut mu = RandomAllocation::zeros(agents, objects);
        for s in &self.steps {
            let dt = s.duration();
            for (i, &j) in s.eating.iter().enumerate() {
                mu.add(i, j, &dt);
            }
        }
        mu
    }

    pub fn global_min_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.causes.contains(&Cause::GlobalMin)).count()
    }

    pub fn to_json(&self, market: &Market) -> TraceJson {
        let obj = |j: usize| market.objects()[j].id.clone();
        let agent = |i: usize| market.agents()[i].clone();
        TraceJson {
            steps: self
                .steps
                .iter()
                .map(|s| StepJson {
                    start: rational::format(&s.start),
                    end: rational::format(&s.end),
                    available: s.available.iter().map(|&j| obj(j)).collect(),
                    deficient: s.deficient.iter().map(|&j| obj(j)).collect(),
                    eating: s.eating.iter().enumerate().map(|(i, &j)| (agent(i), obj(j))).collect(),
                    causes: s
                        .causes
                        .iter()
                        .map(|c| match c {
                            Cause::CapClose(j) => format!("CapClose({})", obj(*j)),
                            Cause::MinSatisfied(j) => format!("MinSatisfied({})", obj(*j)),
                            Cause::GlobalMin => "GlobalMin".into(),
                            Cause::RowBinds(label) => format!("RowBinds({label})"),
                            Cause::CellFull { agent: i, object: j } => format!("CellFull({},{})", agent(*i), obj(*j)),
                            Cause::Horizon => "Horizon".into(),
                        })
                        .collect(),
                })
                .collect(),
            tau: self.tau.as_ref().map(rational::format),
            closing_times: self
                .closing_times
                .iter()
                .enumerate()
                .map(|(j, t)| (obj(j), rational::format(t)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceJson {
    pub steps: Vec<StepJson>,
    pub tau: Option<String>,
    pub closing_times: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepJson {
    pub start: String,
    pub end: String,
    pub available: Vec<String>,
    pub deficient: Vec<String>,
    pub eating: Vec<(String, String)>,
    pub causes: Vec<String>,
}

/// Runs the unit-demand algorithm when `d = 1` and the general engine otherwise.
pub fn mps(market: &Market) -> crate::error::Result<(RandomAllocation, EatingTrace)> {
    if market.demand() == 1 {
        mps_unit(market)
    } else {
        mps_general(market)
    }
}
