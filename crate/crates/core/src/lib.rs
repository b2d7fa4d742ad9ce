//! Random assignment with minimum quotas and capacities.
//!
//! The crate implements the minimums probabilistic serial (MPS) mechanism in
//! exact rational arithmetic:
//!
//! - [`market`]: agents, objects `(m_j, c_j)`, demand `d`, preferences, and
//!   the JSON market format.
//! - [`polytope`]: the inequality systems for implementable allocations and
//!   completable sub-allocations, and a feasible-circulation solver.
//! - [`eating`]: the unit-demand step algorithm and the general-demand
//!   continuous simulation, both with traces.
//! - [`decompose`]: lotteries over allowable deterministic allocations and
//!   seeded sampling.
//! - [`oracles`]: brute-force and LP verifiers (enumeration, SD efficiency,
//!   envy freeness, anonymity, weak strategyproofness) and the random serial
//!   dictatorship baseline.
//!
//! ```
//! use mps_core::{eating::mps_unit, market::parse_market, rational};
//!
//! let text = r#"{"d": 1,
//!   "objects": [{"id": "o1", "min": 1, "cap": 2},
//!               {"id": "o2", "min": 1, "cap": 2},
//!               {"id": "o3", "min": 0, "cap": 2}],
//!   "agents": [{"id": "1", "prefs": ["o1", "o2", "o3"]},
//!              {"id": "2", "prefs": ["o1", "o2", "o3"]},
//!              {"id": "3", "prefs": ["o3", "o1", "o2"]}]}"#;
//! let (market, _) = parse_market(text).unwrap();
//! let (mu, _trace) = mps_unit(&market).unwrap();
//! assert_eq!(rational::format(mu.get(0, 0)), "2/3");
//! ```

pub mod decompose;
pub mod eating;
pub mod error;
pub mod fosd;
pub mod lp;
pub mod market;
pub mod oracles;
pub mod polytope;
pub mod rational;

pub use error::{Error, MarketError, Result};
