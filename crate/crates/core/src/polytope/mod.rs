//! Constraint systems describing implementable random allocations and the
//! sub-allocations that can still be completed, together with the exact
//! feasible-circulation solver behind the membership tests.

mod circulation;
mod constraint;
mod systems;

pub use circulation::{solve_circulation, Circulation, CirculationNetwork, FlowArc};
pub use constraint::{Constraint, ConstraintSystem, RowJson, SystemJson, Term, TermJson};
pub use systems::{
    check_min_iv, delta_d_system, general_rows, in_delta_d, lcs_member, lcs_system_general, lcs_system_unit,
    market_network, unit_member_compact, DeltaDSystem, MarketArcs, MinIvStatus, Pruning, RectRow, SystemCap,
};
pub(crate) use systems::bits;
