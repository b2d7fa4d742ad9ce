mod common;

use common::strategy::{market, market_and_sub_allocation};
use mps_core::market::feasible_witness;
use mps_core::polytope::{
    check_min_iv, lcs_member, lcs_system_general, lcs_system_unit, market_network, solve_circulation,
    unit_member_compact, Pruning, SystemCap,
};
use mps_core::rational::{int, ratio};
use num_traits::Signed;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rows_are_nonnegative(m in market(4, 4, 1)) {
        for row in lcs_system_unit(&m).unwrap().rows {
            prop_assert!(row.is_nonnegative(), "{}", row.label);
        }
        for row in lcs_system_general(&m, SystemCap::default(), Pruning::None).unwrap().rows {
            prop_assert!(row.is_nonnegative(), "{}", row.label);
        }
    }

    #[test]
    fn unit_system_matches_compact_condition((m, nu) in market_and_sub_allocation(4, 4, 1)) {
        let system = lcs_system_unit(&m).unwrap();
        prop_assert_eq!(system.contains(&nu), unit_member_compact(&m, &nu));
        if unit_member_compact(&m, &nu) {
            prop_assert!(check_min_iv(&m, &nu).holds);
        }
    }

    #[test]
    fn unit_system_matches_circulation((m, nu) in market_and_sub_allocation(4, 4, 1)) {
        prop_assert_eq!(lcs_system_unit(&m).unwrap().contains(&nu), lcs_member(&m, &nu));
    }

    #[test]
    fn general_system_matches_circulation(
        (m, nu) in prop_oneof![market_and_sub_allocation(4, 4, 1), market_and_sub_allocation(4, 4, 2)]
    ) {
        let member = lcs_member(&m, &nu);
        for pruning in [Pruning::None, Pruning::Trivial, Pruning::Dominated] {
            let system = lcs_system_general(&m, SystemCap::default(), pruning).unwrap();
            prop_assert_eq!(system.contains(&nu), member, "{:?}", pruning);
        }
    }

    #[test]
    fn binding_is_monotone((m, nu) in market_and_sub_allocation(3, 4, 2), bump in 0usize..16) {
        let system = lcs_system_general(&m, SystemCap::default(), Pruning::None).unwrap();
        let (i, j) = (bump % m.num_agents(), bump % m.num_objects());
        let mut larger = nu.clone();
        larger.add(i, j, &ratio(1, 4));
        for row in system.binding(&nu) {
            prop_assert!(row.lhs(&larger) >= row.bound, "{}", row.label);
        }
    }

    #[test]
    fn membership_is_downward_closed((m, nu) in market_and_sub_allocation(4, 4, 2)) {
        prop_assume!(lcs_member(&m, &nu));
        let mut smaller = nu.clone();
        for i in 0..m.num_agents() {
            for j in 0..m.num_objects() {
                smaller.set(i, j, nu.get(i, j) * ratio(1, 2));
            }
        }
        prop_assert!(lcs_member(&m, &smaller));
    }

    #[test]
    fn integer_bounds_give_integer_flows(m in market(4, 4, 2)) {
        let (net, _) = market_network(&m, |_, _| (int(0), int(1)), |j| (int(m.min(j) as i64), int(m.cap(j) as i64)));
        let flow = solve_circulation(&net).expect("feasible market");
        prop_assert!(flow.is_valid_for(&net));
        prop_assert!(flow.flows().iter().all(|f| f.is_integer() && !f.is_negative()));
        prop_assert!(feasible_witness(&m).unwrap().is_allowable(&m));
    }
}

#[test]
fn full_matrix_is_never_completable() {
    let m = common::fixture("minimums.json");
    let ones = mps_core::market::RandomAllocation::from_matrix(vec![vec![int(1); 3]; 3]);
    assert!(!lcs_member(&m, &ones));
    assert!(!lcs_system_unit(&m).unwrap().contains(&ones));
    assert!(lcs_member(&m, &mps_core::market::RandomAllocation::zeros(3, 3)));
}
