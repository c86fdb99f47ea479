//! Weight properties over the full (α, n) grid, with the two regions where
//! a stated property does not hold pinned down.

mod common;

use caputo_approx::schemes::{
    build_weights, validate_weights, CheckStatus, SchemeId, ALTERNATING_HEAD, SIGN_PATTERN, SUM_TO_ZERO, TAIL_BOUNDS_N,
    TAIL_BOUND_N_MINUS_1,
};
use common::grid;

#[test]
fn proven_properties_hold_everywhere() {
    for a in grid(0.05, 0.95, 0.05) {
        for n in 2..=64 {
            for s in SchemeId::ALL {
                let r = validate_weights(&build_weights(s, a, n).unwrap());
                assert_eq!(r.status(SUM_TO_ZERO), Some(CheckStatus::Pass), "{s} {a} {n}");
                let pinned = [
                    (SchemeId::L1, SIGN_PATTERN),
                    (SchemeId::Mid2mAlpha, SIGN_PATTERN),
                    (SchemeId::Mid2mAlpha, TAIL_BOUND_N_MINUS_1),
                    (SchemeId::Mid2mAlpha, TAIL_BOUNDS_N),
                    (SchemeId::L1Second, ALTERNATING_HEAD),
                    (SchemeId::Mid2, ALTERNATING_HEAD),
                ];
                for (scheme, check) in pinned {
                    if s == scheme {
                        assert_ne!(r.status(check), Some(CheckStatus::Fail), "{s} {check} alpha {a} n {n}");
                    }
                }
            }
        }
    }
}

#[test]
fn right2_monotone_chain_breaks_only_at_the_last_interior_link() {
    // the K_1 tail correction is about -n^(-1-α)/12 and overtakes the gap
    // between the last two interior weights once n is moderately large
    for a in grid(0.05, 0.95, 0.05) {
        let mut first_break = None;
        for n in 2..=64 {
            let r = validate_weights(&build_weights(SchemeId::Right2mAlpha, a, n).unwrap());
            let check = r.checks.iter().find(|c| c.name == SIGN_PATTERN).unwrap();
            if check.status == CheckStatus::Fail {
                assert_eq!(check.detail, format!("w_{} >= w_{}", n - 2, n - 1), "alpha {a} n {n}");
                first_break.get_or_insert(n);
            } else {
                assert!(first_break.is_none(), "alpha {a}: chain recovers at n {n}");
            }
        }
        let n0 = first_break.expect("the chain breaks below n = 64");
        assert!((10..=40).contains(&n0), "alpha {a}: first break at {n0}");
    }
}

#[test]
fn right3_head_alternates_for_larger_alpha() {
    for a in grid(0.35, 0.95, 0.05) {
        for n in 5..=64 {
            let r = validate_weights(&build_weights(SchemeId::Right3mAlpha, a, n).unwrap());
            assert_eq!(r.status(ALTERNATING_HEAD), Some(CheckStatus::Pass), "alpha {a} n {n}");
        }
    }
    // below α ≈ 0.32 the second head weight changes sign
    let r = validate_weights(&build_weights(SchemeId::Right3mAlpha, 0.2, 40).unwrap());
    assert_eq!(r.status(ALTERNATING_HEAD), Some(CheckStatus::Fail));
}
