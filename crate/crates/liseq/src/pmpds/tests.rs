use super::*;
use crate::lang::{normalize, parse_param};
use crate::param_oracle;

const HANDOFF: &str = include_str!("../../../../corpus/wide/handoff.pp");
const HANDOFF_SMALL: &str = include_str!("../../../../corpus/handoff_small.pp");
const BUDGET: usize = 2_000_000;

fn pds(locations: usize) -> Pds {
    Pds {
        locations,
        initial: vec![0],
        ..Pds::default()
    }
}

#[test]
fn internal_rules_are_graph_reachability() {
    let mut p = pds(5);
    p.internal = vec![(0, 1), (1, 2), (2, 0), (3, 4)];
    assert_eq!(pds_reach(&p), BTreeSet::from([0, 1, 2]));
}

#[test]
fn balanced_push_pop() {
    let mut p = pds(5);
    p.symbols = 2;
    p.push = vec![(0, 1, 0)];
    p.pop = vec![(1, 0, 2), (1, 1, 3), (0, 0, 4)];
    // Only the pop of the pushed symbol applies, and never on an empty stack.
    assert_eq!(pds_reach(&p), BTreeSet::from([0, 1, 2]));
}

#[test]
fn pop_returns_to_every_matching_caller() {
    // 0 calls twice through the same callee location 2; returns resume at
    // 1 and 4 respectively.
    let mut p = pds(6);
    p.symbols = 2;
    p.push = vec![(0, 2, 0), (1, 2, 1)];
    p.internal = vec![(2, 3)];
    p.pop = vec![(3, 0, 1), (3, 1, 4)];
    p.targets = BTreeSet::from([4]);
    assert!(target_reachable(&p));
    assert!(!pds_reach(&p).contains(&5));
}

#[test]
fn no_rules_no_target() {
    let mut p = pds(3);
    p.targets = BTreeSet::from([2]);
    assert!(!target_reachable(&p));
}

#[test]
fn lowering_counts_shared_states() {
    let prog = normalize(&parse_param(HANDOFF).unwrap());
    let p = lower(&prog, BUDGET).unwrap();
    assert_eq!(p.shared_states, 2 * 16 * 16);
    assert_eq!(p.components.len(), 1);
    assert!(p.initial.contains(&SharedState::from(vec![1, 0, 0])));
}

#[test]
fn skip_process_has_internal_rules_only() {
    let prog = parse_param("bool b; init: skip; process P: void main() begin skip; end").unwrap();
    let p = lower(&prog, BUDGET).unwrap();
    let c = &p.components[0].pds;
    assert!(!c.internal.is_empty());
    assert!(c.push.is_empty() && c.pop.is_empty());
}

#[test]
fn recursion_lowers_to_push_and_pop() {
    let prog = parse_param(
        "bool b; init: skip;
         process P:
           void f(bool x) begin if (x) then call f(F); fi end
           void main() begin call f(T); end",
    )
    .unwrap();
    let p = lower(&prog, BUDGET).unwrap();
    let c = &p.components[0].pds;
    assert!(!c.push.is_empty() && !c.pop.is_empty());
    // Every pop symbol is pushed by some rule.
    let pushed: BTreeSet<Sym> = c.push.iter().map(|r| r.2).collect();
    assert!(c.pop.iter().all(|r| pushed.contains(&r.1)));
}

#[test]
fn lower_rejects_over_budget() {
    let prog = normalize(&parse_param(HANDOFF).unwrap());
    assert!(matches!(lower(&prog, 10), Err(PdsError::Budget { .. })));
}

#[test]
fn handoff_target_unreachable() {
    let prog = normalize(&parse_param(HANDOFF_SMALL).unwrap());
    let p = lower(&prog, BUDGET).unwrap();
    let ak = build_ak(&p, 2, BUDGET).unwrap();
    assert!(!target_reachable(&ak.pds));
    assert!(ak.errors.is_empty() || pds_reach(&ak.pds).is_disjoint(&ak.errors));
    let oracle = param_oracle::explore(
        &prog,
        &Bounds {
            k: 2,
            max_threads: 2,
            ..Bounds::default()
        },
    );
    assert!(!oracle.has_violation());
}

#[test]
fn violation_reachable() {
    let prog = parse_param(
        "int[0,1] y; init: y := 0;
         process P: void main() begin if (*) then y := 1; else assert(y != 1); fi end",
    )
    .unwrap();
    let p = lower(&prog, BUDGET).unwrap();
    // One thread writes y before another asserts, within a single round.
    for k in 1..=2 {
        assert!(target_reachable(&build_ak(&p, k, BUDGET).unwrap().pds));
        assert!(param_oracle::explore(&prog, &Bounds { k, ..Bounds::default() }).has_violation());
    }
}

#[test]
fn single_round_states_match_oracle() {
    let prog = parse_param(
        "int[0,3] x; init: x := 0;
         process P: void main() begin x := x + 1; if (x = 2) then x := 0; fi end",
    )
    .unwrap();
    let p = lower(&prog, BUDGET).unwrap();
    let ak = build_ak(&p, 1, BUDGET).unwrap();
    let projected: BTreeSet<_> = pds_reach(&ak.pds).into_iter().filter_map(|l| ak.localized(l)).collect();
    let oracle = param_oracle::explore(
        &prog,
        &Bounds {
            k: 1,
            max_threads: 4,
            ..Bounds::default()
        },
    );
    assert_eq!(projected, oracle.reachable);
}

#[test]
fn size_within_envelope() {
    let prog = normalize(&parse_param(HANDOFF_SMALL).unwrap());
    let p = lower(&prog, BUDGET).unwrap();
    for k in 1..=2 {
        let ak = build_ak(&p, k, BUDGET).unwrap();
        assert!(ak.stats.within(SIZE_CONSTANT), "{:?}", ak.stats);
    }
}
