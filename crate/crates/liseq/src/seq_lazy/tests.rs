use super::*;
use crate::lang::{normalize, parse_param, parse_seq, print_seq};
use crate::param_oracle::{self, Bounds};
use crate::seq_explorer::{explore_seq, ExplorerBounds};

const HANDOFF: &str = include_str!("../../../../corpus/wide/handoff.pp");

fn handoff() -> ParamProgram {
    normalize(&parse_param(HANDOFF).unwrap())
}

fn xbounds(m: usize) -> ExplorerBounds {
    ExplorerBounds {
        max_root_depth: m,
        ..ExplorerBounds::default()
    }
}

#[test]
fn rejects_bad_input() {
    let prog = parse_param(HANDOFF).unwrap();
    assert_eq!(sequentialize_lazy(&prog, 2), Err(TransformError::NotNormalized));
    assert_eq!(sequentialize_lazy(&handoff(), 0), Err(TransformError::ZeroRounds));
}

#[test]
fn output_round_trips_and_map_is_total() {
    let prog = handoff();
    for k in 1..=3 {
        let out = sequentialize_lazy(&prog, k).unwrap();
        let text = print_seq(&out.program);
        assert_eq!(parse_seq(&text).unwrap(), out.program);
        let mut orig = Vec::new();
        visit_param_stmts(&prog, &mut |s| orig.push(s.pc));
        let mapped: Vec<Pc> = out.stmt_map.pcs.iter().map(|p| p.orig).collect();
        assert_eq!(mapped.len(), orig.len());
        for pc in orig {
            assert!(mapped.contains(&pc));
        }
        let json = out.stmt_map.to_json();
        assert_eq!(StmtMap::from_json(&json).unwrap(), out.stmt_map);
    }
}

#[test]
fn handoff_is_safe_after_translation() {
    let out = sequentialize_lazy(&handoff(), 2).unwrap();
    let report = explore_seq(&out.program, Some(&out.stmt_map), &xbounds(2));
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    assert!(report.runtime_errors.is_empty(), "{:?}", report.runtime_errors);
}

#[test]
fn handoff_states_match_oracle() {
    let prog = handoff();
    for (k, m) in [(1, 2), (2, 2), (2, 3)] {
        let out = sequentialize_lazy(&prog, k).unwrap();
        let report = explore_seq(&out.program, Some(&out.stmt_map), &xbounds(m));
        let oracle = param_oracle::explore(
            &prog,
            &Bounds {
                k,
                max_threads: m,
                ..Bounds::default()
            },
        );
        let extra: Vec<_> = report.instrumented.difference(&oracle.reachable).collect();
        assert!(extra.is_empty(), "k={k} m={m}: unreachable states visited: {extra:?}");
        let missing: Vec<_> = oracle.reachable.difference(&report.instrumented).collect();
        assert!(missing.is_empty(), "k={k} m={m}: reachable states missed: {missing:?}");
    }
}

#[test]
fn violation_is_found_when_unguarded() {
    // Without the wait loop the division can happen before y is published.
    let src = "int[0,3] y; init: y := 0;
        process P: void main() begin if (*) then y := 1; else assert(y != 0); fi end";
    let prog = parse_param(src).unwrap();
    let out = sequentialize_lazy(&prog, 1).unwrap();
    let report = explore_seq(&out.program, Some(&out.stmt_map), &xbounds(2));
    assert_eq!(report.violations.len(), 1);
    let oracle = param_oracle::explore(&prog, &Bounds { k: 1, max_threads: 2, ..Bounds::default() });
    let v = report.violations.iter().next().unwrap();
    assert_eq!(v.orig, oracle.violations.iter().next().map(|o| o.pc));
}
