use super::*;
use crate::lang::{parse_param, Value};

const HANDOFF: &str = include_str!("../../../../corpus/wide/handoff.pp");

fn bounds(k: usize, m: usize) -> Bounds {
    Bounds {
        k,
        max_threads: m,
        ..Bounds::default()
    }
}

fn state_at(oracle: &Oracle, map: &[u32], pc: Pc) -> ParamState {
    // Walk thread 1 deterministically until it sits at `pc`.
    let mut st = oracle.initial_states(map).remove(0);
    for _ in 0..64 {
        if oracle.code().node(Some(st.map[0]), &st.threads[0]).and_then(|n| n.pc) == Some(pc) {
            return st;
        }
        st = oracle.step_local(&st).successors.remove(0);
    }
    panic!("pc {pc} not reached");
}

fn pc_of(prog: &ParamProgram, pred: impl Fn(&crate::lang::StmtKind) -> bool) -> Pc {
    let mut found = None;
    crate::lang::visit_param_stmts(prog, &mut |s| {
        if found.is_none() && pred(&s.kind) {
            found = Some(s.pc);
        }
    });
    found.unwrap()
}

#[test]
fn handoff_has_no_violation() {
    let prog = parse_param(HANDOFF).unwrap();
    let report = explore(&prog, &bounds(2, 2));
    assert!(report.violations.is_empty());
    assert!(report.runtime_errors.is_empty());
    assert!(report.truncated.is_empty());
    let assert_pc = pc_of(&prog, |k| matches!(k, crate::lang::StmtKind::Assert(_)));
    assert!(report
        .reachable
        .iter()
        .any(|l| l.pc == assert_pc && l.shared["y"] == Value::Int(2)));
    assert!(report.reachable.iter().filter(|l| l.pc == assert_pc).all(|l| l.shared["y"] == Value::Int(2)));
}

#[test]
fn spin_loop_steps_back_into_the_loop() {
    let prog = parse_param(HANDOFF).unwrap();
    let oracle = Oracle::new(&prog, bounds(2, 2));
    let while_pc = pc_of(&prog, |k| matches!(k, crate::lang::StmtKind::While { .. }));
    let st = state_at(&oracle, &[0, 1], while_pc);
    let step = oracle.step_local(&st);
    assert_eq!(step.successors.len(), 1);
    let next = &step.successors[0];
    let node = oracle.code().node(Some(0), &next.threads[0]).unwrap();
    assert!(matches!(node.op, crate::machine::Op::Skip));
    assert_eq!(oracle.step_local(next).successors.len(), 1);
}

#[test]
fn assume_false_has_no_successor() {
    let prog = parse_param("init: skip; process P: main() begin assume(F); end").unwrap();
    let oracle = Oracle::new(&prog, bounds(1, 1));
    let st = oracle.initial_states(&[0]).remove(0);
    let step = oracle.step_local(&st);
    assert!(step.successors.is_empty() && step.violations.is_empty() && step.errors.is_empty());
}

#[test]
fn division_by_zero_is_an_error_outcome() {
    let prog = parse_param("int x, y; init: x := 4; y := 0; process P: main() begin x := x / y; end").unwrap();
    let oracle = Oracle::new(&prog, bounds(1, 1));
    let st = oracle.initial_states(&[0]).remove(0);
    let step = oracle.step_local(&st);
    assert!(step.successors.is_empty());
    assert_eq!(step.errors.len(), 1);
    assert_eq!(step.errors[0].0, RuntimeError::DivisionByZero);
    let report = oracle.explore();
    assert!(report.has_error(RuntimeError::DivisionByZero));
    assert!(!report.has_violation());
}

#[test]
fn context_switch_order() {
    let prog = parse_param(
        "int x; init: skip; process P: main() begin atomic begin x := 1; x := 2; end end",
    )
    .unwrap();
    let oracle = Oracle::new(&prog, bounds(2, 2));
    let st = oracle.initial_states(&[0, 0]).remove(0);
    let s1 = oracle.context_switch(&st);
    assert_eq!((s1[0].active, s1[0].round), (1, 1));
    let s2 = oracle.context_switch(&s1[0]);
    assert_eq!((s2[0].active, s2[0].round), (0, 2));
    assert!(oracle.context_switch(&oracle.context_switch(&s2[0])[0]).is_empty());
    // Inside the atomic block no switch is possible.
    let inside = oracle.step_local(&oracle.step_local(&st).successors[0]).successors.remove(0);
    assert!(oracle.code().in_atomic(Some(0), &inside.threads[0]));
    assert!(oracle.context_switch(&inside).is_empty());
}

#[test]
fn atomic_blocks_are_never_interleaved() {
    let prog = parse_param(
        "int[0,3] x; init: x := 0;
         process P: main() begin atomic begin x := 1; assert(x = 1); x := 0; end end",
    )
    .unwrap();
    assert!(!explore(&prog, &bounds(3, 3)).has_violation());
    let racy = parse_param(
        "int[0,3] x; init: x := 0;
         process P: main() begin x := 1; assert(x = 1); x := 0; end",
    )
    .unwrap();
    assert!(explore(&racy, &bounds(2, 2)).has_violation());
}

#[test]
fn init_flag_holds() {
    let prog = parse_param("bool f; init: f := T; process P: main() begin assert(f); end").unwrap();
    let r = explore(&prog, &bounds(1, 3));
    assert!(!r.has_violation());
}

#[test]
fn counter_values_and_overflow() {
    let prog = parse_param("int[0,3] x; init: x := 0; process P: main() begin while (T) do x := x + 1; od end").unwrap();
    let r = explore(&prog, &bounds(3, 1));
    let xs: BTreeSet<_> = r.reachable.iter().map(|l| l.shared["x"]).collect();
    assert_eq!(xs, [0, 1, 2, 3].map(Value::Int).into_iter().collect());
    assert!(r.has_error(RuntimeError::RangeOverflow));
    assert!(r.truncated.is_empty());
}

#[test]
fn shared_variables_start_arbitrary() {
    let prog = parse_param("bool b; init: skip; process P: main() begin assert(b); end").unwrap();
    assert!(explore(&prog, &bounds(1, 1)).has_violation());
    let oracle = Oracle::new(&prog, bounds(1, 1));
    assert_eq!(oracle.init_outcomes().len(), 2);
}

#[test]
fn stack_bound_truncates() {
    let prog = parse_param("init: skip; process P: void f() begin call f(); end main() begin call f(); end").unwrap();
    let r = explore(&prog, &Bounds { max_depth: 4, ..bounds(1, 1) });
    assert!(r.truncated.contains(&Truncation::StackDepth));
}

#[test]
fn segment_step_bound_truncates() {
    let prog = parse_param("int[0,7] x; init: x := 0; process P: main() begin while (x < 7) do x := x + 1; od end").unwrap();
    let r = explore(&prog, &Bounds { max_steps: Some(3), ..bounds(1, 1) });
    assert!(r.truncated.contains(&Truncation::SegmentSteps));
    let full = explore(&prog, &bounds(1, 1));
    assert!(full.truncated.is_empty());
    assert!(r.reachable.is_subset(&full.reachable));
}

#[test]
fn reports_are_deterministic() {
    let prog = parse_param(HANDOFF).unwrap();
    let a = explore(&prog, &bounds(2, 2));
    let b = explore(&prog, &bounds(2, 2));
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn value_returns_and_recursion() {
    let prog = parse_param(
        "int[0,7] r; init: r := 0;
         process P: int[0,7] fact(int[0,7] n) begin if (n = 0) then return 1; else return n * fact(n - 1); fi end
                    main() begin r := fact(3); assert(r = 6); end",
    );
    // Value calls are statements, not expressions.
    assert!(prog.is_err());
    let prog = parse_param(
        "int[0,7] r; init: r := 0;
         process P: int[0,7] sum(int[0,7] n) begin int[0,7] t; if (n = 0) then return 0; fi t := sum(n - 1); return n + t; end
                    main() begin r := sum(3); assert(r = 6); end",
    )
    .unwrap();
    let rep = explore(&prog, &bounds(1, 1));
    assert!(!rep.has_violation(), "{:?}", rep.violations);
    assert!(rep.truncated.is_empty());
}

#[test]
fn observed_interfaces_are_wrapped_and_conform() {
    let prog = parse_param(HANDOFF).unwrap();
    let oracle = Oracle::new(&prog, bounds(2, 2));
    let (obs, trunc) = oracle.observed_interfaces();
    assert!(trunc.is_empty());
    assert!(!obs.is_empty());
    let inits = oracle.init_outcomes();
    for (_, li) in obs.iter().take(20) {
        assert!(li.is_wrapped());
        assert!(inits.contains(&li.u[0]));
        assert!(oracle.executions_conforming(li).conforms);
    }
}

#[test]
fn conformance_rejects_non_initial_start() {
    let prog = parse_param(HANDOFF).unwrap();
    let oracle = Oracle::new(&prog, bounds(1, 2));
    // blocked = F, x = 0, y = 0 is not produced by init.
    let s = SharedState::from(vec![0, 0, 0]);
    let li = LinearInterface { u: vec![s.clone()], v: vec![s] };
    assert!(!oracle.executions_conforming(&li).conforms);
    let init = SharedState::from(vec![1, 0, 0]);
    let done = SharedState::from(vec![0, 12, 2]);
    let li = LinearInterface { u: vec![init.clone()], v: vec![done.clone()] };
    assert!(oracle.executions_conforming(&li).conforms);
    // Two rounds: T1 spins in round 1 while T2 hands over; T1 divides in round 2.
    let oracle2 = Oracle::new(&prog, bounds(2, 2));
    let li = LinearInterface {
        u: vec![init, done.clone()],
        v: vec![done, SharedState::from(vec![0, 6, 2])],
    };
    assert!(oracle2.executions_conforming(&li).conforms);
}
