use super::*;

const HANDOFF: &str = include_str!("../../../../corpus/wide/handoff.pp");

fn relabeled(mut p: ParamProgram) -> ParamProgram {
    relabel_param(&mut p);
    p
}

#[test]
fn minimal_program() {
    let p = parse_param("int x; init: skip; process P: main() begin skip; end").unwrap();
    assert_eq!(p.shared, vec![VarDecl::new("x", DEFAULT_INT)]);
    assert_eq!(p.init.len(), 1);
    assert!(matches!(p.init[0].kind, StmtKind::Skip));
    assert_eq!(p.processes.len(), 1);
    assert!(p.processes[0].main().unwrap().ret.is_none());
}

#[test]
fn handoff_parses() {
    let p = parse_param(HANDOFF).unwrap();
    let shared: Vec<_> = p.shared.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(shared, ["blocked", "x", "y"]);
    let names: Vec<_> = p.processes.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names, ["P1", "P2"]);
    assert!(param_pcs_unique(&p));
}

#[test]
fn handoff_prints_processes_in_order() {
    let p = parse_param(HANDOFF).unwrap();
    let text = print_param(&p);
    let a = text.find("process P1").unwrap();
    let b = text.find("process P2").unwrap();
    assert!(a < b);
    assert_eq!(parse_param(&text).unwrap(), p);
}

#[test]
fn call_to_main_is_a_scope_error() {
    let src = "init: skip; process P: void f() begin call main(); end void main() begin call f(); end";
    let errs = parse_param(src).unwrap_err();
    assert!(errs.has(DiagKind::Scope));
    assert!(errs.mentions("call to main"));
}

#[test]
fn diagnostics_render_with_position() {
    let errs = parse_param("init: skip;\nprocess P: main() begin x := 1; end").unwrap_err();
    let text = errs.render("t.pp");
    assert!(text.starts_with("t.pp:2:"), "{text}");
    assert!(text.contains("error"));
    assert!(errs.mentions("undeclared variable `x`"));
}

#[test]
fn syntax_errors() {
    for src in [
        "init: skip process P: main() begin skip; end",
        "init: skip; process P: main() begin while T do skip; end",
        "init: skip; process P: main() begin x := ; end",
        "int[3,1] x; init: skip; process P: main() begin skip; end",
    ] {
        let errs = parse_param(src).unwrap_err();
        assert!(errs.has(DiagKind::Syntax), "{src}: {errs:?}");
    }
}

#[test]
fn scope_and_type_errors() {
    let cases = [
        ("bool b; init: b := 1; process P: main() begin skip; end", DiagKind::Type),
        ("init: skip; process P: main() begin atomic begin atomic begin skip; end end end", DiagKind::Scope),
        ("init: skip; process P: void f() begin skip; end", DiagKind::Scope),
        ("int x; init: skip; process P: int x; main() begin skip; end", DiagKind::Scope),
        ("init: skip; process P: int f() begin if (*) then return 1; fi end main() begin skip; end", DiagKind::Type),
        ("int __liseq_x; init: skip; process P: main() begin skip; end", DiagKind::Scope),
        ("init: skip; process P: main(int a) begin skip; end", DiagKind::Scope),
    ];
    for (src, kind) in cases {
        let errs = parse_param(src).unwrap_err();
        assert!(errs.has(kind), "{src}: {errs:?}");
    }
}

#[test]
fn reserved_names_allowed_on_request() {
    let src = "int __liseq_x; init: skip; process P: main() begin skip; end";
    let opts = ParseOptions {
        allow_reserved: true,
        ..ParseOptions::default()
    };
    assert!(parse_param_with(src, &opts).is_ok());
}

#[test]
fn seq_examples() {
    let p = parse_seq("bool b; void main() begin assert F; end").unwrap();
    assert_eq!(p.procedures.len(), 1);
    assert!(matches!(p.procedures[0].body[0].kind, StmtKind::Assert(Expr::Bool(false))));

    let errs = parse_seq("void main() begin atomic begin skip; end end").unwrap_err();
    assert!(errs.has(DiagKind::Syntax));
}

#[test]
fn nested_control_flow_round_trips() {
    let src = "int[0,3] n; init: n := 0;
        process P: void main() begin
          while (n < 3) do
            if (n = 1) then if (*) then n := n + 1; else skip; fi else n := n + 1; fi
          od
          atomic begin n := (n + 1) * 2 - 1; n := -(n) % 3; end
        end";
    let p = parse_param(src).unwrap();
    let text = print_param(&p);
    assert_eq!(parse_param(&text).unwrap(), p);
    assert_eq!(print_param(&parse_param(&text).unwrap()), text);
}

#[test]
fn expression_printing_is_unambiguous() {
    let src = "int[-8,8] a, b; bool c; init: a := a - (b - 1); a := (a - b) - 1; c := (a < b) = c;
        c := !(c || c) && c; a := -3 * -(a); a := a / (b * 2); process P: main() begin skip; end";
    let p = parse_param(src).unwrap();
    let again = parse_param(&print_param(&p)).unwrap();
    assert_eq!(again, p);
}

#[test]
fn normalize_merges_processes() {
    let p = parse_param(HANDOFF).unwrap();
    let n = normalize(&p);
    assert!(is_normalized(&n));
    assert_eq!(n.processes.len(), 1);
    let proc = &n.processes[0];
    let names: Vec<_> = proc.procedures.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names, ["P1_main", "P2_main", "main"]);
    let text = print_param(&n);
    assert!(text.contains("if (*) then\n      call P1_main();\n    else\n      call P2_main();\n    fi"), "{text}");
    assert!(param_pcs_unique(&n));
}

#[test]
fn normalize_is_identity_on_normalized_input() {
    let p = parse_param("int x; init: skip; process P: main() begin x := 1; end").unwrap();
    assert_eq!(normalize(&p), p);
}

#[test]
fn normalize_lowers_value_returns() {
    let src = "int x; init: skip; process P: int f() begin return 3; end main() begin x := f(); end";
    let p = parse_param(src).unwrap();
    let n = normalize(&p);
    let proc = &n.processes[0];
    assert!(proc.procedures.iter().all(|p| p.ret.is_none()));
    let g = return_global("f");
    assert!(proc.globals.iter().any(|d| d.name == g));
    let main = proc.main().unwrap();
    assert!(matches!(&main.body[0].kind, StmtKind::Call { lhs: None, proc, .. } if proc == "f"));
    assert!(matches!(&main.body[1].kind, StmtKind::Assign { lhs, rhs: Expr::Var(v) } if lhs == "x" && *v == g));
    // The printed form is valid input once reserved names are allowed.
    let opts = ParseOptions {
        allow_reserved: true,
        ..ParseOptions::default()
    };
    let again = parse_param_with(&print_param(&n), &opts).unwrap();
    assert_eq!(again, relabeled(n));
}

#[test]
fn normalize_renames_process_globals() {
    let src = "init: skip;
        process A: int g; void main() begin g := 1; end
        process B: int g; void main() begin g := 2; end";
    let n = normalize(&parse_param(src).unwrap());
    let globals: Vec<_> = n.processes[0].globals.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(globals, ["A_g", "B_g"]);
}
