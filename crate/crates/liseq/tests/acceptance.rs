//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test --release --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestCaseError, TestRunner};

use liseq::interfaces::Interfaces;
use liseq::lang::{normalize, parse_param, print_param, print_seq, visit_param_stmts, walk_block, Expr, ParamProgram, Pc, StmtKind, Type};
use liseq::machine::RuntimeError;
use liseq::param_oracle::{lossy, Bounds, Oracle, OracleReport};
use liseq::pmpds::{self, SIZE_CONSTANT};
use liseq::seq_eager::{classify, sequentialize_eager};
use liseq::seq_explorer::{explore_seq, ExplorerBounds, ExplorerReport};
use liseq::seq_lazy::sequentialize_lazy;

const THREADS: usize = 3;
const PDS_BUDGET: usize = 500_000;

type Check = Result<String, String>;

fn bounds(k: usize, max_threads: usize) -> Bounds {
    Bounds {
        k,
        max_threads,
        ..Bounds::default()
    }
}

fn explorer(max_threads: usize, record_io: bool) -> ExplorerBounds {
    ExplorerBounds {
        max_root_depth: max_threads,
        record_io,
        ..ExplorerBounds::default()
    }
}

fn lazy_run(prog: &ParamProgram, k: usize, max_threads: usize, record_io: bool) -> ExplorerReport {
    let out = sequentialize_lazy(prog, k).expect("normalized program");
    explore_seq(&out.program, Some(&out.stmt_map), &explorer(max_threads, record_io))
}

fn seq_div0(r: &ExplorerReport) -> bool {
    r.runtime_errors.iter().any(|e| e.kind == RuntimeError::DivisionByZero)
}

/// Normalized corpus programs, excluding the wide-range directory.
struct Corpus {
    programs: Vec<(String, ParamProgram)>,
}

impl Corpus {
    fn load() -> Corpus {
        let programs = common::corpus().into_iter().map(|(name, _, p)| (name, normalize(&p))).collect();
        Corpus { programs }
    }
}

/// Oracle and lazy verdicts per program and round bound, shared between
/// the equivalence, laziness and pushdown checks.
#[derive(Default)]
struct Runs {
    oracle: BTreeMap<(String, usize), OracleReport>,
    lazy: BTreeMap<(String, usize), ExplorerReport>,
    handoff_eager_gap: Option<bool>,
}

fn handoff(file: &str) -> ParamProgram {
    let path = common::corpus_dir().join("wide").join(file);
    let src = std::fs::read_to_string(&path).unwrap();
    normalize(&parse_param(&src).unwrap())
}

fn assert_pc(prog: &ParamProgram) -> Option<Pc> {
    let mut found = None;
    visit_param_stmts(prog, &mut |s| {
        if let StmtKind::Assert(Expr::Binary(_, l, r)) = &s.kind {
            if **l == Expr::var("y") && **r == Expr::Int(0) {
                found = Some(s.pc);
            }
        }
    });
    found
}

fn separation(runs: &mut Runs) -> Check {
    let start = Instant::now();
    let (k, m) = (2, 2);
    let prog = handoff("handoff.pp");
    let pc = assert_pc(&prog).ok_or("assert(y != 0) not found")?;

    let oracle = liseq::param_oracle::explore(&prog, &bounds(k, m));
    if lossy(&oracle.truncated) {
        return Err(format!("oracle truncated: {:?}", oracle.truncated));
    }
    if oracle.has_violation() || oracle.has_error(RuntimeError::DivisionByZero) {
        return Err("oracle reports a violation or division by zero".into());
    }
    let lazy = lazy_run(&prog, k, m, false);
    if lossy(&lazy.truncated) || lazy.has_violation() || seq_div0(&lazy) {
        return Err(format!("lazy: violation={} div0={} truncated={:?}", lazy.has_violation(), seq_div0(&lazy), lazy.truncated));
    }

    let eager = sequentialize_eager(&prog, k).expect("normalized program");
    let er = explore_seq(&eager.program, Some(&eager.stmt_map), &explorer(m, false));
    let verdict = classify(&er, &eager.stmt_map);
    if verdict.validated || !verdict.speculative.iter().any(|v| v.orig == Some(pc)) {
        return Err(format!("eager: validated={} speculative at {:?}", verdict.validated, verdict.speculative.iter().map(|v| v.orig).collect::<Vec<_>>()));
    }
    runs.handoff_eager_gap = Some(!er.instrumented.is_subset(&oracle.reachable));

    let bare = handoff("handoff_noassert.pp");
    let eager = sequentialize_eager(&bare, k).expect("normalized program");
    let er = explore_seq(&eager.program, Some(&eager.stmt_map), &explorer(m, false));
    if !seq_div0(&er) || classify(&er, &eager.stmt_map).validated {
        return Err("eager without the assertion reports no speculative division by zero".into());
    }

    let took = start.elapsed();
    if took >= Duration::from_secs(10) {
        return Err(format!("took {took:.2?}, target 10s"));
    }
    Ok(format!("oracle {} states, lazy clean, eager speculative at {pc}, div0 without assert; {took:.2?}", oracle.states))
}

fn max_width(prog: &ParamProgram) -> u64 {
    let mut decls: Vec<&Type> = prog.shared.iter().map(|d| &d.ty).collect();
    for p in &prog.processes {
        decls.extend(p.globals.iter().map(|d| &d.ty));
        for f in &p.procedures {
            decls.extend(f.frame_vars().map(|d| &d.ty));
            decls.extend(f.ret.iter());
        }
    }
    decls.into_iter().map(Type::domain_size).max().unwrap_or(0)
}

fn has_atomic(prog: &ParamProgram) -> bool {
    let mut found = false;
    visit_param_stmts(prog, &mut |s| found |= matches!(s.kind, StmtKind::Atomic(_)));
    found
}

/// Some procedure can reach a call to itself.
fn has_recursion(prog: &ParamProgram) -> bool {
    prog.processes.iter().any(|p| {
        let callees = |name: &str| {
            let mut out = BTreeSet::new();
            if let Some(f) = p.procedure(name) {
                walk_block(&f.body, &mut |s| {
                    if let StmtKind::Call { proc, .. } = &s.kind {
                        out.insert(proc.clone());
                    }
                });
            }
            out
        };
        p.procedures.iter().any(|f| {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<String> = callees(&f.name).into_iter().collect();
            while let Some(g) = stack.pop() {
                if g == f.name {
                    return true;
                }
                if seen.insert(g.clone()) {
                    stack.extend(callees(&g));
                }
            }
            false
        })
    })
}

fn equivalence(corpus: &Corpus, runs: &mut Runs) -> Check {
    let start = Instant::now();
    let n = corpus.programs.len();
    if n < 20 {
        return Err(format!("corpus has {n} programs, need 20"));
    }
    for (name, prog) in &corpus.programs {
        if max_width(prog) > 8 || prog.processes.len() > 2 {
            return Err(format!("{name}: outside the corpus shape (ints <= [0,7], <= 2 process types)"));
        }
    }
    let all = |f: fn(&ParamProgram) -> bool| corpus.programs.iter().filter(|(_, p)| f(p)).count();
    let (rec, atomic) = (all(has_recursion), all(has_atomic));
    if rec == 0 || rec == n || atomic == 0 || atomic == n {
        return Err(format!("corpus lacks variety: {rec} recursive, {atomic} atomic of {n}"));
    }

    let (mut compared, mut truncated, mut violating) = (0, 0, 0);
    let mut wrong = Vec::new();
    for (name, prog) in &corpus.programs {
        for k in 1..=3 {
            let oracle = liseq::param_oracle::explore(prog, &bounds(k, THREADS));
            let lazy = lazy_run(prog, k, THREADS, false);
            if lossy(&oracle.truncated) || lossy(&lazy.truncated) {
                truncated += 1;
            } else {
                compared += 1;
                violating += oracle.has_violation() as usize;
                if oracle.has_violation() != lazy.has_violation() {
                    wrong.push(format!("{name} k={k}: oracle={} lazy={}", oracle.has_violation(), lazy.has_violation()));
                }
            }
            runs.oracle.insert((name.clone(), k), oracle);
            runs.lazy.insert((name.clone(), k), lazy);
        }
    }
    let took = start.elapsed();
    if !wrong.is_empty() {
        return Err(wrong.join("; "));
    }
    if took >= Duration::from_secs(300) {
        return Err(format!("took {took:.2?}, target 300s"));
    }
    Ok(format!(
        "{n} programs ({rec} recursive, {atomic} atomic), {compared} instances agree ({violating} violating), {truncated} truncated; {took:.2?}"
    ))
}

fn laziness(runs: &Runs) -> Check {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (key, oracle) in &runs.oracle {
        if lossy(&oracle.truncated) {
            continue;
        }
        checked += 1;
        let lazy = &runs.lazy[key];
        if !lazy.instrumented.is_subset(&oracle.reachable) {
            bad.push(format!("{} k={}", key.0, key.1));
        }
    }
    if !bad.is_empty() {
        return Err(format!("lazy reaches states the oracle does not: {}", bad.join(", ")));
    }
    match runs.handoff_eager_gap {
        Some(true) => Ok(format!("{checked} lazy runs within oracle reach; eager exceeds it on handoff")),
        Some(false) => Err("eager instrumented set is within oracle reach on handoff".into()),
        None => Err("handoff eager run unavailable".into()),
    }
}

fn io_records(corpus: &Corpus) -> Check {
    let start = Instant::now();
    let (mut records, mut programs) = (0, 0);
    for (name, prog) in &corpus.programs {
        for k in 1..=2 {
            let r = lazy_run(prog, k, THREADS, true);
            let mut search = Interfaces::new(prog, bounds(k, THREADS));
            for rec in &r.io {
                let li = rec.interface();
                let check = search.check(&li);
                let Some(w) = check.witness else {
                    return Err(format!("{name} k={k}: record with bound {} has no witness", rec.bound));
                };
                search.validate(&li, &w).map_err(|e| format!("{name} k={k}: {e}"))?;
                records += 1;
            }
            programs += (!r.io.is_empty()) as usize;
        }
    }
    if records == 0 {
        return Err("no records harvested".into());
    }
    Ok(format!("{records} records from {programs} runs re-validate; {:.2?}", start.elapsed()))
}

fn conformance(corpus: &Corpus) -> Check {
    let start = Instant::now();
    let (mut checked, mut skipped, mut interfaces) = (0, 0, 0);
    for (name, prog) in &corpus.programs {
        for k in 1..=2 {
            let oracle = Oracle::new(prog, bounds(k, THREADS));
            let (observed, t1) = oracle.observed_interfaces();
            let mut search = Interfaces::new(prog, bounds(k, THREADS));
            let enumerated = search.enumerate();
            if lossy(&t1) || lossy(search.truncated()) {
                skipped += 1;
                continue;
            }
            let inits = oracle.init_outcomes();
            let observed: BTreeSet<_> = observed.into_iter().map(|(_, li)| li).collect();
            for li in &observed {
                if !li.is_wrapped() || !inits.contains(&li.u[0]) || !enumerated.contains(li) {
                    return Err(format!("{name} k={k}: execution interface is not a wrapped initial interface"));
                }
            }
            let wrapped: BTreeSet<_> = enumerated.into_iter().filter(|li| li.is_wrapped() && inits.contains(&li.u[0])).collect();
            for li in &wrapped {
                let c = oracle.executions_conforming(li);
                if lossy(&c.truncated) {
                    continue;
                }
                if !c.conforms {
                    return Err(format!("{name} k={k}: wrapped initial interface without a conforming execution"));
                }
            }
            if wrapped != observed {
                return Err(format!("{name} k={k}: {} observed vs {} wrapped initial", observed.len(), wrapped.len()));
            }
            checked += 1;
            interfaces += wrapped.len();
        }
    }
    Ok(format!("{checked} instances, {interfaces} interfaces agree both ways, {skipped} truncated; {:.2?}", start.elapsed()))
}

fn pushdown(corpus: &Corpus, runs: &Runs) -> Check {
    let start = Instant::now();
    let mut programs = BTreeSet::new();
    let (mut worst_loc, mut worst_tr) = (0f64, 0f64);
    let mut lines = 0;
    for (name, prog) in &corpus.programs {
        for k in 1..=2 {
            let built = pmpds::lower(prog, PDS_BUDGET).and_then(|p| pmpds::build_ak(&p, k, PDS_BUDGET));
            let Ok(ak) = built else { continue };
            if ak.stats.shared_states > 16 {
                continue;
            }
            let oracle = &runs.oracle[&(name.clone(), k)];
            if lossy(&oracle.truncated) {
                continue;
            }
            let reach = pmpds::pds_reach(&ak.pds);
            let violation = !reach.is_disjoint(&ak.pds.targets);
            if violation != oracle.has_violation() {
                return Err(format!("{name} k={k}: pds={violation} oracle={}", oracle.has_violation()));
            }
            if !ak.stats.within(SIZE_CONSTANT) {
                return Err(format!(
                    "{name} k={k}: ratios {:.3}/{:.3} exceed C={SIZE_CONSTANT}",
                    ak.stats.location_ratio(),
                    ak.stats.transition_ratio()
                ));
            }
            worst_loc = worst_loc.max(ak.stats.location_ratio());
            worst_tr = worst_tr.max(ak.stats.transition_ratio());
            programs.insert(name.clone());
            lines += 1;
        }
    }
    if programs.len() < 5 {
        return Err(format!("only {} programs with |S| <= 16 fit the budget", programs.len()));
    }
    Ok(format!(
        "C = {SIZE_CONSTANT}; {} programs, {lines} instances agree; max ratios {worst_loc:.3} (locations), {worst_tr:.3} (transitions); {:.2?}",
        programs.len(),
        start.elapsed()
    ))
}

fn round_trip_and_determinism() -> Check {
    let start = Instant::now();
    let mut files = common::corpus();
    files.extend(common::load(&common::corpus_dir().join("wide")));
    for (name, _, prog) in &files {
        let text = print_param(prog);
        let again = parse_param(&text).map_err(|d| d.render(name))?;
        if &again != prog || print_param(&again) != text {
            return Err(format!("{name} does not round-trip"));
        }
    }

    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&common::arb::program(), |prog| {
            let text = print_param(&prog);
            match parse_param(&text) {
                Ok(p) if p == prog => Ok(()),
                Ok(_) => Err(TestCaseError::fail(format!("reparsed program differs:\n{text}"))),
                Err(d) => Err(TestCaseError::fail(format!("{}\n{text}", d.render("generated")))),
            }
        })
        .map_err(|e| e.to_string())?;

    let report = |prog: &ParamProgram| {
        let k = 2;
        let mut out = liseq::param_oracle::explore(prog, &bounds(k, THREADS)).to_json();
        let lazy = sequentialize_lazy(prog, k).expect("normalized program");
        out += &print_seq(&lazy.program);
        out += &explore_seq(&lazy.program, Some(&lazy.stmt_map), &explorer(THREADS, true)).to_json();
        let eager = sequentialize_eager(prog, k).expect("normalized program");
        out += &print_seq(&eager.program);
        out += &explore_seq(&eager.program, Some(&eager.stmt_map), &explorer(THREADS, false)).to_json();
        out
    };
    for (name, _, prog) in &files {
        let prog = normalize(prog);
        if report(&prog) != report(&prog) {
            return Err(format!("{name}: reports differ between runs"));
        }
    }
    Ok(format!("{} files and 500 random programs round-trip; reports identical; {:.2?}", files.len(), start.elapsed()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut line = |n: usize, title: &str, check: std::thread::Result<Check>| {
        let (tag, detail) = match check {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(_) => ("FAIL", "panicked".to_string()),
        };
        failed += (tag == "FAIL") as usize;
        println!("[{tag}] {n}. {title}: {detail}");
    };
    let corpus = Corpus::load();
    let mut runs = Runs::default();
    line(1, "handoff separation", catch_unwind(AssertUnwindSafe(|| separation(&mut runs))));
    line(2, "oracle/lazy equivalence", catch_unwind(AssertUnwindSafe(|| equivalence(&corpus, &mut runs))));
    line(3, "laziness", catch_unwind(AssertUnwindSafe(|| laziness(&runs))));
    line(4, "interface records", catch_unwind(AssertUnwindSafe(|| io_records(&corpus))));
    line(5, "execution/interface conformance", catch_unwind(AssertUnwindSafe(|| conformance(&corpus))));
    line(6, "pushdown reachability and size", catch_unwind(AssertUnwindSafe(|| pushdown(&corpus, &runs))));
    line(7, "round-trip and determinism", catch_unwind(AssertUnwindSafe(round_trip_and_determinism)));
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
