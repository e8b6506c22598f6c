//! One function per subcommand; each returns the process exit code.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde_json::json;

use liseq::compare::{self, label, CompareConfig, Status};
use liseq::interfaces::{enumerate_interfaces, is_initial};
use liseq::lang::{normalize, parse_param_with, parse_seq_with, print_param, print_seq, ParamProgram, ParseOptions, SeqProgram, Type};
use liseq::param_oracle::{self, lossy, Truncation};
use liseq::pmpds::{self, PdsError, SIZE_CONSTANT};
use liseq::seq_eager::{classify, sequentialize_eager};
use liseq::seq_explorer::explore_seq;
use liseq::seq_lazy::{sequentialize_lazy, Scheme, StmtMap};

use crate::error::CliError;
use crate::{BoundArgs, JsonArg, TransformArgs};

pub const OK: u8 = 0;
pub const MISMATCH: u8 = 1;
pub const INCONCLUSIVE: u8 = 3;

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(CliError::io(path))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

fn options(int_range: Option<Type>) -> ParseOptions {
    ParseOptions {
        default_int: int_range.unwrap_or(ParseOptions::default().default_int),
        ..ParseOptions::default()
    }
}

pub fn load_param(path: &Path, int_range: Option<Type>) -> Result<ParamProgram, CliError> {
    let text = read(path)?;
    parse_param_with(&text, &options(int_range)).map_err(|d| CliError::Parse(d.render(&path.display().to_string())))
}

fn load_seq(path: &Path, int_range: Option<Type>) -> Result<SeqProgram, CliError> {
    let text = read(path)?;
    parse_seq_with(&text, &options(int_range)).map_err(|d| CliError::Parse(d.render(&path.display().to_string())))
}

pub fn emit_json(out: &JsonArg, text: &str) -> Result<(), CliError> {
    match &out.json {
        Some(path) => write(path, &format!("{text}\n")),
        None => Ok(()),
    }
}

fn truncation_status(t: &BTreeSet<Truncation>) -> u8 {
    if lossy(t) {
        INCONCLUSIVE
    } else {
        OK
    }
}

fn print_truncation(t: &BTreeSet<Truncation>) {
    if lossy(t) {
        let names: Vec<String> = t.iter().map(|t| format!("{t:?}")).collect();
        println!("truncated     {}", names.join(", "));
    }
}

pub fn oracle(file: &Path, b: &BoundArgs, out: &JsonArg) -> Result<u8, CliError> {
    let prog = load_param(file, b.int_range)?;
    let r = param_oracle::explore(&prog, &b.bounds());
    println!("violation     {}", label(r.has_violation()));
    for v in &r.violations {
        println!("  assertion {}", v.pc);
    }
    for e in &r.runtime_errors {
        let at = e.pc.map(|p| p.to_string()).unwrap_or_else(|| "?".into());
        println!("runtime error {:?} {at}", e.kind);
    }
    println!("reachable     {}", r.reachable.len());
    println!("states        {}", r.states);
    print_truncation(&r.truncated);
    emit_json(out, &r.to_json())?;
    Ok(truncation_status(&r.truncated))
}

pub fn transform(t: &TransformArgs, eager: bool) -> Result<u8, CliError> {
    let prog = normalize(&load_param(&t.file, t.int_range)?);
    let k = t.k as usize;
    let (program, map) = if eager {
        let o = sequentialize_eager(&prog, k)?;
        (o.program, o.stmt_map)
    } else {
        let o = sequentialize_lazy(&prog, k)?;
        (o.program, o.stmt_map)
    };
    let text = print_seq(&program);
    match &t.output {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    let map_path = t.map.clone().or_else(|| t.output.as_ref().map(|o| sibling_map(o)));
    if let Some(path) = map_path {
        write(&path, &format!("{}\n", map.to_json()))?;
    }
    Ok(OK)
}

/// `dir/name.sp` → `dir/name.map.json`.
fn sibling_map(output: &Path) -> PathBuf {
    output.with_extension("map.json")
}

pub fn run(file: &Path, map: Option<&Path>, io: bool, b: &BoundArgs, out: &JsonArg) -> Result<u8, CliError> {
    let prog = load_seq(file, b.int_range)?;
    let map = match map {
        Some(path) => Some(StmtMap::from_json(&read(path)?).map_err(|source| CliError::Json {
            path: path.into(),
            source,
        })?),
        None => None,
    };
    let r = explore_seq(&prog, map.as_ref(), &b.explorer(io));
    println!("violation     {}", label(r.has_violation()));
    println!("runtime error {}", r.has_error());
    println!("locations     {}", r.states);
    println!("instrumented  {}", r.instrumented.len());
    if io {
        println!("io records    {}", r.io.len());
    }
    let mut report: serde_json::Value = serde_json::from_str(&r.to_json()).expect("report is JSON");
    if let Some(m) = map.as_ref().filter(|m| m.scheme == Scheme::Eager) {
        let v = classify(&r, m);
        println!("speculative   {}", v.speculative.len());
        println!("validated     {}", v.validated);
        report["eager"] = serde_json::to_value(&v).expect("verdict serializes");
    }
    print_truncation(&r.truncated);
    emit_json(out, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    Ok(truncation_status(&r.truncated))
}

pub fn interfaces(file: &Path, initial: bool, b: &BoundArgs, out: &JsonArg) -> Result<u8, CliError> {
    let prog = load_param(file, b.int_range)?;
    let bounds = b.bounds();
    let (set, truncated) = enumerate_interfaces(&prog, bounds.k, &bounds);
    let list: Vec<serde_json::Value> = set.iter().filter(|li| !initial || is_initial(li, &prog)).map(|li| li.render(&prog.shared)).collect();
    let text = serde_json::to_string_pretty(&json!({ "k": bounds.k, "interfaces": list, "truncated": truncated }))
        .expect("interfaces serialize");
    println!("{text}");
    emit_json(out, &text)?;
    Ok(truncation_status(&truncated))
}

pub fn pds(file: &Path, stats: bool, budget: usize, b: &BoundArgs, out: &JsonArg) -> Result<u8, CliError> {
    let prog = normalize(&load_param(file, b.int_range)?);
    let k = b.k as usize;
    let built = pmpds::lower(&prog, budget).and_then(|p| pmpds::build_ak(&p, k, budget));
    let ak = match built {
        Ok(ak) => ak,
        Err(e @ PdsError::Budget { .. }) => {
            println!("skipped       {e}");
            emit_json(out, &serde_json::to_string_pretty(&json!({ "skipped": e.to_string() })).expect("serializes"))?;
            return Ok(INCONCLUSIVE);
        }
        Err(e) => return Err(e.into()),
    };
    let reach = pmpds::pds_reach(&ak.pds);
    let violation = !reach.is_disjoint(&ak.pds.targets);
    let error = !reach.is_disjoint(&ak.errors);
    println!("violation     {}", label(violation));
    println!("runtime error {error}");
    if stats {
        let s = &ak.stats;
        println!("|S|           {}", s.shared_states);
        println!("ell           {}", s.ell);
        println!("d             {}", s.d);
        println!("locations     {} (envelope {:.3e}, ratio {:.3})", s.locations, s.location_envelope, s.location_ratio());
        println!("transitions   {} (envelope {:.3e}, ratio {:.3})", s.transitions, s.transition_envelope, s.transition_ratio());
        println!("constant C    {SIZE_CONSTANT} ({})", if s.within(SIZE_CONSTANT) { "within" } else { "exceeded" });
    }
    let text = serde_json::to_string_pretty(&json!({
        "k": k,
        "violation": violation,
        "runtime_error": error,
        "stats": ak.stats,
        "constant": SIZE_CONSTANT,
    }))
    .expect("serializes");
    emit_json(out, &text)?;
    Ok(OK)
}

pub fn compare(file: &Path, eager: bool, pds_budget: Option<usize>, b: &BoundArgs, out: &JsonArg) -> Result<u8, CliError> {
    let prog = load_param(file, b.int_range)?;
    let config = CompareConfig {
        bounds: b.bounds(),
        eager,
        pds_budget,
    };
    let r = compare::compare(&prog, &config);
    print!("{}", r.table());
    emit_json(out, &r.to_json())?;
    Ok(status_code(r.status))
}

pub fn status_code(s: Status) -> u8 {
    match s {
        Status::Agree => OK,
        Status::Mismatch => MISMATCH,
        Status::Inconclusive => INCONCLUSIVE,
    }
}

pub fn fmt(file: &Path, output: Option<&Path>, int_range: Option<Type>) -> Result<u8, CliError> {
    let text = if file.extension().is_some_and(|e| e == "sp") {
        print_seq(&load_seq(file, int_range)?)
    } else {
        print_param(&load_param(file, int_range)?)
    };
    match output {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(OK)
}
