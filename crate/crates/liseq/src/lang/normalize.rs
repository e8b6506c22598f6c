//! Reduction to a single process whose procedures are all `void`.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::check::RESERVED_PREFIX;

/// True when `prog` has one process, only `void` procedures and no call
/// that receives a value.
pub fn is_normalized(prog: &ParamProgram) -> bool {
    if prog.processes.len() != 1 {
        return false;
    }
    let procs = &prog.processes[0].procedures;
    let mut value_calls = false;
    for p in procs {
        walk_block(&p.body, &mut |s| {
            if matches!(s.kind, StmtKind::Call { lhs: Some(_), .. } | StmtKind::Return(Some(_))) {
                value_calls = true;
            }
        });
    }
    procs.iter().all(|p| p.ret.is_none()) && !value_calls
}

/// Name of the global that carries the return value of `proc`.
pub fn return_global(proc: &str) -> String {
    format!("{RESERVED_PREFIX}ret_{proc}")
}

struct Names(HashSet<String>);

impl Names {
    fn of(prog: &ParamProgram) -> Self {
        let mut set = HashSet::new();
        set.extend(prog.shared.iter().map(|d| d.name.clone()));
        for proc in &prog.processes {
            set.insert(proc.name.clone());
            set.extend(proc.globals.iter().map(|d| d.name.clone()));
            for p in &proc.procedures {
                set.insert(p.name.clone());
                set.extend(p.frame_vars().map(|d| d.name.clone()));
            }
        }
        Names(set)
    }

    fn fresh(&mut self, base: String) -> String {
        let mut name = base.clone();
        let mut n = 1;
        while self.0.contains(&name) {
            name = format!("{base}_{n}");
            n += 1;
        }
        self.0.insert(name.clone());
        name
    }
}

fn rename_expr(e: &mut Expr, vars: &HashMap<String, String>) {
    match e {
        Expr::Var(v) => {
            if let Some(n) = vars.get(v) {
                *v = n.clone();
            }
        }
        Expr::Unary(_, inner) => rename_expr(inner, vars),
        Expr::Binary(_, l, r) => {
            rename_expr(l, vars);
            rename_expr(r, vars);
        }
        Expr::Bool(_) | Expr::Int(_) | Expr::Nondet => {}
    }
}

fn rename_stmt(s: &mut Stmt, vars: &HashMap<String, String>, procs: &HashMap<String, String>) {
    let rn = |v: &mut String| {
        if let Some(n) = vars.get(v) {
            *v = n.clone();
        }
    };
    match &mut s.kind {
        StmtKind::Assign { lhs, rhs } => {
            rn(lhs);
            rename_expr(rhs, vars);
        }
        StmtKind::Assume(e) | StmtKind::Assert(e) | StmtKind::Return(Some(e)) => rename_expr(e, vars),
        StmtKind::Call { lhs, proc, args } => {
            if let Some(l) = lhs {
                rn(l);
            }
            if let Some(n) = procs.get(proc) {
                *proc = n.clone();
            }
            args.iter_mut().for_each(|a| rename_expr(a, vars));
        }
        StmtKind::While { cond, .. } | StmtKind::If { cond, .. } => rename_expr(cond, vars),
        StmtKind::Skip | StmtKind::Return(None) | StmtKind::Atomic(_) => {}
    }
}

/// Rewrites value returns and value calls through return globals.
fn lower_returns(block: Vec<Stmt>, ret_global: Option<&str>, rets: &HashMap<String, String>, pcs: &mut PcGen) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(block.len());
    for s in block {
        let pc = s.pc;
        match s.kind {
            StmtKind::Return(Some(e)) => {
                let g = ret_global.expect("checked: value return only in non-void procedures");
                out.push(Stmt::new(pc, StmtKind::Assign { lhs: g.to_string(), rhs: e }));
                out.push(pcs.stmt(StmtKind::Return(None)));
            }
            StmtKind::Call { lhs: Some(x), proc, args } => {
                let g = rets[&proc].clone();
                out.push(Stmt::new(pc, StmtKind::Call { lhs: None, proc, args }));
                out.push(pcs.stmt(StmtKind::Assign { lhs: x, rhs: Expr::Var(g) }));
            }
            StmtKind::While { cond, body } => out.push(Stmt::new(
                pc,
                StmtKind::While {
                    cond,
                    body: lower_returns(body, ret_global, rets, pcs),
                },
            )),
            StmtKind::If { cond, then_branch, else_branch } => out.push(Stmt::new(
                pc,
                StmtKind::If {
                    cond,
                    then_branch: lower_returns(then_branch, ret_global, rets, pcs),
                    else_branch: lower_returns(else_branch, ret_global, rets, pcs),
                },
            )),
            kind => out.push(Stmt::new(pc, kind)),
        }
    }
    out
}

/// Merges all processes into one whose `main` picks an original `main`
/// nondeterministically, and turns every value-returning procedure into a
/// `void` one that writes a fresh global. Statements keep their pcs; new
/// statements get fresh ones.
pub fn normalize(prog: &ParamProgram) -> ParamProgram {
    if is_normalized(prog) {
        return prog.clone();
    }
    let mut names = Names::of(prog);
    let mut pcs = PcGen::above_param(prog);
    let multi = prog.processes.len() > 1;

    let mut globals = Vec::new();
    let mut procedures = Vec::new();
    let mut mains = Vec::new();
    for process in &prog.processes {
        let mut var_map = HashMap::new();
        let mut proc_map = HashMap::new();
        if multi {
            for g in &process.globals {
                var_map.insert(g.name.clone(), names.fresh(format!("{}_{}", process.name, g.name)));
            }
            for p in &process.procedures {
                proc_map.insert(p.name.clone(), names.fresh(format!("{}_{}", process.name, p.name)));
            }
        }
        for g in &process.globals {
            let name = var_map.get(&g.name).cloned().unwrap_or_else(|| g.name.clone());
            globals.push(VarDecl::new(name, g.ty));
        }
        let mut rets = HashMap::new();
        for p in &process.procedures {
            if let Some(t) = p.ret {
                let new_name = proc_map.get(&p.name).cloned().unwrap_or_else(|| p.name.clone());
                let g = names.fresh(return_global(&new_name));
                globals.push(VarDecl::new(g.clone(), t));
                rets.insert(new_name, g);
            }
        }
        for p in &process.procedures {
            let mut p = p.clone();
            if let Some(n) = proc_map.get(&p.name) {
                p.name = n.clone();
            }
            walk_block_mut(&mut p.body, &mut |s| rename_stmt(s, &var_map, &proc_map));
            let ret_global = rets.get(&p.name).cloned();
            p.body = lower_returns(std::mem::take(&mut p.body), ret_global.as_deref(), &rets, &mut pcs);
            p.ret = None;
            if proc_map.get("main") == Some(&p.name) {
                mains.push(p.name.clone());
            }
            procedures.push(p);
        }
    }

    let name = if multi {
        prog.processes.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join("_")
    } else {
        prog.processes[0].name.clone()
    };
    if multi {
        procedures.push(Procedure::void("main", vec![], vec![], vec![dispatch(&mains, &mut pcs)]));
    }
    ParamProgram {
        shared: prog.shared.clone(),
        init: prog.init.clone(),
        processes: vec![Process {
            name,
            globals,
            procedures,
        }],
    }
}

/// `if (*) then call m1() else if (*) then call m2() else call mn() fi fi`
fn dispatch(mains: &[String], pcs: &mut PcGen) -> Stmt {
    let call = |pcs: &mut PcGen, m: &str| {
        pcs.stmt(StmtKind::Call {
            lhs: None,
            proc: m.to_string(),
            args: vec![],
        })
    };
    match mains {
        [only] => call(pcs, only),
        [first, rest @ ..] => {
            let pc = pcs.fresh();
            let then_branch = vec![call(pcs, first)];
            let else_branch = vec![dispatch(rest, pcs)];
            Stmt::new(
                pc,
                StmtKind::If {
                    cond: Expr::Nondet,
                    then_branch,
                    else_branch,
                },
            )
        }
        [] => unreachable!("at least one process"),
    }
}
