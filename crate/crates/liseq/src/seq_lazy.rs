//! Lazy sequentialization of a normalized parameterized program for k
//! rounds.
//!
//! The output program simulates one thread at a time. `linear_int` runs a
//! thread from its initial local state and, at every point where a context
//! switch could happen, may either jump to the next round itself (when it
//! is the last thread of the block) or hand the rest of the round to a
//! recursive `linear_int` call that simulates the remaining threads. It
//! only ever continues from shared states that the remaining threads are
//! known to produce, so every state it visits is reachable in the original
//! program.
//!
//! Generated identifiers carry the reserved prefix `__liseq_`. The round
//! context (the tuples `q`/`q'`, `bound`, `last`, `j`) lives in globals;
//! around the recursive call it is saved to frame locals and restored after,
//! which gives each simulated thread its own copy as call-by-value
//! parameters would.
//!
//! ```
//! use liseq::{lang, seq_lazy::sequentialize_lazy};
//!
//! let prog = lang::parse_param("bool b; init: b := F; process P: main() begin b := T; end").unwrap();
//! let out = sequentialize_lazy(&prog, 2).unwrap();
//! let text = lang::print_seq(&out.program);
//! assert_eq!(lang::parse_seq(&text).unwrap(), out.program);
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("program is not normalized (expected one process with void procedures only)")]
    NotNormalized,
    #[error("the number of rounds must be at least 1")]
    ZeroRounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Lazy,
    Eager,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcMap {
    /// Procedure of the sequential program.
    pub name: String,
    /// Procedure of the source program it simulates (`init` for the init block).
    pub original: String,
    /// Frame variables of `name` that belong to `original`.
    pub user_vars: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcPair {
    pub seq: Pc,
    pub orig: Pc,
}

/// Parameter layout of `linear_int`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearIntMap {
    pub name: String,
    /// `q[i][x]`: parameter holding shared variable `x` of tuple entry `i`.
    pub q: Vec<Vec<String>>,
    pub qp: Vec<Vec<String>>,
    pub bound: String,
}

/// Links a generated program back to its source. Original pcs are those of
/// the normalized source program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StmtMap {
    pub scheme: Scheme,
    pub k: usize,
    pub shared: Vec<String>,
    pub process_globals: Vec<String>,
    pub init_proc: String,
    pub procedures: Vec<ProcMap>,
    pub pcs: Vec<PcPair>,
    /// Procedure that simulates a thread (`linear_int` or the eager thread).
    pub root: String,
    pub linear_int: Option<LinearIntMap>,
    /// Eager only: the final assertion that fails iff a validated violation
    /// was found.
    pub validation_pc: Option<Pc>,
}

impl StmtMap {
    pub fn orig_of(&self, seq: Pc) -> Option<Pc> {
        self.pcs.iter().find(|p| p.seq == seq).map(|p| p.orig)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<StmtMap> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LazyOutput {
    pub program: SeqProgram,
    pub stmt_map: StmtMap,
}

pub(crate) fn gen(name: &str) -> String {
    format!("{RESERVED_PREFIX}{name}")
}

/// Names of a k-tuple of shared-state copies: `prefix{i}_{x}`.
pub(crate) fn tuples(prefix: &str, count: usize, shared: &[VarDecl]) -> Vec<Vec<String>> {
    (1..=count)
        .map(|i| shared.iter().map(|d| gen(&format!("{prefix}{i}_{}", d.name))).collect())
        .collect()
}

/// Statement-building helpers shared by both schemes.
pub(crate) struct Build {
    pub pcs: PcGen,
    pub shared: Vec<VarDecl>,
}

impl Build {
    pub fn stmt(&mut self, kind: StmtKind) -> Stmt {
        self.pcs.stmt(kind)
    }

    pub fn assign(&mut self, lhs: &str, rhs: Expr) -> Stmt {
        self.stmt(StmtKind::Assign { lhs: lhs.to_string(), rhs })
    }

    pub fn ite(&mut self, cond: Expr, then_branch: Vec<Stmt>, else_branch: Vec<Stmt>) -> Stmt {
        self.stmt(StmtKind::If {
            cond,
            then_branch,
            else_branch,
        })
    }

    pub fn ret(&mut self) -> Stmt {
        self.stmt(StmtKind::Return(None))
    }

    pub fn assume(&mut self, e: Expr) -> Stmt {
        self.stmt(StmtKind::Assume(e))
    }

    pub fn call(&mut self, proc: &str, args: Vec<Expr>) -> Stmt {
        self.stmt(StmtKind::Call {
            lhs: None,
            proc: proc.to_string(),
            args,
        })
    }

    /// `dst_i := src_i` for each position.
    pub fn copy(&mut self, dst: &[String], src: &[String]) -> Vec<Stmt> {
        dst.iter().zip(src).map(|(d, s)| self.assign(d, Expr::var(s))).collect()
    }

    /// Resets variables to the default value of their type.
    pub fn clear(&mut self, vars: &[String], types: &[Type]) -> Vec<Stmt> {
        vars.iter().zip(types).map(|(v, t)| self.assign(v, default_expr(*t))).collect()
    }

    /// `if (var = lo) then f(lo) else if ... else f(hi) fi`.
    pub fn by_index(&mut self, var: &str, lo: usize, hi: usize, f: &mut dyn FnMut(&mut Build, usize) -> Vec<Stmt>) -> Vec<Stmt> {
        if lo == hi {
            return f(self, lo);
        }
        let then_branch = f(self, lo);
        let else_branch = self.by_index(var, lo + 1, hi, f);
        vec![self.ite(Expr::eq(Expr::var(var), Expr::Int(lo as i64)), then_branch, else_branch)]
    }

    /// Nondeterministic assignment of every value of the variables.
    pub fn havoc(&mut self, vars: &[VarDecl]) -> Vec<Stmt> {
        let mut out = Vec::new();
        for d in vars {
            match d.ty {
                Type::Bool => out.push(self.assign(&d.name, Expr::Nondet)),
                Type::Int { lo, hi } => out.extend(self.havoc_int(&d.name, lo, hi)),
            }
        }
        out
    }

    /// `x := lo; while (*) do assume(x < hi); x := x + 1; od`
    pub fn havoc_int(&mut self, x: &str, lo: i64, hi: i64) -> Vec<Stmt> {
        let init = self.assign(x, Expr::Int(lo));
        let guard = self.assume(Expr::bin(BinOp::Lt, Expr::var(x), Expr::Int(hi)));
        let inc = self.assign(x, Expr::bin(BinOp::Add, Expr::var(x), Expr::Int(1)));
        let lp = self.stmt(StmtKind::While {
            cond: Expr::Nondet,
            body: vec![guard, inc],
        });
        vec![init, lp]
    }

    pub fn shared_names(&self) -> Vec<String> {
        self.shared.iter().map(|d| d.name.clone()).collect()
    }

    pub fn shared_types(&self) -> Vec<Type> {
        self.shared.iter().map(|d| d.ty).collect()
    }
}

fn prog_shared(b: &Build) -> Vec<VarDecl> {
    b.shared.clone()
}

pub(crate) fn default_expr(t: Type) -> Expr {
    match t {
        Type::Bool => Expr::Bool(false),
        Type::Int { .. } => Expr::Int(t.default_value()),
    }
}

pub(crate) fn tuple_eq(a: &[String], b: &[String]) -> Expr {
    Expr::conj(a.iter().zip(b).map(|(x, y)| Expr::eq(Expr::var(x), Expr::var(y))))
}

pub(crate) fn args(tuples: &[Vec<String>]) -> Vec<Expr> {
    tuples.iter().flatten().map(Expr::var).collect()
}

pub(crate) fn decls(tuples: &[Vec<String>], types: &[Type]) -> Vec<VarDecl> {
    tuples
        .iter()
        .flat_map(|t| t.iter().zip(types).map(|(n, ty)| VarDecl::new(n.clone(), *ty)))
        .collect()
}

/// Checks the shape required by both transformations.
pub(crate) fn check_input(prog: &ParamProgram, k: usize) -> Result<(), TransformError> {
    if k == 0 {
        return Err(TransformError::ZeroRounds);
    }
    if !is_normalized(prog) {
        return Err(TransformError::NotNormalized);
    }
    Ok(())
}

/// Renumbers pcs in parser order and builds the pc table for every
/// statement that came from the source program.
pub(crate) fn finish_pcs(program: &mut SeqProgram, orig: &ParamProgram) -> (Vec<PcPair>, HashMap<Pc, Pc>) {
    let relabel = relabel_seq(program);
    let mut pcs = Vec::new();
    visit_param_stmts(orig, &mut |s| {
        let seq = relabel[&s.pc];
        pcs.push(PcPair { seq, orig: s.pc });
    });
    pcs.sort_by_key(|p| p.seq);
    (pcs, relabel)
}

/// Generated variables of the lazy scheme.
#[derive(Debug, Clone)]
pub struct GenVars {
    pub k: usize,
    pub atomic: String,
    pub terminate: String,
    pub q: Vec<Vec<String>>,
    pub qp: Vec<Vec<String>>,
    pub bound: String,
    pub last: String,
    pub j: String,
    pub save_g: Vec<String>,
    pub save_q: Vec<Vec<String>>,
    pub save_bound: String,
    pub save_last: String,
    pub save_j: String,
    pub linear_int: String,
    pub init: String,
}

impl GenVars {
    pub fn new(k: usize, shared: &[VarDecl], process_globals: &[VarDecl]) -> GenVars {
        GenVars {
            k,
            atomic: gen("atomic"),
            terminate: gen("terminate"),
            q: tuples("q", k, shared),
            qp: tuples("qp", k - 1, shared),
            bound: gen("bound"),
            last: gen("last"),
            j: gen("j"),
            save_g: process_globals.iter().map(|d| gen(&format!("save_{}", d.name))).collect(),
            save_q: tuples("sq", k, shared),
            save_bound: gen("sbound"),
            save_last: gen("slast"),
            save_j: gen("sj"),
            linear_int: gen("linear_int"),
            init: gen("init"),
        }
    }

    fn index_type(&self) -> Type {
        Type::int(1, self.k as i64)
    }

    /// Frame locals every procedure carrying interlined code needs.
    fn save_decls(&self, process_globals: &[VarDecl], shared: &[Type]) -> Vec<VarDecl> {
        let mut out: Vec<VarDecl> = self.save_g.iter().zip(process_globals).map(|(n, d)| VarDecl::new(n.clone(), d.ty)).collect();
        out.extend(decls(&self.save_q, shared));
        out.push(VarDecl::new(self.save_bound.clone(), self.index_type()));
        out.push(VarDecl::new(self.save_last.clone(), Type::Bool));
        out.push(VarDecl::new(self.save_j.clone(), self.index_type()));
        out
    }
}

pub fn lazy_name(proc: &str) -> String {
    gen(&format!("lazy_{proc}"))
}

struct Lazy<'a> {
    b: Build,
    v: GenVars,
    g_names: Vec<String>,
    g_types: Vec<Type>,
    prog: &'a ParamProgram,
}

impl Lazy<'_> {
    /// The interlined control code.
    fn ic(&mut self) -> Vec<Stmt> {
        let v = self.v.clone();
        let k = v.k;
        let s = self.b.shared_names();
        let st = self.b.shared_types();
        let j = Expr::var(&v.j);
        let j_is_bound = Expr::eq(j.clone(), Expr::var(&v.bound));
        let incr_j = |b: &mut Build| b.assign(&v.j, Expr::bin(BinOp::Add, Expr::var(&v.j), Expr::Int(1)));

        // Last thread of the block: finish, or check the round's output and
        // move to the next round.
        let mut finish = vec![self.b.assign(&v.terminate, Expr::Bool(true))];
        let all_q: Vec<String> = v.q.iter().flatten().cloned().collect();
        let all_q_types: Vec<Type> = v.q.iter().flat_map(|_| st.iter().copied()).collect();
        finish.extend(self.b.clear(&all_q, &all_q_types));
        finish.push(self.b.ret());
        let advance = if k == 1 {
            vec![self.b.assume(Expr::Bool(false))]
        } else {
            let mut a = self.b.by_index(&v.j, 1, k - 1, &mut |b, i| vec![b.assume(tuple_eq(&v.qp[i - 1], &s))]);
            a.push(incr_j(&mut self.b));
            a.extend(self.b.by_index(&v.j, 2, k, &mut |b, i| b.copy(&s, &v.q[i - 1])));
            a
        };
        let last_branch = vec![self.b.ite(j_is_bound.clone(), finish, advance)];

        // Not last: let a recursive call simulate the rest of the block for
        // this round, then resume.
        let mut hand_over = self.b.by_index(&v.j, 1, k, &mut |b, i| b.copy(&v.q[i - 1], &s));
        hand_over.extend(self.b.copy(&v.save_g, &self.g_names));
        let save_q_flat: Vec<String> = v.save_q.iter().flatten().cloned().collect();
        hand_over.extend(self.b.copy(&save_q_flat, &all_q));
        hand_over.extend(self.b.copy(
            &[v.save_bound.clone(), v.save_last.clone(), v.save_j.clone()],
            &[v.bound.clone(), v.last.clone(), v.j.clone()],
        ));
        let mut call_args = args(&v.q);
        call_args.extend(args(&v.qp));
        call_args.push(j.clone());
        hand_over.push(self.b.call(&v.linear_int, call_args));
        hand_over.extend(self.b.copy(
            &[v.bound.clone(), v.last.clone(), v.j.clone()],
            &[v.save_bound.clone(), v.save_last.clone(), v.save_j.clone()],
        ));
        let it = v.index_type();
        hand_over.extend(self.b.clear(
            &[v.save_bound.clone(), v.save_last.clone(), v.save_j.clone()],
            &[it, Type::Bool, it],
        ));
        let resume = if k == 1 {
            vec![self.b.assume(Expr::Bool(false))]
        } else {
            let mut r = self.b.copy(&all_q, &save_q_flat);
            r.extend(self.b.clear(&save_q_flat, &all_q_types));
            r.extend(self.b.by_index(&v.j, 1, k - 1, &mut |b, i| vec![b.assume(tuple_eq(&v.qp[i - 1], &s))]));
            r.extend(self.b.copy(&self.g_names, &v.save_g));
            r.extend(self.b.clear(&v.save_g, &self.g_types));
            r.push(self.b.assign(&v.terminate, Expr::Bool(false)));
            r.push(incr_j(&mut self.b));
            r.extend(self.b.by_index(&v.j, 2, k, &mut |b, i| b.copy(&s, &v.q[i - 1])));
            r
        };
        let ret = self.b.ret();
        hand_over.push(self.b.ite(j_is_bound, vec![ret], resume));

        let choose = self.b.ite(Expr::var(&v.last), last_branch, hand_over);
        let lp = self.b.stmt(StmtKind::While {
            cond: Expr::Nondet,
            body: vec![choose],
        });
        let ret = self.b.ret();
        vec![
            self.b.ite(Expr::var(&v.terminate), vec![ret], vec![]),
            self.b.ite(Expr::not(Expr::var(&v.atomic)), vec![lp], vec![]),
        ]
    }

    fn interline(&mut self, stmts: &[Stmt], in_main: bool) -> Vec<Stmt> {
        let mut out = Vec::new();
        for s in stmts {
            out.extend(self.ic());
            out.extend(self.translate(s, in_main));
        }
        out
    }

    fn translate(&mut self, s: &Stmt, in_main: bool) -> Vec<Stmt> {
        match &s.kind {
            StmtKind::Skip | StmtKind::Assign { .. } | StmtKind::Assume(_) | StmtKind::Assert(_) => vec![s.clone()],
            StmtKind::Call { proc, args, .. } => {
                let call = Stmt::new(
                    s.pc,
                    StmtKind::Call {
                        lhs: None,
                        proc: lazy_name(proc),
                        args: args.clone(),
                    },
                );
                let ret = self.b.ret();
                let unwind = self.b.ite(Expr::var(&self.v.terminate), vec![ret], vec![]);
                vec![call, unwind]
            }
            // A finished thread still takes part in later rounds through the
            // interlined code placed before this statement.
            StmtKind::Return(_) if in_main => vec![Stmt::new(s.pc, StmtKind::Assume(Expr::Bool(false)))],
            StmtKind::Return(_) => vec![s.clone()],
            StmtKind::While { cond, body } => {
                let mut body = self.interline(body, in_main);
                body.extend(self.ic());
                vec![Stmt::new(s.pc, StmtKind::While { cond: cond.clone(), body })]
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let then_branch = self.interline(then_branch, in_main);
                let else_branch = self.interline(else_branch, in_main);
                vec![Stmt::new(
                    s.pc,
                    StmtKind::If {
                        cond: cond.clone(),
                        then_branch,
                        else_branch,
                    },
                )]
            }
            StmtKind::Atomic(body) => {
                let mut out = vec![Stmt::new(
                    s.pc,
                    StmtKind::Assign {
                        lhs: self.v.atomic.clone(),
                        rhs: Expr::Bool(true),
                    },
                )];
                out.extend(body.iter().cloned());
                out.push(self.b.assign(&self.v.atomic, Expr::Bool(false)));
                out
            }
        }
    }

    fn linear_int(&mut self, main: &Procedure) -> Procedure {
        let v = self.v.clone();
        let s = self.b.shared_names();
        let st = self.b.shared_types();
        let pq = tuples("pq", v.k, &self.b.shared);
        let pqp = tuples("pqp", v.k - 1, &self.b.shared);
        let pbound = gen("pbound");
        let mut params = decls(&pq, &st);
        params.extend(decls(&pqp, &st));
        params.push(VarDecl::new(pbound.clone(), v.index_type()));

        let mut body = Vec::new();
        let flat = |t: &[Vec<String>]| t.iter().flatten().cloned().collect::<Vec<_>>();
        body.extend(self.b.copy(&flat(&v.q), &flat(&pq)));
        body.extend(self.b.copy(&flat(&v.qp), &flat(&pqp)));
        body.push(self.b.assign(&v.bound, Expr::var(&pbound)));
        let param_names: Vec<String> = params.iter().map(|d| d.name.clone()).collect();
        let param_types: Vec<Type> = params.iter().map(|d| d.ty).collect();
        body.extend(self.b.clear(&param_names, &param_types));
        body.push(self.b.assign(&v.last, Expr::Nondet));
        body.push(self.b.assign(&v.j, Expr::Int(1)));
        body.extend(self.b.copy(&s, &v.q[0]));
        body.extend(self.b.clear(&self.g_names, &self.g_types));
        body.extend(self.interline(&main.body, true));
        body.extend(self.ic());
        body.push(self.b.assume(Expr::Bool(false)));

        let mut locals: Vec<VarDecl> = main.frame_vars().cloned().collect();
        locals.extend(v.save_decls(&self.prog.processes[0].globals, &st));
        Procedure::void(v.linear_int.clone(), params, locals, body)
    }

    fn lazy_proc(&mut self, p: &Procedure) -> Procedure {
        let st = self.b.shared_types();
        let body = self.interline(&p.body, false);
        let mut locals = p.locals.clone();
        locals.extend(self.v.save_decls(&self.prog.processes[0].globals, &st));
        Procedure::void(lazy_name(&p.name), p.params.clone(), locals, body)
    }

    fn main(&mut self) -> Procedure {
        let v = self.v.clone();
        let k = v.k;
        let s = self.b.shared_names();
        let st = self.b.shared_types();
        let mq = tuples("mq", k, &self.b.shared);
        let i = gen("i");
        let mut body = vec![self.b.assign(&v.atomic, Expr::Bool(false))];
        body.extend(self.b.havoc(&prog_shared(&self.b)));
        body.push(self.b.call(&v.init, vec![]));
        body.extend(self.b.copy(&mq[0], &s));
        body.push(self.b.assign(&i, Expr::Int(1)));

        let mut round = vec![self.b.assign(&v.terminate, Expr::Bool(false))];
        let mut call_args = args(&mq);
        call_args.extend(args(&mq[1..]));
        call_args.push(Expr::var(&i));
        round.push(self.b.call(&v.linear_int, call_args));
        round.push(self.b.assign(&i, Expr::bin(BinOp::Add, Expr::var(&i), Expr::Int(1))));
        if k > 1 {
            let set = self.b.by_index(&i, 2, k, &mut |b, r| b.copy(&mq[r - 1], &s));
            let guard = Expr::bin(BinOp::Le, Expr::var(&i), Expr::Int(k as i64));
            round.push(self.b.ite(guard, set, vec![]));
        }
        body.push(self.b.stmt(StmtKind::While {
            cond: Expr::bin(BinOp::Le, Expr::var(&i), Expr::Int(k as i64)),
            body: round,
        }));
        let mut locals = vec![VarDecl::new(i, Type::int(1, k as i64 + 1))];
        locals.extend(decls(&mq, &st));
        Procedure::void("main", vec![], locals, body)
    }
}

/// Produces the lazy k-round sequentialization of a normalized program.
pub fn sequentialize_lazy(prog: &ParamProgram, k: usize) -> Result<LazyOutput, TransformError> {
    check_input(prog, k)?;
    let process = &prog.processes[0];
    let v = GenVars::new(k, &prog.shared, &process.globals);
    let mut lz = Lazy {
        b: Build {
            pcs: PcGen::above_param(prog),
            shared: prog.shared.clone(),
        },
        g_names: process.globals.iter().map(|d| d.name.clone()).collect(),
        g_types: process.globals.iter().map(|d| d.ty).collect(),
        v: v.clone(),
        prog,
    };
    let st = lz.b.shared_types();
    let it = v.index_type();

    let mut globals = prog.shared.clone();
    globals.extend(process.globals.iter().cloned());
    globals.push(VarDecl::new(v.atomic.clone(), Type::Bool));
    globals.push(VarDecl::new(v.terminate.clone(), Type::Bool));
    globals.extend(decls(&v.q, &st));
    globals.extend(decls(&v.qp, &st));
    globals.push(VarDecl::new(v.bound.clone(), it));
    globals.push(VarDecl::new(v.last.clone(), Type::Bool));
    globals.push(VarDecl::new(v.j.clone(), it));

    let main = lz.main();
    let init = Procedure::void(v.init.clone(), vec![], vec![], prog.init.clone());
    let user_main = process.main().expect("normalized program has main");
    let li = lz.linear_int(user_main);
    let mut procedures = vec![main, init, li];
    let mut proc_maps = vec![
        ProcMap {
            name: v.init.clone(),
            original: "init".into(),
            user_vars: vec![],
        },
        ProcMap {
            name: v.linear_int.clone(),
            original: "main".into(),
            user_vars: user_main.frame_vars().map(|d| d.name.clone()).collect(),
        },
    ];
    for p in process.procedures.iter().filter(|p| p.name != "main") {
        procedures.push(lz.lazy_proc(p));
        proc_maps.push(ProcMap {
            name: lazy_name(&p.name),
            original: p.name.clone(),
            user_vars: p.frame_vars().map(|d| d.name.clone()).collect(),
        });
    }
    let mut program = SeqProgram { globals, procedures };
    let (pcs, _) = finish_pcs(&mut program, prog);
    let li_proc = program.procedure(&v.linear_int).expect("linear_int generated");
    let names: Vec<String> = li_proc.params.iter().map(|d| d.name.clone()).collect();
    let n = prog.shared.len();
    let linear_int = LinearIntMap {
        name: v.linear_int.clone(),
        q: names[..k * n].chunks(n.max(1)).map(<[String]>::to_vec).take(k).collect(),
        qp: names[k * n..(2 * k - 1) * n].chunks(n.max(1)).map(<[String]>::to_vec).take(k - 1).collect(),
        bound: names.last().cloned().expect("bound parameter"),
    };
    let stmt_map = StmtMap {
        scheme: Scheme::Lazy,
        k,
        shared: prog.shared.iter().map(|d| d.name.clone()).collect(),
        process_globals: process.globals.iter().map(|d| d.name.clone()).collect(),
        init_proc: v.init.clone(),
        procedures: proc_maps,
        pcs,
        root: v.linear_int.clone(),
        linear_int: Some(linear_int),
        validation_pc: None,
    };
    Ok(LazyOutput { program, stmt_map })
}

/// Lookup from original pcs for tests and tools.
pub fn orig_to_seq(map: &StmtMap) -> HashMap<Pc, Pc> {
    map.pcs.iter().map(|p| (p.orig, p.seq)).collect()
}

#[cfg(test)]
mod tests;
