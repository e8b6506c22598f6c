//! Eager sequentialization: every thread runs all k rounds against guessed
//! round inputs, and the guesses are checked only once all threads are done.
//!
//! Assertions inside the simulated threads may fail on states that are not
//! reachable (the guesses were wrong); those failures are *speculative*. A
//! violation is *validated* when the final assertion of `main` fails, which
//! happens only if some thread hit a failing assertion and the rounds before
//! it were consistent.

use serde::Serialize;

use crate::lang::*;
use crate::seq_explorer::{ExplorerReport, SeqViolation};
use crate::seq_lazy::{check_input, decls, finish_pcs, gen, tuple_eq, tuples, Build, ProcMap, Scheme, StmtMap, TransformError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EagerOutput {
    pub program: SeqProgram,
    pub stmt_map: StmtMap,
}

pub fn eager_name(proc: &str) -> String {
    gen(&format!("eager_{proc}"))
}

struct Eager {
    b: Build,
    k: usize,
    atomic: String,
    eterm: String,
    err: String,
    err_round: String,
    round: String,
    r: Vec<Vec<String>>,
    g: Vec<VarDecl>,
}

impl Eager {
    fn round_type(&self) -> Type {
        Type::int(1, self.k as i64)
    }

    /// Interlined code: optionally finish the current round and move on.
    fn eic(&mut self) -> Vec<Stmt> {
        let k = self.k;
        let s = self.b.shared_names();
        let r = self.r.clone();
        let round = self.round.clone();
        let types = self.b.shared_types();
        let mut body = self.b.by_index(&round, 1, k, &mut |b, i| b.copy(&r[i - 1], &s));
        let finish = vec![self.b.assign(&self.eterm, Expr::Bool(true)), self.b.ret()];
        let next = if k == 1 {
            vec![self.b.assume(Expr::Bool(false))]
        } else {
            let mut n = vec![self.b.assign(&round, Expr::bin(BinOp::Add, Expr::var(&round), Expr::Int(1)))];
            n.extend(self.b.by_index(&round, 2, k, &mut |b, i| {
                let mut load = b.copy(&s, &r[i - 1]);
                load.extend(b.clear(&r[i - 1], &types));
                load
            }));
            n
        };
        body.push(self.b.ite(Expr::eq(Expr::var(&round), Expr::Int(k as i64)), finish, next));
        let lp = self.b.stmt(StmtKind::While { cond: Expr::Nondet, body });
        let ret = self.b.ret();
        vec![
            self.b.ite(Expr::var(&self.eterm), vec![ret], vec![]),
            self.b.ite(Expr::not(Expr::var(&self.atomic)), vec![lp], vec![]),
        ]
    }

    /// Records a failing assertion for validation, or fails speculatively.
    fn assertion(&mut self, s: &Stmt, cond: &Expr) -> Vec<Stmt> {
        let (err, er, round) = (self.err.clone(), self.err_round.clone(), self.round.clone());
        let first = vec![self.b.assign(&err, Expr::Bool(true)), self.b.assign(&er, Expr::var(&round))];
        let lower = vec![self.b.assign(&er, Expr::var(&round))];
        let earlier = self.b.ite(Expr::bin(BinOp::Lt, Expr::var(&round), Expr::var(&er)), lower, vec![]);
        let record = self.b.ite(Expr::not(Expr::var(&err)), first, vec![earlier]);
        let stop = vec![record, self.b.assign(&self.eterm, Expr::Bool(true)), self.b.ret()];
        let failing = self.b.ite(Expr::not(cond.clone()), stop, vec![]);
        vec![self.b.ite(Expr::Nondet, vec![failing], vec![]), s.clone()]
    }

    fn interline(&mut self, stmts: &[Stmt], in_thread: bool) -> Vec<Stmt> {
        let mut out = Vec::new();
        for s in stmts {
            out.extend(self.eic());
            out.extend(self.translate(s, in_thread));
        }
        out
    }

    fn in_atomic(&mut self, stmts: &[Stmt]) -> Vec<Stmt> {
        stmts
            .iter()
            .flat_map(|s| match &s.kind {
                StmtKind::Assert(c) => self.assertion(s, c),
                StmtKind::While { cond, body } => {
                    let body = self.in_atomic(body);
                    vec![Stmt::new(s.pc, StmtKind::While { cond: cond.clone(), body })]
                }
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let then_branch = self.in_atomic(then_branch);
                    let else_branch = self.in_atomic(else_branch);
                    vec![Stmt::new(
                        s.pc,
                        StmtKind::If {
                            cond: cond.clone(),
                            then_branch,
                            else_branch,
                        },
                    )]
                }
                _ => vec![s.clone()],
            })
            .collect()
    }

    fn translate(&mut self, s: &Stmt, in_thread: bool) -> Vec<Stmt> {
        match &s.kind {
            StmtKind::Skip | StmtKind::Assign { .. } | StmtKind::Assume(_) => vec![s.clone()],
            StmtKind::Assert(c) => self.assertion(s, c),
            StmtKind::Call { proc, args, .. } => {
                let call = Stmt::new(
                    s.pc,
                    StmtKind::Call {
                        lhs: None,
                        proc: eager_name(proc),
                        args: args.clone(),
                    },
                );
                let ret = self.b.ret();
                let unwind = self.b.ite(Expr::var(&self.eterm), vec![ret], vec![]);
                vec![call, unwind]
            }
            StmtKind::Return(_) if in_thread => vec![Stmt::new(s.pc, StmtKind::Assume(Expr::Bool(false)))],
            StmtKind::Return(_) => vec![s.clone()],
            StmtKind::While { cond, body } => {
                let mut body = self.interline(body, in_thread);
                body.extend(self.eic());
                vec![Stmt::new(s.pc, StmtKind::While { cond: cond.clone(), body })]
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let then_branch = self.interline(then_branch, in_thread);
                let else_branch = self.interline(else_branch, in_thread);
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
                        lhs: self.atomic.clone(),
                        rhs: Expr::Bool(true),
                    },
                )];
                out.extend(self.in_atomic(body));
                out.push(self.b.assign(&self.atomic, Expr::Bool(false)));
                out
            }
        }
    }

    fn thread(&mut self, main: &Procedure) -> Procedure {
        let s = self.b.shared_names();
        let mut body = vec![
            self.b.assign(&self.atomic, Expr::Bool(false)),
            self.b.assign(&self.eterm, Expr::Bool(false)),
            self.b.assign(&self.round, Expr::Int(1)),
        ];
        let r1 = self.r[0].clone();
        body.extend(self.b.copy(&s, &r1));
        // A round's slot is dead until the round ends and rewrites it;
        // clearing it keeps stale guesses out of the state.
        body.extend(self.b.clear(&r1, &self.b.shared_types()));
        let g = self.g.clone();
        let names: Vec<String> = g.iter().map(|d| d.name.clone()).collect();
        let types: Vec<Type> = g.iter().map(|d| d.ty).collect();
        body.extend(self.b.clear(&names, &types));
        body.extend(self.interline(&main.body, true));
        body.extend(self.eic());
        body.push(self.b.assume(Expr::Bool(false)));
        Procedure::void(gen("thread"), vec![], main.frame_vars().cloned().collect(), body)
    }

    /// Returns the procedure and the (pre-relabel) pc of its final assertion.
    fn main(&mut self) -> (Procedure, Pc) {
        let k = self.k;
        let s = self.b.shared_names();
        let st = self.b.shared_types();
        let shared = self.b.shared.clone();
        let u = tuples("u", k, &shared);
        let u_decls = decls(&u[1..], &st);
        let thread = gen("thread");

        let mut body = vec![self.b.assign(&self.atomic, Expr::Bool(false))];
        body.extend(self.b.havoc(&shared));
        body.push(self.b.call(&gen("init"), vec![]));
        body.extend(self.b.copy(&self.r[0].clone(), &s));
        body.extend(self.b.havoc(&u_decls));
        for j in 1..k {
            let r = self.r[j].clone();
            body.extend(self.b.copy(&r, &u[j]));
        }
        body.push(self.b.assign(&self.err, Expr::Bool(false)));
        body.push(self.b.call(&thread, vec![]));
        let again = self.b.call(&thread, vec![]);
        body.push(self.b.stmt(StmtKind::While {
            cond: Expr::Nondet,
            body: vec![again],
        }));
        for j in 1..k {
            // Rounds from the one with the first failure on need not connect.
            let relevant = Expr::bin(
                BinOp::Or,
                Expr::not(Expr::var(&self.err)),
                Expr::bin(BinOp::Lt, Expr::Int(j as i64), Expr::var(&self.err_round)),
            );
            let connect = self.b.assume(tuple_eq(&self.r[j - 1], &u[j]));
            body.push(self.b.ite(relevant, vec![connect], vec![]));
        }
        let check = self.b.stmt(StmtKind::Assert(Expr::not(Expr::var(&self.err))));
        let pc = check.pc;
        body.push(check);
        (Procedure::void("main", vec![], u_decls, body), pc)
    }
}

/// Produces the eager k-round sequentialization of a normalized program.
pub fn sequentialize_eager(prog: &ParamProgram, k: usize) -> Result<EagerOutput, TransformError> {
    check_input(prog, k)?;
    let process = &prog.processes[0];
    let mut e = Eager {
        b: Build {
            pcs: PcGen::above_param(prog),
            shared: prog.shared.clone(),
        },
        k,
        atomic: gen("atomic"),
        eterm: gen("eterm"),
        err: gen("err"),
        err_round: gen("err_round"),
        round: gen("round"),
        r: tuples("r", k, &prog.shared),
        g: process.globals.clone(),
    };
    let st = e.b.shared_types();
    let mut globals = prog.shared.clone();
    globals.extend(process.globals.iter().cloned());
    globals.push(VarDecl::new(e.atomic.clone(), Type::Bool));
    globals.push(VarDecl::new(e.eterm.clone(), Type::Bool));
    globals.push(VarDecl::new(e.err.clone(), Type::Bool));
    globals.push(VarDecl::new(e.err_round.clone(), e.round_type()));
    globals.push(VarDecl::new(e.round.clone(), e.round_type()));
    globals.extend(decls(&e.r, &st));

    let (main, check_pc) = e.main();
    let init = Procedure::void(gen("init"), vec![], vec![], prog.init.clone());
    let user_main = process.main().expect("normalized program has main");
    let thread = e.thread(user_main);
    let mut procedures = vec![main, init, thread];
    let mut proc_maps = vec![
        ProcMap {
            name: gen("init"),
            original: "init".into(),
            user_vars: vec![],
        },
        ProcMap {
            name: gen("thread"),
            original: "main".into(),
            user_vars: user_main.frame_vars().map(|d| d.name.clone()).collect(),
        },
    ];
    for p in process.procedures.iter().filter(|p| p.name != "main") {
        let body = e.interline(&p.body, false);
        procedures.push(Procedure::void(eager_name(&p.name), p.params.clone(), p.locals.clone(), body));
        proc_maps.push(ProcMap {
            name: eager_name(&p.name),
            original: p.name.clone(),
            user_vars: p.frame_vars().map(|d| d.name.clone()).collect(),
        });
    }
    let mut program = SeqProgram { globals, procedures };
    let (pcs, relabel) = finish_pcs(&mut program, prog);
    let stmt_map = StmtMap {
        scheme: Scheme::Eager,
        k,
        shared: prog.shared.iter().map(|d| d.name.clone()).collect(),
        process_globals: process.globals.iter().map(|d| d.name.clone()).collect(),
        init_proc: gen("init"),
        procedures: proc_maps,
        pcs,
        root: gen("thread"),
        linear_int: None,
        validation_pc: Some(relabel[&check_pc]),
    };
    Ok(EagerOutput { program, stmt_map })
}

/// Eager verdict read off an exploration of the eager program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EagerVerdict {
    /// Assertion failures inside simulated threads, possibly on unreachable
    /// states.
    pub speculative: Vec<SeqViolation>,
    /// Whether the final check failed.
    pub validated: bool,
}

pub fn classify(report: &ExplorerReport, map: &StmtMap) -> EagerVerdict {
    let mut v = EagerVerdict::default();
    for viol in &report.violations {
        if viol.pc.is_some() && viol.pc == map.validation_pc {
            v.validated = true;
        } else {
            v.speculative.push(viol.clone());
        }
    }
    v
}
