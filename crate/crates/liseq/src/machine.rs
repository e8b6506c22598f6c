//! Control-flow graphs and single-thread stepping.
//!
//! Every interpreter in the crate (the parameterized oracle, the interface
//! search, the sequential explorer and the pushdown lowering) compiles the
//! AST with [`Code::from_param`] or [`Code::from_seq`] and advances threads
//! one node at a time with [`Code::step`]. Values are stored as `i64`
//! (booleans as 0/1) in three kinds of slots: shared, process-global and
//! frame-local.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::lang::*;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Shared(u32),
    Global(u32),
    Local(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CExpr {
    Const(i64),
    Var(Slot),
    Nondet,
    Not(Box<CExpr>),
    Neg(Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
}

/// A compiled expression together with the number of `*` it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ex {
    pub e: CExpr,
    nondets: u32,
}

#[derive(Debug, Clone)]
pub enum Op {
    Skip,
    Assign { lhs: Slot, ty: Type, rhs: Ex },
    Assume(Ex),
    Assert(Ex),
    Branch { cond: Ex, then_to: NodeId, else_to: NodeId },
    Call { callee: u32, args: Vec<Ex>, lhs: Option<(Slot, Type)> },
    Return(Option<Ex>),
}

#[derive(Debug, Clone)]
pub struct Node {
    /// `None` for nodes with no source statement (implicit returns).
    pub pc: Option<Pc>,
    pub op: Op,
    pub next: NodeId,
    /// The node lies strictly inside an `atomic` block: no context switch
    /// may happen while a thread is positioned here.
    pub atomic: bool,
}

#[derive(Debug, Clone)]
pub struct ProcCode {
    pub name: String,
    /// Parameters first, then locals.
    pub vars: Vec<VarDecl>,
    pub n_params: usize,
    pub ret: Option<Type>,
    pub nodes: Vec<Node>,
    pub entry: NodeId,
}

/// A process, or the whole of a sequential program.
#[derive(Debug, Clone)]
pub struct Unit {
    pub name: String,
    pub globals: Vec<VarDecl>,
    pub procs: Vec<ProcCode>,
    pub main: u32,
}

/// Where a pc lives. `unit` is `None` for the `init` block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Site {
    pub unit: Option<u32>,
    pub proc: u32,
    pub node: NodeId,
}

#[derive(Debug, Clone)]
pub struct Code {
    pub shared: Vec<VarDecl>,
    /// The `init` block as a parameterless procedure over shared variables.
    pub init: ProcCode,
    pub units: Vec<Unit>,
    sites: HashMap<Pc, Site>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Frame {
    pub proc: u32,
    pub node: NodeId,
    pub locals: Box<[i64]>,
    /// Argument values at entry; kept only when an interpreter asks for it.
    pub entry: Option<Box<[i64]>>,
}

/// Local state of one thread: its process globals and call stack. An empty
/// stack means the thread has returned from `main`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Thread {
    pub globals: Box<[i64]>,
    pub stack: Vec<Frame>,
}

impl Thread {
    pub fn done(&self) -> bool {
        self.stack.is_empty()
    }

    /// Compact encoding for visited sets and work queues.
    pub fn encode(&self) -> Box<[u8]> {
        postcard::to_allocvec(self).expect("thread encodes").into_boxed_slice()
    }

    pub fn decode(bytes: &[u8]) -> Thread {
        postcard::from_bytes(bytes).expect("thread decodes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeError {
    DivisionByZero,
    /// A value left the declared range of its destination, or an
    /// intermediate result overflowed 64 bits.
    RangeOverflow,
}

#[derive(Debug, Clone)]
pub enum Event {
    Plain,
    Pushed,
    Popped(Frame),
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Next { shared: Box<[i64]>, thread: Thread, event: Event },
    Violation(Option<Pc>),
    Error(RuntimeError, Option<Pc>),
}

/// The view of the active thread used for laziness and assertions: the top
/// frame's variables, the process globals and the shared variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocalizedState {
    pub pc: Pc,
    pub locals: BTreeMap<String, Value>,
    pub globals: BTreeMap<String, Value>,
    pub shared: BTreeMap<String, Value>,
}

pub(crate) fn named(decls: &[VarDecl], vals: &[i64]) -> BTreeMap<String, Value> {
    decls.iter().zip(vals).map(|(d, &v)| (d.name.clone(), d.ty.render(v))).collect()
}

/// Every valuation of `decls`, in lexicographic order.
pub fn valuations(decls: &[VarDecl]) -> Vec<Box<[i64]>> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for d in decls {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                d.ty.values().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(Vec::into_boxed_slice).collect()
}

pub fn defaults(decls: &[VarDecl]) -> Box<[i64]> {
    decls.iter().map(|d| d.ty.default_value()).collect()
}

struct Env<'a> {
    shared: &'a [i64],
    globals: &'a [i64],
    locals: &'a [i64],
}

impl Env<'_> {
    fn read(&self, s: Slot) -> i64 {
        match s {
            Slot::Shared(i) => self.shared[i as usize],
            Slot::Global(i) => self.globals[i as usize],
            Slot::Local(i) => self.locals[i as usize],
        }
    }
}

type Val = Result<i64, RuntimeError>;

fn arith(op: BinOp, l: i64, r: i64) -> Val {
    let v = match op {
        BinOp::Add => l.checked_add(r),
        BinOp::Sub => l.checked_sub(r),
        BinOp::Mul => l.checked_mul(r),
        BinOp::Div | BinOp::Mod if r == 0 => return Err(RuntimeError::DivisionByZero),
        BinOp::Div => l.checked_div(r),
        BinOp::Mod => l.checked_rem(r),
        BinOp::Eq => Some((l == r) as i64),
        BinOp::Neq => Some((l != r) as i64),
        BinOp::Lt => Some((l < r) as i64),
        BinOp::Le => Some((l <= r) as i64),
        BinOp::Gt => Some((l > r) as i64),
        BinOp::Ge => Some((l >= r) as i64),
        BinOp::And | BinOp::Or => unreachable!("short-circuit operators are evaluated by the caller"),
    };
    v.ok_or(RuntimeError::RangeOverflow)
}

/// Evaluates with the `*` occurrences resolved by successive bits of `mask`.
fn ev(e: &CExpr, env: &Env, mask: u32, idx: &mut u32) -> Val {
    match e {
        CExpr::Const(c) => Ok(*c),
        CExpr::Var(s) => Ok(env.read(*s)),
        CExpr::Nondet => {
            let bit = (mask >> *idx) & 1;
            *idx += 1;
            Ok(bit as i64)
        }
        CExpr::Not(a) => Ok(1 - ev(a, env, mask, idx)?),
        CExpr::Neg(a) => ev(a, env, mask, idx)?.checked_neg().ok_or(RuntimeError::RangeOverflow),
        CExpr::Bin(BinOp::And, a, b) => {
            if ev(a, env, mask, idx)? == 0 {
                Ok(0)
            } else {
                ev(b, env, mask, idx)
            }
        }
        CExpr::Bin(BinOp::Or, a, b) => {
            if ev(a, env, mask, idx)? != 0 {
                Ok(1)
            } else {
                ev(b, env, mask, idx)
            }
        }
        CExpr::Bin(op, a, b) => {
            let l = ev(a, env, mask, idx)?;
            let r = ev(b, env, mask, idx)?;
            arith(*op, l, r)
        }
    }
}

fn eval(x: &Ex, env: &Env) -> Vec<Val> {
    if x.nondets == 0 {
        return vec![ev(&x.e, env, 0, &mut 0)];
    }
    let mut out: Vec<Val> = (0..1u32 << x.nondets).map(|m| ev(&x.e, env, m, &mut 0)).collect();
    out.sort();
    out.dedup();
    out
}

/// Variable names in scope while compiling one procedure.
struct Names<'a> {
    locals: HashMap<&'a str, (u32, Type)>,
    globals: HashMap<&'a str, (u32, Type)>,
    shared: HashMap<&'a str, (u32, Type)>,
    procs: &'a HashMap<&'a str, u32>,
}

impl<'a> Names<'a> {
    fn new(locals: &'a [VarDecl], globals: &'a [VarDecl], shared: &'a [VarDecl], procs: &'a HashMap<&'a str, u32>) -> Self {
        let index = |ds: &'a [VarDecl]| ds.iter().enumerate().map(|(i, d)| (d.name.as_str(), (i as u32, d.ty))).collect();
        Names {
            locals: index(locals),
            globals: index(globals),
            shared: index(shared),
            procs,
        }
    }

    fn slot(&self, name: &str) -> (Slot, Type) {
        if let Some(&(i, t)) = self.locals.get(name) {
            (Slot::Local(i), t)
        } else if let Some(&(i, t)) = self.globals.get(name) {
            (Slot::Global(i), t)
        } else if let Some(&(i, t)) = self.shared.get(name) {
            (Slot::Shared(i), t)
        } else {
            panic!("unresolved variable `{name}` in a checked program")
        }
    }

    fn expr(&self, e: &Expr) -> Ex {
        let mut nondets = 0;
        let e = self.cexpr(e, &mut nondets);
        Ex { e, nondets }
    }

    fn cexpr(&self, e: &Expr, nd: &mut u32) -> CExpr {
        match e {
            Expr::Var(v) => CExpr::Var(self.slot(v).0),
            Expr::Bool(b) => CExpr::Const(*b as i64),
            Expr::Int(i) => CExpr::Const(*i),
            Expr::Nondet => {
                *nd += 1;
                CExpr::Nondet
            }
            Expr::Unary(UnOp::Not, a) => CExpr::Not(Box::new(self.cexpr(a, nd))),
            Expr::Unary(UnOp::Neg, a) => CExpr::Neg(Box::new(self.cexpr(a, nd))),
            Expr::Binary(op, a, b) => {
                let a = self.cexpr(a, nd);
                let b = self.cexpr(b, nd);
                CExpr::Bin(*op, Box::new(a), Box::new(b))
            }
        }
    }
}

struct Builder<'a> {
    names: Names<'a>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn push(&mut self, pc: Option<Pc>, op: Op, next: NodeId, atomic: bool) -> NodeId {
        self.nodes.push(Node { pc, op, next, atomic });
        (self.nodes.len() - 1) as NodeId
    }

    fn block(&mut self, stmts: &[Stmt], next: NodeId, atomic: bool) -> NodeId {
        stmts.iter().rev().fold(next, |next, s| self.stmt(s, next, atomic))
    }

    fn stmt(&mut self, s: &Stmt, next: NodeId, atomic: bool) -> NodeId {
        let pc = Some(s.pc);
        match &s.kind {
            StmtKind::Skip => self.push(pc, Op::Skip, next, atomic),
            StmtKind::Assign { lhs, rhs } => {
                let (lhs, ty) = self.names.slot(lhs);
                let rhs = self.names.expr(rhs);
                self.push(pc, Op::Assign { lhs, ty, rhs }, next, atomic)
            }
            StmtKind::Assume(e) => {
                let e = self.names.expr(e);
                self.push(pc, Op::Assume(e), next, atomic)
            }
            StmtKind::Assert(e) => {
                let e = self.names.expr(e);
                self.push(pc, Op::Assert(e), next, atomic)
            }
            StmtKind::Call { lhs, proc, args } => {
                let callee = self.names.procs[proc.as_str()];
                let args = args.iter().map(|a| self.names.expr(a)).collect();
                let lhs = lhs.as_ref().map(|l| self.names.slot(l));
                self.push(pc, Op::Call { callee, args, lhs }, next, atomic)
            }
            StmtKind::Return(e) => {
                let e = e.as_ref().map(|e| self.names.expr(e));
                self.push(pc, Op::Return(e), next, atomic)
            }
            StmtKind::While { cond, body } => {
                let cond = self.names.expr(cond);
                let head = self.push(pc, Op::Skip, next, atomic);
                let body = self.block(body, head, atomic);
                self.nodes[head as usize].op = Op::Branch {
                    cond,
                    then_to: body,
                    else_to: next,
                };
                head
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let cond = self.names.expr(cond);
                let then_to = self.block(then_branch, next, atomic);
                let else_to = self.block(else_branch, next, atomic);
                self.push(pc, Op::Branch { cond, then_to, else_to }, next, atomic)
            }
            StmtKind::Atomic(body) => {
                let body = self.block(body, next, true);
                self.push(pc, Op::Skip, body, atomic)
            }
        }
    }
}

fn compile_proc(p: &Procedure, globals: &[VarDecl], shared: &[VarDecl], procs: &HashMap<&str, u32>) -> ProcCode {
    let vars: Vec<VarDecl> = p.frame_vars().cloned().collect();
    let mut b = Builder {
        names: Names::new(&vars, globals, shared, procs),
        nodes: Vec::new(),
    };
    let exit = b.push(None, Op::Return(None), 0, false);
    let entry = b.block(&p.body, exit, false);
    let nodes = b.nodes;
    ProcCode {
        name: p.name.clone(),
        n_params: p.params.len(),
        ret: p.ret,
        vars,
        nodes,
        entry,
    }
}

fn compile_unit(name: &str, globals: &[VarDecl], shared: &[VarDecl], procedures: &[Procedure]) -> Unit {
    let index: HashMap<&str, u32> = procedures.iter().enumerate().map(|(i, p)| (p.name.as_str(), i as u32)).collect();
    let procs = procedures.iter().map(|p| compile_proc(p, globals, shared, &index)).collect();
    Unit {
        name: name.to_string(),
        globals: globals.to_vec(),
        procs,
        main: *index.get("main").expect("checked program has main"),
    }
}

impl Code {
    pub fn from_param(prog: &ParamProgram) -> Code {
        let init_proc = Procedure::void("init", vec![], vec![], prog.init.clone());
        let init = compile_proc(&init_proc, &[], &prog.shared, &HashMap::new());
        let units = prog
            .processes
            .iter()
            .map(|p| compile_unit(&p.name, &p.globals, &prog.shared, &p.procedures))
            .collect();
        Code::finish(prog.shared.clone(), init, units)
    }

    /// A sequential program becomes a single unit with no shared variables.
    pub fn from_seq(prog: &SeqProgram) -> Code {
        let init = compile_proc(&Procedure::void("init", vec![], vec![], vec![]), &[], &[], &HashMap::new());
        let unit = compile_unit("main", &prog.globals, &[], &prog.procedures);
        Code::finish(vec![], init, vec![unit])
    }

    fn finish(shared: Vec<VarDecl>, init: ProcCode, units: Vec<Unit>) -> Code {
        let mut sites = HashMap::new();
        let mut add = |unit: Option<u32>, proc: u32, p: &ProcCode| {
            for (n, node) in p.nodes.iter().enumerate() {
                if let Some(pc) = node.pc {
                    sites.insert(pc, Site { unit, proc, node: n as NodeId });
                }
            }
        };
        add(None, 0, &init);
        for (u, unit) in units.iter().enumerate() {
            for (i, p) in unit.procs.iter().enumerate() {
                add(Some(u as u32), i as u32, p);
            }
        }
        Code {
            shared,
            init,
            units,
            sites,
        }
    }

    pub fn site(&self, pc: Pc) -> Option<Site> {
        self.sites.get(&pc).copied()
    }

    /// Procedures of a unit; `None` selects the `init` block.
    pub fn procs(&self, unit: Option<u32>) -> &[ProcCode] {
        match unit {
            Some(u) => &self.units[u as usize].procs,
            None => std::slice::from_ref(&self.init),
        }
    }

    pub fn globals(&self, unit: Option<u32>) -> &[VarDecl] {
        match unit {
            Some(u) => &self.units[u as usize].globals,
            None => &[],
        }
    }

    /// A thread about to run `main` of `unit` with default-initialised
    /// globals and locals.
    pub fn fresh_thread(&self, unit: u32) -> Thread {
        let u = &self.units[unit as usize];
        Thread {
            globals: defaults(&u.globals),
            stack: vec![new_frame(u.main, &u.procs[u.main as usize], &[])],
        }
    }

    pub fn init_thread(&self) -> Thread {
        Thread {
            globals: Box::new([]),
            stack: vec![new_frame(0, &self.init, &[])],
        }
    }

    pub fn node<'a>(&'a self, unit: Option<u32>, th: &Thread) -> Option<&'a Node> {
        let f = th.stack.last()?;
        Some(&self.procs(unit)[f.proc as usize].nodes[f.node as usize])
    }

    /// Whether a context switch is forbidden at the thread's current position.
    pub fn in_atomic(&self, unit: Option<u32>, th: &Thread) -> bool {
        self.node(unit, th).is_some_and(|n| n.atomic)
    }

    /// Pc and raw valuation (locals, globals, shared) of the localized state,
    /// if the thread is positioned at a source statement.
    pub fn localized_key(&self, unit: Option<u32>, shared: &[i64], th: &Thread) -> Option<(Pc, Box<[i64]>)> {
        let pc = self.node(unit, th)?.pc?;
        let top = th.stack.last()?;
        let vals = top.locals.iter().chain(th.globals.iter()).chain(shared).copied().collect();
        Some((pc, vals))
    }

    /// Names a valuation produced by [`Code::localized_key`].
    pub fn localized(&self, pc: Pc, vals: &[i64]) -> LocalizedState {
        let site = self.site(pc).expect("pc belongs to this program");
        let vars = &self.procs(site.unit)[site.proc as usize].vars;
        let globals = self.globals(site.unit);
        let (l, rest) = vals.split_at(vars.len());
        let (g, s) = rest.split_at(globals.len());
        LocalizedState {
            pc,
            locals: named(vars, l),
            globals: named(globals, g),
            shared: named(&self.shared, s),
        }
    }

    /// All successors of `th` by executing its current node.
    pub fn step(&self, unit: Option<u32>, shared: &[i64], th: &Thread, out: &mut Vec<Outcome>) {
        let procs = self.procs(unit);
        let top = th.stack.last().expect("stepping a finished thread");
        let node = &procs[top.proc as usize].nodes[top.node as usize];
        let env = Env {
            shared,
            globals: &th.globals,
            locals: &top.locals,
        };
        let pc = node.pc;
        let goto = |to: NodeId| {
            let mut t = th.clone();
            t.stack.last_mut().unwrap().node = to;
            Outcome::Next {
                shared: shared.into(),
                thread: t,
                event: Event::Plain,
            }
        };
        match &node.op {
            Op::Skip => out.push(goto(node.next)),
            Op::Assign { lhs, ty, rhs } => {
                for v in eval(rhs, &env) {
                    match v {
                        Err(e) => out.push(Outcome::Error(e, pc)),
                        Ok(v) if !ty.contains(v) => out.push(Outcome::Error(RuntimeError::RangeOverflow, pc)),
                        Ok(v) => {
                            let mut sh: Box<[i64]> = shared.into();
                            let mut t = th.clone();
                            store(&mut sh, &mut t, *lhs, v);
                            t.stack.last_mut().unwrap().node = node.next;
                            out.push(Outcome::Next {
                                shared: sh,
                                thread: t,
                                event: Event::Plain,
                            });
                        }
                    }
                }
            }
            Op::Assume(c) => {
                for v in eval(c, &env) {
                    match v {
                        Err(e) => out.push(Outcome::Error(e, pc)),
                        Ok(0) => {}
                        Ok(_) => out.push(goto(node.next)),
                    }
                }
            }
            Op::Assert(c) => {
                for v in eval(c, &env) {
                    match v {
                        Err(e) => out.push(Outcome::Error(e, pc)),
                        Ok(0) => out.push(Outcome::Violation(pc)),
                        Ok(_) => out.push(goto(node.next)),
                    }
                }
            }
            Op::Branch { cond, then_to, else_to } => {
                for v in eval(cond, &env) {
                    match v {
                        Err(e) => out.push(Outcome::Error(e, pc)),
                        Ok(0) => out.push(goto(*else_to)),
                        Ok(_) => out.push(goto(*then_to)),
                    }
                }
            }
            Op::Call { callee, args, .. } => {
                let callee_code = &procs[*callee as usize];
                let mut combos: Vec<Vec<i64>> = vec![vec![]];
                for (a, p) in args.iter().zip(&callee_code.vars) {
                    let mut next = Vec::new();
                    for v in eval(a, &env) {
                        match v {
                            Err(e) => out.push(Outcome::Error(e, pc)),
                            Ok(v) if !p.ty.contains(v) => out.push(Outcome::Error(RuntimeError::RangeOverflow, pc)),
                            Ok(v) => next.extend(combos.iter().map(|c| {
                                let mut c = c.clone();
                                c.push(v);
                                c
                            })),
                        }
                    }
                    combos = next;
                }
                for c in combos {
                    let mut t = th.clone();
                    t.stack.push(new_frame(*callee, callee_code, &c));
                    out.push(Outcome::Next {
                        shared: shared.into(),
                        thread: t,
                        event: Event::Pushed,
                    });
                }
            }
            Op::Return(e) => {
                let vals: Vec<Option<Val>> = match e {
                    None => vec![None],
                    Some(e) => eval(e, &env).into_iter().map(Some).collect(),
                };
                let ret_ty = procs[top.proc as usize].ret;
                for v in vals {
                    let v = match v {
                        Some(Err(e)) => {
                            out.push(Outcome::Error(e, pc));
                            continue;
                        }
                        Some(Ok(v)) if ret_ty.is_some_and(|t| !t.contains(v)) => {
                            out.push(Outcome::Error(RuntimeError::RangeOverflow, pc));
                            continue;
                        }
                        Some(Ok(v)) => Some(v),
                        None => None,
                    };
                    let mut sh: Box<[i64]> = shared.into();
                    let mut t = th.clone();
                    let popped = t.stack.pop().unwrap();
                    if let Some(caller) = t.stack.last_mut() {
                        let call = &procs[caller.proc as usize].nodes[caller.node as usize];
                        let Op::Call { lhs, .. } = &call.op else {
                            unreachable!("caller frames rest on call nodes")
                        };
                        caller.node = call.next;
                        if let (Some((slot, ty)), Some(v)) = (lhs, v) {
                            if !ty.contains(v) {
                                out.push(Outcome::Error(RuntimeError::RangeOverflow, call.pc));
                                continue;
                            }
                            store(&mut sh, &mut t, *slot, v);
                        }
                    }
                    out.push(Outcome::Next {
                        shared: sh,
                        thread: t,
                        event: Event::Popped(popped),
                    });
                }
            }
        }
    }
}

fn new_frame(index: u32, p: &ProcCode, args: &[i64]) -> Frame {
    let mut locals = defaults(&p.vars);
    locals[..args.len()].copy_from_slice(args);
    Frame {
        proc: index,
        node: p.entry,
        locals,
        entry: None,
    }
}

fn store(shared: &mut [i64], th: &mut Thread, slot: Slot, v: i64) {
    match slot {
        Slot::Shared(i) => shared[i as usize] = v,
        Slot::Global(i) => th.globals[i as usize] = v,
        Slot::Local(i) => th.stack.last_mut().unwrap().locals[i as usize] = v,
    }
}
