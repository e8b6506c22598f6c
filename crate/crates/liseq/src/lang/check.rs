//! Scope and type checking.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::diag::{DiagKind, Diagnostic, Span};
use super::parser::SpanTable;

/// Identifiers with this prefix are reserved for generated code.
pub const RESERVED_PREFIX: &str = "__liseq_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Bool,
    Int,
}

impl From<Type> for Kind {
    fn from(t: Type) -> Kind {
        match t {
            Type::Bool => Kind::Bool,
            Type::Int { .. } => Kind::Int,
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Bool => "bool",
            Kind::Int => "int",
        })
    }
}

#[derive(Clone, Copy)]
struct Signature<'a> {
    params: &'a [VarDecl],
    ret: Option<Type>,
}

struct Checker<'a> {
    spans: &'a SpanTable,
    allow_reserved: bool,
    diags: Vec<Diagnostic>,
}

struct Scope<'a, 'b> {
    vars: HashMap<&'a str, Type>,
    procs: &'b HashMap<&'a str, Signature<'a>>,
    ret: Option<Type>,
    in_init: bool,
}

impl<'a> Checker<'a> {
    fn err(&mut self, kind: DiagKind, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(kind, span, msg));
    }

    fn var_span(&self, name: &str) -> Span {
        self.spans.vars.get(name).copied().unwrap_or_default()
    }

    fn check_name(&mut self, name: &str, span: Span) {
        if !self.allow_reserved && name.starts_with(RESERVED_PREFIX) {
            self.err(
                DiagKind::Scope,
                span,
                format!("identifier `{name}` uses the reserved prefix `{RESERVED_PREFIX}`"),
            );
        }
    }

    /// Adds declarations to `scope`, reporting duplicates and shadowing.
    fn declare(&mut self, scope: &mut HashMap<&'a str, Type>, decls: &'a [VarDecl], what: &str) {
        for d in decls {
            let span = self.var_span(&d.name);
            self.check_name(&d.name, span);
            if scope.insert(d.name.as_str(), d.ty).is_some() {
                self.err(
                    DiagKind::Scope,
                    span,
                    format!("{what} `{}` is already declared in an enclosing or the same scope", d.name),
                );
            }
        }
    }

    fn expr(&mut self, e: &Expr, scope: &Scope, span: Span) -> Option<Kind> {
        match e {
            Expr::Var(v) => match scope.vars.get(v.as_str()) {
                Some(t) => Some((*t).into()),
                None => {
                    self.err(DiagKind::Scope, span, format!("undeclared variable `{v}`"));
                    None
                }
            },
            Expr::Bool(_) | Expr::Nondet => Some(Kind::Bool),
            Expr::Int(_) => Some(Kind::Int),
            Expr::Unary(op, inner) => {
                let want = match op {
                    UnOp::Not => Kind::Bool,
                    UnOp::Neg => Kind::Int,
                };
                let k = self.expr(inner, scope, span)?;
                if k != want {
                    self.err(DiagKind::Type, span, format!("operand of unary operator must be {want}, found {k}"));
                }
                Some(want)
            }
            Expr::Binary(op, l, r) => {
                let lk = self.expr(l, scope, span);
                let rk = self.expr(r, scope, span);
                let (lk, rk) = (lk?, rk?);
                match op {
                    BinOp::Or | BinOp::And => {
                        if lk != Kind::Bool || rk != Kind::Bool {
                            self.err(DiagKind::Type, span, format!("operands of `{}` must be bool", op.symbol()));
                        }
                        Some(Kind::Bool)
                    }
                    BinOp::Eq | BinOp::Neq => {
                        if lk != rk {
                            self.err(DiagKind::Type, span, format!("cannot compare {lk} with {rk}"));
                        }
                        Some(Kind::Bool)
                    }
                    _ => {
                        if lk != Kind::Int || rk != Kind::Int {
                            self.err(DiagKind::Type, span, format!("operands of `{}` must be int", op.symbol()));
                        }
                        Some(if op.is_comparison() { Kind::Bool } else { Kind::Int })
                    }
                }
            }
        }
    }

    fn cond(&mut self, e: &Expr, scope: &Scope, span: Span, what: &str) {
        if let Some(k) = self.expr(e, scope, span) {
            if k != Kind::Bool {
                self.err(DiagKind::Type, span, format!("{what} must be bool, found {k}"));
            }
        }
    }

    fn block(&mut self, stmts: &[Stmt], scope: &Scope, in_atomic: bool) {
        for s in stmts {
            self.stmt(s, scope, in_atomic);
        }
    }

    fn assign_target(&mut self, lhs: &str, scope: &Scope, span: Span) -> Option<Kind> {
        match scope.vars.get(lhs) {
            Some(t) => Some((*t).into()),
            None => {
                self.err(DiagKind::Scope, span, format!("undeclared variable `{lhs}`"));
                None
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, scope: &Scope, in_atomic: bool) {
        let span = self.spans.stmt(s.pc);
        match &s.kind {
            StmtKind::Skip => {}
            StmtKind::Assign { lhs, rhs } => {
                let t = self.assign_target(lhs, scope, span);
                let k = self.expr(rhs, scope, span);
                if let (Some(t), Some(k)) = (t, k) {
                    if t != k {
                        self.err(DiagKind::Type, span, format!("cannot assign {k} to `{lhs}` of type {t}"));
                    }
                }
            }
            StmtKind::Assume(e) => self.cond(e, scope, span, "assume condition"),
            StmtKind::Assert(e) => self.cond(e, scope, span, "assert condition"),
            StmtKind::Call { lhs, proc, args } => {
                if scope.in_init {
                    self.err(DiagKind::Scope, span, "procedure calls are not allowed in init");
                    return;
                }
                if in_atomic {
                    self.err(DiagKind::Scope, span, "procedure calls are not allowed inside atomic blocks");
                }
                if proc == "main" {
                    self.err(DiagKind::Scope, span, "call to main");
                    return;
                }
                let Some(sig) = scope.procs.get(proc.as_str()).copied() else {
                    self.err(DiagKind::Scope, span, format!("call to undeclared procedure `{proc}`"));
                    return;
                };
                if sig.params.len() != args.len() {
                    self.err(
                        DiagKind::Type,
                        span,
                        format!("`{proc}` expects {} argument(s), found {}", sig.params.len(), args.len()),
                    );
                }
                for (a, p) in args.iter().zip(sig.params) {
                    if let Some(k) = self.expr(a, scope, span) {
                        if k != Kind::from(p.ty) {
                            self.err(DiagKind::Type, span, format!("argument for `{}` must be {}, found {k}", p.name, Kind::from(p.ty)));
                        }
                    }
                }
                if let Some(lhs) = lhs {
                    let t = self.assign_target(lhs, scope, span);
                    match (sig.ret, t) {
                        (None, _) => self.err(DiagKind::Type, span, format!("`{proc}` is void and returns no value")),
                        (Some(r), Some(t)) if Kind::from(r) != t => {
                            self.err(DiagKind::Type, span, format!("cannot assign {} result of `{proc}` to `{lhs}` of type {t}", Kind::from(r)))
                        }
                        _ => {}
                    }
                }
            }
            StmtKind::Return(e) => {
                if scope.in_init {
                    self.err(DiagKind::Scope, span, "return is not allowed in init");
                    return;
                }
                if in_atomic {
                    self.err(DiagKind::Scope, span, "return is not allowed inside atomic blocks");
                }
                match (scope.ret, e) {
                    (None, Some(_)) => self.err(DiagKind::Type, span, "void procedure returns a value"),
                    (Some(_), None) => self.err(DiagKind::Type, span, "missing return value"),
                    (Some(t), Some(e)) => {
                        if let Some(k) = self.expr(e, scope, span) {
                            if k != Kind::from(t) {
                                self.err(DiagKind::Type, span, format!("returned {k} where {} is expected", Kind::from(t)));
                            }
                        }
                    }
                    (None, None) => {}
                }
            }
            StmtKind::While { cond, body } => {
                self.cond(cond, scope, span, "loop condition");
                self.block(body, scope, in_atomic);
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.cond(cond, scope, span, "if condition");
                self.block(then_branch, scope, in_atomic);
                self.block(else_branch, scope, in_atomic);
            }
            StmtKind::Atomic(body) => {
                if in_atomic {
                    self.err(DiagKind::Scope, span, "nested atomic block");
                }
                self.block(body, scope, true);
            }
        }
    }

    fn procedure(
        &mut self,
        process: &str,
        p: &'a Procedure,
        outer: &HashMap<&'a str, Type>,
        procs: &HashMap<&'a str, Signature<'a>>,
    ) {
        let span = self
            .spans
            .procs
            .get(&(process.to_string(), p.name.clone()))
            .copied()
            .unwrap_or_default();
        self.check_name(&p.name, span);
        if p.name == "main" {
            if !p.params.is_empty() {
                self.err(DiagKind::Scope, span, "main takes no parameters");
            }
            if p.ret.is_some() {
                self.err(DiagKind::Type, span, "main must be void");
            }
        }
        let mut vars = outer.clone();
        self.declare(&mut vars, &p.params, "parameter");
        self.declare(&mut vars, &p.locals, "local variable");
        let scope = Scope {
            vars,
            procs,
            ret: p.ret,
            in_init: false,
        };
        self.block(&p.body, &scope, false);
        if p.ret.is_some() && !always_returns(&p.body) {
            self.err(
                DiagKind::Type,
                span,
                format!("`{}` may reach its end without returning a value", p.name),
            );
        }
    }

    fn signatures(&mut self, process: &str, procs: &'a [Procedure]) -> HashMap<&'a str, Signature<'a>> {
        let mut sigs = HashMap::new();
        for p in procs {
            let sig = Signature {
                params: &p.params,
                ret: p.ret,
            };
            if sigs.insert(p.name.as_str(), sig).is_some() {
                let span = self
                    .spans
                    .procs
                    .get(&(process.to_string(), p.name.clone()))
                    .copied()
                    .unwrap_or_default();
                self.err(DiagKind::Scope, span, format!("procedure `{}` defined twice", p.name));
            }
        }
        if !sigs.contains_key("main") {
            let span = self.spans.processes.get(process).copied().unwrap_or_default();
            self.err(DiagKind::Scope, span, "missing procedure `main`");
        }
        sigs
    }
}

/// Syntactic check that every path through `body` ends in a `return`.
fn always_returns(body: &[Stmt]) -> bool {
    match body.last().map(|s| &s.kind) {
        Some(StmtKind::Return(_)) => true,
        Some(StmtKind::If {
            then_branch,
            else_branch,
            ..
        }) => always_returns(then_branch) && always_returns(else_branch),
        _ => false,
    }
}

pub fn check_param(prog: &ParamProgram, spans: &SpanTable, allow_reserved: bool) -> Vec<Diagnostic> {
    let mut ck = Checker {
        spans,
        allow_reserved,
        diags: Vec::new(),
    };
    let mut shared = HashMap::new();
    ck.declare(&mut shared, &prog.shared, "shared variable");
    let no_procs = HashMap::new();
    let init_scope = Scope {
        vars: shared.clone(),
        procs: &no_procs,
        ret: None,
        in_init: true,
    };
    ck.block(&prog.init, &init_scope, false);
    if prog.processes.is_empty() {
        ck.err(DiagKind::Scope, Span::default(), "a parameterized program needs at least one process");
    }
    let mut names = HashSet::new();
    for proc in &prog.processes {
        let span = spans.processes.get(&proc.name).copied().unwrap_or_default();
        ck.check_name(&proc.name, span);
        if !names.insert(proc.name.as_str()) {
            ck.err(DiagKind::Scope, span, format!("process `{}` defined twice", proc.name));
        }
        let mut globals = shared.clone();
        ck.declare(&mut globals, &proc.globals, "global variable");
        let sigs = ck.signatures(&proc.name, &proc.procedures);
        for p in &proc.procedures {
            ck.procedure(&proc.name, p, &globals, &sigs);
        }
    }
    ck.diags
}

pub fn check_seq(prog: &SeqProgram, spans: &SpanTable) -> Vec<Diagnostic> {
    let mut ck = Checker {
        spans,
        allow_reserved: true,
        diags: Vec::new(),
    };
    let mut globals = HashMap::new();
    ck.declare(&mut globals, &prog.globals, "global variable");
    let sigs = ck.signatures("", &prog.procedures);
    for p in &prog.procedures {
        ck.procedure("", p, &globals, &sigs);
    }
    ck.diags
}
