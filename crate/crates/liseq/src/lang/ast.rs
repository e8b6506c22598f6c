//! Abstract syntax shared by parameterized and sequential programs.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Program counter labelling a statement. Unique within one program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pc(pub u32);

impl fmt::Display for Pc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    /// Integers restricted to the inclusive range `lo..=hi`.
    Int { lo: i64, hi: i64 },
}

impl Type {
    pub fn int(lo: i64, hi: i64) -> Type {
        Type::Int { lo, hi }
    }

    pub fn same_kind(&self, other: &Type) -> bool {
        matches!(
            (self, other),
            (Type::Bool, Type::Bool) | (Type::Int { .. }, Type::Int { .. })
        )
    }

    pub fn contains(&self, v: i64) -> bool {
        match *self {
            Type::Bool => v == 0 || v == 1,
            Type::Int { lo, hi } => lo <= v && v <= hi,
        }
    }

    /// Value a variable of this type holds before its first assignment.
    pub fn default_value(&self) -> i64 {
        match *self {
            Type::Bool => 0,
            Type::Int { lo, hi } => 0i64.clamp(lo, hi),
        }
    }

    pub fn domain_size(&self) -> u64 {
        match *self {
            Type::Bool => 2,
            Type::Int { lo, hi } => (hi as i128 - lo as i128 + 1) as u64,
        }
    }

    pub fn values(&self) -> impl Iterator<Item = i64> {
        let (lo, hi) = match *self {
            Type::Bool => (0, 1),
            Type::Int { lo, hi } => (lo, hi),
        };
        lo..=hi
    }

    pub fn render(&self, v: i64) -> Value {
        match self {
            Type::Bool => Value::Bool(v != 0),
            Type::Int { .. } => Value::Int(v),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => f.write_str("bool"),
            Type::Int { lo, hi } => write!(f, "int[{lo},{hi}]"),
        }
    }
}

/// A typed value as it appears in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
}

impl Value {
    pub fn as_i64(self) -> i64 {
        match self {
            Value::Bool(b) => b as i64,
            Value::Int(i) => i,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("T"),
            Value::Bool(false) => f.write_str("F"),
            Value::Int(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub ty: Type,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, ty: Type) -> Self {
        VarDecl {
            name: name.into(),
            ty,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Neq => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

/// Expressions. Operators are the interpreted functions of the language and
/// evaluate atomically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Bool(bool),
    Int(i64),
    /// `*`: nondeterministically true or false.
    Nondet,
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn eq(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Eq, l, r)
    }

    pub fn and(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::And, l, r)
    }

    /// Conjunction of all items; `T` when empty.
    pub fn conj(items: impl IntoIterator<Item = Expr>) -> Expr {
        items
            .into_iter()
            .reduce(Expr::and)
            .unwrap_or(Expr::Bool(true))
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Var(v) => f(v),
            Expr::Bool(_) | Expr::Int(_) | Expr::Nondet => {}
            Expr::Unary(_, e) => e.visit_vars(f),
            Expr::Binary(_, l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub pc: Pc,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Skip,
    Assign {
        lhs: String,
        rhs: Expr,
    },
    Assume(Expr),
    Assert(Expr),
    /// Call of a user procedure; `lhs` receives the return value.
    Call {
        lhs: Option<String>,
        proc: String,
        args: Vec<Expr>,
    },
    Return(Option<Expr>),
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    Atomic(Vec<Stmt>),
}

impl Stmt {
    pub fn new(pc: Pc, kind: StmtKind) -> Stmt {
        Stmt { pc, kind }
    }

    /// Visits this statement and every nested statement in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        for child in self.children() {
            for s in child {
                s.walk(f);
            }
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        f(self);
        match &mut self.kind {
            StmtKind::While { body, .. } | StmtKind::Atomic(body) => {
                body.iter_mut().for_each(|s| s.walk_mut(f))
            }
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.iter_mut().for_each(|s| s.walk_mut(f));
                else_branch.iter_mut().for_each(|s| s.walk_mut(f));
            }
            _ => {}
        }
    }

    pub fn children(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::While { body, .. } | StmtKind::Atomic(body) => vec![body],
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => vec![then_branch, else_branch],
            _ => Vec::new(),
        }
    }
}

pub fn walk_block<'a>(block: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in block {
        s.walk(f);
    }
}

pub fn walk_block_mut(block: &mut [Stmt], f: &mut impl FnMut(&mut Stmt)) {
    for s in block {
        s.walk_mut(f);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Procedure {
    pub name: String,
    pub params: Vec<VarDecl>,
    /// `None` for `void` procedures.
    pub ret: Option<Type>,
    pub locals: Vec<VarDecl>,
    pub body: Vec<Stmt>,
}

impl Procedure {
    pub fn void(name: impl Into<String>, params: Vec<VarDecl>, locals: Vec<VarDecl>, body: Vec<Stmt>) -> Self {
        Procedure {
            name: name.into(),
            params,
            ret: None,
            locals,
            body,
        }
    }

    /// Parameters followed by locals, the layout of a call frame.
    pub fn frame_vars(&self) -> impl Iterator<Item = &VarDecl> {
        self.params.iter().chain(self.locals.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Process {
    pub name: String,
    pub globals: Vec<VarDecl>,
    pub procedures: Vec<Procedure>,
}

impl Process {
    pub fn procedure(&self, name: &str) -> Option<&Procedure> {
        self.procedures.iter().find(|p| p.name == name)
    }

    pub fn main(&self) -> Option<&Procedure> {
        self.procedure("main")
    }
}

/// A parameterized program: shared variables, a sequential `init` block and
/// the processes whose copies run on the threads.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParamProgram {
    pub shared: Vec<VarDecl>,
    pub init: Vec<Stmt>,
    pub processes: Vec<Process>,
}

/// A sequential program with recursion and nondeterminism.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeqProgram {
    pub globals: Vec<VarDecl>,
    pub procedures: Vec<Procedure>,
}

impl SeqProgram {
    pub fn procedure(&self, name: &str) -> Option<&Procedure> {
        self.procedures.iter().find(|p| p.name == name)
    }
}

/// Either kind of program, for the printer and the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Program {
    Param(ParamProgram),
    Seq(SeqProgram),
}

/// Hands out fresh program counters above every label already in use.
#[derive(Debug, Clone)]
pub struct PcGen {
    next: u32,
}

impl PcGen {
    pub fn starting_at(next: u32) -> Self {
        PcGen { next }
    }

    pub fn above_param(prog: &ParamProgram) -> Self {
        let mut max = 0;
        visit_param_stmts(prog, &mut |s| max = max.max(s.pc.0));
        PcGen { next: max + 1 }
    }

    pub fn fresh(&mut self) -> Pc {
        let pc = Pc(self.next);
        self.next += 1;
        pc
    }

    pub fn stmt(&mut self, kind: StmtKind) -> Stmt {
        Stmt::new(self.fresh(), kind)
    }
}

pub fn visit_param_stmts<'a>(prog: &'a ParamProgram, f: &mut impl FnMut(&'a Stmt)) {
    walk_block(&prog.init, f);
    for proc in prog.processes.iter().flat_map(|p| &p.procedures) {
        walk_block(&proc.body, f);
    }
}

pub fn visit_seq_stmts<'a>(prog: &'a SeqProgram, f: &mut impl FnMut(&'a Stmt)) {
    for proc in &prog.procedures {
        walk_block(&proc.body, f);
    }
}

/// Renumbers every pc in pre-order, the order the parser assigns them.
/// Returns the old-to-new mapping.
pub fn relabel_param(prog: &mut ParamProgram) -> std::collections::HashMap<Pc, Pc> {
    let mut map = std::collections::HashMap::new();
    let mut next = 0u32;
    let mut f = |s: &mut Stmt| {
        map.insert(s.pc, Pc(next));
        s.pc = Pc(next);
        next += 1;
    };
    walk_block_mut(&mut prog.init, &mut f);
    for proc in prog.processes.iter_mut().flat_map(|p| &mut p.procedures) {
        walk_block_mut(&mut proc.body, &mut f);
    }
    map
}

/// Sequential counterpart of [`relabel_param`].
pub fn relabel_seq(prog: &mut SeqProgram) -> std::collections::HashMap<Pc, Pc> {
    let mut map = std::collections::HashMap::new();
    let mut next = 0u32;
    for proc in &mut prog.procedures {
        walk_block_mut(&mut proc.body, &mut |s: &mut Stmt| {
            map.insert(s.pc, Pc(next));
            s.pc = Pc(next);
            next += 1;
        });
    }
    map
}

/// Checks that no two statements share a pc.
pub fn pcs_unique<'a>(stmts: impl IntoIterator<Item = &'a Stmt>) -> bool {
    let mut seen = std::collections::HashSet::new();
    stmts.into_iter().all(|s| seen.insert(s.pc))
}

pub fn param_pcs_unique(prog: &ParamProgram) -> bool {
    let mut all = Vec::new();
    visit_param_stmts(prog, &mut |s| all.push(s));
    pcs_unique(all)
}

pub fn seq_pcs_unique(prog: &SeqProgram) -> bool {
    let mut all = Vec::new();
    visit_seq_stmts(prog, &mut |s| all.push(s));
    pcs_unique(all)
}
