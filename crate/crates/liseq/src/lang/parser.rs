//! Recursive-descent parser for the keyword syntax of `.pp` and `.sp` files.

use std::collections::HashMap;

use super::ast::*;
use super::diag::{DiagKind, Diagnostic, Span};
use super::lexer::{lex, Kw, Tok};

/// Positions of parsed items, used to attach diagnostics found by the checker.
#[derive(Debug, Clone, Default)]
pub struct SpanTable {
    pub stmts: HashMap<Pc, Span>,
    /// Keyed by `(process, procedure)`; the process is empty for sequential programs.
    pub procs: HashMap<(String, String), Span>,
    pub processes: HashMap<String, Span>,
    pub vars: HashMap<String, Span>,
}

impl SpanTable {
    pub fn stmt(&self, pc: Pc) -> Span {
        self.stmts.get(&pc).copied().unwrap_or_default()
    }
}

type PResult<T> = Result<T, Diagnostic>;

pub struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    next_pc: u32,
    default_int: Type,
    allow_atomic: bool,
    pub spans: SpanTable,
}

impl Parser {
    pub fn new(src: &str, default_int: Type) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            next_pc: 0,
            default_int,
            allow_atomic: true,
            spans: SpanTable::default(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(DiagKind::Syntax, self.span(), msg))
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        self.error(format!("expected {expected}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Kw) -> bool {
        self.eat(&Tok::Kw(k))
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn expect_kw(&mut self, k: Kw) -> PResult<()> {
        self.expect(Tok::Kw(k))
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn fresh_pc(&mut self) -> Pc {
        let pc = Pc(self.next_pc);
        self.next_pc += 1;
        pc
    }

    fn at_type(&self) -> bool {
        matches!(self.peek(), Tok::Kw(Kw::Bool) | Tok::Kw(Kw::Int))
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.advance() {
            Tok::Int(v) => Ok(if neg { -v } else { v }),
            _ => {
                self.pos -= 1;
                self.unexpected("integer")
            }
        }
    }

    fn ty(&mut self) -> PResult<Type> {
        match self.advance() {
            Tok::Kw(Kw::Bool) => Ok(Type::Bool),
            Tok::Kw(Kw::Int) => {
                if self.eat(&Tok::LBracket) {
                    let span = self.span();
                    let lo = self.signed_int()?;
                    self.expect(Tok::Comma)?;
                    let hi = self.signed_int()?;
                    self.expect(Tok::RBracket)?;
                    if lo > hi {
                        return Err(Diagnostic::new(
                            DiagKind::Syntax,
                            span,
                            format!("empty integer range [{lo},{hi}]"),
                        ));
                    }
                    Ok(Type::Int { lo, hi })
                } else {
                    Ok(self.default_int)
                }
            }
            _ => {
                self.pos -= 1;
                self.unexpected("type")
            }
        }
    }

    /// `type x, y, z;`
    fn decl_line(&mut self, out: &mut Vec<VarDecl>) -> PResult<()> {
        let ty = self.ty()?;
        loop {
            let span = self.span();
            let name = self.ident()?;
            self.spans.vars.entry(name.clone()).or_insert(span);
            out.push(VarDecl::new(name, ty));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Semi)
    }

    fn decls(&mut self) -> PResult<Vec<VarDecl>> {
        let mut out = Vec::new();
        while self.at_type() {
            self.decl_line(&mut out)?;
        }
        Ok(out)
    }

    /// `[type | void] name(params) begin decls stmts end`
    fn procedure(&mut self, process: &str) -> PResult<Procedure> {
        let ret = if self.eat_kw(Kw::Void) {
            None
        } else if self.at_type() {
            Some(self.ty()?)
        } else {
            None
        };
        let span = self.span();
        let name = self.ident()?;
        self.spans
            .procs
            .insert((process.to_string(), name.clone()), span);
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let ty = self.ty()?;
                let pspan = self.span();
                let pname = self.ident()?;
                self.spans.vars.entry(pname.clone()).or_insert(pspan);
                params.push(VarDecl::new(pname, ty));
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        self.expect_kw(Kw::Begin)?;
        let locals = self.decls()?;
        let body = self.stmts()?;
        self.expect_kw(Kw::End)?;
        Ok(Procedure {
            name,
            params,
            ret,
            locals,
            body,
        })
    }

    fn at_block_end(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Eof
                | Tok::Kw(Kw::End)
                | Tok::Kw(Kw::Od)
                | Tok::Kw(Kw::Fi)
                | Tok::Kw(Kw::Else)
                | Tok::Kw(Kw::Process)
        )
    }

    fn stmts(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        while !self.at_block_end() {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let pc = self.fresh_pc();
        self.spans.stmts.insert(pc, span);
        let kind = match self.peek().clone() {
            Tok::Kw(Kw::Skip) => {
                self.advance();
                self.expect(Tok::Semi)?;
                StmtKind::Skip
            }
            Tok::Kw(Kw::Assume) => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assume(e)
            }
            Tok::Kw(Kw::Assert) => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assert(e)
            }
            Tok::Kw(Kw::Call) => {
                self.advance();
                let proc = self.ident()?;
                let args = self.args()?;
                self.expect(Tok::Semi)?;
                StmtKind::Call {
                    lhs: None,
                    proc,
                    args,
                }
            }
            Tok::Kw(Kw::Return) => {
                self.advance();
                let e = if self.peek() == &Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi)?;
                StmtKind::Return(e)
            }
            Tok::Kw(Kw::While) => {
                self.advance();
                let cond = self.expr()?;
                self.expect_kw(Kw::Do)?;
                let body = self.stmts()?;
                self.expect_kw(Kw::Od)?;
                self.eat(&Tok::Semi);
                StmtKind::While { cond, body }
            }
            Tok::Kw(Kw::If) => {
                self.advance();
                let cond = self.expr()?;
                self.expect_kw(Kw::Then)?;
                let then_branch = self.stmts()?;
                let else_branch = if self.eat_kw(Kw::Else) {
                    self.stmts()?
                } else {
                    Vec::new()
                };
                self.expect_kw(Kw::Fi)?;
                self.eat(&Tok::Semi);
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            Tok::Kw(Kw::Atomic) => {
                if !self.allow_atomic {
                    return self.error("`atomic` blocks are only allowed inside process procedures");
                }
                self.advance();
                self.expect_kw(Kw::Begin)?;
                let body = self.stmts()?;
                self.expect_kw(Kw::End)?;
                self.eat(&Tok::Semi);
                StmtKind::Atomic(body)
            }
            Tok::Ident(lhs) => {
                self.advance();
                self.expect(Tok::Assign)?;
                let kind = if self.eat_kw(Kw::Call) {
                    let proc = self.ident()?;
                    let args = self.args()?;
                    StmtKind::Call {
                        lhs: Some(lhs),
                        proc,
                        args,
                    }
                } else if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::LParen {
                    let proc = self.ident()?;
                    let args = self.args()?;
                    StmtKind::Call {
                        lhs: Some(lhs),
                        proc,
                        args,
                    }
                } else {
                    StmtKind::Assign {
                        lhs,
                        rhs: self.expr()?,
                    }
                };
                self.expect(Tok::Semi)?;
                kind
            }
            _ => return self.unexpected("statement"),
        };
        Ok(Stmt::new(pc, kind))
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr | Tok::Kw(Kw::Or) => BinOp::Or,
            Tok::AndAnd | Tok::Kw(Kw::And) => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::Neq => BinOp::Neq,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Mod,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            // comparisons do not chain
            let next_min = prec + 1;
            let rhs = self.binary(next_min)?;
            lhs = Expr::bin(op, lhs, rhs);
            if op.is_comparison() && self.binop().is_some_and(|o| o.is_comparison()) {
                return self.error("comparison operators cannot be chained");
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Bang | Tok::Kw(Kw::Not) => {
                self.advance();
                Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)))
            }
            Tok::Minus => {
                self.advance();
                if let Tok::Int(v) = *self.peek() {
                    self.advance();
                    return Ok(Expr::Int(-v));
                }
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.advance() {
            Tok::Int(v) => Ok(Expr::Int(v)),
            Tok::Kw(Kw::True) => Ok(Expr::Bool(true)),
            Tok::Kw(Kw::False) => Ok(Expr::Bool(false)),
            Tok::Star => Ok(Expr::Nondet),
            Tok::Ident(name) => {
                if self.peek() == &Tok::LParen {
                    return self.error(format!(
                        "call of `{name}` inside an expression; calls may only appear as `x := {name}(..)`"
                    ));
                }
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => {
                self.pos -= 1;
                self.unexpected("expression")
            }
        }
    }

    pub fn param_program(&mut self) -> PResult<ParamProgram> {
        let shared = self.decls()?;
        self.expect_kw(Kw::Init)?;
        self.expect(Tok::Colon)?;
        self.allow_atomic = false;
        let init = self.stmts()?;
        self.allow_atomic = true;
        let mut processes = Vec::new();
        while self.peek() != &Tok::Eof {
            processes.push(self.process()?);
        }
        Ok(ParamProgram {
            shared,
            init,
            processes,
        })
    }

    fn process(&mut self) -> PResult<Process> {
        self.expect_kw(Kw::Process)?;
        let span = self.span();
        let name = self.ident()?;
        self.spans.processes.insert(name.clone(), span);
        let block = if self.eat_kw(Kw::Begin) {
            true
        } else {
            self.expect(Tok::Colon)?;
            false
        };
        let globals = self.decls_before_procedures()?;
        let mut procedures = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof | Tok::Kw(Kw::Process) if !block => break,
                Tok::Kw(Kw::End) if block => {
                    self.advance();
                    break;
                }
                Tok::Eof => return self.unexpected("`end` closing the process"),
                _ => procedures.push(self.procedure(&name)?),
            }
        }
        Ok(Process {
            name,
            globals,
            procedures,
        })
    }

    /// Declarations at the head of a process or sequential program; stops
    /// at the first `type name(` which starts a procedure.
    fn decls_before_procedures(&mut self) -> PResult<Vec<VarDecl>> {
        let mut out = Vec::new();
        while self.at_type() {
            let save = self.pos;
            self.ty()?;
            let is_proc = matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::LParen;
            self.pos = save;
            if is_proc {
                break;
            }
            self.decl_line(&mut out)?;
        }
        Ok(out)
    }

    pub fn seq_program(&mut self) -> PResult<SeqProgram> {
        self.allow_atomic = false;
        let globals = self.decls_before_procedures()?;
        let mut procedures = Vec::new();
        while self.peek() != &Tok::Eof {
            procedures.push(self.procedure("")?);
        }
        Ok(SeqProgram {
            globals,
            procedures,
        })
    }

    pub fn finish(&self) -> PResult<()> {
        if self.peek() != &Tok::Eof {
            return self.unexpected("end of input");
        }
        Ok(())
    }
}
