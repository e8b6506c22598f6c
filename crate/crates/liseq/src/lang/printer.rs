//! Pretty-printer producing text the parser accepts.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "  ";

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn write_expr(out: &mut String, e: &Expr, parent_prec: u8) {
    match e {
        Expr::Var(v) => out.push_str(v),
        Expr::Bool(true) => out.push('T'),
        Expr::Bool(false) => out.push('F'),
        Expr::Int(i) if *i < 0 => {
            let _ = write!(out, "({i})");
        }
        Expr::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Expr::Nondet => out.push('*'),
        Expr::Unary(op, inner) => {
            out.push(match op {
                UnOp::Not => '!',
                UnOp::Neg => '-',
            });
            // `-3` would read back as a literal
            if *op == UnOp::Neg && matches!(**inner, Expr::Int(_)) {
                out.push('(');
                write_expr(out, inner, 0);
                out.push(')');
            } else {
                write_expr(out, inner, 6);
            }
        }
        Expr::Binary(op, l, r) => {
            let prec = op.precedence();
            let paren = prec <= parent_prec;
            if paren {
                out.push('(');
            }
            // left-associative, except that comparisons do not chain
            let left_parent = if op.is_comparison() { prec } else { prec - 1 };
            write_expr(out, l, left_parent);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, r, prec);
            if paren {
                out.push(')');
            }
        }
    }
}

fn write_decls(out: &mut String, decls: &[VarDecl], depth: usize) {
    for d in decls {
        let _ = writeln!(out, "{}{} {};", INDENT.repeat(depth), d.ty, d.name);
    }
}

fn write_args(args: &[Expr]) -> String {
    args.iter().map(expr_to_string).collect::<Vec<_>>().join(", ")
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        write_stmt(out, s, depth);
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    match &s.kind {
        StmtKind::Skip => {
            let _ = writeln!(out, "{pad}skip;");
        }
        StmtKind::Assign { lhs, rhs } => {
            let _ = writeln!(out, "{pad}{lhs} := {};", expr_to_string(rhs));
        }
        StmtKind::Assume(e) => {
            let _ = writeln!(out, "{pad}assume({});", expr_to_string(e));
        }
        StmtKind::Assert(e) => {
            let _ = writeln!(out, "{pad}assert({});", expr_to_string(e));
        }
        StmtKind::Call { lhs, proc, args } => match lhs {
            Some(lhs) => {
                let _ = writeln!(out, "{pad}{lhs} := call {proc}({});", write_args(args));
            }
            None => {
                let _ = writeln!(out, "{pad}call {proc}({});", write_args(args));
            }
        },
        StmtKind::Return(None) => {
            let _ = writeln!(out, "{pad}return;");
        }
        StmtKind::Return(Some(e)) => {
            let _ = writeln!(out, "{pad}return {};", expr_to_string(e));
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "{pad}while ({}) do", expr_to_string(cond));
            write_block(out, body, depth + 1);
            let _ = writeln!(out, "{pad}od");
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = writeln!(out, "{pad}if ({}) then", expr_to_string(cond));
            write_block(out, then_branch, depth + 1);
            if !else_branch.is_empty() {
                let _ = writeln!(out, "{pad}else");
                write_block(out, else_branch, depth + 1);
            }
            let _ = writeln!(out, "{pad}fi");
        }
        StmtKind::Atomic(body) => {
            let _ = writeln!(out, "{pad}atomic begin");
            write_block(out, body, depth + 1);
            let _ = writeln!(out, "{pad}end");
        }
    }
}

fn write_procedure(out: &mut String, p: &Procedure, depth: usize) {
    let pad = INDENT.repeat(depth);
    let ret = p.ret.map(|t| t.to_string()).unwrap_or_else(|| "void".into());
    let params = p
        .params
        .iter()
        .map(|d| format!("{} {}", d.ty, d.name))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(out, "{pad}{ret} {}({params})", p.name);
    let _ = writeln!(out, "{pad}begin");
    write_decls(out, &p.locals, depth + 1);
    write_block(out, &p.body, depth + 1);
    let _ = writeln!(out, "{pad}end");
}

pub fn print_param(prog: &ParamProgram) -> String {
    let mut out = String::new();
    write_decls(&mut out, &prog.shared, 0);
    out.push_str("\ninit:\n");
    write_block(&mut out, &prog.init, 1);
    for proc in &prog.processes {
        let _ = writeln!(out, "\nprocess {}:", proc.name);
        write_decls(&mut out, &proc.globals, 1);
        for p in &proc.procedures {
            write_procedure(&mut out, p, 1);
        }
    }
    out
}

pub fn print_seq(prog: &SeqProgram) -> String {
    let mut out = String::new();
    write_decls(&mut out, &prog.globals, 0);
    for p in &prog.procedures {
        out.push('\n');
        write_procedure(&mut out, p, 0);
    }
    out
}
