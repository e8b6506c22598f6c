//! Random well-formed parameterized programs for round-trip testing.

use std::rc::Rc;

use proptest::prelude::*;
use proptest::strategy::Union;

use liseq::lang::*;

#[derive(Clone)]
struct Ctx {
    bools: Vec<String>,
    ints: Vec<String>,
    /// Callable procedures: name, returns a value, parameter count.
    calls: Vec<(String, bool, usize)>,
    /// `Some(valued)` where `return` may appear.
    returns: Option<bool>,
    init: bool,
    atomic: bool,
}

impl Ctx {
    fn in_atomic(&self) -> Ctx {
        Ctx {
            calls: Vec::new(),
            returns: None,
            atomic: true,
            ..self.clone()
        }
    }
}

fn stmt_of(kind: StmtKind) -> Stmt {
    Stmt::new(Pc(0), kind)
}

fn int_expr(ints: Rc<Vec<String>>) -> BoxedStrategy<Expr> {
    let lit = (0i64..8).prop_map(Expr::Int);
    let leaf = if ints.is_empty() {
        lit.boxed()
    } else {
        prop_oneof![lit, prop::sample::select(ints.to_vec()).prop_map(Expr::Var)].boxed()
    };
    leaf.prop_recursive(3, 12, 2, |inner| {
        let op = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod]);
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Unary(UnOp::Neg, Box::new(e))),
            (op, inner.clone(), inner).prop_map(|(op, l, r)| Expr::bin(op, l, r)),
        ]
    })
    .boxed()
}

fn bool_expr(ctx: &Ctx) -> BoxedStrategy<Expr> {
    let ints = Rc::new(ctx.ints.clone());
    let cmp_op = prop::sample::select(vec![BinOp::Eq, BinOp::Neq, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge]);
    let cmp = (cmp_op, int_expr(ints.clone()), int_expr(ints)).prop_map(|(op, l, r)| Expr::bin(op, l, r));
    let lit = any::<bool>().prop_map(Expr::Bool);
    let leaf = if ctx.bools.is_empty() {
        prop_oneof![lit, cmp].boxed()
    } else {
        prop_oneof![lit, cmp, prop::sample::select(ctx.bools.clone()).prop_map(Expr::Var)].boxed()
    };
    leaf.prop_recursive(2, 8, 2, |inner| {
        let op = prop::sample::select(vec![BinOp::And, BinOp::Or, BinOp::Eq, BinOp::Neq]);
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            (op, inner.clone(), inner).prop_map(|(op, l, r)| Expr::bin(op, l, r)),
        ]
    })
    .boxed()
}

fn leaf(ctx: &Ctx) -> BoxedStrategy<Stmt> {
    let mut options: Vec<BoxedStrategy<StmtKind>> = vec![
        Just(StmtKind::Skip).boxed(),
        bool_expr(ctx).prop_map(StmtKind::Assume).boxed(),
        bool_expr(ctx).prop_map(StmtKind::Assert).boxed(),
    ];
    let ints = Rc::new(ctx.ints.clone());
    if !ctx.ints.is_empty() {
        let rhs = int_expr(ints.clone());
        options.push(
            (prop::sample::select(ctx.ints.clone()), rhs)
                .prop_map(|(lhs, rhs)| StmtKind::Assign { lhs, rhs })
                .boxed(),
        );
    }
    if !ctx.bools.is_empty() {
        let rhs = prop_oneof![Just(Expr::Nondet), bool_expr(ctx)];
        options.push(
            (prop::sample::select(ctx.bools.clone()), rhs)
                .prop_map(|(lhs, rhs)| StmtKind::Assign { lhs, rhs })
                .boxed(),
        );
    }
    for (name, valued, n) in ctx.calls.clone() {
        let args = prop::collection::vec(int_expr(ints.clone()), n);
        let lhs = if valued && !ctx.ints.is_empty() {
            prop::sample::select(ctx.ints.clone()).prop_map(Some).boxed()
        } else {
            Just(None).boxed()
        };
        options.push(
            (args, lhs)
                .prop_map(move |(args, lhs)| StmtKind::Call {
                    lhs,
                    proc: name.clone(),
                    args,
                })
                .boxed(),
        );
    }
    match ctx.returns {
        Some(false) => options.push(Just(StmtKind::Return(None)).boxed()),
        Some(true) => options.push(int_expr(ints).prop_map(|e| StmtKind::Return(Some(e))).boxed()),
        None => {}
    }
    Union::new(options).prop_map(stmt_of).boxed()
}

fn block(ctx: Ctx, depth: u32) -> BoxedStrategy<Vec<Stmt>> {
    prop::collection::vec(stmt(ctx, depth), 1..4).boxed()
}

fn stmt(ctx: Ctx, depth: u32) -> BoxedStrategy<Stmt> {
    let simple = leaf(&ctx);
    if depth == 0 {
        return simple;
    }
    let cond = || prop_oneof![Just(Expr::Nondet), bool_expr(&ctx)];
    let sub = || block(ctx.clone(), depth - 1);
    let mut options: Vec<(u32, BoxedStrategy<Stmt>)> = vec![
        (4, simple),
        (
            1,
            (cond(), sub())
                .prop_map(|(cond, body)| stmt_of(StmtKind::While { cond, body }))
                .boxed(),
        ),
        (
            1,
            (cond(), sub(), prop_oneof![Just(Vec::new()), sub()])
                .prop_map(|(cond, then_branch, else_branch)| {
                    stmt_of(StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    })
                })
                .boxed(),
        ),
    ];
    if !ctx.atomic && !ctx.init {
        let body = block(ctx.in_atomic(), depth - 1);
        options.push((1, body.prop_map(|b| stmt_of(StmtKind::Atomic(b))).boxed()));
    }
    Union::new_weighted(options).boxed()
}

fn decls(prefix: &'static str, n: usize, ty: impl Strategy<Value = Type>) -> impl Strategy<Value = Vec<VarDecl>> {
    prop::collection::vec(ty, n).prop_map(move |ts| ts.into_iter().enumerate().map(|(i, t)| VarDecl::new(format!("{prefix}{i}"), t)).collect())
}

fn int_type() -> impl Strategy<Value = Type> {
    (-3i64..3, 0i64..6).prop_map(|(lo, w)| Type::int(lo, lo + w))
}

fn names(ds: &[VarDecl], bools: bool) -> Vec<String> {
    ds.iter()
        .filter(|d| (d.ty == Type::Bool) == bools)
        .map(|d| d.name.clone())
        .collect()
}

fn process(index: usize, shared: Vec<VarDecl>) -> impl Strategy<Value = Process> {
    let globals = decls("g", 1, prop_oneof![Just(Type::Bool), int_type()]);
    (globals, any::<bool>(), any::<bool>(), decls("l", 2, prop_oneof![Just(Type::Bool), int_type()])).prop_flat_map(
        move |(globals, with_f, with_h, locals)| {
            let mut scope = shared.clone();
            scope.extend(globals.iter().cloned());
            let mut calls = Vec::new();
            if with_f {
                calls.push(("f".to_string(), true, 1));
            }
            if with_h {
                calls.push(("h".to_string(), false, 0));
            }
            let frame = |extra: &[VarDecl]| {
                let mut s = scope.clone();
                s.extend(extra.iter().cloned());
                s
            };
            let ctx = |vars: Vec<VarDecl>, returns: Option<bool>| Ctx {
                bools: names(&vars, true),
                ints: names(&vars, false),
                calls: calls.clone(),
                returns,
                init: false,
                atomic: false,
            };
            let param = VarDecl::new("a", Type::int(0, 3));
            let main_ctx = ctx(frame(&locals), Some(false));
            let f_ctx = ctx(frame(&[param.clone()]), Some(true));
            let h_ctx = ctx(frame(&[]), Some(false));
            let f_tail = int_expr(Rc::new(f_ctx.ints.clone()));
            let (locals, globals) = (locals.clone(), globals.clone());
            (block(main_ctx, 2), block(f_ctx, 1), f_tail, block(h_ctx, 1)).prop_map(move |(main, mut f, tail, h)| {
                let mut procedures = vec![Procedure::void("main", vec![], locals.clone(), main)];
                if with_f {
                    f.push(stmt_of(StmtKind::Return(Some(tail))));
                    procedures.push(Procedure {
                        name: "f".into(),
                        params: vec![param.clone()],
                        ret: Some(Type::int(0, 3)),
                        locals: vec![],
                        body: f,
                    });
                }
                if with_h {
                    procedures.push(Procedure::void("h", vec![], vec![], h));
                }
                Process {
                    name: format!("P{index}"),
                    globals: globals.clone(),
                    procedures,
                }
            })
        },
    )
}

/// A random program that passes the checker.
pub fn program() -> impl Strategy<Value = ParamProgram> {
    (decls("b", 2, Just(Type::Bool)), (1usize..3).prop_flat_map(|n| decls("n", n, int_type())), 1usize..3)
        .prop_flat_map(|(bools, ints, n_proc)| {
            let mut shared = bools;
            shared.extend(ints);
            let init_ctx = Ctx {
                bools: names(&shared, true),
                ints: names(&shared, false),
                calls: Vec::new(),
                returns: None,
                init: true,
                atomic: false,
            };
            let procs: Vec<_> = (0..n_proc).map(|i| process(i, shared.clone())).collect();
            (Just(shared), block(init_ctx, 1), procs)
        })
        .prop_map(|(shared, init, processes)| {
            let mut p = ParamProgram { shared, init, processes };
            relabel_param(&mut p);
            p
        })
}
