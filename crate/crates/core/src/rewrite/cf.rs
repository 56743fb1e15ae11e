//! Constant-folding rewrites, tried in the order 4, 2, 1, 3b, 3a and
//! top-down.

use std::collections::BTreeSet;

use crate::analysis::cf::{
    abstract_eval, infer_cf, provably_empty, AbstractMemory, AbstractValue, CfAnnotationMap,
};
use crate::analysis::defs::{int_typed_vars, is_int_expr, DefiniteBinding};
use crate::lang::vars::{bound_vars, vars_of};
use crate::lang::{BinOp, Expr, Ident, Literal, Program, Stmt, StmtKind};

use super::{
    is_closed_code, is_pure_expr, run_phase, sites, Edit, RewriteError, Rule, Site, Trace,
};

pub fn apply_cf(p: &Program) -> Result<(Program, Trace), RewriteError> {
    run_phase(p, next_cf_step)
}

struct Ctx {
    ann: CfAnnotationMap,
    defs: DefiniteBinding,
    ints: BTreeSet<Ident>,
}

impl Ctx {
    /// `⟦e⟧` in `mem`, trusted only when every variable of `e` is bound on
    /// all paths (one-sided joins may keep a binding from a single branch).
    fn value(&self, e: &Expr, mem: &AbstractMemory, at: usize) -> AbstractValue {
        if !self.defs.all_bound(at, &vars_of(e)) {
            return AbstractValue::Err;
        }
        abstract_eval(e, mem)
    }

    fn constant(&self, e: &Expr, mem: &AbstractMemory, at: usize) -> Option<Literal> {
        self.value(e, mem, at).as_const().cloned()
    }

    /// Evaluating `e` before the statement `at` cannot fault.
    fn cannot_fault(&self, e: &Expr, at: usize) -> bool {
        let bound = self.defs.all_bound(at, &vars_of(e));
        match e {
            Expr::Const(_) => true,
            Expr::Var(_) => bound,
            _ => {
                bound
                    && (self.constant(e, self.ann.pre(at), at).is_some()
                        || is_additive_expr(e) && is_int_expr(e, &self.ints))
            }
        }
    }
}

/// Built only from `+`, `-`, variables and literals. Over bound integers
/// such an expression cannot fault short of 64-bit overflow.
pub(crate) fn is_additive_expr(e: &Expr) -> bool {
    match e {
        Expr::Const(_) | Expr::Var(_) => true,
        Expr::BinOp { op, lhs, rhs } => {
            matches!(op, BinOp::Add | BinOp::Sub) && is_additive_expr(lhs) && is_additive_expr(rhs)
        }
        _ => false,
    }
}

pub fn next_cf_step(p: &Program) -> Result<Option<(Rule, Edit)>, RewriteError> {
    let ctx = Ctx {
        ann: infer_cf(p)?,
        defs: DefiniteBinding::compute(p),
        ints: int_typed_vars(p),
    };
    let all = sites(p);
    let finders: [&dyn Fn(&Site<'_>) -> Option<(Rule, Edit)>; 5] = [
        &|s| rule4(s, &ctx),
        &|s| rule2(s, &ctx).map(|e| (Rule::Cf2, e)),
        &|s| rule1(s, &ctx).map(|e| (Rule::Cf1, e)),
        &|s| rule3b(s, &ctx).map(|e| (Rule::Cf3b, e)),
        &|s| rule3a(s, &ctx).map(|e| (Rule::Cf3a, e)),
    ];
    for find in finders {
        if let Some(hit) = all.iter().find_map(find) {
            return Ok(Some(hit));
        }
    }
    Ok(None)
}

fn replace(site: &Site<'_>, removed: usize, inserted: Vec<Stmt>) -> Edit {
    Edit {
        path: site.path.clone(),
        start: site.index,
        removed,
        inserted,
    }
}

fn truthy(l: &Literal) -> bool {
    match l {
        Literal::Int(i) => *i != 0,
        Literal::Float(f) => *f != 0.0,
        Literal::Bool(b) => *b,
        Literal::Str(s) => !s.is_empty(),
    }
}

/// Branch elimination.
fn rule4(site: &Site<'_>, ctx: &Ctx) -> Option<(Rule, Edit)> {
    let s = site.stmt;
    match &s.kind {
        StmtKind::If {
            guard,
            then_body,
            else_body,
        } => {
            let g = ctx.constant(guard, ctx.ann.pre(s.id), s.id)?;
            Some(if truthy(&g) {
                (Rule::Cf4IfTrue, replace(site, 1, then_body.clone()))
            } else {
                (Rule::Cf4IfFalse, replace(site, 1, else_body.clone()))
            })
        }
        StmtKind::While { guard, .. } => {
            let g = ctx.constant(guard, ctx.ann.entry(s.id), s.id)?;
            (!truthy(&g)).then(|| (Rule::Cf4While, replace(site, 1, Vec::new())))
        }
        StmtKind::For { iter, .. } => {
            let ok = ctx.defs.all_bound(s.id, &vars_of(iter))
                && provably_empty(iter, ctx.ann.entry(s.id));
            ok.then(|| (Rule::Cf4For, replace(site, 1, Vec::new())))
        }
        _ => None,
    }
}

/// `x = E` is dropped when `x` already holds `⟦E⟧`.
fn rule2(site: &Site<'_>, ctx: &Ctx) -> Option<Edit> {
    let StmtKind::Assign { target, value } = &site.stmt.kind else {
        return None;
    };
    let id = site.stmt.id;
    let pre = ctx.ann.pre(id);
    let k = ctx.constant(value, pre, id)?;
    let held = pre.get(target)? == &AbstractValue::Const(k);
    (held && ctx.defs.at(id).contains(target)).then(|| replace(site, 1, Vec::new()))
}

/// Replaces maximal constant subexpressions by their value, then gathers
/// the integer constants of `+`/`-` chains over integer terms.
fn fold(e: &Expr, ctx: &Ctx, mem: &AbstractMemory, at: usize) -> Expr {
    if !matches!(e, Expr::Const(_)) {
        if let Some(k) = ctx.constant(e, mem, at) {
            return Expr::Const(k);
        }
    }
    let mut out = e.clone();
    match &mut out {
        Expr::MethodCall { args, .. } => {
            for a in args {
                *a = fold(a, ctx, mem, at);
            }
        }
        other => {
            for c in other.children_mut() {
                *c = fold(c, ctx, mem, at);
            }
        }
    }
    reassociate(out, &ctx.ints)
}

fn additive_terms(e: &Expr, positive: bool, out: &mut Vec<(bool, Expr)>) {
    match e {
        Expr::BinOp {
            op: op @ (BinOp::Add | BinOp::Sub),
            lhs,
            rhs,
        } => {
            additive_terms(lhs, positive, out);
            additive_terms(
                rhs,
                if *op == BinOp::Add {
                    positive
                } else {
                    !positive
                },
                out,
            );
        }
        _ => out.push((positive, e.clone())),
    }
}

/// `n - 2 + 1` becomes `n - 1` when every term is an integer.
fn reassociate(e: Expr, ints: &BTreeSet<Ident>) -> Expr {
    if !matches!(
        e,
        Expr::BinOp {
            op: BinOp::Add | BinOp::Sub,
            ..
        }
    ) || !is_int_expr(&e, ints)
    {
        return e;
    }
    let mut terms = Vec::new();
    additive_terms(&e, true, &mut terms);
    let (consts, others): (Vec<_>, Vec<_>) = terms
        .into_iter()
        .partition(|(_, t)| matches!(t, Expr::Const(Literal::Int(_))));
    let starts_positive = others.first().is_some_and(|(pos, _)| *pos);
    if consts.len() < 2 || !starts_positive {
        return e;
    }
    let mut sum: i64 = 0;
    for (pos, t) in &consts {
        let Expr::Const(Literal::Int(v)) = t else {
            unreachable!()
        };
        let next = if *pos {
            sum.checked_add(*v)
        } else {
            sum.checked_sub(*v)
        };
        match next {
            Some(s) => sum = s,
            None => return e,
        }
    }
    let mut it = others.into_iter();
    let mut acc = it.next().expect("non-empty").1;
    for (pos, t) in it {
        acc = Expr::binop(if pos { BinOp::Add } else { BinOp::Sub }, acc, t);
    }
    match sum {
        0 => acc,
        s if s > 0 => Expr::binop(BinOp::Add, acc, Expr::int(s)),
        s => match s.checked_neg() {
            Some(m) => Expr::binop(BinOp::Sub, acc, Expr::int(m)),
            None => e,
        },
    }
}

fn rule1(site: &Site<'_>, ctx: &Ctx) -> Option<Edit> {
    let s = site.stmt;
    let id = s.id;
    let pre = ctx.ann.pre(id);
    let f = |e: &Expr, mem: &AbstractMemory| fold(e, ctx, mem, id);
    let kind = match &s.kind {
        StmtKind::Assign { target, value } => StmtKind::Assign {
            target: target.clone(),
            value: f(value, pre),
        },
        StmtKind::SubscriptAssign {
            target,
            index,
            value,
        } => StmtKind::SubscriptAssign {
            target: target.clone(),
            index: f(index, pre),
            value: f(value, pre),
        },
        StmtKind::If {
            guard,
            then_body,
            else_body,
        } => StmtKind::If {
            guard: f(guard, pre),
            then_body: then_body.clone(),
            else_body: else_body.clone(),
        },
        StmtKind::While { guard, body } => StmtKind::While {
            guard: f(guard, pre),
            body: body.clone(),
        },
        StmtKind::For { var, iter, body } => StmtKind::For {
            var: var.clone(),
            iter: f(iter, ctx.ann.entry(id)),
            body: body.clone(),
        },
        StmtKind::ExprStmt(e) => StmtKind::ExprStmt(match e {
            Expr::Call { callee, args } => Expr::Call {
                callee: callee.clone(),
                args: args.iter().map(|a| f(a, pre)).collect(),
            },
            other => f(other, pre),
        }),
        StmtKind::Return(Some(e)) => StmtKind::Return(Some(f(e, pre))),
        _ => return None,
    };
    (kind != s.kind).then(|| replace(site, 1, vec![Stmt::new(kind)]))
}

/// `x = E; x = E'` collapses to `x = E'`.
fn rule3b(site: &Site<'_>, ctx: &Ctx) -> Option<Edit> {
    let StmtKind::Assign { target, value } = &site.stmt.kind else {
        return None;
    };
    let next = site.block.get(site.index + 1)?;
    let StmtKind::Assign {
        target: t2,
        value: v2,
    } = &next.kind
    else {
        return None;
    };
    let ok = t2 == target
        && !vars_of(v2).contains(target)
        && is_pure_expr(value)
        && ctx.cannot_fault(value, site.stmt.id);
    ok.then(|| replace(site, 2, vec![next.clone()]))
}

/// `x = E; S` into `S; x = E`, used to bring `x = E` next to a later
/// overwrite of `x` in the same block so that rule 3b can remove it.
fn rule3a(site: &Site<'_>, ctx: &Ctx) -> Option<Edit> {
    let StmtKind::Assign { target, value } = &site.stmt.kind else {
        return None;
    };
    let rest = &site.block[site.index + 1..];
    let j = rest.iter().position(|s| vars_of(s).contains(target))?;
    if j == 0 {
        return None;
    }
    let StmtKind::Assign {
        target: t2,
        value: v2,
    } = &rest[j].kind
    else {
        return None;
    };
    let between = &rest[..j];
    let moved_reads_unchanged = vars_of(value).is_disjoint(&bound_vars(between));
    let ok = t2 == target
        && !vars_of(v2).contains(target)
        && moved_reads_unchanged
        && is_closed_code(between)
        && is_pure_expr(value)
        && ctx.cannot_fault(value, site.stmt.id);
    if !ok {
        return None;
    }
    let mut inserted = between.to_vec();
    inserted.push(site.stmt.clone());
    Some(replace(site, j + 1, inserted))
}
