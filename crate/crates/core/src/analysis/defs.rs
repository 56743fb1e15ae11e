//! Two small helper analyses the rewrites need for soundness: which
//! variables are definitely bound before each statement, and which
//! variables only ever hold integers.

use std::collections::{BTreeMap, BTreeSet};

use crate::lang::vars::bound_vars;
use crate::lang::{BinOp, Expr, Ident, Program, Stmt, StmtId, StmtKind, UnOp};

/// Variables bound on every path reaching each statement.
#[derive(Debug, Clone, Default)]
pub struct DefiniteBinding {
    pub before: BTreeMap<StmtId, BTreeSet<Ident>>,
}

impl DefiniteBinding {
    pub fn compute(p: &Program) -> DefiniteBinding {
        let mut out = DefiniteBinding::default();
        out.block(&p.body, BTreeSet::new());
        out
    }

    pub fn at(&self, id: StmtId) -> &BTreeSet<Ident> {
        &self.before[&id]
    }

    pub fn all_bound(&self, id: StmtId, vars: &BTreeSet<Ident>) -> bool {
        vars.is_subset(self.at(id))
    }

    fn block(&mut self, block: &[Stmt], mut defs: BTreeSet<Ident>) -> BTreeSet<Ident> {
        for s in block {
            defs = self.stmt(s, defs);
        }
        defs
    }

    fn stmt(&mut self, s: &Stmt, defs: BTreeSet<Ident>) -> BTreeSet<Ident> {
        self.before.insert(s.id, defs.clone());
        match &s.kind {
            StmtKind::Assign { target, .. } => {
                let mut d = defs;
                d.insert(target.clone());
                d
            }
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                let a = self.block(then_body, defs.clone());
                let b = self.block(else_body, defs);
                a.intersection(&b).cloned().collect()
            }
            StmtKind::While { body, .. } => {
                self.block(body, defs.clone());
                defs
            }
            StmtKind::For { var, body, .. } => {
                let mut inner = defs.clone();
                inner.insert(var.clone());
                self.block(body, inner);
                defs
            }
            StmtKind::FunDef { params, body, .. } => {
                self.block(body, params.iter().cloned().collect());
                defs
            }
            _ => defs,
        }
    }
}

/// Variables that hold an `int` whenever they hold anything: every binding
/// of the name anywhere in the program is integer-valued. Computed as a
/// greatest fixpoint, so mutually dependent counters qualify.
pub fn int_typed_vars(p: &Program) -> BTreeSet<Ident> {
    let mut cand: BTreeSet<Ident> = bound_vars(&p.body);
    let mut excluded: BTreeSet<Ident> = BTreeSet::new();
    p.walk(&mut |s| match &s.kind {
        StmtKind::FunDef { params, .. } => excluded.extend(params.iter().cloned()),
        StmtKind::SubscriptAssign { target, .. } => {
            excluded.insert(target.clone());
        }
        StmtKind::For { var, iter, .. } if !is_range_call(iter) => {
            excluded.insert(var.clone());
        }
        _ => {}
    });
    cand.retain(|v| !excluded.contains(v));
    loop {
        let mut changed = false;
        let snapshot = cand.clone();
        p.walk(&mut |s| {
            if let StmtKind::Assign { target, value } = &s.kind {
                if snapshot.contains(target) && !is_int_expr(value, &snapshot) {
                    cand.remove(target);
                    changed = true;
                }
            }
        });
        if !changed {
            return cand;
        }
    }
}

fn is_range_call(e: &Expr) -> bool {
    matches!(e, Expr::Call { callee, .. } if callee == "range")
}

/// Whether `e` evaluates to an `int` (or fails) given integer variables.
pub fn is_int_expr(e: &Expr, ints: &BTreeSet<Ident>) -> bool {
    match e {
        Expr::Const(crate::lang::Literal::Int(_)) => true,
        Expr::Var(v) => ints.contains(v),
        Expr::BinOp { op, lhs, rhs } => {
            matches!(
                op,
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::FloorDiv | BinOp::Mod
            ) && is_int_expr(lhs, ints)
                && is_int_expr(rhs, ints)
        }
        Expr::UnOp {
            op: UnOp::Neg,
            operand,
        } => is_int_expr(operand, ints),
        Expr::Call { callee, args } => match callee.as_str() {
            "len" | "int" => true,
            "abs" => args.len() == 1 && is_int_expr(&args[0], ints),
            _ => false,
        },
        _ => false,
    }
}
