//! Removal of assignments whose target is never read afterwards.

use std::collections::{BTreeMap, BTreeSet};

use crate::analysis::cf::infer_cf;
use crate::analysis::defs::{int_typed_vars, is_int_expr, DefiniteBinding};
use crate::lang::vars::{bound_vars, vars_of};
use crate::lang::{Expr, Ident, Program, Stmt, StmtId, StmtKind};

use super::cf::is_additive_expr;
use super::{is_pure_expr, run_phase, sites, Edit, RewriteError, Rule, Trace};

pub fn garbage_collect(p: &Program) -> Result<(Program, Trace), RewriteError> {
    run_phase(p, next_gc_step)
}

/// For every plain assignment, the variables live right after it.
#[derive(Debug, Default)]
pub struct Liveness {
    pub after: BTreeMap<StmtId, BTreeSet<Ident>>,
    /// Free variables of function bodies; they may be read at any call.
    pub globally_read: BTreeSet<Ident>,
}

impl Liveness {
    pub fn compute(p: &Program) -> Liveness {
        let mut l = Liveness::default();
        p.walk(&mut |s| {
            if let StmtKind::FunDef { params, body, .. } = &s.kind {
                let locals = bound_vars(body);
                l.globally_read.extend(
                    vars_of(body)
                        .into_iter()
                        .filter(|v| !locals.contains(v) && !params.contains(v)),
                );
            }
        });
        l.block(&p.body, BTreeSet::new());
        l
    }

    pub fn is_dead(&self, id: StmtId, x: &str) -> bool {
        !self.globally_read.contains(x) && self.after.get(&id).is_some_and(|live| !live.contains(x))
    }

    fn block(&mut self, block: &[Stmt], mut live: BTreeSet<Ident>) -> BTreeSet<Ident> {
        for s in block.iter().rev() {
            live = self.stmt(s, live);
        }
        live
    }

    fn stmt(&mut self, s: &Stmt, out: BTreeSet<Ident>) -> BTreeSet<Ident> {
        match &s.kind {
            StmtKind::Assign { target, value } => {
                self.after.insert(s.id, out.clone());
                let mut live = out;
                live.remove(target);
                live.extend(vars_of(value));
                live
            }
            StmtKind::If {
                guard,
                then_body,
                else_body,
            } => {
                let mut live = self.block(then_body, out.clone());
                live.extend(self.block(else_body, out));
                live.extend(vars_of(guard));
                live
            }
            StmtKind::While { guard, body } => {
                let mut head: BTreeSet<Ident> = out.iter().cloned().chain(vars_of(guard)).collect();
                loop {
                    let mut next = out.clone();
                    next.extend(vars_of(guard));
                    next.extend(self.block(body, head.clone()));
                    if next == head {
                        return head;
                    }
                    head = next;
                }
            }
            StmtKind::For { var, iter, body } => {
                let mut head = out.clone();
                loop {
                    let mut next = out.clone();
                    let mut inner = self.block(body, head.clone());
                    inner.remove(var);
                    next.extend(inner);
                    if next == head {
                        let mut live = head;
                        live.extend(vars_of(iter));
                        return live;
                    }
                    head = next;
                }
            }
            StmtKind::FunDef { body, .. } => {
                self.block(body, BTreeSet::new());
                out
            }
            _ => {
                let mut live = out;
                live.extend(vars_of(s));
                live
            }
        }
    }
}

pub fn next_gc_step(p: &Program) -> Result<Option<(Rule, Edit)>, RewriteError> {
    let live = Liveness::compute(p);
    let defs = DefiniteBinding::compute(p);
    let ann = infer_cf(p)?;
    let ints = int_typed_vars(p);
    let cannot_fault = |e: &Expr, id: StmtId| {
        let vars = vars_of(e);
        if !defs.all_bound(id, &vars) {
            return false;
        }
        matches!(e, Expr::Const(_) | Expr::Var(_))
            || crate::analysis::cf::abstract_eval(e, ann.pre(id))
                .as_const()
                .is_some()
            || is_additive_expr(e) && is_int_expr(e, &ints)
    };
    for site in sites(p) {
        let s = site.stmt;
        let StmtKind::Assign { target, value } = &s.kind else {
            continue;
        };
        if live.is_dead(s.id, target) && is_pure_expr(value) && cannot_fault(value, s.id) {
            return Ok(Some((
                Rule::Gc,
                Edit {
                    path: site.path.clone(),
                    start: site.index,
                    removed: 1,
                    inserted: Vec::new(),
                },
            )));
        }
    }
    Ok(None)
}
