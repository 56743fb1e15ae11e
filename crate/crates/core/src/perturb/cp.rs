//! Inverse copy-propagation rewrites.
//!
//! * `split`: `x = e` becomes `t = e; x = t`.
//! * `route`: `t = x` is inserted and the following reads of `x` in the
//!   same block go through `t`, up to the next rebinding of `x`.
//! * `redundant-copy`: a copy that already holds is written out again.
//! * `loop-copy`: `t = y` before a loop and again at the end of its body,
//!   optionally reading the guard or iterable through `t`.
//! * `rotate`: `y = e; x = y` becomes `x = e; y = x`.
//!
//! Every temporary is fresh, so nothing but the inserted code observes it.

use rand_chacha::ChaCha8Rng;

use crate::analysis::cp::infer_cp;
use crate::analysis::defs::DefiniteBinding;
use crate::lang::vars::{bound_vars, substitute, vars_of};
use crate::lang::{Expr, Program, Stmt, StmtKind};
use crate::rewrite::{sites, Edit, Site};

use super::{
    drive, enclosing_locals, fresh_temps, Candidate, PerturbError, PerturbTrace, PerturbationKind,
};

pub fn perturb_cp_traced(p: &Program, seed: u64) -> Result<(Program, PerturbTrace), PerturbError> {
    drive(
        p,
        seed,
        PerturbationKind::Cp,
        |cur, _rng: &mut ChaCha8Rng| candidates(cur),
    )
}

fn at(site: &Site<'_>, removed: usize, inserted: Vec<Stmt>) -> Edit {
    Edit {
        path: site.path.clone(),
        start: site.index,
        removed,
        inserted,
    }
}

pub(crate) fn candidates(p: &Program) -> Vec<Candidate> {
    let Some(t) = fresh_temps(p, 1).pop() else {
        return Vec::new();
    };
    let defs = DefiniteBinding::compute(p);
    let ann = infer_cp(p).ok();
    let mut out = Vec::new();
    for site in sites(p) {
        let s = site.stmt;
        if matches!(s.kind, StmtKind::FunDef { .. }) {
            continue;
        }
        if let StmtKind::Assign { target, value } = &s.kind {
            if value.as_var().is_none() {
                out.push(Candidate {
                    op: "split",
                    edit: at(
                        &site,
                        1,
                        vec![
                            Stmt::assign(t.clone(), value.clone()),
                            Stmt::assign(target.clone(), Expr::var(t.clone())),
                        ],
                    ),
                });
            }
        }
        let mentioned = vars_of(s);
        for x in defs.at(s.id).intersection(&mentioned) {
            if let Some(c) = route(&site, x, &t) {
                out.push(c);
            }
        }
        if let Some(ann) = &ann {
            let locals = enclosing_locals(p, &site.path);
            for (x, y) in ann.pre(s.id).pairs() {
                for (a, b) in [(x, y), (y, x)] {
                    if locals.as_ref().is_none_or(|l| l.contains(a)) {
                        let mut inserted = vec![Stmt::assign(a, Expr::var(b))];
                        inserted.push(s.clone());
                        out.push(Candidate {
                            op: "redundant-copy",
                            edit: at(&site, 1, inserted),
                        });
                    }
                }
            }
        }
        out.extend(loop_copy(&site, &defs, &t));
        if let Some(c) = rotate(&site) {
            out.push(c);
        }
    }
    out
}

fn route(site: &Site<'_>, x: &str, t: &str) -> Option<Candidate> {
    let mut routed = Vec::new();
    for s in &site.block[site.index..] {
        if matches!(s.kind, StmtKind::FunDef { .. })
            || bound_vars(std::slice::from_ref(s)).contains(x)
        {
            break;
        }
        match substitute(s, x, t) {
            Ok(r) => routed.push(r),
            Err(_) => break,
        }
    }
    let last_changed = routed
        .iter()
        .zip(&site.block[site.index..])
        .rposition(|(a, b)| a != b)?;
    routed.truncate(last_changed + 1);
    let removed = routed.len();
    let mut inserted = vec![Stmt::assign(t, Expr::var(x))];
    inserted.extend(routed);
    Some(Candidate {
        op: "route",
        edit: at(site, removed, inserted),
    })
}

fn loop_copy(site: &Site<'_>, defs: &DefiniteBinding, t: &str) -> Vec<Candidate> {
    let s = site.stmt;
    let (head, body, loop_var) = match &s.kind {
        StmtKind::While { guard, body } => (guard, body, None),
        StmtKind::For { var, iter, body } => (iter, body, Some(var)),
        _ => return Vec::new(),
    };
    let mut out = Vec::new();
    let mentioned = vars_of(s);
    for y in defs.at(s.id).intersection(&mentioned) {
        if Some(y) == loop_var {
            continue;
        }
        let copy = Stmt::assign(t, Expr::var(y.clone()));
        let mut new_body = body.clone();
        new_body.push(copy.clone());
        let mut heads = vec![head.clone()];
        if vars_of(head).contains(y) {
            heads.push(substitute(head, y, t).expect("expressions bind nothing"));
        }
        for h in heads {
            let kind = match (&s.kind, loop_var) {
                (StmtKind::For { .. }, Some(v)) => StmtKind::For {
                    var: v.clone(),
                    iter: h,
                    body: new_body.clone(),
                },
                _ => StmtKind::While {
                    guard: h,
                    body: new_body.clone(),
                },
            };
            out.push(Candidate {
                op: "loop-copy",
                edit: at(site, 1, vec![copy.clone(), Stmt::new(kind)]),
            });
        }
    }
    out
}

fn rotate(site: &Site<'_>) -> Option<Candidate> {
    let StmtKind::Assign {
        target: y,
        value: e,
    } = &site.stmt.kind
    else {
        return None;
    };
    let (x, y2) = site.block.get(site.index + 1)?.as_copy()?;
    if y2 != y || x == y {
        return None;
    }
    Some(Candidate {
        op: "rotate",
        edit: at(
            site,
            2,
            vec![
                Stmt::assign(x, e.clone()),
                Stmt::assign(y.clone(), Expr::var(x)),
            ],
        ),
    })
}
