//! Copy-propagation rewrites, tried in the order 1, 3, 4, 5, 2 and top-down.

use std::collections::BTreeSet;

use crate::analysis::cp::{infer_cp, CpAnnotationMap};
use crate::analysis::defs::DefiniteBinding;
use crate::lang::vars::{bound_vars, substitute, vars_of};
use crate::lang::{Program, Stmt, StmtKind};

use super::{is_closed_code, run_phase, sites, Edit, RewriteError, Rule, Site, Trace};

/// Applies copy-propagation rules until none applies, re-inferring the
/// annotations after every step.
pub fn apply_cp(p: &Program) -> Result<(Program, Trace), RewriteError> {
    run_phase(p, next_cp_step)
}

/// The first applicable copy-propagation rewrite, if any.
pub fn next_cp_step(p: &Program) -> Result<Option<(Rule, Edit)>, RewriteError> {
    let ann = infer_cp(p)?;
    let all = sites(p);
    if let Some(e) = all.iter().find_map(|s| rule1(s, &ann)) {
        return Ok(Some((Rule::Cp1, e)));
    }
    for s in &all {
        if let Some(e) = rule3(p, s, &ann)? {
            return Ok(Some((Rule::Cp3, e)));
        }
    }
    if let Some((r, e)) = all.iter().find_map(|s| loop_hoist(s, &ann)) {
        return Ok(Some((r, e)));
    }
    let defs = DefiniteBinding::compute(p);
    Ok(all
        .iter()
        .find_map(|s| rule2(s, &ann, &defs))
        .map(|e| (Rule::Cp2, e)))
}

fn single(site: &Site<'_>, inserted: Vec<Stmt>) -> Edit {
    Edit {
        path: site.path.clone(),
        start: site.index,
        removed: 1,
        inserted,
    }
}

/// `x = y` with `x∼y` already holding is erased.
fn rule1(site: &Site<'_>, ann: &CpAnnotationMap) -> Option<Edit> {
    let (x, y) = site.stmt.as_copy()?;
    (x != y && ann.pre(site.stmt.id).contains(x, y)).then(|| single(site, Vec::new()))
}

/// Splits a loop body ending in a copy into `(S, x, y)`.
fn trailing_copy(body: &[Stmt]) -> Option<(&[Stmt], &str, &str)> {
    let (last, rest) = body.split_last()?;
    let (x, y) = last.as_copy()?;
    (x != y).then_some((rest, x, y))
}

/// Rules 4 and 5: the trailing copy of a loop body moves after the loop.
fn loop_hoist(site: &Site<'_>, ann: &CpAnnotationMap) -> Option<(Rule, Edit)> {
    let s = site.stmt;
    let entry = ann.loop_entry.get(&s.id)?;
    match &s.kind {
        StmtKind::While { guard, body } => {
            let (rest, x, y) = trailing_copy(body)?;
            if !entry.contains(x, y) || vars_of(rest).contains(x) || !is_closed_code(body) {
                return None;
            }
            let hoisted = Stmt::new(StmtKind::While {
                guard: substitute(guard, x, y).ok()?,
                body: rest.to_vec(),
            });
            let copy = body.last().cloned()?;
            Some((Rule::Cp4, single(site, vec![hoisted, copy])))
        }
        StmtKind::For { var, iter, body } => {
            let (rest, x, y) = trailing_copy(body)?;
            let mut used = vars_of(rest);
            used.remove(var);
            if !entry.contains(x, y) || used.contains(x) || !is_closed_code(body) {
                return None;
            }
            let hoisted = Stmt::new(StmtKind::For {
                var: var.clone(),
                iter: substitute(iter, x, y).ok()?,
                body: rest.to_vec(),
            });
            let copy = body.last().cloned()?;
            Some((Rule::Cp5, single(site, vec![hoisted, copy])))
        }
        _ => None,
    }
}

/// Rule 3, `y = e; S; x = y` into `x = e; S[x/y]; y = x`, applied to the tail
/// of a loop body only when the rotated copy can then leave the loop by
/// rule 4 or 5. Unrestricted, the rule is its own inverse.
fn rule3(
    p: &Program,
    site: &Site<'_>,
    ann: &CpAnnotationMap,
) -> Result<Option<Edit>, RewriteError> {
    let body = match &site.stmt.kind {
        StmtKind::While { body, .. } | StmtKind::For { body, .. } => body,
        _ => return Ok(None),
    };
    if loop_hoist(site, ann).is_some() {
        return Ok(None);
    }
    let Some((head, x, y)) = trailing_copy(body) else {
        return Ok(None);
    };
    let Some(k) = head.iter().rposition(|s| s.assigned_var() == Some(y)) else {
        return Ok(None);
    };
    let StmtKind::Assign { value: e, .. } = &head[k].kind else {
        return Ok(None);
    };
    let between = &head[k + 1..];
    if !ann.pre(head[k].id).contains(x, y)
        || vars_of(between).contains(x)
        || !is_closed_code(between)
    {
        return Ok(None);
    }
    let Ok(renamed) = substitute(&between.to_vec(), y, x) else {
        return Ok(None);
    };
    let mut inserted = vec![Stmt::assign(x, e.clone())];
    inserted.extend(renamed);
    inserted.push(Stmt::assign(y, crate::lang::Expr::var(x)));
    let path = site.path.child(site.index, 0);
    let edit = Edit {
        path: path.clone(),
        start: k,
        removed: body.len() - k,
        inserted,
    };
    let trial = edit.apply(p);
    let trial_ann = infer_cp(&trial)?;
    let loop_stmt = stmt_at(&trial, &site.path, site.index);
    let hoistable = loop_stmt.is_some_and(|l| {
        let s = Site {
            path: site.path.clone(),
            index: site.index,
            block: &[],
            stmt: l,
        };
        loop_hoist(&s, &trial_ann).is_some()
    });
    Ok(hoistable.then_some(edit))
}

fn stmt_at<'a>(p: &'a Program, path: &crate::lang::BlockPath, index: usize) -> Option<&'a Stmt> {
    path.resolve(p)?.get(index)
}

/// Rule 2, `x = y; S` into `S[y/x]; x = y`, with `S` the next statement.
/// Used only when it propagates a use of `x` or brings the copy next to a
/// redundant copy of the same pair.
fn rule2(site: &Site<'_>, ann: &CpAnnotationMap, defs: &DefiniteBinding) -> Option<Edit> {
    let (x, y) = site.stmt.as_copy()?;
    if x == y || !defs.at(site.stmt.id).contains(y) {
        return None;
    }
    let next = site.block.get(site.index + 1)?;
    let bound = bound_vars(std::slice::from_ref(next));
    if bound.contains(x) || !is_closed_code(std::slice::from_ref(next)) {
        return None;
    }
    let moved = if vars_of(next).contains(x) {
        if bound.contains(y) || !copy_persists(next, x, y, ann) {
            return None;
        }
        substitute(next, x, y).ok()?
    } else {
        // The copy only travels to meet a later copy of the same pair. If
        // `S` rebinds `y`, only an identical `x = y` makes the move harmless.
        let after = site.block.get(site.index + 2).and_then(Stmt::as_copy)?;
        let same = after == (x, y);
        if !(same || after == (y, x) && !bound.contains(y)) {
            return None;
        }
        next.clone()
    };
    Some(Edit {
        path: site.path.clone(),
        start: site.index,
        removed: 2,
        inserted: vec![moved, site.stmt.clone()],
    })
}

/// Every annotation inside `s` contains `x∼y`.
fn copy_persists(s: &Stmt, x: &str, y: &str, ann: &CpAnnotationMap) -> bool {
    let mut ok = true;
    let mut ids = BTreeSet::new();
    s.walk(&mut |t| {
        ids.insert(t.id);
    });
    for id in ids {
        ok &= ann.pre(id).contains(x, y) && ann.post(id).contains(x, y);
    }
    ok
}
