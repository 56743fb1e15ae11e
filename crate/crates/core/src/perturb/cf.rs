//! Inverse constant-folding rewrites.
//!
//! * `unfold`: an integer literal `k` becomes `a*t + b` over a fresh
//!   `t = c` defined just before the statement; a boolean literal becomes a
//!   comparison of `t`.
//! * `reuse`: a literal becomes `v + d` (or `v`, `not v`) for a variable `v`
//!   known to hold a constant there.
//! * `bump`: a loop that never mentions a constant variable `v` gets
//!   `v = v + d` at the top of its body and `v = v - d` at the bottom, with
//!   one literal of the body rewritten over the bumped value.
//! * `dead-store`: `x = k` placed right before an overwrite of `x`.
//! * `hoist`: a constant assignment moves up past code that ignores it.
//! * `wrap`: a statement is guarded by a test that always holds.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::cf::{infer_cf, AbstractMemory, CfAnnotationMap};
use crate::analysis::defs::DefiniteBinding;
use crate::lang::vars::{bound_vars, vars_of};
use crate::lang::{BinOp, Expr, Ident, Literal, Program, Stmt, StmtKind, UnOp};
use crate::rewrite::{is_closed_code, sites, Edit, Site};

use super::{
    affine, drive, enclosing_locals, expr_at, expr_at_mut, expr_paths, fresh_temps, Candidate,
    PerturbError, PerturbTrace, PerturbationKind,
};

/// Literals are only rewritten while the arithmetic stays far from overflow.
const LITERAL_BOUND: i64 = 1 << 40;

pub fn perturb_cf_traced(p: &Program, seed: u64) -> Result<(Program, PerturbTrace), PerturbError> {
    drive(p, seed, PerturbationKind::Cf, candidates)
}

fn at(site: &Site<'_>, removed: usize, inserted: Vec<Stmt>) -> Edit {
    Edit {
        path: site.path.clone(),
        start: site.index,
        removed,
        inserted,
    }
}

fn small_int(e: &Expr) -> Option<i64> {
    match e {
        Expr::Const(Literal::Int(k)) if k.abs() < LITERAL_BOUND => Some(*k),
        _ => None,
    }
}

/// Variables holding an integer or boolean constant in `mem` that code at
/// `site` may both read and write.
fn constant_vars(
    p: &Program,
    site: &Site<'_>,
    mem: &AbstractMemory,
    defs: &DefiniteBinding,
) -> Vec<(Ident, Literal)> {
    let locals = enclosing_locals(p, &site.path);
    let bound = defs.at(site.stmt.id);
    mem.iter()
        .filter_map(|(v, a)| match a.as_const() {
            Some(Literal::Int(c)) if c.abs() < LITERAL_BOUND => {
                Some((v.to_string(), Literal::Int(*c)))
            }
            Some(Literal::Bool(b)) => Some((v.to_string(), Literal::Bool(*b))),
            _ => None,
        })
        .filter(|(v, _)| bound.contains(v) && locals.as_ref().is_none_or(|l| l.contains(v)))
        .collect()
}

fn small_literal(e: &Expr) -> Option<Literal> {
    match e {
        Expr::Const(Literal::Bool(b)) => Some(Literal::Bool(*b)),
        _ => small_int(e).map(Literal::Int),
    }
}

fn program_literals(p: &Program) -> Vec<Literal> {
    let mut out: Vec<Literal> = Vec::new();
    p.walk(&mut |s| {
        for e in s.exprs() {
            e.walk(&mut |x| {
                if let Some(l) = small_literal(x) {
                    if !out.contains(&l) {
                        out.push(l);
                    }
                }
            });
        }
    });
    out
}

fn not(e: Expr) -> Expr {
    Expr::UnOp {
        op: UnOp::Not,
        operand: Box::new(e),
    }
}

/// A comparison of `t` (holding `c`) with a literal, true exactly when `b`.
fn comparison(t: &str, c: i64, b: bool, rng: &mut ChaCha8Rng) -> Expr {
    let (op, k) = match (b, rng.gen_range(0..3)) {
        (true, 0) => (BinOp::Eq, c),
        (true, 1) => (BinOp::Gt, c - 1),
        (true, _) => (BinOp::Le, c + 1),
        (false, 0) => (BinOp::Ne, c),
        (false, 1) => (BinOp::Lt, c),
        (false, _) => (BinOp::Gt, c),
    };
    Expr::binop(op, Expr::var(t), Expr::int(k))
}

/// An expression over `v`, which holds `held`, evaluating to `lit`.
fn over(v: &str, held: &Literal, lit: &Literal) -> Option<Expr> {
    match (held, lit) {
        (Literal::Int(c), Literal::Int(k)) => Some(affine(1, v, k - c)),
        (Literal::Bool(a), Literal::Bool(b)) => Some(if a == b {
            Expr::var(v)
        } else {
            not(Expr::var(v))
        }),
        _ => None,
    }
}

/// A test that holds when `v` holds `c`.
fn holds(v: &str, c: &Literal) -> Option<Expr> {
    match c {
        Literal::Int(k) => Some(Expr::binop(BinOp::Eq, Expr::var(v), Expr::int(*k))),
        Literal::Bool(true) => Some(Expr::var(v)),
        Literal::Bool(false) => Some(not(Expr::var(v))),
        _ => None,
    }
}

fn candidates(p: &Program, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    let Some(t) = fresh_temps(p, 1).pop() else {
        return Vec::new();
    };
    let Ok(ann) = infer_cf(p) else {
        return Vec::new();
    };
    let defs = DefiniteBinding::compute(p);
    let literals = program_literals(p);
    let mut out = Vec::new();
    for site in sites(p) {
        let s = site.stmt;
        if matches!(s.kind, StmtKind::FunDef { .. }) {
            continue;
        }
        let lits = expr_paths(s, &mut |e| small_literal(e).is_some());
        for path in &lits {
            let lit =
                small_literal(expr_at(s, path).expect("path from expr_paths")).expect("filtered");
            let c = rng.gen_range(1..=5);
            let unfolded = match lit {
                Literal::Int(k) => {
                    let a = rng.gen_range(1..=3);
                    affine(a, &t, k - a * c)
                }
                Literal::Bool(b) => comparison(&t, c, b, rng),
                _ => continue,
            };
            let mut rewritten = s.clone();
            *expr_at_mut(&mut rewritten, path).expect("path from expr_paths") = unfolded;
            out.push(Candidate {
                op: "unfold",
                edit: at(
                    &site,
                    1,
                    vec![Stmt::assign(t.clone(), Expr::int(c)), rewritten],
                ),
            });
        }
        let mem = match s.kind {
            StmtKind::For { .. } => ann.entry(s.id),
            _ => ann.pre(s.id),
        };
        let consts = constant_vars(p, &site, mem, &defs);
        for path in &lits {
            let lit =
                small_literal(expr_at(s, path).expect("path from expr_paths")).expect("filtered");
            for (v, c) in &consts {
                let Some(e) = over(v, c, &lit) else { continue };
                let mut rewritten = s.clone();
                *expr_at_mut(&mut rewritten, path).expect("path from expr_paths") = e;
                out.push(Candidate {
                    op: "reuse",
                    edit: at(&site, 1, vec![rewritten]),
                });
            }
        }
        out.extend(bump(p, &site, &ann, &defs, rng));
        if let StmtKind::Assign { target, value } = &s.kind {
            let others: Vec<&Literal> = literals
                .iter()
                .filter(|l| *value != Expr::Const((*l).clone()))
                .collect();
            let stacked = site.index > 0
                && matches!(&site.block[site.index - 1].kind,
                    StmtKind::Assign { target: t, value: Expr::Const(_) } if t == target);
            if !others.is_empty() && !stacked && !vars_of(value).contains(target) {
                let k = others[rng.gen_range(0..others.len())].clone();
                out.push(Candidate {
                    op: "dead-store",
                    edit: at(
                        &site,
                        1,
                        vec![Stmt::assign(target.clone(), Expr::Const(k)), s.clone()],
                    ),
                });
            }
        }
        out.extend(hoist(&site));
        for (v, c) in &consts {
            let Some(guard) = holds(v, c) else { continue };
            out.push(Candidate {
                op: "wrap",
                edit: at(
                    &site,
                    1,
                    vec![Stmt::new(StmtKind::If {
                        guard,
                        then_body: vec![s.clone()],
                        else_body: Vec::new(),
                    })],
                ),
            });
        }
    }
    out
}

fn bump(
    p: &Program,
    site: &Site<'_>,
    ann: &CfAnnotationMap,
    defs: &DefiniteBinding,
    rng: &mut ChaCha8Rng,
) -> Vec<Candidate> {
    let s = site.stmt;
    let body = match &s.kind {
        StmtKind::While { body, .. } | StmtKind::For { body, .. } => body,
        _ => return Vec::new(),
    };
    if !is_closed_code(body) {
        return Vec::new();
    }
    let mentioned = vars_of(s);
    let mut out = Vec::new();
    for (v, c) in constant_vars(p, site, ann.entry(s.id), defs) {
        let Literal::Int(c) = c else { continue };
        if mentioned.contains(&v) {
            continue;
        }
        let d = rng.gen_range(1..=2);
        let mut inner = body.clone();
        rewrite_one_literal(&mut inner, rng, &|k| affine(1, &v, k - c - d));
        inner.insert(
            0,
            Stmt::assign(
                v.clone(),
                Expr::binop(BinOp::Add, Expr::var(v.clone()), Expr::int(d)),
            ),
        );
        inner.push(Stmt::assign(
            v.clone(),
            Expr::binop(BinOp::Sub, Expr::var(v.clone()), Expr::int(d)),
        ));
        let mut looped = s.clone();
        *looped
            .blocks_mut()
            .into_iter()
            .next()
            .expect("loops have a body") = inner;
        out.push(Candidate {
            op: "bump",
            edit: at(site, 1, vec![looped]),
        });
    }
    out
}

/// Replaces one randomly chosen integer literal anywhere in `block`.
fn rewrite_one_literal(block: &mut [Stmt], rng: &mut ChaCha8Rng, f: &dyn Fn(i64) -> Expr) {
    fn collect(block: &[Stmt], at: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, super::ExprPath)>) {
        for (i, s) in block.iter().enumerate() {
            at.push(i);
            for path in expr_paths(s, &mut |e| small_int(e).is_some()) {
                out.push((at.clone(), path));
            }
            for (bi, b) in s.blocks().into_iter().enumerate() {
                at.push(bi);
                collect(b, at, out);
                at.pop();
            }
            at.pop();
        }
    }
    fn stmt_mut<'a>(block: &'a mut [Stmt], at: &[usize]) -> &'a mut Stmt {
        let s = &mut block[at[0]];
        if at.len() == 1 {
            return s;
        }
        let b = s
            .blocks_mut()
            .into_iter()
            .nth(at[1])
            .expect("collected path");
        stmt_mut(b, &at[2..])
    }
    let mut sites = Vec::new();
    collect(block, &mut Vec::new(), &mut sites);
    if sites.is_empty() {
        return;
    }
    let (at, path) = &sites[rng.gen_range(0..sites.len())];
    let e = expr_at_mut(stmt_mut(block, at), path).expect("collected path");
    let k = small_int(e).expect("collected literal");
    *e = f(k);
}

/// `S; x = E` into `x = E; S` for a constant `E`, when `S` never mentions `x`
/// and calls no user code.
fn hoist(site: &Site<'_>) -> Vec<Candidate> {
    let StmtKind::Assign { target, value } = &site.stmt.kind else {
        return Vec::new();
    };
    if !matches!(value, Expr::Const(_)) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for start in (0..site.index).rev() {
        let between = &site.block[start..site.index];
        if vars_of(between).contains(target)
            || !is_closed_code(between)
            || bound_vars(between).contains(target)
        {
            break;
        }
        let mut inserted = vec![site.stmt.clone()];
        inserted.extend(between.iter().cloned());
        out.push(Candidate {
            op: "hoist",
            edit: Edit {
                path: site.path.clone(),
                start,
                removed: site.index - start + 1,
                inserted,
            },
        });
    }
    out
}
