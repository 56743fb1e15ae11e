//! Seeded single-mutation bug injection. A mutant is kept only when the
//! manifest exposes it, so every emitted bug carries a witness case.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::defs::DefiniteBinding;
use crate::interp::{equivalent, TestManifest, Witness};
use crate::lang::printer::print_expr;
use crate::lang::{BinOp, Expr, Ident, Literal, Program, StmtId, StmtKind};
use crate::rewrite::sites;

use super::{enclosing_locals, expr_at, expr_at_mut, expr_paths, stmt_mut, ExprPath, PerturbError};

pub const MAX_BUG_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    OffByOneBound,
    ComparisonFlip,
    WrongVariable,
    SwappedOperands,
    IndexShift,
    ConstantTweak,
}

impl MutationKind {
    pub fn name(self) -> &'static str {
        match self {
            MutationKind::OffByOneBound => "off-by-one-bound",
            MutationKind::ComparisonFlip => "comparison-flip",
            MutationKind::WrongVariable => "wrong-variable",
            MutationKind::SwappedOperands => "swapped-operands",
            MutationKind::IndexShift => "index-shift",
            MutationKind::ConstantTweak => "constant-tweak",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugDescriptor {
    pub kind: MutationKind,
    /// Statement id in the mutated program (ids are unchanged by a mutation).
    pub stmt: StmtId,
    /// Expression slot of the statement, then child indices.
    pub path: String,
    pub before: String,
    pub after: String,
    pub witness: Witness,
}

struct Point {
    kind: MutationKind,
    stmt: StmtId,
    path: ExprPath,
    replacement: Option<Ident>,
}

fn child(path: &ExprPath, i: usize) -> ExprPath {
    let mut p = path.clone();
    p.1.push(i);
    p
}

fn flipped(op: BinOp) -> Option<BinOp> {
    Some(match op {
        BinOp::Lt => BinOp::Le,
        BinOp::Le => BinOp::Lt,
        BinOp::Gt => BinOp::Ge,
        BinOp::Ge => BinOp::Gt,
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        _ => return None,
    })
}

fn points(p: &Program) -> Vec<Point> {
    let defs = DefiniteBinding::compute(p);
    let mut out = Vec::new();
    for site in sites(p) {
        let s = site.stmt;
        let id = s.id;
        let mut push = |kind, path: ExprPath, replacement: Option<Ident>| {
            out.push(Point {
                kind,
                stmt: id,
                path,
                replacement,
            })
        };
        if matches!(s.kind, StmtKind::SubscriptAssign { .. }) {
            push(MutationKind::IndexShift, (0, Vec::new()), None);
        }
        let locals = enclosing_locals(p, &site.path);
        let in_scope: Vec<&Ident> = defs
            .at(id)
            .iter()
            .filter(|v| locals.as_ref().is_none_or(|l| l.contains(*v)))
            .collect();
        for path in expr_paths(s, &mut |_| true) {
            match expr_at(s, &path).expect("path from expr_paths") {
                Expr::Call { callee, args } if callee == "range" && !args.is_empty() => {
                    push(
                        MutationKind::OffByOneBound,
                        child(&path, args.len() - 1),
                        None,
                    );
                }
                Expr::BinOp { op, lhs, rhs } => {
                    if matches!(op, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge) {
                        push(MutationKind::OffByOneBound, child(&path, 1), None);
                    }
                    if flipped(*op).is_some() {
                        push(MutationKind::ComparisonFlip, path.clone(), None);
                    }
                    let ordered = !matches!(
                        op,
                        BinOp::Add | BinOp::Mul | BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or
                    );
                    if ordered && lhs != rhs {
                        push(MutationKind::SwappedOperands, path.clone(), None);
                    }
                }
                Expr::Subscript { .. } => push(MutationKind::IndexShift, child(&path, 1), None),
                Expr::Const(Literal::Int(_)) => {
                    push(MutationKind::ConstantTweak, path.clone(), None)
                }
                Expr::Var(x) => {
                    for y in &in_scope {
                        if *y != x {
                            push(
                                MutationKind::WrongVariable,
                                path.clone(),
                                Some((*y).clone()),
                            );
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}

fn shifted(e: &Expr, up: bool) -> Expr {
    Expr::binop(
        if up { BinOp::Add } else { BinOp::Sub },
        e.clone(),
        Expr::int(1),
    )
}

fn mutate(p: &Program, pt: &Point, rng: &mut ChaCha8Rng) -> Option<(Program, String, String)> {
    let mut q = p.clone();
    let e = expr_at_mut(stmt_mut(&mut q, pt.stmt)?, &pt.path)?;
    let before = print_expr(e);
    let up = rng.gen_bool(0.5);
    let new = match (pt.kind, &*e) {
        (MutationKind::OffByOneBound | MutationKind::IndexShift, _) => shifted(e, up),
        (MutationKind::ComparisonFlip, Expr::BinOp { op, lhs, rhs }) => {
            Expr::binop(flipped(*op)?, (**lhs).clone(), (**rhs).clone())
        }
        (MutationKind::SwappedOperands, Expr::BinOp { op, lhs, rhs }) => {
            Expr::binop(*op, (**rhs).clone(), (**lhs).clone())
        }
        (MutationKind::WrongVariable, Expr::Var(_)) => Expr::var(pt.replacement.clone()?),
        (MutationKind::ConstantTweak, Expr::Const(Literal::Int(k))) => Expr::int(if up {
            k.checked_add(1)?
        } else {
            k.checked_sub(1)?
        }),
        _ => return None,
    };
    let after = print_expr(&new);
    *e = new;
    Some((q, before, after))
}

fn render_path((slot, path): &ExprPath) -> String {
    let mut out = slot.to_string();
    for i in path {
        out.push('.');
        out.push_str(&i.to_string());
    }
    out
}

/// Tries seeded mutation sites until one changes an observable outcome on
/// some manifest case.
pub fn inject_bug(
    p: &Program,
    seed: u64,
    m: &TestManifest,
) -> Result<(Program, BugDescriptor), PerturbError> {
    let mut base = p.clone();
    base.canonicalize();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = points(&base);
    pts.shuffle(&mut rng);
    let mut attempts = 0;
    for pt in &pts {
        if attempts == MAX_BUG_ATTEMPTS {
            break;
        }
        let Some((mutant, before, after)) = mutate(&base, pt, &mut rng) else {
            continue;
        };
        attempts += 1;
        let verdict = equivalent(&base, &mutant, m)?;
        if verdict.is_no() {
            let witness = verdict.witness.expect("a no verdict carries its witness");
            let descriptor = BugDescriptor {
                kind: pt.kind,
                stmt: pt.stmt,
                path: render_path(&pt.path),
                before,
                after,
                witness,
            };
            return Ok((mutant, descriptor));
        }
    }
    Err(PerturbError::NoKillableMutant { attempts })
}
