//! Inverse rewrites that disguise a program without changing its behaviour,
//! identifier obfuscation, seeded bug injection and dataset assembly.
//!
//! A perturbation draws a depth between 2 and 6 from the seed and then, at
//! every step, picks uniformly among all legal inverse-rewrite sites of the
//! current program. Each step is an [`Edit`], so a perturbation trace replays
//! exactly like a forward rewrite trace.

pub mod bug;
pub mod cf;
pub mod cp;
pub mod dataset;
pub mod obfuscate;

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::interp::ManifestError;
use crate::lang::vars::{bound_vars, vars_of};
use crate::lang::{Ident, Program, StmtId, StmtKind};
use crate::rewrite::{fragment, Edit};

pub use bug::{inject_bug, BugDescriptor, MutationKind, MAX_BUG_ATTEMPTS};
pub use dataset::{build_dataset, build_variant_set, DatasetReport, VariantSet};
pub use obfuscate::{obfuscate, NameMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PerturbationKind {
    #[serde(rename = "cp")]
    Cp,
    #[serde(rename = "cf")]
    Cf,
    #[serde(rename = "cp_cf")]
    CpCf,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 3] = [
        PerturbationKind::Cp,
        PerturbationKind::Cf,
        PerturbationKind::CpCf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbationKind::Cp => "cp",
            PerturbationKind::Cf => "cf",
            PerturbationKind::CpCf => "cp_cf",
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PerturbError {
    #[error("no site admits an inverse {0} rewrite")]
    NoOpportunity(PerturbationKind),
    #[error("no mutant distinguishable by the manifest after {attempts} attempts")]
    NoKillableMutant { attempts: usize },
    #[error("{kind} variant is not equivalent to its source ({verdict})")]
    NotEquivalent { kind: String, verdict: String },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

/// One applied inverse rewrite.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbStep {
    pub op: &'static str,
    pub site: StmtId,
    pub edit: Edit,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerturbTrace {
    pub steps: Vec<PerturbStep>,
}

impl PerturbTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn ops(&self) -> Vec<&'static str> {
        self.steps.iter().map(|s| s.op).collect()
    }

    /// Re-applies the recorded edits.
    pub fn replay(&self, p: &Program) -> Program {
        let mut start = p.clone();
        start.canonicalize();
        self.steps.iter().fold(start, |acc, s| s.edit.apply(&acc))
    }
}

impl fmt::Display for PerturbTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "step {}: {} at stmt {}: «{}» => «{}»",
                i + 1,
                s.op,
                s.site,
                s.before,
                s.after
            )?;
        }
        Ok(())
    }
}

/// A legal inverse rewrite of the current program.
pub(crate) struct Candidate {
    pub op: &'static str,
    pub edit: Edit,
}

/// Temporaries `t1, t2, …` not yet used anywhere in `p`.
pub(crate) fn fresh_temps(p: &Program, n: usize) -> Vec<Ident> {
    let mut taken = vars_of(p);
    taken.extend(p.function_names().into_iter().map(str::to_string));
    p.walk(&mut |s| {
        if let StmtKind::FunDef { name, .. } = &s.kind {
            taken.insert(name.clone());
        }
    });
    (1..)
        .map(|k| format!("t{k}"))
        .filter(|t| !taken.contains(t))
        .take(n)
        .collect()
}

/// Names local to the function enclosing the block at `path`, or `None` at
/// module level. Writes inside a function must stay on its own locals.
pub(crate) fn enclosing_locals(
    p: &Program,
    path: &crate::lang::BlockPath,
) -> Option<BTreeSet<Ident>> {
    let &(top, _) = path.0.first()?;
    match &p.body.get(top)?.kind {
        StmtKind::FunDef { params, body, .. } => {
            let mut l = bound_vars(body);
            l.extend(params.iter().cloned());
            Some(l)
        }
        _ => None,
    }
}

fn depth(rng: &mut ChaCha8Rng) -> usize {
    rng.gen_range(2..=6)
}

fn salted(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Applies a seeded number of rewrites proposed by `propose`, fewer if the
/// program runs out of sites.
pub(crate) fn drive<F>(
    p: &Program,
    seed: u64,
    kind: PerturbationKind,
    mut propose: F,
) -> Result<(Program, PerturbTrace), PerturbError>
where
    F: FnMut(&Program, &mut ChaCha8Rng) -> Vec<Candidate>,
{
    let salt = match kind {
        PerturbationKind::Cp => 1,
        PerturbationKind::Cf => 2,
        PerturbationKind::CpCf => 3,
    };
    let mut rng = salted(seed, salt);
    let steps = depth(&mut rng);
    let mut cur = p.clone();
    cur.canonicalize();
    let mut trace = PerturbTrace::default();
    for _ in 0..steps {
        let cands = propose(&cur, &mut rng);
        // The kind of rewrite is drawn first so that kinds with many sites
        // do not crowd out the rest.
        let mut ops: Vec<&'static str> = Vec::new();
        for c in &cands {
            if !ops.contains(&c.op) {
                ops.push(c.op);
            }
        }
        if ops.is_empty() {
            break;
        }
        let op = ops[rng.gen_range(0..ops.len())];
        let mut same: Vec<Candidate> = cands.into_iter().filter(|c| c.op == op).collect();
        let pick = same.swap_remove(rng.gen_range(0..same.len()));
        let block = pick
            .edit
            .path
            .resolve(&cur)
            .expect("candidate path resolves");
        let old = &block[pick.edit.start..pick.edit.start + pick.edit.removed];
        let site = old
            .first()
            .or_else(|| block.get(pick.edit.start))
            .map_or(0, |s| s.id);
        let before = fragment(old);
        let after = fragment(&pick.edit.inserted);
        let next = pick.edit.apply(&cur);
        trace.steps.push(PerturbStep {
            op: pick.op,
            site,
            edit: pick.edit,
            before,
            after,
        });
        cur = next;
    }
    if trace.is_empty() {
        return Err(PerturbError::NoOpportunity(kind));
    }
    Ok((cur, trace))
}

pub use cf::perturb_cf_traced;
pub use cp::perturb_cp_traced;

pub fn perturb_cp(p: &Program, seed: u64) -> Result<Program, PerturbError> {
    perturb_cp_traced(p, seed).map(|(q, _)| q)
}

pub fn perturb_cf(p: &Program, seed: u64) -> Result<Program, PerturbError> {
    perturb_cf_traced(p, seed).map(|(q, _)| q)
}

/// Constant-folding perturbation followed by copy-propagation perturbation.
/// Either phase may find nothing to do, but not both.
pub fn perturb_both_traced(
    p: &Program,
    seed: u64,
) -> Result<(Program, PerturbTrace), PerturbError> {
    let mixed = seed.rotate_left(17) ^ 0x5bd1_e995;
    let (mid, mut trace) = match perturb_cf_traced(p, mixed) {
        Ok(r) => r,
        Err(PerturbError::NoOpportunity(_)) => (p.clone(), PerturbTrace::default()),
        Err(e) => return Err(e),
    };
    match perturb_cp_traced(&mid, mixed.wrapping_add(1)) {
        Ok((out, t)) => {
            trace.steps.extend(t.steps);
            Ok((out, trace))
        }
        Err(PerturbError::NoOpportunity(_)) if !trace.is_empty() => Ok((mid, trace)),
        Err(PerturbError::NoOpportunity(_)) => {
            Err(PerturbError::NoOpportunity(PerturbationKind::CpCf))
        }
        Err(e) => Err(e),
    }
}

pub fn perturb_both(p: &Program, seed: u64) -> Result<Program, PerturbError> {
    perturb_both_traced(p, seed).map(|(q, _)| q)
}

pub fn perturb(
    p: &Program,
    kind: PerturbationKind,
    seed: u64,
) -> Result<(Program, PerturbTrace), PerturbError> {
    match kind {
        PerturbationKind::Cp => perturb_cp_traced(p, seed),
        PerturbationKind::Cf => perturb_cf_traced(p, seed),
        PerturbationKind::CpCf => perturb_both_traced(p, seed),
    }
}

/// Address of a sub-expression of one statement: index into
/// [`crate::lang::Stmt::exprs`], then child indices.
pub(crate) type ExprPath = (usize, Vec<usize>);

/// Pre-order paths of the sub-expressions of `s` (its own expressions only,
/// not those of nested blocks) that satisfy `pred`.
pub(crate) fn expr_paths(
    s: &crate::lang::Stmt,
    pred: &mut dyn FnMut(&crate::lang::Expr) -> bool,
) -> Vec<ExprPath> {
    fn go(
        e: &crate::lang::Expr,
        slot: usize,
        path: &mut Vec<usize>,
        pred: &mut dyn FnMut(&crate::lang::Expr) -> bool,
        out: &mut Vec<ExprPath>,
    ) {
        if pred(e) {
            out.push((slot, path.clone()));
        }
        for (i, c) in e.children().into_iter().enumerate() {
            path.push(i);
            go(c, slot, path, pred, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for (slot, e) in s.exprs().into_iter().enumerate() {
        go(e, slot, &mut Vec::new(), pred, &mut out);
    }
    out
}

pub(crate) fn expr_at<'a>(
    s: &'a crate::lang::Stmt,
    (slot, path): &ExprPath,
) -> Option<&'a crate::lang::Expr> {
    crate::lang::vars::subexpr_at(s.exprs().into_iter().nth(*slot)?, path)
}

pub(crate) fn expr_at_mut<'a>(
    s: &'a mut crate::lang::Stmt,
    (slot, path): &ExprPath,
) -> Option<&'a mut crate::lang::Expr> {
    crate::lang::vars::subexpr_at_mut(s.exprs_mut().into_iter().nth(*slot)?, path)
}

/// `a*v + b` written without negative literals (`v`, `v + 2`, `3*v - 1`).
pub(crate) fn affine(a: i64, v: &str, b: i64) -> crate::lang::Expr {
    use crate::lang::{BinOp, Expr};
    let scaled = if a == 1 {
        Expr::var(v)
    } else {
        Expr::binop(BinOp::Mul, Expr::int(a), Expr::var(v))
    };
    match b {
        0 => scaled,
        b if b > 0 => Expr::binop(BinOp::Add, scaled, Expr::int(b)),
        b => Expr::binop(BinOp::Sub, scaled, Expr::int(-b)),
    }
}

pub(crate) fn stmt_mut(p: &mut Program, id: StmtId) -> Option<&mut crate::lang::Stmt> {
    fn go(block: &mut [crate::lang::Stmt], id: StmtId) -> Option<&mut crate::lang::Stmt> {
        for s in block {
            if s.id == id {
                return Some(s);
            }
            for b in s.blocks_mut() {
                if let Some(found) = go(b, id) {
                    return Some(found);
                }
            }
        }
        None
    }
    go(&mut p.body, id)
}
