//! Source-level copy-propagation, constant-folding and dead-assignment
//! rewrites, each justified by freshly inferred annotations.
//!
//! Every rewrite is recorded as an [`Edit`]: a contiguous range of one block
//! replaced by new statements. Replaying the edits of a [`Trace`] on the
//! original program reproduces the rewritten one.

pub mod cf;
pub mod cp;
pub mod gc;
pub mod normalize;

use std::fmt;

use crate::analysis::AnalysisError;
use crate::interp::eval::is_builtin;
use crate::lang::printer::print_stmts;
use crate::lang::{BlockPath, Expr, Program, Stmt, StmtId, StmtKind};

pub use cf::apply_cf;
pub use cp::apply_cp;
pub use gc::garbage_collect;
pub use normalize::{normalize, NORMALIZE_ROUND_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Cp1,
    Cp2,
    Cp3,
    Cp4,
    Cp5,
    Cf1,
    Cf2,
    Cf3a,
    Cf3b,
    Cf4IfTrue,
    Cf4IfFalse,
    Cf4While,
    Cf4For,
    Gc,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Cp1 => "CP1",
            Rule::Cp2 => "CP2",
            Rule::Cp3 => "CP3",
            Rule::Cp4 => "CP4",
            Rule::Cp5 => "CP5",
            Rule::Cf1 => "CF1",
            Rule::Cf2 => "CF2",
            Rule::Cf3a => "CF3a",
            Rule::Cf3b => "CF3b",
            Rule::Cf4IfTrue => "CF4-if-t",
            Rule::Cf4IfFalse => "CF4-if-f",
            Rule::Cf4While => "CF4-while",
            Rule::Cf4For => "CF4-for",
            Rule::Gc => "GC",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("normalization did not settle within {limit} rounds")]
    NormalizationDiverged { limit: usize },
    #[error("rewrite phase exceeded {limit} steps")]
    StepLimit { limit: usize },
}

/// Replace `removed` statements starting at `start` in the block at `path`
/// by `inserted`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edit {
    pub path: BlockPath,
    pub start: usize,
    pub removed: usize,
    pub inserted: Vec<Stmt>,
}

impl Edit {
    pub fn apply(&self, p: &Program) -> Program {
        let mut out = p.clone();
        let block = self
            .path
            .resolve_mut(&mut out)
            .expect("edit path resolves in the program it was computed for");
        block.splice(
            self.start..self.start + self.removed,
            self.inserted.iter().cloned(),
        );
        out.canonicalize();
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewriteStep {
    pub rule: Rule,
    /// Id of the first rewritten statement, in the program before the step.
    pub site: StmtId,
    pub edit: Edit,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub steps: Vec<RewriteStep>,
}

impl Trace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn rules(&self) -> Vec<Rule> {
        self.steps.iter().map(|s| s.rule).collect()
    }

    pub fn extend(&mut self, other: Trace) {
        self.steps.extend(other.steps);
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "step {}: {} at stmt {}: «{}» => «{}»",
                i + 1,
                s.rule,
                s.site,
                s.before,
                s.after
            )?;
        }
        Ok(())
    }
}

/// Re-applies the recorded edits to `p`.
pub fn replay(p: &Program, trace: &Trace) -> Program {
    let mut start = p.clone();
    start.canonicalize();
    trace.steps.iter().fold(start, |acc, s| s.edit.apply(&acc))
}

/// One-line rendering of a statement range for traces.
pub fn fragment(stmts: &[Stmt]) -> String {
    if stmts.is_empty() {
        return String::new();
    }
    print_stmts(stmts, 0).trim_end().replace('\n', " ⏎ ")
}

/// A statement together with its position.
pub(crate) struct Site<'a> {
    pub path: BlockPath,
    pub index: usize,
    pub block: &'a [Stmt],
    pub stmt: &'a Stmt,
}

/// All statements in pre-order (ascending id).
pub(crate) fn sites(p: &Program) -> Vec<Site<'_>> {
    fn go<'a>(path: BlockPath, block: &'a [Stmt], out: &mut Vec<Site<'a>>) {
        for (index, stmt) in block.iter().enumerate() {
            out.push(Site {
                path: path.clone(),
                index,
                block,
                stmt,
            });
            for (bi, b) in stmt.blocks().into_iter().enumerate() {
                go(path.child(index, bi), b, out);
            }
        }
    }
    let mut out = Vec::new();
    go(BlockPath::root(), &p.body, &mut out);
    out
}

pub(crate) fn is_effect_free_call(callee: &str) -> bool {
    is_builtin(callee) && callee != "print" && callee != "input"
}

/// No I/O, no user calls, no method calls.
pub(crate) fn is_pure_expr(e: &Expr) -> bool {
    !e.any(&mut |x| match x {
        Expr::Call { callee, .. } => !is_effect_free_call(callee),
        Expr::MethodCall { .. } => true,
        _ => false,
    })
}

/// Statements that neither define functions nor call user functions, so
/// they cannot observe variables other than the ones they mention.
pub(crate) fn is_closed_code(stmts: &[Stmt]) -> bool {
    let mut ok = true;
    for s in stmts {
        s.walk(&mut |s| {
            if matches!(s.kind, StmtKind::FunDef { .. }) {
                ok = false;
            }
            for e in s.exprs() {
                if e.any(&mut |x| matches!(x, Expr::Call { callee, .. } if !is_builtin(callee))) {
                    ok = false;
                }
            }
        });
    }
    ok
}

fn step_limit(p: &Program) -> usize {
    1000 + 50 * p.stmt_count()
}

/// Repeatedly asks `find` for the next rewrite and applies it.
pub(crate) fn run_phase<F>(p: &Program, mut find: F) -> Result<(Program, Trace), RewriteError>
where
    F: FnMut(&Program) -> Result<Option<(Rule, Edit)>, RewriteError>,
{
    let limit = step_limit(p);
    let mut cur = p.clone();
    cur.canonicalize();
    let mut trace = Trace::default();
    while let Some((rule, edit)) = find(&cur)? {
        if trace.len() >= limit {
            return Err(RewriteError::StepLimit { limit });
        }
        let block = edit.path.resolve(&cur).expect("edit path resolves");
        let old = &block[edit.start..edit.start + edit.removed];
        let site = old
            .first()
            .map(|s| s.id)
            .unwrap_or_else(|| block.first().map_or(0, |s| s.id));
        let next = edit.apply(&cur);
        trace.steps.push(RewriteStep {
            rule,
            site,
            before: fragment(old),
            after: fragment(&edit.inserted),
            edit,
        });
        cur = next;
    }
    Ok((cur, trace))
}
