//! Variable sets, substitution and one-hole expression contexts.

use std::collections::BTreeSet;

use super::ast::*;

/// Anything whose variables can be collected.
pub trait HasVars {
    fn collect_vars(&self, out: &mut BTreeSet<Ident>);
}

impl HasVars for Expr {
    fn collect_vars(&self, out: &mut BTreeSet<Ident>) {
        self.walk(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(v.clone());
            }
        });
    }
}

impl HasVars for Stmt {
    fn collect_vars(&self, out: &mut BTreeSet<Ident>) {
        match &self.kind {
            StmtKind::Assign { target, .. } | StmtKind::SubscriptAssign { target, .. } => {
                out.insert(target.clone());
            }
            StmtKind::For { var, .. } => {
                out.insert(var.clone());
            }
            StmtKind::FunDef { params, .. } => out.extend(params.iter().cloned()),
            _ => {}
        }
        for e in self.exprs() {
            e.collect_vars(out);
        }
        for b in self.blocks() {
            b.collect_vars(out);
        }
    }
}

impl HasVars for Vec<Stmt> {
    fn collect_vars(&self, out: &mut BTreeSet<Ident>) {
        self.as_slice().collect_vars(out)
    }
}

impl HasVars for [Stmt] {
    fn collect_vars(&self, out: &mut BTreeSet<Ident>) {
        for s in self {
            s.collect_vars(out);
        }
    }
}

impl HasVars for Program {
    fn collect_vars(&self, out: &mut BTreeSet<Ident>) {
        self.body.collect_vars(out)
    }
}

/// Every identifier read or written in `node`; function names are excluded.
pub fn vars_of<T: HasVars + ?Sized>(node: &T) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    node.collect_vars(&mut out);
    out
}

/// Names (re)bound anywhere in the statements: assignment targets, loop
/// variables and parameters of nested definitions.
pub fn bound_vars(block: &[Stmt]) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    for s in block {
        s.walk(&mut |s| match &s.kind {
            StmtKind::Assign { target, .. } => {
                out.insert(target.clone());
            }
            StmtKind::For { var, .. } => {
                out.insert(var.clone());
            }
            StmtKind::FunDef { params, .. } => out.extend(params.iter().cloned()),
            _ => {}
        });
    }
    out
}

pub const MUTATING_METHODS: &[&str] = &[
    "append", "pop", "insert", "remove", "extend", "update", "clear", "sort", "reverse",
];

/// Variables whose object may be modified in place by the statements
/// (subscript writes and mutating method calls on a plain variable).
pub fn mutated_vars(block: &[Stmt]) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    for s in block {
        s.walk(&mut |s| {
            if let StmtKind::SubscriptAssign { target, .. } = &s.kind {
                out.insert(target.clone());
            }
            for e in s.exprs() {
                mutated_in_expr(e, &mut out);
            }
        });
    }
    out
}

pub fn mutated_in_expr(e: &Expr, out: &mut BTreeSet<Ident>) {
    e.walk(&mut |e| {
        if let Expr::MethodCall { base, method, .. } = e {
            if MUTATING_METHODS.contains(&method.as_str()) {
                if let Expr::Var(v) = base.as_ref() {
                    out.insert(v.clone());
                }
            }
        }
    });
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("variable '{0}' is redefined inside the substituted code")]
    RedefinedInScope(Ident),
}

/// Something `substitute` can rewrite.
pub trait Substitutable: Sized + Clone {
    fn rename_uses(&mut self, x: &str, y: &str);
    fn binds(&self) -> BTreeSet<Ident>;
}

impl Substitutable for Expr {
    fn rename_uses(&mut self, x: &str, y: &str) {
        if let Expr::Var(v) = self {
            if v == x {
                *v = y.to_string();
            }
            return;
        }
        for c in self.children_mut() {
            c.rename_uses(x, y);
        }
    }

    fn binds(&self) -> BTreeSet<Ident> {
        BTreeSet::new()
    }
}

impl Substitutable for Stmt {
    fn rename_uses(&mut self, x: &str, y: &str) {
        if let StmtKind::SubscriptAssign { target, .. } = &mut self.kind {
            if target == x {
                *target = y.to_string();
            }
        }
        for e in self.exprs_mut() {
            e.rename_uses(x, y);
        }
        for b in self.blocks_mut() {
            for s in b.iter_mut() {
                s.rename_uses(x, y);
            }
        }
    }

    fn binds(&self) -> BTreeSet<Ident> {
        bound_vars(std::slice::from_ref(self))
    }
}

impl Substitutable for Vec<Stmt> {
    fn rename_uses(&mut self, x: &str, y: &str) {
        for s in self.iter_mut() {
            s.rename_uses(x, y);
        }
    }

    fn binds(&self) -> BTreeSet<Ident> {
        bound_vars(self)
    }
}

/// Replaces every occurrence of `x` with `y`. Both names must be free in
/// `node`; substituting a name for itself is the identity.
pub fn substitute<T: Substitutable>(node: &T, x: &str, y: &str) -> Result<T, SubstError> {
    if x == y {
        return Ok(node.clone());
    }
    let bound = node.binds();
    for v in [x, y] {
        if bound.contains(v) {
            return Err(SubstError::RedefinedInScope(v.to_string()));
        }
    }
    let mut out = node.clone();
    out.rename_uses(x, y);
    Ok(out)
}

/// An expression with one hole, addressed by a path of child indices
/// (the order of [`Expr::children`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ExprContext {
    pub expr: Expr,
    pub hole: Vec<usize>,
}

impl ExprContext {
    /// `None` if the path does not address a sub-expression of `expr`.
    pub fn new(expr: Expr, hole: Vec<usize>) -> Option<ExprContext> {
        subexpr_at(&expr, &hole)?;
        Some(ExprContext { expr, hole })
    }

    /// The sub-expression currently sitting in the hole.
    pub fn focus(&self) -> &Expr {
        subexpr_at(&self.expr, &self.hole).expect("hole path validated at construction")
    }

    pub fn plug(&self, e: Expr) -> Expr {
        let mut out = self.expr.clone();
        *subexpr_at_mut(&mut out, &self.hole).expect("hole path validated at construction") = e;
        out
    }
}

pub fn subexpr_at<'a>(e: &'a Expr, path: &[usize]) -> Option<&'a Expr> {
    let mut cur = e;
    for &i in path {
        cur = cur.children().into_iter().nth(i)?;
    }
    Some(cur)
}

pub fn subexpr_at_mut<'a>(e: &'a mut Expr, path: &[usize]) -> Option<&'a mut Expr> {
    let mut cur = e;
    for &i in path {
        cur = cur.children_mut().into_iter().nth(i)?;
    }
    Some(cur)
}
