//! Consistent renaming of user functions to `f1, f2, …` and variables to
//! `a … z, v1, v2, …`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lang::{Expr, Ident, Program, Stmt, StmtKind};

/// Original name to label, for functions and variables separately.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameMap {
    pub functions: BTreeMap<Ident, Ident>,
    pub variables: BTreeMap<Ident, Ident>,
}

fn variable_label(k: usize) -> Ident {
    if k < 26 {
        ((b'a' + k as u8) as char).to_string()
    } else {
        format!("v{}", k - 25)
    }
}

/// Names in order of first appearance: functions first (definition order),
/// then variables.
fn appearance(p: &Program) -> (Vec<Ident>, Vec<Ident>) {
    let mut funs: Vec<Ident> = Vec::new();
    let mut vars: Vec<Ident> = Vec::new();
    fn note(list: &mut Vec<Ident>, name: &str) {
        if !list.iter().any(|n| n == name) {
            list.push(name.to_string());
        }
    }
    p.walk(&mut |s| {
        if let StmtKind::FunDef { name, .. } = &s.kind {
            note(&mut funs, name);
        }
    });
    p.walk(&mut |s| {
        match &s.kind {
            StmtKind::FunDef { params, .. } => params.iter().for_each(|x| note(&mut vars, x)),
            StmtKind::Assign { target, .. } | StmtKind::SubscriptAssign { target, .. } => {
                note(&mut vars, target)
            }
            StmtKind::For { var, .. } => note(&mut vars, var),
            _ => {}
        }
        for e in s.exprs() {
            e.walk(&mut |x| {
                if let Expr::Var(v) = x {
                    note(&mut vars, v);
                }
            });
        }
    });
    (funs, vars)
}

impl NameMap {
    /// Labels for every name of `p`.
    pub fn build(p: &Program) -> NameMap {
        let mut m = NameMap::default();
        m.extend(p);
        m
    }

    /// Adds labels for names of `p` not mapped yet, continuing the sequence.
    pub fn extend(&mut self, p: &Program) {
        let (funs, vars) = appearance(p);
        for f in funs {
            if !self.functions.contains_key(&f) {
                let label = format!("f{}", self.functions.len() + 1);
                self.functions.insert(f, label);
            }
        }
        for v in vars {
            if !self.variables.contains_key(&v) {
                let label = variable_label(self.variables.len());
                self.variables.insert(v, label);
            }
        }
    }

    pub fn function(&self, name: &str) -> Option<&str> {
        self.functions.get(name).map(String::as_str)
    }

    pub fn inverse(&self) -> NameMap {
        let flip =
            |m: &BTreeMap<Ident, Ident>| m.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
        NameMap {
            functions: flip(&self.functions),
            variables: flip(&self.variables),
        }
    }

    /// Renames every mapped name; unmapped names are left alone.
    pub fn apply(&self, p: &Program) -> Program {
        let mut out = p.clone();
        for s in &mut out.body {
            self.stmt(s);
        }
        out
    }

    fn var(&self, x: &mut Ident) {
        if let Some(l) = self.variables.get(x) {
            *x = l.clone();
        }
    }

    fn expr(&self, e: &mut Expr) {
        match e {
            Expr::Var(v) => self.var(v),
            Expr::Call { callee, .. } => {
                if let Some(l) = self.functions.get(callee) {
                    *callee = l.clone();
                }
            }
            _ => {}
        }
        for c in e.children_mut() {
            self.expr(c);
        }
    }

    fn stmt(&self, s: &mut Stmt) {
        match &mut s.kind {
            StmtKind::Assign { target, .. } | StmtKind::SubscriptAssign { target, .. } => {
                self.var(target)
            }
            StmtKind::For { var, .. } => self.var(var),
            StmtKind::FunDef { name, params, .. } => {
                if let Some(l) = self.functions.get(name) {
                    *name = l.clone();
                }
                params.iter_mut().for_each(|x| self.var(x));
            }
            _ => {}
        }
        for e in s.exprs_mut() {
            self.expr(e);
        }
        for b in s.blocks_mut() {
            for t in b.iter_mut() {
                self.stmt(t);
            }
        }
    }
}

/// Renames all user functions and variables of `p`. Labels follow the order
/// of first appearance, so the result depends on `p` alone.
pub fn obfuscate(p: &Program) -> (Program, NameMap) {
    let m = NameMap::build(p);
    (m.apply(p), m)
}
