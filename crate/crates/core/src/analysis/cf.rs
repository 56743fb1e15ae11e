//! Constant-folding annotations: abstract memories mapping each variable to
//! a constant, `⊤` (unknown) or `?` (may fault), inferred to a fixpoint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::interp::eval::{eval_closed, range_len};
use crate::interp::Value;
use crate::lang::printer::literal_repr;
use crate::lang::vars::{bound_vars, mutated_in_expr, vars_of};
use crate::lang::{Expr, Ident, Literal, Program, Stmt, StmtId, StmtKind};

use super::AnalysisError;

/// Builtins that may be evaluated at analysis time when all their
/// arguments are constants.
pub const FOLDABLE_BUILTINS: &[&str] = &["len", "abs", "min", "max", "int", "float"];

/// Longest string constant the analysis will track; longer results are `⊤`.
const MAX_FOLDED_STR: usize = 64;

#[derive(Debug, Clone)]
pub enum AbstractValue {
    Const(Literal),
    Top,
    Err,
}

impl PartialEq for AbstractValue {
    fn eq(&self, other: &AbstractValue) -> bool {
        use AbstractValue::*;
        match (self, other) {
            (Top, Top) | (Err, Err) => true,
            (Const(Literal::Float(a)), Const(Literal::Float(b))) => a.to_bits() == b.to_bits(),
            (Const(a), Const(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for AbstractValue {}

impl AbstractValue {
    pub fn as_const(&self) -> Option<&Literal> {
        match self {
            AbstractValue::Const(l) => Some(l),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            AbstractValue::Const(_) => 0,
            AbstractValue::Top => 1,
            AbstractValue::Err => 2,
        }
    }

    /// `self ⊑ other` in the lattice `k ⊑ ⊤ ⊑ ?`.
    pub fn le(&self, other: &AbstractValue) -> bool {
        self == other || self.rank() < other.rank()
    }
}

impl fmt::Display for AbstractValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractValue::Const(l) => f.write_str(&literal_repr(l)),
            AbstractValue::Top => f.write_str("⊤"),
            AbstractValue::Err => f.write_str("?"),
        }
    }
}

pub fn join_value(a: &AbstractValue, b: &AbstractValue) -> AbstractValue {
    match (a, b) {
        _ if a == b => a.clone(),
        (AbstractValue::Err, _) | (_, AbstractValue::Err) => AbstractValue::Err,
        _ => AbstractValue::Top,
    }
}

/// A finite map from variables to abstract values. Unbound variables have
/// no value, which is different from `⊤`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbstractMemory {
    bindings: BTreeMap<Ident, AbstractValue>,
}

impl AbstractMemory {
    pub fn new() -> AbstractMemory {
        AbstractMemory::default()
    }

    pub fn get(&self, x: &str) -> Option<&AbstractValue> {
        self.bindings.get(x)
    }

    pub fn constant(&self, x: &str) -> Option<&Literal> {
        self.get(x).and_then(AbstractValue::as_const)
    }

    pub fn bind(&mut self, x: impl Into<Ident>, v: AbstractValue) {
        self.bindings.insert(x.into(), v);
    }

    pub fn with(mut self, x: impl Into<Ident>, v: AbstractValue) -> AbstractMemory {
        self.bind(x, v);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &AbstractValue)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Pointwise `⊑`, where an absent binding is below everything.
    pub fn le(&self, other: &AbstractMemory) -> bool {
        self.bindings
            .iter()
            .all(|(k, v)| other.get(k).is_some_and(|w| v.le(w)))
    }

    /// Sets already-bound variables to `⊤` (their objects may have changed).
    fn demote(&mut self, vars: &BTreeSet<Ident>) {
        for v in vars {
            if let Some(slot) = self.bindings.get_mut(v) {
                if *slot != AbstractValue::Err {
                    *slot = AbstractValue::Top;
                }
            }
        }
    }
}

impl<S: Into<Ident>> FromIterator<(S, AbstractValue)> for AbstractMemory {
    fn from_iter<I: IntoIterator<Item = (S, AbstractValue)>>(iter: I) -> Self {
        AbstractMemory {
            bindings: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

impl fmt::Display for AbstractMemory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .bindings
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub fn join_memory(a: &AbstractMemory, b: &AbstractMemory) -> AbstractMemory {
    let mut out = a.clone();
    for (k, v) in &b.bindings {
        let joined = match a.bindings.get(k) {
            Some(w) => join_value(w, v),
            None => v.clone(),
        };
        out.bindings.insert(k.clone(), joined);
    }
    out
}

fn literal_truthy(l: &Literal) -> bool {
    match l {
        Literal::Int(i) => *i != 0,
        Literal::Float(f) => *f != 0.0,
        Literal::Bool(b) => *b,
        Literal::Str(s) => !s.is_empty(),
    }
}

/// Replaces every variable bound to a constant by that constant.
pub fn plug_constants(e: &Expr, c: &AbstractMemory) -> Expr {
    match e {
        Expr::Var(x) => match c.constant(x) {
            Some(l) => Expr::Const(l.clone()),
            None => e.clone(),
        },
        _ => {
            let mut out = e.clone();
            for child in out.children_mut() {
                *child = plug_constants(child, c);
            }
            out
        }
    }
}

fn needs_runtime(e: &Expr) -> bool {
    e.any(&mut |x| match x {
        Expr::Call { callee, .. } => !FOLDABLE_BUILTINS.contains(&callee.as_str()),
        Expr::MethodCall { .. } => true,
        _ => false,
    })
}

fn value_to_abstract(v: &Value) -> AbstractValue {
    match v.to_literal() {
        Some(Literal::Float(f)) if !f.is_finite() => AbstractValue::Top,
        Some(Literal::Str(s)) if s.chars().count() > MAX_FOLDED_STR => AbstractValue::Top,
        Some(l) => AbstractValue::Const(l),
        None => AbstractValue::Top,
    }
}

/// Evaluates `e` in the abstract memory `c`.
pub fn abstract_eval(e: &Expr, c: &AbstractMemory) -> AbstractValue {
    let vars = vars_of(e);
    let mut top = false;
    for v in &vars {
        match c.get(v) {
            None | Some(AbstractValue::Err) => return AbstractValue::Err,
            Some(AbstractValue::Top) => top = true,
            Some(AbstractValue::Const(_)) => {}
        }
    }
    if top || needs_runtime(e) {
        return AbstractValue::Top;
    }
    match eval_closed(&plug_constants(e, c)) {
        Some(Ok(v)) => value_to_abstract(&v),
        Some(Err(_)) => AbstractValue::Err,
        None => AbstractValue::Top,
    }
}

/// Whether a loop over `iter` provably runs zero times.
pub fn provably_empty(iter: &Expr, c: &AbstractMemory) -> bool {
    match iter {
        Expr::List(items) => items.is_empty(),
        Expr::Call { callee, args } if callee == "range" && (1..=3).contains(&args.len()) => {
            let mut vals = Vec::new();
            for a in args {
                match abstract_eval(a, c) {
                    AbstractValue::Const(Literal::Int(i)) => vals.push(Value::Int(i)),
                    _ => return false,
                }
            }
            matches!(range_len(&vals), Ok(n) if n <= 0)
        }
        _ => false,
    }
}

/// Per-statement `(pre, post)` abstract memories; for loops `pre` is the
/// loop-head invariant and `loop_entry` the memory on first arrival.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CfAnnotationMap {
    pub pre: BTreeMap<StmtId, AbstractMemory>,
    pub post: BTreeMap<StmtId, AbstractMemory>,
    pub loop_entry: BTreeMap<StmtId, AbstractMemory>,
    pub body_post: BTreeMap<StmtId, AbstractMemory>,
    pub rounds: usize,
}

impl CfAnnotationMap {
    pub fn pre(&self, id: StmtId) -> &AbstractMemory {
        &self.pre[&id]
    }

    pub fn post(&self, id: StmtId) -> &AbstractMemory {
        &self.post[&id]
    }

    pub fn entry(&self, id: StmtId) -> &AbstractMemory {
        self.loop_entry.get(&id).unwrap_or(&self.pre[&id])
    }

    fn same_annotations(&self, other: &CfAnnotationMap) -> bool {
        self.pre == other.pre && self.post == other.post && self.body_post == other.body_post
    }

    pub fn grows_into(&self, later: &CfAnnotationMap) -> bool {
        let incl = |a: &BTreeMap<StmtId, AbstractMemory>, b: &BTreeMap<StmtId, AbstractMemory>| {
            a.iter().all(|(k, v)| b.get(k).is_some_and(|w| v.le(w)))
        };
        incl(&self.pre, &later.pre)
            && incl(&self.post, &later.post)
            && incl(&self.body_post, &later.body_post)
    }

    /// Pointwise join with an earlier approximant, so annotations only ascend.
    fn absorb(&mut self, earlier: &CfAnnotationMap) {
        for (mine, theirs) in [
            (&mut self.pre, &earlier.pre),
            (&mut self.post, &earlier.post),
            (&mut self.loop_entry, &earlier.loop_entry),
            (&mut self.body_post, &earlier.body_post),
        ] {
            for (k, v) in theirs {
                if let Some(m) = mine.get_mut(k) {
                    *m = join_memory(v, m);
                }
            }
        }
    }
}

fn initial(p: &Program) -> CfAnnotationMap {
    let mut m = CfAnnotationMap::default();
    p.walk(&mut |s| {
        m.pre.insert(s.id, AbstractMemory::new());
        m.post.insert(s.id, AbstractMemory::new());
        if matches!(s.kind, StmtKind::While { .. } | StmtKind::For { .. }) {
            m.loop_entry.insert(s.id, AbstractMemory::new());
            m.body_post.insert(s.id, AbstractMemory::new());
        }
    });
    m
}

fn with_mutations_demoted(mut c: AbstractMemory, s: &Stmt) -> AbstractMemory {
    let mut mutated = BTreeSet::new();
    for e in s.exprs() {
        mutated_in_expr(e, &mut mutated);
    }
    c.demote(&mutated);
    c
}

/// The judgment `⊢ℂ s ℂ'` under the loop approximants of `prev`, recording
/// annotations for `s` and its sub-statements into `cur`.
pub fn judge_cf(
    pre: &AbstractMemory,
    s: &Stmt,
    prev: &CfAnnotationMap,
    cur: &mut CfAnnotationMap,
) -> AbstractMemory {
    let (recorded_pre, post) = match &s.kind {
        StmtKind::Assign { target, value } => {
            let v = abstract_eval(value, pre);
            let post = with_mutations_demoted(pre.clone(), s).with(target.clone(), v);
            (pre.clone(), post)
        }
        StmtKind::SubscriptAssign { target, .. } => {
            let mut post = with_mutations_demoted(pre.clone(), s);
            post.demote(&BTreeSet::from([target.clone()]));
            (pre.clone(), post)
        }
        StmtKind::If {
            guard,
            then_body,
            else_body,
        } => {
            let g = abstract_eval(guard, pre);
            let entry = with_mutations_demoted(pre.clone(), s);
            let a = judge_block(&entry, then_body, prev, cur);
            let b = judge_block(&entry, else_body, prev, cur);
            let post = match g.as_const().map(literal_truthy) {
                Some(true) => a,
                Some(false) => b,
                None => join_memory(&a, &b),
            };
            (pre.clone(), post)
        }
        StmtKind::While { guard, body } => {
            let entry = with_mutations_demoted(pre.clone(), s);
            let approx = prev.body_post.get(&s.id).cloned().unwrap_or_default();
            let inv = join_memory(&entry, &approx);
            let body_post = judge_block(&inv, body, prev, cur);
            let never =
                matches!(abstract_eval(guard, &entry).as_const(), Some(l) if !literal_truthy(l));
            let post = if never {
                entry.clone()
            } else {
                join_memory(&entry, &body_post)
            };
            cur.loop_entry.insert(s.id, pre.clone());
            cur.body_post.insert(s.id, body_post);
            (inv, post)
        }
        StmtKind::For { var, iter, body } => {
            let entry = with_mutations_demoted(pre.clone(), s);
            let approx = prev.body_post.get(&s.id).cloned().unwrap_or_default();
            let inv = join_memory(&entry, &approx).with(var.clone(), AbstractValue::Top);
            let body_post = judge_block(&inv, body, prev, cur);
            let post = if provably_empty(iter, &entry) {
                entry.clone()
            } else {
                join_memory(&entry, &body_post).with(var.clone(), AbstractValue::Top)
            };
            cur.loop_entry.insert(s.id, pre.clone());
            cur.body_post.insert(s.id, body_post);
            (inv, post)
        }
        StmtKind::FunDef { params, body, .. } => {
            let locals: AbstractMemory = params
                .iter()
                .cloned()
                .chain(bound_vars(body))
                .map(|x| (x, AbstractValue::Top))
                .collect();
            judge_block(&locals, body, prev, cur);
            (pre.clone(), pre.clone())
        }
        StmtKind::Return(_) | StmtKind::ExprStmt(_) | StmtKind::Pass => {
            (pre.clone(), with_mutations_demoted(pre.clone(), s))
        }
    };
    cur.pre.insert(s.id, recorded_pre);
    cur.post.insert(s.id, post.clone());
    post
}

fn judge_block(
    pre: &AbstractMemory,
    block: &[Stmt],
    prev: &CfAnnotationMap,
    cur: &mut CfAnnotationMap,
) -> AbstractMemory {
    let mut c = pre.clone();
    for s in block {
        c = judge_cf(&c, s, prev, cur);
    }
    c
}

fn round_limit(p: &Program) -> usize {
    3 * vars_of(p).len() * (p.stmt_count() + 1) + 2
}

pub fn infer_cf(p: &Program) -> Result<CfAnnotationMap, AnalysisError> {
    infer_cf_history(p).map(|mut h| h.pop().expect("history is never empty"))
}

/// All approximants from the all-empty start to the fixpoint.
pub fn infer_cf_history(p: &Program) -> Result<Vec<CfAnnotationMap>, AnalysisError> {
    let limit = round_limit(p);
    let mut history = vec![initial(p)];
    loop {
        let prev = history.last().expect("non-empty");
        let mut cur = CfAnnotationMap::default();
        judge_block(&AbstractMemory::new(), &p.body, prev, &mut cur);
        if history.len() > 1 {
            cur.absorb(prev);
        }
        cur.rounds = history.len();
        debug_assert!(
            prev.grows_into(&cur),
            "constant annotations descended between rounds"
        );
        if cur.same_annotations(prev) {
            let n = history.len();
            history.last_mut().expect("non-empty").rounds = n;
            return Ok(history);
        }
        if history.len() > limit {
            return Err(AnalysisError::IterationLimitExceeded { limit });
        }
        history.push(cur);
    }
}
