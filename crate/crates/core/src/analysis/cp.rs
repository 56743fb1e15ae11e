//! Copy-propagation annotations: sets of variable pairs known to hold the
//! same value, inferred by whole-program re-judging until stable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lang::vars::{mutated_in_expr, vars_of};
use crate::lang::{Ident, Program, Stmt, StmtId, StmtKind};

use super::AnalysisError;

/// A symmetric, transitively closed set of copy pairs. Stored as ordered
/// pairs `(a, b)` with `a < b`; `(b, a)` is implied.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CopySet {
    pairs: BTreeSet<(Ident, Ident)>,
}

fn ordered(x: &str, y: &str) -> (Ident, Ident) {
    if x < y {
        (x.to_string(), y.to_string())
    } else {
        (y.to_string(), x.to_string())
    }
}

impl CopySet {
    pub fn new() -> CopySet {
        CopySet::default()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn contains(&self, x: &str, y: &str) -> bool {
        x != y && self.pairs.contains(&ordered(x, y))
    }

    /// Ordered pairs `(a, b)` with `a < b`.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn is_subset(&self, other: &CopySet) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    /// Equivalence classes of size at least two, each sorted, in sorted order.
    pub fn classes(&self) -> Vec<Vec<Ident>> {
        let mut class_of: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (a, b) in self.pairs() {
            class_of.entry(a).or_default().insert(a);
            class_of.entry(a).or_default().insert(b);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (root, members) in &class_of {
            if seen.contains(root) {
                continue;
            }
            seen.extend(members.iter().copied());
            out.push(members.iter().map(|s| s.to_string()).collect());
        }
        out
    }

    /// `ℙ \ x`.
    pub fn remove_var(&self, x: &str) -> CopySet {
        CopySet {
            pairs: self
                .pairs
                .iter()
                .filter(|(a, b)| a != x && b != x)
                .cloned()
                .collect(),
        }
    }

    pub fn intersect(&self, other: &CopySet) -> CopySet {
        CopySet {
            pairs: self.pairs.intersection(&other.pairs).cloned().collect(),
        }
    }

    /// Rule Id-CP: `(ℙ \ x ∪ {x∼y})^st`.
    pub fn with_copy(&self, x: &str, y: &str) -> CopySet {
        if x == y {
            return self.clone();
        }
        let mut raw: Vec<(Ident, Ident)> = self.remove_var(x).pairs.into_iter().collect();
        raw.push((x.to_string(), y.to_string()));
        st_closure(raw)
    }
}

/// Smallest symmetric-transitive set containing the given pairs, without
/// reflexive pairs.
pub fn st_closure<I, A, B>(raw: I) -> CopySet
where
    I: IntoIterator<Item = (A, B)>,
    A: AsRef<str>,
    B: AsRef<str>,
{
    let mut parent: BTreeMap<Ident, Ident> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<Ident, Ident>, x: &str) -> Ident {
        let p = parent.get(x).cloned().unwrap_or_else(|| x.to_string());
        if p == x {
            parent.insert(x.to_string(), p.clone());
            return p;
        }
        let root = find(parent, &p);
        parent.insert(x.to_string(), root.clone());
        root
    }
    for (a, b) in raw {
        let (a, b) = (a.as_ref(), b.as_ref());
        if a == b {
            continue;
        }
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra != rb {
            parent.insert(ra, rb);
        }
    }
    let names: Vec<Ident> = parent.keys().cloned().collect();
    let mut groups: BTreeMap<Ident, Vec<Ident>> = BTreeMap::new();
    for n in names {
        let r = find(&mut parent, &n);
        groups.entry(r).or_default().push(n);
    }
    let mut pairs = BTreeSet::new();
    for members in groups.values() {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                pairs.insert(ordered(a, b));
            }
        }
    }
    CopySet { pairs }
}

impl fmt::Display for CopySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let classes: Vec<String> = self.classes().iter().map(|c| c.join("∼")).collect();
        write!(f, "{{{}}}", classes.join(", "))
    }
}

/// Per-statement `(pre, post)` copy sets. For loops, `pre` is the loop-head
/// invariant and [`CpAnnotationMap::loop_entry`] keeps the set holding when
/// control first reaches the loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CpAnnotationMap {
    pub pre: BTreeMap<StmtId, CopySet>,
    pub post: BTreeMap<StmtId, CopySet>,
    pub loop_entry: BTreeMap<StmtId, CopySet>,
    /// Post of each loop body, the approximant used by the next round.
    pub body_post: BTreeMap<StmtId, CopySet>,
    pub rounds: usize,
}

impl CpAnnotationMap {
    pub fn pre(&self, id: StmtId) -> &CopySet {
        &self.pre[&id]
    }

    pub fn post(&self, id: StmtId) -> &CopySet {
        &self.post[&id]
    }

    /// The set holding on first arrival at the statement (equals `pre`
    /// except for loops).
    pub fn entry(&self, id: StmtId) -> &CopySet {
        self.loop_entry.get(&id).unwrap_or(&self.pre[&id])
    }

    fn same_annotations(&self, other: &CpAnnotationMap) -> bool {
        self.pre == other.pre && self.post == other.post && self.body_post == other.body_post
    }

    /// Every annotation of `self` is included in the matching one of `later`.
    pub fn grows_into(&self, later: &CpAnnotationMap) -> bool {
        let incl = |a: &BTreeMap<StmtId, CopySet>, b: &BTreeMap<StmtId, CopySet>| {
            a.iter()
                .all(|(k, v)| b.get(k).is_some_and(|w| v.is_subset(w)))
        };
        incl(&self.pre, &later.pre) && incl(&self.post, &later.post)
    }
}

/// The all-empty starting approximant.
fn initial(p: &Program) -> CpAnnotationMap {
    let mut m = CpAnnotationMap::default();
    p.walk(&mut |s| {
        m.pre.insert(s.id, CopySet::new());
        m.post.insert(s.id, CopySet::new());
        if matches!(s.kind, StmtKind::While { .. } | StmtKind::For { .. }) {
            m.loop_entry.insert(s.id, CopySet::new());
            m.body_post.insert(s.id, CopySet::new());
        }
    });
    m
}

fn kill_mutated(mut pre: CopySet, s: &Stmt) -> CopySet {
    let mut mutated = BTreeSet::new();
    for e in s.exprs() {
        mutated_in_expr(e, &mut mutated);
    }
    for v in mutated {
        pre = pre.remove_var(&v);
    }
    pre
}

/// The judgment `⊢ℙ s ℙ'` under the loop approximants of `prev`, recording
/// annotations for `s` and its sub-statements into `cur`.
pub fn judge_cp(
    pre: &CopySet,
    s: &Stmt,
    prev: &CpAnnotationMap,
    cur: &mut CpAnnotationMap,
) -> CopySet {
    let pre = kill_mutated(pre.clone(), s);
    let (recorded_pre, post) = match &s.kind {
        StmtKind::Assign { target, value } => {
            let post = match value.as_var() {
                Some(y) if y == target => pre.clone(),
                Some(y) => pre.with_copy(target, y),
                None => pre.remove_var(target),
            };
            (pre, post)
        }
        StmtKind::SubscriptAssign { target, .. } => {
            let post = pre.remove_var(target);
            (pre, post)
        }
        StmtKind::If {
            then_body,
            else_body,
            ..
        } => {
            let a = judge_block(&pre, then_body, prev, cur);
            let b = judge_block(&pre, else_body, prev, cur);
            let post = a.intersect(&b);
            (pre, post)
        }
        StmtKind::While { body, .. } => {
            let approx = prev.body_post.get(&s.id).cloned().unwrap_or_default();
            let inv = pre.intersect(&approx);
            let body_post = judge_block(&inv, body, prev, cur);
            cur.loop_entry.insert(s.id, pre.clone());
            cur.body_post.insert(s.id, body_post.clone());
            (inv, pre.intersect(&body_post))
        }
        StmtKind::For { var, body, .. } => {
            let approx = prev.body_post.get(&s.id).cloned().unwrap_or_default();
            let inv = pre.intersect(&approx).remove_var(var);
            let body_post = judge_block(&inv, body, prev, cur);
            cur.loop_entry.insert(s.id, pre.clone());
            cur.body_post.insert(s.id, body_post.clone());
            (inv, pre.intersect(&body_post).remove_var(var))
        }
        StmtKind::FunDef { body, .. } => {
            judge_block(&CopySet::new(), body, prev, cur);
            (pre.clone(), pre)
        }
        StmtKind::Return(_) | StmtKind::ExprStmt(_) | StmtKind::Pass => (pre.clone(), pre),
    };
    cur.pre.insert(s.id, recorded_pre);
    cur.post.insert(s.id, post.clone());
    post
}

fn judge_block(
    pre: &CopySet,
    block: &[Stmt],
    prev: &CpAnnotationMap,
    cur: &mut CpAnnotationMap,
) -> CopySet {
    let mut p = pre.clone();
    for s in block {
        p = judge_cp(&p, s, prev, cur);
    }
    p
}

fn round_limit(p: &Program) -> usize {
    let v = vars_of(p).len();
    v * v + p.stmt_count() + 2
}

/// Fixpoint of the copy-propagation judgment, starting from empty
/// annotations.
pub fn infer_cp(p: &Program) -> Result<CpAnnotationMap, AnalysisError> {
    infer_cp_history(p).map(|mut h| h.pop().expect("history is never empty"))
}

/// All approximants, from the initial all-empty map to the fixpoint (the
/// confirming round that reproduces the fixpoint is not repeated).
pub fn infer_cp_history(p: &Program) -> Result<Vec<CpAnnotationMap>, AnalysisError> {
    let limit = round_limit(p);
    let mut history = vec![initial(p)];
    loop {
        let prev = history.last().expect("non-empty");
        let mut cur = CpAnnotationMap::default();
        judge_block(&CopySet::new(), &p.body, prev, &mut cur);
        cur.rounds = history.len();
        debug_assert!(
            prev.grows_into(&cur),
            "copy annotations shrank between rounds"
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
