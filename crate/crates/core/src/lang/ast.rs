//! Abstract syntax of the Python subset.
//!
//! Every statement carries a [`StmtId`] assigned in pre-order. Ids are the
//! keys of annotation maps; they are reassigned by [`Program::renumber`] after
//! every structural edit, so annotation maps never outlive the program they
//! were computed for.

use std::fmt;

pub type Ident = String;
pub type StmtId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    FloorDiv,
    Div,
    Mod,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::FloorDiv => "//",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Literal),
    Var(Ident),
    BinOp {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    UnOp {
        op: UnOp,
        operand: Box<Expr>,
    },
    /// Call of a builtin or a user function by name.
    Call {
        callee: Ident,
        args: Vec<Expr>,
    },
    Subscript {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Slice {
        base: Box<Expr>,
        lower: Option<Box<Expr>>,
        upper: Option<Box<Expr>>,
    },
    List(Vec<Expr>),
    /// `base.method(args)`; the only attribute form the subset admits.
    MethodCall {
        base: Box<Expr>,
        method: Ident,
        args: Vec<Expr>,
    },
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Const(Literal::Int(v))
    }

    pub fn var(name: impl Into<Ident>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn binop(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::BinOp {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Expr::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    /// Direct children in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => vec![],
            Expr::BinOp { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::UnOp { operand, .. } => vec![operand],
            Expr::Call { args, .. } => args.iter().collect(),
            Expr::Subscript { base, index } => vec![base, index],
            Expr::Slice { base, lower, upper } => {
                let mut out: Vec<&Expr> = vec![base];
                out.extend(lower.as_deref());
                out.extend(upper.as_deref());
                out
            }
            Expr::List(items) => items.iter().collect(),
            Expr::MethodCall { base, args, .. } => {
                let mut out: Vec<&Expr> = vec![base];
                out.extend(args.iter());
                out
            }
        }
    }

    /// Mutable children, same order as [`Expr::children`].
    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => vec![],
            Expr::BinOp { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::UnOp { operand, .. } => vec![operand],
            Expr::Call { args, .. } => args.iter_mut().collect(),
            Expr::Subscript { base, index } => vec![base, index],
            Expr::Slice { base, lower, upper } => {
                let mut out: Vec<&mut Expr> = vec![base];
                out.extend(lower.as_deref_mut());
                out.extend(upper.as_deref_mut());
                out
            }
            Expr::List(items) => items.iter_mut().collect(),
            Expr::MethodCall { base, args, .. } => {
                let mut out: Vec<&mut Expr> = vec![base];
                out.extend(args.iter_mut());
                out
            }
        }
    }

    /// Pre-order walk over this expression and all sub-expressions.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn any(&self, pred: &mut dyn FnMut(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any(pred))
    }

    /// Number of nodes, used as fuel cost and size measure.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        target: Ident,
        value: Expr,
    },
    SubscriptAssign {
        target: Ident,
        index: Expr,
        value: Expr,
    },
    If {
        guard: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        guard: Expr,
        body: Vec<Stmt>,
    },
    For {
        var: Ident,
        iter: Expr,
        body: Vec<Stmt>,
    },
    FunDef {
        name: Ident,
        params: Vec<Ident>,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    /// A call (plain or method) evaluated for its effect.
    ExprStmt(Expr),
    Pass,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub id: StmtId,
    pub kind: StmtKind,
}

/// Structural equality ignores statement ids.
impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt { id: 0, kind }
    }

    pub fn assign(target: impl Into<Ident>, value: Expr) -> Stmt {
        Stmt::new(StmtKind::Assign {
            target: target.into(),
            value,
        })
    }

    /// `x = y` with `x != y`, as `(x, y)`.
    pub fn as_copy(&self) -> Option<(&str, &str)> {
        match &self.kind {
            StmtKind::Assign {
                target,
                value: Expr::Var(src),
            } if target != src => Some((target, src)),
            _ => None,
        }
    }

    pub fn assigned_var(&self) -> Option<&str> {
        match &self.kind {
            StmtKind::Assign { target, .. } => Some(target),
            _ => None,
        }
    }

    /// Child blocks, in pre-order.
    pub fn blocks(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => vec![then_body, else_body],
            StmtKind::While { body, .. }
            | StmtKind::For { body, .. }
            | StmtKind::FunDef { body, .. } => vec![body],
            _ => vec![],
        }
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Vec<Stmt>> {
        match &mut self.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => vec![then_body, else_body],
            StmtKind::While { body, .. }
            | StmtKind::For { body, .. }
            | StmtKind::FunDef { body, .. } => vec![body],
            _ => vec![],
        }
    }

    /// Expressions owned directly by this statement (not by nested blocks).
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::SubscriptAssign { index, value, .. } => vec![index, value],
            StmtKind::If { guard, .. } | StmtKind::While { guard, .. } => vec![guard],
            StmtKind::For { iter, .. } => vec![iter],
            StmtKind::Return(Some(e)) | StmtKind::ExprStmt(e) => vec![e],
            StmtKind::Return(None) | StmtKind::FunDef { .. } | StmtKind::Pass => vec![],
        }
    }

    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::SubscriptAssign { index, value, .. } => vec![index, value],
            StmtKind::If { guard, .. } | StmtKind::While { guard, .. } => vec![guard],
            StmtKind::For { iter, .. } => vec![iter],
            StmtKind::Return(Some(e)) | StmtKind::ExprStmt(e) => vec![e],
            StmtKind::Return(None) | StmtKind::FunDef { .. } | StmtKind::Pass => vec![],
        }
    }

    /// Pre-order walk over this statement and every nested statement.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        for b in self.blocks() {
            for s in b {
                s.walk(f);
            }
        }
    }

    pub fn count(&self) -> usize {
        1 + self
            .blocks()
            .iter()
            .map(|b| b.iter().map(Stmt::count).sum::<usize>())
            .sum::<usize>()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub body: Vec<Stmt>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.body == other.body
    }
}

impl Program {
    pub fn new(body: Vec<Stmt>) -> Program {
        let mut p = Program { body };
        p.renumber();
        p
    }

    /// Reassigns dense pre-order statement ids.
    pub fn renumber(&mut self) {
        fn go(block: &mut [Stmt], next: &mut usize) {
            for s in block {
                s.id = *next;
                *next += 1;
                for b in s.blocks_mut() {
                    go(b, next);
                }
            }
        }
        let mut next = 0;
        go(&mut self.body, &mut next);
    }

    pub fn stmt_count(&self) -> usize {
        self.body.iter().map(Stmt::count).sum()
    }

    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        for s in &self.body {
            s.walk(f);
        }
    }

    pub fn find(&self, id: StmtId) -> Option<&Stmt> {
        let mut found = None;
        self.walk(&mut |s| {
            if s.id == id {
                found = Some(s);
            }
        });
        found
    }

    /// Names of top-level function definitions, in definition order.
    pub fn function_names(&self) -> Vec<&str> {
        self.body
            .iter()
            .filter_map(|s| match &s.kind {
                StmtKind::FunDef { name, .. } => Some(name.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Empty blocks get a lone `pass`; `pass` is dropped from blocks that
    /// hold other statements. Keeps printing and re-parsing in agreement.
    pub fn canonicalize(&mut self) {
        fn fix(block: &mut Vec<Stmt>, top: bool) {
            for s in block.iter_mut() {
                let is_if = matches!(s.kind, StmtKind::If { .. });
                for (i, b) in s.blocks_mut().into_iter().enumerate() {
                    // An if without else keeps an empty else block.
                    let else_block = is_if && i == 1;
                    if else_block {
                        fix_inner(b);
                        if b.len() == 1 && matches!(b[0].kind, StmtKind::Pass) {
                            b.clear();
                        }
                    } else {
                        fix(b, false);
                    }
                }
            }
            if block.len() > 1 {
                block.retain(|s| !matches!(s.kind, StmtKind::Pass));
            }
            if block.is_empty() && !top {
                block.push(Stmt::new(StmtKind::Pass));
            }
        }
        fn fix_inner(block: &mut Vec<Stmt>) {
            if block.is_empty() {
                return;
            }
            fix(block, false);
        }
        fix(&mut self.body, true);
        self.renumber();
    }
}

/// Location of a block inside a program: a chain of (statement index, child
/// block index) steps starting from the top-level body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct BlockPath(pub Vec<(usize, usize)>);

impl BlockPath {
    pub fn root() -> BlockPath {
        BlockPath(Vec::new())
    }

    pub fn child(&self, stmt_index: usize, block_index: usize) -> BlockPath {
        let mut v = self.0.clone();
        v.push((stmt_index, block_index));
        BlockPath(v)
    }

    pub fn resolve<'a>(&self, p: &'a Program) -> Option<&'a Vec<Stmt>> {
        let mut block = &p.body;
        for &(si, bi) in &self.0 {
            block = block.get(si)?.blocks().into_iter().nth(bi)?;
        }
        Some(block)
    }

    pub fn resolve_mut<'a>(&self, p: &'a mut Program) -> Option<&'a mut Vec<Stmt>> {
        let mut block = &mut p.body;
        for &(si, bi) in &self.0 {
            block = block.get_mut(si)?.blocks_mut().into_iter().nth(bi)?;
        }
        Some(block)
    }
}

impl fmt::Display for BlockPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "/")?;
        let parts: Vec<String> = self.0.iter().map(|(s, b)| format!("{s}.{b}")).collect();
        write!(f, "{}", parts.join("/"))
    }
}

/// Every block of the program with its path, in pre-order.
pub fn all_blocks(p: &Program) -> Vec<(BlockPath, &Vec<Stmt>)> {
    fn go<'a>(path: BlockPath, block: &'a Vec<Stmt>, out: &mut Vec<(BlockPath, &'a Vec<Stmt>)>) {
        out.push((path.clone(), block));
        for (si, s) in block.iter().enumerate() {
            for (bi, b) in s.blocks().into_iter().enumerate() {
                go(path.child(si, bi), b, out);
            }
        }
    }
    let mut out = Vec::new();
    go(BlockPath::root(), &p.body, &mut out);
    out
}
