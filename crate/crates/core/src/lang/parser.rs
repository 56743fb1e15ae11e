//! Recursive-descent parser for the subset.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

/// Parses source text into a [`Program`] with dense pre-order statement ids.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut body = Vec::new();
    while !p.at(&Tok::Eof) {
        if p.at(&Tok::Newline) {
            p.pos += 1;
            continue;
        }
        if p.at(&Tok::Indent) {
            return Err(p.syntax("unexpected indent"));
        }
        body.extend(p.statement()?);
    }
    Ok(Program::new(body))
}

/// Parses a single expression (used by tests and the manifest loader).
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    while p.at(&Tok::Newline) {
        p.pos += 1;
    }
    if !p.at(&Tok::Eof) {
        return Err(p.syntax("trailing input after expression"));
    }
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn at(&self, t: &Tok) -> bool {
        &self.peek().tok == t
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(&self.peek().tok, Tok::Op(o) if *o == op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Name(n) if n == kw)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, msg: &str) -> ParseError {
        let t = self.peek();
        ParseError::Syntax {
            line: t.line,
            column: t.col,
            message: msg.to_string(),
        }
    }

    fn unsupported(&self, what: &str) -> ParseError {
        ParseError::Unsupported {
            line: self.peek().line,
            construct: what.to_string(),
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), ParseError> {
        if self.at_op(op) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{op}'")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{kw}'")))
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match &self.peek().tok {
            Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                let n = n.clone();
                self.bump();
                Ok(n)
            }
            _ => Err(self.syntax("expected identifier")),
        }
    }

    fn end_simple(&mut self) -> Result<(), ParseError> {
        if self.at(&Tok::Newline) {
            self.bump();
            Ok(())
        } else if self.at(&Tok::Eof) || self.at(&Tok::Dedent) {
            Ok(())
        } else {
            Err(self.syntax("expected end of statement"))
        }
    }

    /// One logical line or compound statement; `;`-separated simple
    /// statements yield several.
    fn statement(&mut self) -> Result<Vec<Stmt>, ParseError> {
        if let Tok::Name(kw) = &self.peek().tok {
            match kw.as_str() {
                "if" => return Ok(vec![self.if_stmt()?]),
                "while" => return Ok(vec![self.while_stmt()?]),
                "for" => return Ok(vec![self.for_stmt()?]),
                "def" => return Ok(vec![self.def_stmt()?]),
                "class" => return Err(self.unsupported("class definition")),
                "try" => return Err(self.unsupported("try statement")),
                "with" => return Err(self.unsupported("with statement")),
                "async" => return Err(self.unsupported("async")),
                "elif" | "else" => return Err(self.syntax("unexpected clause")),
                _ => {}
            }
        }
        if self.at_op("@") {
            return Err(self.unsupported("decorator"));
        }
        let out = self.simple_line()?;
        self.end_simple()?;
        Ok(out)
    }

    fn simple_line(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut out = vec![self.simple_stmt()?];
        while self.at_op(";") {
            self.bump();
            if self.at(&Tok::Newline) || self.at(&Tok::Eof) {
                break;
            }
            out.push(self.simple_stmt()?);
        }
        Ok(out)
    }

    fn simple_stmt(&mut self) -> Result<Stmt, ParseError> {
        if let Tok::Name(kw) = &self.peek().tok {
            match kw.as_str() {
                "pass" => {
                    self.bump();
                    return Ok(Stmt::new(StmtKind::Pass));
                }
                "return" => {
                    self.bump();
                    if self.at(&Tok::Newline)
                        || self.at_op(";")
                        || self.at(&Tok::Eof)
                        || self.at(&Tok::Dedent)
                    {
                        return Ok(Stmt::new(StmtKind::Return(None)));
                    }
                    let e = self.expr()?;
                    if self.at_op(",") {
                        return Err(self.unsupported("tuple return"));
                    }
                    return Ok(Stmt::new(StmtKind::Return(Some(e))));
                }
                "break" => return Err(self.unsupported("break")),
                "continue" => return Err(self.unsupported("continue")),
                "import" | "from" => return Err(self.unsupported("import")),
                "global" | "nonlocal" => return Err(self.unsupported("global declaration")),
                "del" => return Err(self.unsupported("del statement")),
                "assert" => return Err(self.unsupported("assert statement")),
                "raise" => return Err(self.unsupported("raise statement")),
                "yield" => return Err(self.unsupported("generator")),
                _ => {}
            }
        }
        let line = self.peek().line;
        let lhs = self.expr()?;
        if self.at_op(",") {
            return Err(self.unsupported("tuple assignment"));
        }
        if self.at_op("=") {
            self.bump();
            let value = self.expr()?;
            if self.at_op("=") {
                return Err(self.unsupported("chained assignment"));
            }
            if self.at_op(",") {
                return Err(self.unsupported("tuple assignment"));
            }
            return assignment(lhs, value, line);
        }
        if let Tok::Op(op) = self.peek().tok.clone() {
            let aug = match op {
                "+=" => Some(BinOp::Add),
                "-=" => Some(BinOp::Sub),
                "*=" => Some(BinOp::Mul),
                "/=" => Some(BinOp::Div),
                "//=" => Some(BinOp::FloorDiv),
                "%=" => Some(BinOp::Mod),
                "**=" => Some(BinOp::Pow),
                _ => None,
            };
            if let Some(bop) = aug {
                self.bump();
                let rhs = self.expr()?;
                let value = Expr::binop(bop, lhs.clone(), rhs);
                return assignment(lhs, value, line);
            }
        }
        match lhs {
            Expr::Call { .. } | Expr::MethodCall { .. } => Ok(Stmt::new(StmtKind::ExprStmt(lhs))),
            _ => Err(ParseError::Unsupported {
                line,
                construct: "non-call expression statement".into(),
            }),
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect_op(":")?;
        if !self.at(&Tok::Newline) {
            // inline suite: `if x: y = 1`
            let out = self.simple_line()?;
            self.end_simple()?;
            return Ok(out);
        }
        self.bump();
        if !self.at(&Tok::Indent) {
            return Err(self.syntax("expected an indented block"));
        }
        self.bump();
        let mut body = Vec::new();
        while !self.at(&Tok::Dedent) && !self.at(&Tok::Eof) {
            if self.at(&Tok::Newline) {
                self.bump();
                continue;
            }
            body.extend(self.statement()?);
        }
        if self.at(&Tok::Dedent) {
            self.bump();
        }
        Ok(body)
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        self.bump(); // if / elif
        let guard = self.expr()?;
        let then_body = self.block()?;
        let else_body = if self.at_kw("elif") {
            vec![self.if_stmt()?]
        } else if self.at_kw("else") {
            self.bump();
            self.block()?
        } else {
            Vec::new()
        };
        Ok(Stmt::new(StmtKind::If {
            guard,
            then_body,
            else_body,
        }))
    }

    fn while_stmt(&mut self) -> Result<Stmt, ParseError> {
        self.bump();
        let guard = self.expr()?;
        let body = self.block()?;
        if self.at_kw("else") {
            return Err(self.unsupported("while-else"));
        }
        Ok(Stmt::new(StmtKind::While { guard, body }))
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseError> {
        self.bump();
        let var = self.ident()?;
        if self.at_op(",") {
            return Err(self.unsupported("tuple loop target"));
        }
        self.expect_kw("in")?;
        let iter = self.expr()?;
        let body = self.block()?;
        if self.at_kw("else") {
            return Err(self.unsupported("for-else"));
        }
        Ok(Stmt::new(StmtKind::For { var, iter, body }))
    }

    fn def_stmt(&mut self) -> Result<Stmt, ParseError> {
        self.bump();
        let name = self.ident()?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        while !self.at_op(")") {
            if self.at_op("*") || self.at_op("**") {
                return Err(self.unsupported("variadic parameters"));
            }
            params.push(self.ident()?);
            if self.at_op("=") {
                return Err(self.unsupported("default parameter values"));
            }
            if self.at_op(":") {
                return Err(self.unsupported("type annotations"));
            }
            if self.at_op(",") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_op(")")?;
        if self.at_op("->") {
            return Err(self.unsupported("type annotations"));
        }
        let body = self.block()?;
        Ok(Stmt::new(StmtKind::FunDef { name, params, body }))
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        if self.at_kw("lambda") {
            return Err(self.unsupported("lambda"));
        }
        let e = self.or_test()?;
        if self.at_kw("if") {
            return Err(self.unsupported("conditional expression"));
        }
        Ok(e)
    }

    fn or_test(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_test()?;
        while self.at_kw("or") {
            self.bump();
            let rhs = self.and_test()?;
            lhs = Expr::binop(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_test(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_test()?;
        while self.at_kw("and") {
            self.bump();
            let rhs = self.not_test()?;
            lhs = Expr::binop(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_test(&mut self) -> Result<Expr, ParseError> {
        if self.at_kw("not") {
            self.bump();
            let operand = self.not_test()?;
            return Ok(Expr::UnOp {
                op: UnOp::Not,
                operand: Box::new(operand),
            });
        }
        self.comparison()
    }

    fn comp_op(&self) -> Option<BinOp> {
        match &self.peek().tok {
            Tok::Op("==") => Some(BinOp::Eq),
            Tok::Op("!=") => Some(BinOp::Ne),
            Tok::Op("<") => Some(BinOp::Lt),
            Tok::Op("<=") => Some(BinOp::Le),
            Tok::Op(">") => Some(BinOp::Gt),
            Tok::Op(">=") => Some(BinOp::Ge),
            _ => None,
        }
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.arith()?;
        if self.at_kw("in")
            || self.at_kw("is")
            || (self.at_kw("not") && matches!(self.peek_at(1), Tok::Name(n) if n == "in"))
        {
            return Err(self.unsupported("membership or identity test"));
        }
        let Some(op) = self.comp_op() else {
            return Ok(lhs);
        };
        self.bump();
        let rhs = self.arith()?;
        if self.comp_op().is_some() {
            return Err(self.unsupported("chained comparison"));
        }
        if self.at_kw("in") || self.at_kw("is") {
            return Err(self.unsupported("membership or identity test"));
        }
        Ok(Expr::binop(op, lhs, rhs))
    }

    fn arith(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.at_op("+") {
                BinOp::Add
            } else if self.at_op("-") {
                BinOp::Sub
            } else {
                break;
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binop(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.at_op("*") {
                BinOp::Mul
            } else if self.at_op("//") {
                BinOp::FloorDiv
            } else if self.at_op("/") {
                BinOp::Div
            } else if self.at_op("%") {
                BinOp::Mod
            } else if self.at_op("@") || self.at_op("&") || self.at_op("|") || self.at_op("^") {
                return Err(self.unsupported("bitwise or matrix operator"));
            } else {
                break;
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binop(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.at_op("-") {
            self.bump();
            // `-5` is a literal of its own unless it is the base of `**`.
            let lit = match self.peek().tok {
                Tok::Int(v) => Some(Expr::Const(Literal::Int(v.wrapping_neg()))),
                Tok::Float(v) => Some(Expr::Const(Literal::Float(-v))),
                _ => None,
            };
            if let Some(lit) = lit {
                let trailer = matches!(
                    self.peek_at(1),
                    Tok::Op("**") | Tok::Op("[") | Tok::Op("(") | Tok::Op(".")
                );
                if !trailer {
                    self.bump();
                    return Ok(lit);
                }
            }
            let operand = self.factor()?;
            return Ok(Expr::UnOp {
                op: UnOp::Neg,
                operand: Box::new(operand),
            });
        }
        if self.at_op("+") {
            self.bump();
            return self.factor();
        }
        if self.at_op("~") {
            return Err(self.unsupported("bitwise operator"));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.at_op("**") {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::binop(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        loop {
            if self.at_op("(") {
                let Expr::Var(callee) = e else {
                    return Err(self.unsupported("call of a non-name expression"));
                };
                let args = self.call_args()?;
                e = Expr::Call { callee, args };
            } else if self.at_op("[") {
                self.bump();
                e = self.subscript_tail(e)?;
            } else if self.at_op(".") {
                self.bump();
                let method = self.ident()?;
                if !self.at_op("(") {
                    return Err(self.unsupported("attribute access"));
                }
                let args = self.call_args()?;
                e = Expr::MethodCall {
                    base: Box::new(e),
                    method,
                    args,
                };
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn subscript_tail(&mut self, base: Expr) -> Result<Expr, ParseError> {
        let lower = if self.at_op(":") {
            None
        } else {
            Some(self.expr()?)
        };
        if self.at_op(":") {
            self.bump();
            let upper = if self.at_op("]") {
                None
            } else {
                Some(self.expr()?)
            };
            if self.at_op(":") {
                return Err(self.unsupported("slice step"));
            }
            self.expect_op("]")?;
            return Ok(Expr::Slice {
                base: Box::new(base),
                lower: lower.map(Box::new),
                upper: upper.map(Box::new),
            });
        }
        if self.at_op(",") {
            return Err(self.unsupported("tuple subscript"));
        }
        self.expect_op("]")?;
        Ok(Expr::Subscript {
            base: Box::new(base),
            index: Box::new(lower.expect("index parsed")),
        })
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect_op("(")?;
        let mut args = Vec::new();
        while !self.at_op(")") {
            if self.at_op("*") || self.at_op("**") {
                return Err(self.unsupported("argument unpacking"));
            }
            if matches!(self.peek().tok, Tok::Name(_)) && matches!(self.peek_at(1), Tok::Op("=")) {
                return Err(self.unsupported("keyword arguments"));
            }
            args.push(self.expr()?);
            if self.at_kw("for") {
                return Err(self.unsupported("generator expression"));
            }
            if self.at_op(",") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_op(")")?;
        Ok(args)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Const(Literal::Int(v)))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Expr::Const(Literal::Float(v)))
            }
            Tok::Str(s) => {
                self.bump();
                let mut s = s;
                // implicit concatenation of adjacent literals
                while let Tok::Str(more) = &self.peek().tok {
                    s.push_str(more);
                    self.bump();
                }
                Ok(Expr::Const(Literal::Str(s)))
            }
            Tok::Name(n) => match n.as_str() {
                "True" => {
                    self.bump();
                    Ok(Expr::Const(Literal::Bool(true)))
                }
                "False" => {
                    self.bump();
                    Ok(Expr::Const(Literal::Bool(false)))
                }
                "None" => Err(self.unsupported("None literal")),
                "lambda" => Err(self.unsupported("lambda")),
                "yield" | "await" => Err(self.unsupported("generator")),
                _ if KEYWORDS.contains(&n.as_str()) => {
                    Err(self.syntax(&format!("unexpected keyword '{n}'")))
                }
                _ => {
                    self.bump();
                    Ok(Expr::Var(n))
                }
            },
            Tok::Op("(") => {
                self.bump();
                if self.at_op(")") {
                    return Err(self.unsupported("tuple"));
                }
                let e = self.expr()?;
                if self.at_op(",") {
                    return Err(self.unsupported("tuple"));
                }
                if self.at_kw("for") {
                    return Err(self.unsupported("generator expression"));
                }
                self.expect_op(")")?;
                Ok(e)
            }
            Tok::Op("[") => {
                self.bump();
                let mut items = Vec::new();
                while !self.at_op("]") {
                    items.push(self.expr()?);
                    if self.at_kw("for") {
                        return Err(self.unsupported("list comprehension"));
                    }
                    if self.at_op(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect_op("]")?;
                Ok(Expr::List(items))
            }
            Tok::Op("{") => Err(self.unsupported("dict or set literal")),
            _ => Err(self.syntax("expected an expression")),
        }
    }
}

fn assignment(lhs: Expr, value: Expr, line: usize) -> Result<Stmt, ParseError> {
    match lhs {
        Expr::Var(target) => Ok(Stmt::new(StmtKind::Assign { target, value })),
        Expr::Subscript { base, index } => match *base {
            Expr::Var(target) => Ok(Stmt::new(StmtKind::SubscriptAssign {
                target,
                index: *index,
                value,
            })),
            _ => Err(ParseError::Unsupported {
                line,
                construct: "nested subscript assignment".into(),
            }),
        },
        Expr::Slice { .. } => Err(ParseError::Unsupported {
            line,
            construct: "slice assignment".into(),
        }),
        _ => Err(ParseError::Syntax {
            line,
            column: 1,
            message: "cannot assign to expression".into(),
        }),
    }
}
