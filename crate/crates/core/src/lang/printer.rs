//! Canonical pretty-printer. Output is valid Python that re-parses to a
//! structurally equal tree.

use super::ast::*;

/// Binding strength, higher binds tighter.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::BinOp { op, .. } => binop_prec(*op),
        Expr::UnOp { op: UnOp::Not, .. } => 3,
        Expr::UnOp { op: UnOp::Neg, .. } => 7,
        Expr::Const(Literal::Int(v)) if *v < 0 => 7,
        Expr::Const(Literal::Float(v)) if v.is_sign_negative() => 7,
        _ => 9,
    }
}

fn binop_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul | BinOp::Div | BinOp::FloorDiv | BinOp::Mod => 6,
        BinOp::Pow => 8,
    }
}

/// Python's `repr` of a float: shortest round-trip digits, scientific
/// notation outside `1e-4 <= |v| < 1e16`.
pub fn float_repr(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0.0".into()
        } else {
            "0.0".into()
        };
    }
    let sci = format!("{v:e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mant) = match mant.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mant),
    };
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    if (-4..16).contains(&exp) {
        let n = digits.len() as i32;
        let body = if exp < 0 {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        } else if exp + 1 >= n {
            format!("{}{}.0", digits, "0".repeat((exp + 1 - n) as usize))
        } else {
            let (a, b) = digits.split_at((exp + 1) as usize);
            format!("{a}.{b}")
        };
        format!("{sign}{body}")
    } else {
        let m = if digits.len() == 1 {
            digits.clone()
        } else {
            format!("{}.{}", &digits[..1], &digits[1..])
        };
        let esign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{m}e{esign}{:02}", exp.abs())
    }
}

/// Python's `repr` of a string.
pub fn str_repr(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') {
        '"'
    } else {
        '\''
    };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                out.push_str(&format!("\\x{:02x}", c as u32))
            }
            c => out.push(c),
        }
    }
    out.push(quote);
    out
}

pub fn literal_repr(l: &Literal) -> String {
    match l {
        Literal::Int(v) => v.to_string(),
        Literal::Float(v) => float_repr(*v),
        Literal::Bool(true) => "True".into(),
        Literal::Bool(false) => "False".into(),
        Literal::Str(s) => str_repr(s),
    }
}

fn wrap(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({})", print_expr(e))
    } else {
        print_expr(e)
    }
}

fn primary(e: &Expr) -> String {
    wrap(e, prec(e) < 9)
}

fn list(items: &[Expr]) -> String {
    items.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}

pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Const(l) => literal_repr(l),
        Expr::Var(v) => v.clone(),
        Expr::BinOp { op, lhs, rhs } => {
            let p = binop_prec(*op);
            let (lp, rp) = match op {
                BinOp::Pow => (prec(lhs) <= p, prec(rhs) < 7),
                o if o.is_comparison() => (prec(lhs) <= p, prec(rhs) <= p),
                _ => (prec(lhs) < p, prec(rhs) <= p),
            };
            format!("{} {} {}", wrap(lhs, lp), op.symbol(), wrap(rhs, rp))
        }
        Expr::UnOp {
            op: UnOp::Neg,
            operand,
        } => format!("-{}", wrap(operand, prec(operand) < 7)),
        Expr::UnOp {
            op: UnOp::Not,
            operand,
        } => format!("not {}", wrap(operand, prec(operand) < 3)),
        Expr::Call { callee, args } => format!("{callee}({})", list(args)),
        Expr::Subscript { base, index } => format!("{}[{}]", primary(base), print_expr(index)),
        Expr::Slice { base, lower, upper } => format!(
            "{}[{}:{}]",
            primary(base),
            lower.as_deref().map(print_expr).unwrap_or_default(),
            upper.as_deref().map(print_expr).unwrap_or_default()
        ),
        Expr::List(items) => format!("[{}]", list(items)),
        Expr::MethodCall { base, method, args } => {
            format!("{}.{method}({})", primary(base), list(args))
        }
    }
}

/// First line of a statement as it appears in source (the header for
/// compound statements, the whole statement otherwise).
pub fn print_stmt_header(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Assign { target, value } => format!("{target} = {}", print_expr(value)),
        StmtKind::SubscriptAssign {
            target,
            index,
            value,
        } => {
            format!("{target}[{}] = {}", print_expr(index), print_expr(value))
        }
        StmtKind::If { guard, .. } => format!("if {}:", print_expr(guard)),
        StmtKind::While { guard, .. } => format!("while {}:", print_expr(guard)),
        StmtKind::For { var, iter, .. } => format!("for {var} in {}:", print_expr(iter)),
        StmtKind::FunDef { name, params, .. } => format!("def {name}({}):", params.join(", ")),
        StmtKind::Return(None) => "return".into(),
        StmtKind::Return(Some(e)) => format!("return {}", print_expr(e)),
        StmtKind::ExprStmt(e) => print_expr(e),
        StmtKind::Pass => "pass".into(),
    }
}

fn print_block(block: &[Stmt], depth: usize, out: &mut String) {
    if block.is_empty() {
        push_line(out, depth, "pass");
        return;
    }
    for s in block {
        print_stmt(s, depth, out);
    }
}

fn push_line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str("    ");
    }
    out.push_str(text);
    out.push('\n');
}

fn print_stmt(s: &Stmt, depth: usize, out: &mut String) {
    push_line(out, depth, &print_stmt_header(s));
    match &s.kind {
        StmtKind::If {
            then_body,
            else_body,
            ..
        } => {
            print_block(then_body, depth + 1, out);
            print_else(else_body, depth, out);
        }
        StmtKind::While { body, .. }
        | StmtKind::For { body, .. }
        | StmtKind::FunDef { body, .. } => print_block(body, depth + 1, out),
        _ => {}
    }
}

fn print_else(else_body: &[Stmt], depth: usize, out: &mut String) {
    match else_body {
        [] => {}
        [Stmt {
            kind:
                StmtKind::If {
                    guard,
                    then_body,
                    else_body,
                },
            ..
        }] => {
            push_line(out, depth, &format!("elif {}:", print_expr(guard)));
            print_block(then_body, depth + 1, out);
            print_else(else_body, depth, out);
        }
        _ => {
            push_line(out, depth, "else:");
            print_block(else_body, depth + 1, out);
        }
    }
}

/// Renders a block at the given indentation depth.
pub fn print_stmts(block: &[Stmt], depth: usize) -> String {
    let mut out = String::new();
    for s in block {
        print_stmt(s, depth, &mut out);
    }
    out
}

pub fn print_program(p: &Program) -> String {
    if p.body.is_empty() {
        return "pass\n".into();
    }
    print_stmts(&p.body, 0)
}
