//! Text rendering of annotated programs, one statement per line:
//! `{indent}{statement header} ⊨ pre={…} post={…}`.

use std::fmt::Display;

use crate::lang::printer::print_stmt_header;
use crate::lang::{Program, Stmt, StmtId, StmtKind};

use super::cf::CfAnnotationMap;
use super::cp::CpAnnotationMap;

fn dump_block<A: Display>(
    block: &[Stmt],
    depth: usize,
    ann: &dyn Fn(StmtId) -> (A, A),
    out: &mut String,
) {
    for s in block {
        let (pre, post) = ann(s.id);
        out.push_str(&"    ".repeat(depth));
        out.push_str(&format!(
            "{} ⊨ pre={pre} post={post}\n",
            print_stmt_header(s)
        ));
        match &s.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                dump_block(then_body, depth + 1, ann, out);
                if !else_body.is_empty() {
                    out.push_str(&"    ".repeat(depth));
                    out.push_str("else:\n");
                    dump_block(else_body, depth + 1, ann, out);
                }
            }
            StmtKind::While { body, .. }
            | StmtKind::For { body, .. }
            | StmtKind::FunDef { body, .. } => dump_block(body, depth + 1, ann, out),
            _ => {}
        }
    }
}

pub fn dump_cp(p: &Program, m: &CpAnnotationMap) -> String {
    let mut out = String::new();
    dump_block(
        &p.body,
        0,
        &|id| (m.pre(id).clone(), m.post(id).clone()),
        &mut out,
    );
    out
}

pub fn dump_cf(p: &Program, m: &CfAnnotationMap) -> String {
    let mut out = String::new();
    dump_block(
        &p.body,
        0,
        &|id| (m.pre(id).clone(), m.post(id).clone()),
        &mut out,
    );
    out
}
