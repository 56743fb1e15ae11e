//! The Python subset: syntax tree, parser, printer and syntactic utilities.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod vars;

pub use ast::*;
pub use parser::{parse, parse_expr};
pub use printer::{print_expr, print_program, print_stmt_header};
pub use vars::{substitute, vars_of, ExprContext, SubstError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported construct at line {line}: {construct}")]
    Unsupported { line: usize, construct: String },
}
