//! The scene language: a small context-free design grammar with
//! constants, recursive numeric functions and parameterised shapes.

pub mod ast;
pub mod check;
pub mod error;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::{Expr, Program, Span};
pub use error::{EvalError, EvalErrorKind, SceneError};
pub use eval::{Compiled, EscapePath, RandDraw, MAX_CALL_DEPTH};
pub use lexer::tokenize;
pub use parser::{parse, parse_expr};
pub use pretty::pretty_print;

/// Tokenize, parse, check and lower `source`.
pub fn load(source: &str) -> Result<(Program, Compiled), SceneError> {
    let program = parse(&tokenize(source)?)?;
    let compiled = Compiled::new(&program)?;
    Ok((program, compiled))
}

/// Parses a single expression.
pub fn parse_expression(source: &str) -> Result<Expr, SceneError> {
    parse_expr(&tokenize(source)?)
}
