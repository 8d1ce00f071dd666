use thiserror::Error;

use super::ast::Span;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("{span}: lexical error: {message}")]
    Lex { span: Span, message: String },
    #[error("{span}: syntax error: expected {expected}, found {found}")]
    Syntax { span: Span, expected: String, found: String },
    #[error("{span}: {message}")]
    Semantic { span: Span, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl SceneError {
    pub fn kind(&self) -> &'static str {
        match self {
            SceneError::Lex { .. } => "lex",
            SceneError::Syntax { .. } => "syntax",
            SceneError::Semantic { .. } => "semantic",
            SceneError::Eval(_) => "eval",
        }
    }

    pub fn span(&self) -> Span {
        match self {
            SceneError::Lex { span, .. }
            | SceneError::Syntax { span, .. }
            | SceneError::Semantic { span, .. } => *span,
            SceneError::Eval(e) => e.span,
        }
    }

    /// Message without the position prefix.
    pub fn message(&self) -> String {
        match self {
            SceneError::Lex { message, .. } | SceneError::Semantic { message, .. } => message.clone(),
            SceneError::Syntax { expected, found, .. } => format!("expected {expected}, found {found}"),
            SceneError::Eval(e) => e.message.clone(),
        }
    }

    pub(crate) fn semantic(span: Span, message: impl Into<String>) -> Self {
        SceneError::Semantic { span, message: message.into() }
    }
}

/// Runtime failure, with the chain of shape calls that led to it
/// (innermost first).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: evaluation error: {message}{}", format_trace(.trace))]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub span: Span,
    pub message: String,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    /// Division by zero, bad loop count and similar.
    Runtime,
    /// Recursion depth, escape-iteration or primitive cap exceeded.
    Limit,
}

impl EvalError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        Self { kind: EvalErrorKind::Runtime, span, message: message.into(), trace: Vec::new() }
    }

    pub fn limit(span: Span, message: impl Into<String>) -> Self {
        Self { kind: EvalErrorKind::Limit, span, message: message.into(), trace: Vec::new() }
    }

    pub(crate) fn in_shape(mut self, shape: &str, call_site: Span) -> Self {
        self.trace.push(format!("in shape '{shape}' called at {call_site}"));
        self
    }
}

fn format_trace(trace: &[String]) -> String {
    trace.iter().map(|t| format!("\n  {t}")).collect()
}
