//! A small line-oriented scripting language over the bundle calculus.
//!
//! ```text
//! space n=2 a=[1,0] c2=paper
//! bundle V = bundle(rank=2, c1=[1,-1], c2=3)
//! chi End(V)(-S)
//! dim V
//! assert chi(End(V)(-S)) == chi(End(V)(-Sbar))
//! ```

mod ast;
mod exec;
mod lexer;
mod parser;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use ast::{BundleDef, CmpOp, Expr, Located, Script, Statement, SweepParam, SweepValue};
pub use exec::{Execution, Interpreter, Output, Value};
pub use parser::{parse, parse_expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Lexical,
    Syntax,
    UnboundIdentifier,
    UnboundGenerator,
    DegreeMismatch,
    NoSpace,
    Type,
    Value,
    AssertionFailed,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Lexical => "lexical",
            ErrorKind::Syntax => "syntax",
            ErrorKind::UnboundIdentifier => "unbound_identifier",
            ErrorKind::UnboundGenerator => "unbound_generator",
            ErrorKind::DegreeMismatch => "degree_mismatch",
            ErrorKind::NoSpace => "no_space",
            ErrorKind::Type => "type",
            ErrorKind::Value => "value",
            ErrorKind::AssertionFailed => "assertion_failed",
        }
    }

    /// Lexical and syntax errors are detected before anything runs.
    pub fn is_static(self) -> bool {
        matches!(self, ErrorKind::Lexical | ErrorKind::Syntax)
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{line}:{column}: {kind} error: {message}")]
pub struct DslError {
    pub kind: ErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl DslError {
    pub fn new(kind: ErrorKind, line: usize, column: usize, message: impl Into<String>) -> Self {
        DslError {
            kind,
            line,
            column,
            message: message.into(),
        }
    }
}

/// Parse and run a script in a fresh interpreter.
pub fn run_script(text: &str) -> Execution {
    Interpreter::new().run_text(text)
}
