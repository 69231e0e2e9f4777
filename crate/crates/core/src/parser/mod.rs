//! Kernel-source front end: tokenizer, parser, call classification and the
//! canonical pretty printer.

pub mod ast;
pub mod classify;
pub mod lexer;
pub mod parse;
pub mod pretty;
pub mod token;

pub use ast::{AssignTarget, Expr, KernelAst, Modifier, Param, Stmt, StmtKind, TypeAnnotation};
pub use classify::{classify_call, CallClass};
pub use lexer::tokenize;
pub use parse::{dedent, parse_expression, parse_kernel, parse_module};
pub use pretty::pretty_print;
pub use token::{Token, TokenKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: tab in indentation; indent with spaces only")]
    TabSpaceMix { line: usize },
    #[error("line {line}: unindent does not match any outer indentation level")]
    Indentation { line: usize },
    #[error("line {line}, column {column}: unterminated string")]
    UnterminatedString { line: usize, column: usize },
    #[error("line {line}, column {column}: unexpected character `{ch}`")]
    UnexpectedChar { ch: char, line: usize, column: usize },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: parameter `{param}` of kernel `{kernel}` needs a type annotation")]
    MissingAnnotation {
        kernel: String,
        param: String,
        line: usize,
    },
    #[error("line {line}: unknown type `{name}`")]
    UnknownType { name: String, line: usize },
    #[error("no kernel definition found")]
    NoKernel,
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::TabSpaceMix { line }
            | ParseError::Indentation { line }
            | ParseError::UnterminatedString { line, .. }
            | ParseError::UnexpectedChar { line, .. }
            | ParseError::Syntax { line, .. }
            | ParseError::MissingAnnotation { line, .. }
            | ParseError::UnknownType { line, .. } => Some(*line),
            ParseError::NoKernel => None,
        }
    }
}
