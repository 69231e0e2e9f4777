use thiserror::Error;

use crate::cache::CacheError;
use crate::compiler::{BindError, CompileError};
use crate::ir::IrError;
use crate::operators::OperatorError;
use crate::parser::ParseError;
use crate::runtime::RuntimeError;
use crate::synthesis::SynthesisError;
use crate::transforms::TransformError;
use crate::vqe::VqeError;

/// Any error the crate can produce, for callers that do not need to
/// distinguish the stage that failed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Vqe(#[from] VqeError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
