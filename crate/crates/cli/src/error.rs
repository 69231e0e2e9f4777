use std::path::PathBuf;

use qk_core::{CompileError, Error as CoreError, RuntimeError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    ArgsFile { path: PathBuf, source: serde_json::Error },
    #[error("{}: {message}", path.display())]
    Compile { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

macro_rules! core_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}

core_from!(
    RuntimeError,
    qk_core::BindError,
    qk_core::OperatorError,
    qk_core::IrError,
    qk_core::CacheError
);

impl CliError {
    pub fn compile(path: &std::path::Path, e: CompileError) -> Self {
        CliError::Compile {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::ArgsFile { .. } => 2,
            CliError::Compile { .. } => 3,
            CliError::Write { .. } => 4,
            CliError::Core(e) => match e {
                CoreError::Parse(_) | CoreError::Compile(_) | CoreError::Operator(_) => 3,
                CoreError::Runtime(
                    RuntimeError::BackendNotFound(_) | RuntimeError::BackendCapability { .. } | RuntimeError::Config(_),
                ) => 5,
                _ => 4,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_problems_exit_with_five() {
        let e: CliError = RuntimeError::BackendNotFound("nope".into()).into();
        assert_eq!(e.exit_code(), 5);
        let e: CliError = RuntimeError::UnknownKernel("k".into()).into();
        assert_eq!(e.exit_code(), 4);
    }

    #[test]
    fn bind_errors_are_runtime_errors() {
        let e: CliError = qk_core::BindError::UnboundKernelReference("f".into()).into();
        assert_eq!(e.exit_code(), 4);
    }
}
