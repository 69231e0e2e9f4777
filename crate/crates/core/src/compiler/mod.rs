//! Lowering from syntax trees to executable kernel programs, the kernel
//! registry with its dependency graph, and argument binding.

pub mod args;
pub mod lower;
pub mod program;
pub mod registry;

pub use args::{bind_args, ArgPack, ArgValue, BindError, BoundCall};
pub use lower::{lower, referenced_kernels, Lowered};
pub use program::{Builtin, CallArg, Callee, Iterable, LExpr, Op, OpKind, Program, SlotInfo, StaticTy};
pub use registry::{source_digest, topo_sort, CompiledKernel, KernelRegistry, DIGEST_FORMAT_VERSION};

use thiserror::Error;

use crate::parser::ParseError;
use crate::synthesis::SynthesisError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: unknown kernel `{name}`")]
    UnknownKernel { name: String, line: usize },
    #[error("line {line}: type mismatch: {message}")]
    TypeMismatch { line: usize, message: String },
    #[error("cyclic kernel dependency: {}", .0.join(" -> "))]
    CyclicDependency(Vec<String>),
    #[error("line {line}: `with compute` must be followed by `with action`")]
    ComputeWithoutAction { line: usize },
    #[error("line {line}: `with action` without a preceding `with compute`")]
    ActionWithoutCompute { line: usize },
    #[error("line {line}: variable `{name}` used before assignment")]
    UndeclaredVariable { name: String, line: usize },
    #[error("line {line}: local variable `{name}` shadows a kernel of the same name")]
    ShadowedKernelName { name: String, line: usize },
    #[error("line {line}: unknown function `{name}`")]
    UnknownFunction { name: String, line: usize },
    #[error("first parameter of kernel `{kernel}` must be a qreg or qubit")]
    FirstArgNotQreg { kernel: String },
    #[error("kernel `{kernel}` declares parameter `{param}` twice")]
    DuplicateParam { kernel: String, param: String },
    #[error("line {line}: `{callee}` takes {expected} argument(s), {found} given")]
    Arity {
        callee: String,
        expected: usize,
        found: usize,
        line: usize,
    },
    #[error("kernel `{name}` is already registered with a different body")]
    KernelRedefined { name: String },
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}
