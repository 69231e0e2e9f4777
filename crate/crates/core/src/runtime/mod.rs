//! Kernel execution: the interpreter, the state-vector simulator, backends
//! and the circuit/FTQC execution modes.

pub mod backend;
pub mod execute;
pub mod interpreter;
pub mod observe;
pub mod openqasm;
pub mod statevector;
pub mod value;

pub use backend::{backend_by_name, Backend, BackendConfig, Capabilities, Capability, SimBackend, DEFAULT_BACKEND};
pub use execute::{as_unitary_matrix, execute, extract_composite, ExecOptions, Execution, Mode, Trace};
pub use observe::{check_hermitian, observe};
pub use openqasm::to_openqasm;
pub use statevector::StateVector;
pub use value::Value;

use thiserror::Error;

use crate::compiler::BindError;
use crate::ir::IrError;
use crate::operators::OperatorError;
use crate::synthesis::SynthesisError;
use crate::transforms::TransformError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuntimeError {
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error("line {line}: {message}")]
    Type { line: usize, message: String },
    #[error("line {line}: index {index} out of range for length {len}")]
    IndexOutOfRange { line: usize, index: i64, len: usize },
    #[error("line {line}: `{name}` is used before it is assigned")]
    Unassigned { name: String, line: usize },
    #[error("kernel `{0}` is not registered")]
    UnknownKernel(String),
    #[error("kernel call depth exceeded while calling `{0}`")]
    RecursionLimit(String),
    #[error("line {line}: measurement-dependent control flow inside an adjoint, controlled or compute block")]
    ClassicalInModifiedBlock { line: usize },
    #[error("{requested} qubits requested; the simulator supports at most {max}")]
    TooManyQubits { requested: usize, max: usize },
    #[error("observable acts on {operator} qubit(s) but the register has {register}")]
    ObservableTooWide { operator: usize, register: usize },
    #[error("observable is not Hermitian: term `{term}` has imaginary coefficient {imag}")]
    NonHermitianObservable { term: String, imag: f64 },
    #[error("kernel is not unitary: it contains `{0}`")]
    NonUnitarySubcircuit(String),
    #[error("gate `{0}` has no OpenQASM 2.0 equivalent")]
    UnsupportedGateForExport(String),
    #[error("unknown backend `{0}`")]
    BackendNotFound(String),
    #[error("backend `{backend}` does not support {capability}")]
    BackendCapability { backend: String, capability: String },
    #[error("invalid backend configuration: {0}")]
    Config(String),
}
