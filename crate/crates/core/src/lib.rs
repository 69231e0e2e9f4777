//! Compiler and runtime for a Pythonic quantum-kernel language.
//!
//! Kernels are parsed, lowered to a small register program, cached by
//! content digest and executed on a state-vector simulator, either as a
//! traced circuit or interpreted with mid-circuit measurement feedback.
//!
//! ```
//! use qk_core::{bind_args, execute, ArgPack, ArgValue, BackendConfig, ExecOptions, KernelRegistry};
//!
//! let registry = KernelRegistry::new();
//! registry.compile_source(qk_core::corpus::BELL).unwrap();
//! let mut args = ArgPack::new();
//! args.insert("q".into(), ArgValue::Qreg(2));
//! let call = bind_args(registry.get("bell").unwrap(), &args, &registry).unwrap();
//! let backend = qk_core::backend_by_name("qpp", BackendConfig::default()).unwrap();
//! let run = execute(&registry, &call, backend.as_ref(), &ExecOptions::default()).unwrap();
//! assert!(run.primary().results.counts.keys().all(|k| k == "00" || k == "11"));
//! ```

pub mod cache;
pub mod compiler;
pub mod corpus;
mod error;
pub mod ir;
pub mod linalg;
pub mod operators;
pub mod parser;
pub mod runtime;
pub mod synthesis;
pub mod transforms;
pub mod vqe;

pub use cache::{CacheError, DiskCache, JitStats, Provenance, QJit};
pub use compiler::{bind_args, ArgPack, ArgValue, BindError, BoundCall, CompileError, CompiledKernel, KernelRegistry};
pub use error::{Error, Result};
pub use ir::{CompositeInstruction, Gate, Instruction, IrError, QReg, QRegResults, RefValue, RegisterLayout};
pub use linalg::{Matrix, C64};
pub use operators::{parse_operator, FermionOperator, OperatorError, Pauli, PauliOperator, PauliString};
pub use parser::ParseError;
pub use runtime::{
    as_unitary_matrix, backend_by_name, execute, extract_composite, observe, to_openqasm, Backend, BackendConfig,
    ExecOptions, Execution, Mode, RuntimeError, StateVector,
};
pub use synthesis::{SynthesisError, SynthesisMethod};
pub use transforms::TransformError;
pub use vqe::{nelder_mead, vqe, Minimum, NelderMeadOptions, ObjectiveFunction, VqeError};
