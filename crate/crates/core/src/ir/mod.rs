//! Gate-level intermediate representation.

pub mod classical;
pub mod composite;
pub mod gate;
pub mod instruction;
pub mod layout;
pub mod qreg;

pub use classical::{BinOp, CExpr, Scalar, UnOp};
pub use composite::{circuit_unitary, ClassicalNode, CompositeInstruction, Node, RegionTag};
pub use gate::{controlled_block, Gate};
pub use instruction::{apply_matrix, Instruction};
pub use layout::RegisterLayout;
pub use qreg::{QReg, QRegResults, RefValue};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("{gate} expects {expected} target qubit(s), got {found}")]
    Arity {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("{gate} expects {expected} parameter(s), got {found}")]
    ParamCount {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` has no unitary matrix")]
    NonUnitaryGate(String),
    #[error("qubit used twice in `{0}`")]
    DuplicateQubit(String),
    #[error("qubit {qubit} out of range for {size} qubit(s)")]
    QubitOutOfRange { qubit: usize, size: usize },
    #[error("circuit contains measurement-dependent control flow; run in ftqc mode")]
    DynamicControlFlowInCircuitMode,
    #[error("register size must be positive")]
    EmptyRegister,
}
