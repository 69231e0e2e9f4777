//! Circuit-level transforms applied to traced kernels.

pub mod adjoint;
pub mod compute_action;
pub mod controlled;
pub mod peephole;

pub use adjoint::{adjoint, invert};
pub use compute_action::compute_action;
pub use controlled::controlled;
pub use peephole::{peephole, peephole_flat, PeepholeStats};

use thiserror::Error;

use crate::ir::IrError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("cannot take {modifier} of a sub-circuit containing `{op}`")]
    NonUnitarySubcircuit { modifier: &'static str, op: String },
    #[error("measurement inside a compute block")]
    MeasureInComputeBlock,
    #[error("control qubit {0} is also used by the controlled body")]
    ControlOverlap(usize),
    #[error(transparent)]
    Ir(#[from] IrError),
}
