//! Unitary synthesis: turn a matrix into a gate sequence.
//!
//! All methods are exact up to global phase. Defaults by qubit count: one
//! qubit uses ZYZ, two use KAK, more use two-level Givens rotations.

pub mod kak;
pub mod multi_control;
pub mod two_level;
pub mod zyz;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{circuit_unitary, Instruction};
use crate::linalg::{phase_aligned_distance, qubits_for_dim, unitarity_error, Matrix};

pub use kak::{kak_circuit, kak_decompose, KakDecomposition};
pub use multi_control::{controlled_unitary, multi_x};
pub use two_level::two_level_circuit;
pub use zyz::{zyz_angles, zyz_circuit, ZyzAngles};

/// Inputs further than this from unitary are rejected.
pub const UNITARITY_TOL: f64 = 1e-8;
/// Post-synthesis check on the reconstructed unitary.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("matrix is not unitary (max |UU† - I| = {error:.3e})")]
    NonUnitaryInput { error: f64 },
    #[error("matrix is {rows}x{cols}; expected {expected}x{expected} for {qubits} qubit(s)")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        qubits: usize,
        expected: usize,
    },
    #[error("unknown synthesis method `{0}` (expected zyz, kak, two_level or default)")]
    UnsupportedMethod(String),
    #[error("method `{method}` cannot synthesize a {qubits}-qubit unitary")]
    MethodNotApplicable { method: SynthesisMethod, qubits: usize },
    #[error("synthesized circuit deviates from the target by {error:.3e}")]
    ReconstructionFailed { error: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMethod {
    #[default]
    Default,
    Zyz,
    Kak,
    TwoLevel,
}

impl SynthesisMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Default => "default",
            Self::Zyz => "zyz",
            Self::Kak => "kak",
            Self::TwoLevel => "two_level",
        }
    }

    /// The concrete method used for `n` qubits.
    pub fn resolve(self, n: usize) -> Self {
        match (self, n) {
            (Self::Default, 1) => Self::Zyz,
            (Self::Default, 2) => Self::Kak,
            (Self::Default, _) => Self::TwoLevel,
            (m, _) => m,
        }
    }
}

impl fmt::Display for SynthesisMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthesisMethod {
    type Err = SynthesisError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "default" | "" => Ok(Self::Default),
            "zyz" => Ok(Self::Zyz),
            "kak" => Ok(Self::Kak),
            "two_level" | "twolevel" | "givens" => Ok(Self::TwoLevel),
            _ => Err(SynthesisError::UnsupportedMethod(s.to_string())),
        }
    }
}

/// Validates `u` against `qubits` and returns the gate sequence.
pub fn synthesize(u: &Matrix, qubits: &[usize], method: SynthesisMethod) -> Result<Vec<Instruction>, SynthesisError> {
    let n = qubits.len();
    let expected = 1usize << n;
    if n == 0 || u.nrows() != expected || u.ncols() != expected {
        return Err(SynthesisError::DimensionMismatch {
            rows: u.nrows(),
            cols: u.ncols(),
            qubits: n,
            expected,
        });
    }
    let error = unitarity_error(u);
    if error.is_nan() || error > UNITARITY_TOL {
        return Err(SynthesisError::NonUnitaryInput { error });
    }
    let resolved = method.resolve(n);
    let circuit = match (resolved, n) {
        (SynthesisMethod::Zyz, 1) => zyz_circuit(u, qubits[0]),
        (SynthesisMethod::Kak, 2) => kak_circuit(u, qubits[0], qubits[1]),
        (SynthesisMethod::TwoLevel, _) => two_level_circuit(u, qubits),
        _ => return Err(SynthesisError::MethodNotApplicable { method, qubits: n }),
    };
    Ok(circuit)
}

/// Synthesizes on qubits `0..n` and checks the result against `u`.
pub fn synthesize_checked(u: &Matrix, method: SynthesisMethod) -> Result<(Vec<Instruction>, f64), SynthesisError> {
    let n = qubits_for_dim(u.nrows()).unwrap_or(0);
    let qubits: Vec<usize> = (0..n).collect();
    let circuit = synthesize(u, &qubits, method)?;
    let got = circuit_unitary(&circuit, n).expect("synthesized gates stay in range");
    let error = phase_aligned_distance(&got, u);
    if error > RECONSTRUCTION_TOL {
        return Err(SynthesisError::ReconstructionFailed { error });
    }
    Ok((circuit, error))
}
