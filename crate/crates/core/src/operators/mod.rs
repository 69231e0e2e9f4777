//! Pauli and fermionic operator algebra, Jordan-Wigner mapping and the
//! `exp_i_theta` circuit generator.

pub mod fermion;
pub mod pauli;
pub mod trotter;

pub use fermion::FermionOperator;
pub use pauli::{Pauli, PauliOperator, PauliString};
pub use trotter::exp_i_theta;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("malformed operator: {0}")]
    Malformed(String),
    #[error("operator index {index} out of range for {size} qubit(s)")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("term `{term}` has imaginary coefficient {imag}; exp_i_theta needs a Hermitian generator")]
    NonHermitianGenerator { term: String, imag: f64 },
}

/// Reads an operator file: Pauli syntax, or fermionic syntax mapped through
/// Jordan-Wigner.
pub fn parse_operator(text: &str) -> Result<PauliOperator, OperatorError> {
    let t = text.trim();
    if t.contains('[') || t.contains("FOp") || t.contains("FermionOperator") {
        Ok(FermionOperator::parse(t)?.jordan_wigner())
    } else {
        PauliOperator::parse(t)
    }
}
