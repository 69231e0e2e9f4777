//! Circuit for `exp(i * theta * H)` built term by term.

use std::f64::consts::FRAC_PI_2;

use super::pauli::{Pauli, PauliOperator};
use super::OperatorError;
use crate::ir::{CompositeInstruction, Gate, Instruction};

/// Imaginary coefficient parts above this are rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Emits one first-order Trotter step of `exp(i * theta * op)`.
///
/// `qubits[k]` is the global qubit that operator index `k` acts on. Terms are
/// emitted in the operator's insertion order; identity terms only contribute a
/// global phase and emit nothing.
pub fn exp_i_theta(qubits: &[usize], theta: f64, op: &PauliOperator) -> Result<CompositeInstruction, OperatorError> {
    let mut out = CompositeInstruction::new("exp_i_theta");
    for (word, coeff) in op.terms() {
        if coeff.im.abs() > HERMITIAN_TOL {
            return Err(OperatorError::NonHermitianGenerator {
                term: word.to_string(),
                imag: coeff.im,
            });
        }
        if word.is_identity() {
            continue;
        }
        let mapped: Vec<(usize, Pauli)> = word
            .factors()
            .iter()
            .map(|&(k, p)| {
                qubits
                    .get(k)
                    .map(|&q| (q, p))
                    .ok_or(OperatorError::IndexOutOfRange { index: k, size: qubits.len() })
            })
            .collect::<Result<_, _>>()?;
        for &(q, p) in &mapped {
            match p {
                Pauli::X => out.push(Instruction::one(Gate::H, q)),
                Pauli::Y => out.push(Instruction::rot(Gate::Rx, q, FRAC_PI_2)),
                Pauli::Z => {}
            }
        }
        for w in mapped.windows(2) {
            out.push(Instruction::cx(w[0].0, w[1].0));
        }
        let last = mapped.last().expect("non-identity word").0;
        out.push(Instruction::rot(Gate::Rz, last, -2.0 * theta * coeff.re));
        for w in mapped.windows(2).rev() {
            out.push(Instruction::cx(w[0].0, w[1].0));
        }
        for &(q, p) in &mapped {
            match p {
                Pauli::X => out.push(Instruction::one(Gate::H, q)),
                Pauli::Y => out.push(Instruction::rot(Gate::Rx, q, -FRAC_PI_2)),
                Pauli::Z => {}
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, phase_aligned_distance, Matrix};
    use crate::operators::pauli::PauliString;
    use proptest::prelude::*;

    /// exp(i a P) = cos(a) I + i sin(a) P for a Pauli word P.
    fn closed_form(word: &PauliString, a: f64, n: usize) -> Matrix {
        let dim = 1 << n;
        Matrix::identity(dim, dim) * c(a.cos(), 0.0) + word.to_matrix(n) * c(0.0, a.sin())
    }

    #[test]
    fn deuteron_counts() {
        let h = PauliOperator::parse("-2.1433 * X(0) * X(1) - 2.1433 * Y(0) * Y(1) + .21829 * Z(0) - 6.125 * Z(1) + 5.907").unwrap();
        let circ = exp_i_theta(&[0, 1], 1.0, &h).unwrap();
        assert_eq!(circ.instruction_count(), 16);
    }

    #[test]
    fn yy_uses_rx_basis_change() {
        let op = PauliOperator::y(0) * PauliOperator::y(1);
        let circ = exp_i_theta(&[0, 1], 0.3, &op).unwrap();
        let flat = circ.flatten().unwrap();
        assert_eq!(flat.len(), 7);
        assert_eq!(flat[0].gate, Gate::Rx);
        assert_eq!(flat[3].gate, Gate::Rz);
        assert_eq!(flat[3].targets, vec![1]);
    }

    #[test]
    fn errors() {
        let op = PauliOperator::x(3);
        assert!(matches!(exp_i_theta(&[0, 1], 1.0, &op), Err(OperatorError::IndexOutOfRange { index: 3, size: 2 })));
        let op = PauliOperator::x(0).scale(c(1.0, 0.5));
        assert!(matches!(exp_i_theta(&[0], 1.0, &op), Err(OperatorError::NonHermitianGenerator { .. })));
    }

    #[test]
    fn identity_emits_nothing() {
        let op = PauliOperator::identity(2.0);
        assert!(exp_i_theta(&[0], 1.0, &op).unwrap().is_empty());
    }

    #[test]
    fn qubit_mapping_is_applied() {
        let op = PauliOperator::z(0) * PauliOperator::z(1);
        let circ = exp_i_theta(&[4, 2], 1.0, &op).unwrap();
        let flat = circ.flatten().unwrap();
        assert_eq!(flat[0].targets, vec![4, 2]);
        assert_eq!(flat[1].targets, vec![2]);
    }

    fn arb_word() -> impl Strategy<Value = PauliString> {
        prop::collection::vec(0u8..4, 3).prop_map(|ps| {
            let facs: Vec<(usize, Pauli)> = ps
                .into_iter()
                .enumerate()
                .filter(|(_, p)| *p < 3)
                .map(|(q, p)| (q, [Pauli::X, Pauli::Y, Pauli::Z][p as usize]))
                .collect();
            PauliString::new(&facs).1
        })
    }

    /// Independent oracle: Taylor series with scaling and squaring.
    fn expm(a: &Matrix) -> Matrix {
        let norm: f64 = a.iter().map(|z| z.norm()).sum();
        let squarings = norm.max(1.0).log2().ceil() as u32 + 1;
        let scaled = a / c(f64::from(1u32 << squarings), 0.0);
        let dim = a.nrows();
        let mut term = Matrix::identity(dim, dim);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &scaled / c(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn commuting_sum_is_exact() {
        let op = PauliOperator::parse("0.4 * Z(0) * Z(1) - 0.9 * X(0) * X(1) + 0.25 * Y(0) * Y(1)").unwrap();
        let u = exp_i_theta(&[0, 1], 0.7, &op).unwrap().to_unitary(2).unwrap();
        let exact = expm(&(op.to_matrix(2) * c(0.0, 0.7)));
        assert!(phase_aligned_distance(&u, &exact) < 1e-10);
    }

    /// First-order Trotter: error <= theta^2 / 2 * sum_{i<j} |[H_i, H_j]|.
    #[test]
    fn non_commuting_error_is_second_order() {
        let op = PauliOperator::parse("0.7 * X(0) + 0.4 * Z(0) + 0.3 * X(0) * X(1) + 0.5 * Y(1)").unwrap();
        let parts: Vec<Matrix> = op.split().iter().map(|t| t.to_matrix(2)).collect();
        let mut bound = 0.0;
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let comm = &parts[i] * &parts[j] - &parts[j] * &parts[i];
                bound += comm.norm();
            }
        }
        let err = |theta: f64| {
            let u = exp_i_theta(&[0, 1], theta, &op).unwrap().to_unitary(2).unwrap();
            phase_aligned_distance(&u, &expm(&(op.to_matrix(2) * c(0.0, theta))))
        };
        let (e1, e2) = (err(0.01), err(0.1));
        for (theta, e) in [(0.01, e1), (0.1, e2)] {
            assert!(e > 0.0 && e <= theta * theta / 2.0 * bound, "theta={theta} err={e}");
        }
        let ratio = e2 / e1;
        assert!((50.0..200.0).contains(&ratio), "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn single_term_matches_closed_form(word in arb_word(), coeff in -2.0f64..2.0, theta in -3.0f64..3.0) {
            let op = PauliOperator::term(word.clone(), c(coeff, 0.0));
            let u = exp_i_theta(&[0, 1, 2], theta, &op).unwrap().to_unitary(3).unwrap();
            let expected = closed_form(&word, theta * coeff, 3);
            prop_assert!(phase_aligned_distance(&u, &expected) < 1e-10);
        }
    }
}
