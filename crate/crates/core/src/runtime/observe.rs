//! Expectation values of Pauli observables on a kernel's output state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::backend::{Backend, Capability};
use super::execute::trace;
use super::statevector::{sample_indices, StateVector};
use super::RuntimeError;
use crate::compiler::{BoundCall, KernelRegistry};
use crate::ir::{Gate, Instruction};
use crate::operators::{Pauli, PauliOperator, PauliString};

/// Imaginary parts above this make an observable non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// `<psi| op |psi>` where `psi` is the kernel's output state. Each
/// non-identity term is rotated into the Z basis and read out as a parity,
/// exactly when `shots == 0` and from `shots` samples otherwise.
pub fn observe(
    registry: &KernelRegistry,
    bound: &BoundCall,
    op: &PauliOperator,
    backend: &dyn Backend,
    shots: u64,
    seed: u64,
) -> Result<f64, RuntimeError> {
    check_hermitian(op)?;
    backend.require(if shots == 0 {
        Capability::ExactExpectation
    } else {
        Capability::Shots
    })?;
    let t = trace(registry, bound)?;
    let insts = t.composite.flatten()?;
    if let Some(i) = insts.iter().find(|i| !i.gate.is_unitary()) {
        return Err(RuntimeError::NonUnitarySubcircuit(i.gate.name().into()));
    }
    let n = t.num_qubits();
    if op.num_qubits() > n {
        return Err(RuntimeError::ObservableTooWide {
            operator: op.num_qubits(),
            register: n,
        });
    }
    let mut state = StateVector::new(n)?;
    for i in &insts {
        state.apply(i)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for (word, coeff) in op.terms() {
        total += coeff.re
            * if word.is_identity() {
                1.0
            } else {
                term_expectation(&state, word, shots, &mut rng)?
            };
    }
    Ok(total)
}

pub fn check_hermitian(op: &PauliOperator) -> Result<(), RuntimeError> {
    match op.terms().find(|(_, c)| c.im.abs() > HERMITIAN_TOL) {
        Some((w, c)) => Err(RuntimeError::NonHermitianObservable {
            term: w.to_string(),
            imag: c.im,
        }),
        None => Ok(()),
    }
}

fn term_expectation(state: &StateVector, word: &PauliString, shots: u64, rng: &mut ChaCha8Rng) -> Result<f64, RuntimeError> {
    let mut rotated = state.clone();
    let n = state.num_qubits();
    let mut mask = 0usize;
    for &(q, p) in word.factors() {
        match p {
            Pauli::X => rotated.apply(&Instruction::one(Gate::H, q))?,
            Pauli::Y => {
                rotated.apply(&Instruction::one(Gate::Sdg, q))?;
                rotated.apply(&Instruction::one(Gate::H, q))?;
            }
            Pauli::Z => {}
        }
        mask |= 1 << (n - 1 - q);
    }
    let parity = |i: usize| if (i & mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    let probs = rotated.probabilities();
    Ok(if shots == 0 {
        probs.iter().enumerate().map(|(i, p)| p * parity(i)).sum()
    } else {
        let sum: f64 = sample_indices(&probs, shots, rng).into_iter().map(parity).sum();
        sum / shots as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{bind_args, ArgPack, ArgValue};
    use crate::runtime::backend::SimBackend;
    use crate::runtime::BackendConfig;

    fn setup(src: &str, name: &str, pack: ArgPack) -> (KernelRegistry, BoundCall) {
        let r = KernelRegistry::new();
        r.compile_source(src).unwrap();
        let b = bind_args(r.get(name).unwrap(), &pack, &r).unwrap();
        (r, b)
    }

    fn qreg(n: usize) -> ArgPack {
        let mut p = ArgPack::new();
        p.insert("q".into(), ArgValue::Qreg(n));
        p
    }

    #[test]
    fn bell_stabilizers() {
        let (r, b) = setup("def bell(q: qreg):\n    H(q[0])\n    CX(q[0], q[1])\n", "bell", qreg(2));
        let be = SimBackend::qpp(BackendConfig::default());
        for (text, want) in [("Z(0) * Z(1)", 1.0), ("X(0) * X(1)", 1.0), ("Y(0) * Y(1)", -1.0), ("Z(0)", 0.0), ("5.907", 5.907)] {
            let op = PauliOperator::parse(text).unwrap();
            let got = observe(&r, &b, &op, &be, 0, 0).unwrap();
            assert!((got - want).abs() < 1e-12, "{text}: {got}");
        }
        let zz = PauliOperator::parse("Z(0) * Z(1)").unwrap();
        assert!((observe(&r, &b, &zz, &be, 500, 3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_change_matches_direct_expectation() {
        let (r, b) = setup(
            "def k(q: qreg):\n    Rx(q[0], 0.3)\n    Ry(q[1], 1.1)\n    CX(q[0], q[1])\n    Rz(q[1], 0.7)\n    H(q[0])\n",
            "k",
            qreg(2),
        );
        let be = SimBackend::qpp(BackendConfig::default());
        let op = PauliOperator::parse("0.5 * X(0) * Y(1) - 1.5 * Y(0) * Z(1) + 0.25 * Z(0) * X(1)").unwrap();
        let got = observe(&r, &b, &op, &be, 0, 0).unwrap();
        let t = trace(&r, &b).unwrap();
        let mut s = StateVector::new(2).unwrap();
        for i in t.composite.flatten().unwrap() {
            s.apply(&i).unwrap();
        }
        assert!((got - s.expectation(&op).unwrap().re).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_observables() {
        let (r, b) = setup("def k(q: qreg):\n    H(q[0])\n", "k", qreg(1));
        let be = SimBackend::qpp(BackendConfig::default());
        let op = PauliOperator::parse("1j * Z(0)").unwrap();
        assert!(matches!(observe(&r, &b, &op, &be, 0, 0), Err(RuntimeError::NonHermitianObservable { .. })));
        let wide = PauliOperator::parse("Z(3)").unwrap();
        assert!(matches!(observe(&r, &b, &wide, &be, 0, 0), Err(RuntimeError::ObservableTooWide { .. })));
        let (r, b) = setup("def m(q: qreg):\n    H(q[0])\n    Measure(q[0])\n", "m", qreg(1));
        let z = PauliOperator::parse("Z(0)").unwrap();
        assert!(matches!(observe(&r, &b, &z, &be, 0, 0), Err(RuntimeError::NonUnitarySubcircuit(_))));
    }
}
