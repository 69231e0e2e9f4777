//! Dense state-vector simulator. Qubit 0 is the most significant bit of the
//! basis index.

use rand::Rng;

use super::RuntimeError;
use crate::ir::{apply_matrix, Instruction, IrError};
use crate::linalg::{C64, I, ONE, ZERO};
use crate::operators::{Pauli, PauliOperator, PauliString};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn new(n: usize) -> Result<Self, RuntimeError> {
        if n > MAX_QUBITS {
            return Err(RuntimeError::TooManyQubits { requested: n, max: MAX_QUBITS });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Option<Self> {
        let n = crate::linalg::qubits_for_dim(amps.len())?;
        Some(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn check(&self, inst: &Instruction) -> Result<(), RuntimeError> {
        if let Some(q) = inst.qubits().find(|&q| q >= self.n) {
            return Err(IrError::QubitOutOfRange { qubit: q, size: self.n }.into());
        }
        Ok(())
    }

    /// Applies a unitary instruction. Measurement and reset go through
    /// [`StateVector::measure`] and [`StateVector::reset`].
    pub fn apply(&mut self, inst: &Instruction) -> Result<(), RuntimeError> {
        self.check(inst)?;
        let base = inst
            .gate
            .matrix(&inst.params)
            .ok_or_else(|| IrError::NonUnitaryGate(inst.gate.name().into()))?;
        let base = if inst.is_adjoint { base.adjoint() } else { base };
        apply_matrix(&mut self.amps, self.n, &inst.controls, &inst.targets, &base);
        Ok(())
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let b = self.bit(q);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & b != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects qubit `q` onto `outcome` and renormalizes. Returns the
    /// probability of that outcome before projection.
    pub fn collapse(&mut self, q: usize, outcome: bool) -> f64 {
        let b = self.bit(q);
        let p1 = self.prob_one(q);
        let p = if outcome { p1 } else { 1.0 - p1 };
        let scale = if p > 0.0 { 1.0 / p.sqrt() } else { 0.0 };
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & b != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        p
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        let outcome = rng.random::<f64>() < self.prob_one(q);
        self.collapse(q, outcome);
        outcome
    }

    /// Flips qubit `q` unconditionally.
    pub fn flip(&mut self, q: usize) {
        let b = self.bit(q);
        for i in 0..self.amps.len() {
            if i & b == 0 {
                self.amps.swap(i, i | b);
            }
        }
    }

    /// Measures `q` and flips it back to `|0>` when the outcome was 1.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        let outcome = self.measure(q, rng);
        if outcome {
            self.flip(q);
        }
        outcome
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `<psi| P |psi>` for a single Pauli word, without building matrices.
    pub fn pauli_expectation(&self, word: &PauliString) -> C64 {
        let (mut flip, mut zmask, mut ys) = (0usize, 0usize, 0u32);
        for &(q, p) in word.factors() {
            let b = self.bit(q);
            match p {
                Pauli::X => flip |= b,
                Pauli::Y => {
                    flip |= b;
                    zmask |= b;
                    ys += 1;
                }
                Pauli::Z => zmask |= b,
            }
        }
        // P|i> = i^ys * (-1)^{popcount(i & zmask)} |i ^ flip>, with Y = iXZ.
        let phase = I.powu(ys);
        let mut acc = ZERO;
        for (i, a) in self.amps.iter().enumerate() {
            let sign = if (i & zmask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amps[i ^ flip].conj() * a * sign;
        }
        acc * phase
    }

    /// Exact `<psi| H |psi>`. Operator qubits beyond the register are an error.
    pub fn expectation(&self, op: &PauliOperator) -> Result<C64, RuntimeError> {
        if op.num_qubits() > self.n {
            return Err(RuntimeError::ObservableTooWide {
                operator: op.num_qubits(),
                register: self.n,
            });
        }
        Ok(op.terms().map(|(w, c)| c * self.pauli_expectation(w)).sum())
    }
}

/// Draws `shots` basis indices from `probs` by inverse-CDF sampling.
pub fn sample_indices<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    (0..shots)
        .map(|_| {
            let r = rng.random::<f64>() * total;
            cdf.partition_point(|&c| c <= r).min(probs.len() - 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{circuit_unitary, Gate};
    use crate::linalg::c;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> StateVector {
        let mut s = StateVector::new(2).unwrap();
        s.apply(&Instruction::one(Gate::H, 0)).unwrap();
        s.apply(&Instruction::cx(0, 1)).unwrap();
        s
    }

    #[test]
    fn bell_amplitudes_and_zz() {
        let s = bell();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - c(h, 0.0)).norm() < 1e-12);
        assert!((s.amplitudes()[3] - c(h, 0.0)).norm() < 1e-12);
        let zz = PauliOperator::z(0) * PauliOperator::z(1);
        assert!((s.expectation(&zz).unwrap().re - 1.0).abs() < 1e-12);
        let xx = PauliOperator::x(0) * PauliOperator::x(1);
        assert!((s.expectation(&xx).unwrap().re - 1.0).abs() < 1e-12);
        let yy = PauliOperator::y(0) * PauliOperator::y(1);
        assert!((s.expectation(&yy).unwrap().re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn q0_is_most_significant() {
        let mut s = StateVector::new(3).unwrap();
        s.apply(&Instruction::one(Gate::X, 0)).unwrap();
        assert_eq!(s.probabilities()[0b100], 1.0);
    }

    #[test]
    fn collapse_and_reset() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut s = bell();
            let a = s.measure(0, &mut rng);
            assert_eq!(s.prob_one(1), if a { 1.0 } else { 0.0 });
            s.reset(1, &mut rng);
            assert!(s.prob_one(1) < 1e-12);
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_respects_zero_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws = sample_indices(&[0.5, 0.0, 0.0, 0.5], 1000, &mut rng);
        assert!(draws.iter().all(|&d| d == 0 || d == 3));
    }

    #[test]
    fn too_many_qubits() {
        assert!(matches!(StateVector::new(MAX_QUBITS + 1), Err(RuntimeError::TooManyQubits { .. })));
    }

    fn gate_strategy(n: usize) -> impl Strategy<Value = Instruction> {
        let q = 0..n;
        prop_oneof![
            (q.clone(), prop::sample::select(vec![Gate::H, Gate::X, Gate::Y, Gate::S, Gate::T]))
                .prop_map(|(q, g)| Instruction::one(g, q)),
            (q.clone(), -3.0..3.0f64, prop::sample::select(vec![Gate::Rx, Gate::Ry, Gate::Rz]))
                .prop_map(|(q, t, g)| Instruction::rot(g, q, t)),
            (q.clone(), q.clone())
                .prop_filter("distinct", |(a, b)| a != b)
                .prop_map(|(a, b)| Instruction::cx(a, b)),
            (q.clone(), q, -3.0..3.0f64)
                .prop_filter("distinct", |(a, b, _)| a != b)
                .prop_map(|(a, b, t)| Instruction::new(Gate::FSim, vec![a, b], vec![t, t / 2.0]).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn norm_is_preserved(insts in prop::collection::vec(gate_strategy(4), 0..30)) {
            let mut s = StateVector::new(4).unwrap();
            for i in &insts {
                s.apply(i).unwrap();
            }
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn matches_dense_unitary(insts in prop::collection::vec(gate_strategy(3), 0..12)) {
            let mut s = StateVector::new(3).unwrap();
            for i in &insts {
                s.apply(i).unwrap();
            }
            let u = circuit_unitary(&insts, 3).unwrap();
            for k in 0..8 {
                prop_assert!((s.amplitudes()[k] - u[(k, 0)]).norm() < 1e-10);
            }
        }

        #[test]
        fn pauli_expectation_matches_matrix(insts in prop::collection::vec(gate_strategy(3), 0..10),
                                            word in prop::collection::vec(0..4u8, 3)) {
            let mut s = StateVector::new(3).unwrap();
            for i in &insts {
                s.apply(i).unwrap();
            }
            let factors: Vec<(usize, Pauli)> = word.iter().enumerate().filter(|(_, p)| **p != 0).map(|(q, p)| (q, match p {
                1 => Pauli::X, 2 => Pauli::Y, _ => Pauli::Z,
            })).collect();
            let (k, w) = PauliString::new(&factors);
            let op = PauliOperator::term(w, k);
            let m = op.to_matrix(3);
            let psi = nalgebra::DVector::from_column_slice(s.amplitudes());
            let want = (psi.adjoint() * &m * &psi)[(0, 0)];
            prop_assert!((s.expectation(&op).unwrap() - want).norm() < 1e-10);
        }
    }
}
