//! Arbitrary n-qubit unitaries via Givens rotations between Gray-code
//! neighbours. Each rotation touches two basis states that differ in one bit,
//! so it becomes a single-qubit gate controlled on the remaining bits.

use super::multi_control::controlled_unitary;
use crate::ir::{Gate, Instruction};
use crate::linalg::{det, Matrix, C64, ONE, ZERO};

/// Entries smaller than this are already eliminated.
const ELIM_TOL: f64 = 1e-12;

/// A 2x2 rotation on basis states `(lo, hi)` where `hi = lo | bit`.
struct Givens {
    lo: usize,
    hi: usize,
    /// Acts on `(|lo>, |hi>)`.
    block: Matrix,
}

fn gray(k: usize) -> usize {
    k ^ (k >> 1)
}

/// Left-multiplies rows `r0`, `r1` of `m` by the 2x2 `g`.
fn apply_rows(m: &mut Matrix, r0: usize, r1: usize, g: &Matrix) {
    for col in 0..m.ncols() {
        let (x, y) = (m[(r0, col)], m[(r1, col)]);
        m[(r0, col)] = g[(0, 0)] * x + g[(0, 1)] * y;
        m[(r1, col)] = g[(1, 0)] * x + g[(1, 1)] * y;
    }
}

/// Finds `G_m ... G_1 U = I` (after removing the determinant phase).
fn eliminate(u: &Matrix) -> Vec<Givens> {
    let dim = u.nrows();
    let phase = C64::from_polar(1.0, -det(u).arg() / dim as f64);
    let mut m = u * phase;
    let mut out = Vec::new();
    for j in 0..dim.saturating_sub(1) {
        let col = gray(j);
        for k in (j + 1..dim).rev() {
            let (ra, rb) = (gray(k - 1), gray(k));
            let (a, b) = (m[(ra, col)], m[(rb, col)]);
            let pivot = k == j + 1;
            if b.norm() < ELIM_TOL && (!pivot || (a - ONE).norm() < ELIM_TOL) {
                continue;
            }
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let g = if b.norm() < ELIM_TOL {
                let p = a / a.norm();
                Matrix::from_row_slice(2, 2, &[p.conj(), ZERO, ZERO, p])
            } else {
                Matrix::from_row_slice(2, 2, &[a.conj() / r, b.conj() / r, -b / r, a / r])
            };
            apply_rows(&mut m, ra, rb, &g);
            // Store with rows ordered by the differing bit.
            let (lo, hi, block) = if ra < rb {
                (ra, rb, g)
            } else {
                let swapped = Matrix::from_row_slice(2, 2, &[g[(1, 1)], g[(1, 0)], g[(0, 1)], g[(0, 0)]]);
                (rb, ra, swapped)
            };
            out.push(Givens { lo, hi, block });
        }
    }
    out
}

/// Gate sequence implementing `u` on `qubits` (`qubits[0]` most significant),
/// exact up to global phase.
pub fn two_level_circuit(u: &Matrix, qubits: &[usize]) -> Vec<Instruction> {
    let n = qubits.len();
    let mut out = Vec::new();
    // U = G_1† ... G_m†, so G_m† runs first.
    for g in eliminate(u).iter().rev() {
        let bit = g.lo ^ g.hi;
        let pos = n - 1 - bit.trailing_zeros() as usize;
        let target = qubits[pos];
        let mut controls = Vec::new();
        let mut flips = Vec::new();
        for (p, &q) in qubits.iter().enumerate() {
            if p == pos {
                continue;
            }
            controls.push(q);
            if (g.lo >> (n - 1 - p)) & 1 == 0 {
                flips.push(q);
            }
        }
        let x = |q: &usize| Instruction::one(Gate::X, *q);
        out.extend(flips.iter().map(x));
        out.extend(controlled_unitary(&g.block.adjoint(), &controls, target));
        out.extend(flips.iter().map(x));
    }
    cancel_adjacent_x(out)
}

/// Back-to-back X conjugations on the same qubit cancel.
fn cancel_adjacent_x(insts: Vec<Instruction>) -> Vec<Instruction> {
    let mut out: Vec<Instruction> = Vec::with_capacity(insts.len());
    for i in insts {
        if i.gate == Gate::X && i.controls.is_empty() {
            // Look back past X gates on other qubits.
            let mut k = out.len();
            let mut hit = None;
            while k > 0 {
                k -= 1;
                let p = &out[k];
                if p.gate == Gate::X && p.controls.is_empty() {
                    if p.targets == i.targets {
                        hit = Some(k);
                        break;
                    }
                } else {
                    break;
                }
            }
            if let Some(k) = hit {
                out.remove(k);
                continue;
            }
        }
        out.push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::circuit_unitary;
    use crate::linalg::{c, phase_aligned_distance};
    use proptest::prelude::*;

    fn ccnot() -> Matrix {
        let mut m = Matrix::identity(8, 8);
        m[(6, 6)] = ZERO;
        m[(7, 7)] = ZERO;
        m[(6, 7)] = ONE;
        m[(7, 6)] = ONE;
        m
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for k in 1..16 {
            assert_eq!((gray(k) ^ gray(k - 1)).count_ones(), 1);
        }
    }

    #[test]
    fn ccnot_reconstructs() {
        let circ = two_level_circuit(&ccnot(), &[0, 1, 2]);
        let got = circuit_unitary(&circ, 3).unwrap();
        assert!(phase_aligned_distance(&got, &ccnot()) < 1e-10);
    }

    #[test]
    fn identity_is_empty() {
        assert!(two_level_circuit(&Matrix::identity(8, 8), &[0, 1, 2]).is_empty());
    }

    #[test]
    fn qubit_mapping() {
        // Same matrix on permuted wires equals the permuted reference.
        let cx = Gate::CX.matrix(&[]).unwrap();
        let circ = two_level_circuit(&cx, &[1, 0]);
        let got = circuit_unitary(&circ, 2).unwrap();
        let reference = circuit_unitary(&[Instruction::cx(1, 0)], 2).unwrap();
        assert!(phase_aligned_distance(&got, &reference) < 1e-10);
    }

    fn arb_unitary(n: usize) -> impl Strategy<Value = Matrix> {
        let dim = 1 << n;
        prop::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |v| {
            Matrix::from_fn(dim, dim, |i, j| c(v[2 * (dim * i + j)], v[2 * (dim * i + j) + 1])).qr().q()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn random_three_qubit(u in arb_unitary(3)) {
            let got = circuit_unitary(&two_level_circuit(&u, &[0, 1, 2]), 3).unwrap();
            prop_assert!(phase_aligned_distance(&got, &u) < 1e-8);
        }

        #[test]
        fn random_one_and_two_qubit(u1 in arb_unitary(1), u2 in arb_unitary(2)) {
            let got = circuit_unitary(&two_level_circuit(&u1, &[0]), 1).unwrap();
            prop_assert!(phase_aligned_distance(&got, &u1) < 1e-9);
            let got = circuit_unitary(&two_level_circuit(&u2, &[0, 1]), 2).unwrap();
            prop_assert!(phase_aligned_distance(&got, &u2) < 1e-9);
        }
    }
}
