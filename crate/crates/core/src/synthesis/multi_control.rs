//! Multi-controlled single-qubit gates lowered to one-qubit rotations and CX.
//!
//! One control uses the A·X·B·X·C construction with a phase fix on the
//! control. More controls recurse through `V = sqrt(U)`.

use super::zyz::{is_trivial_angle, zyz_angles, zyz_circuit};
use crate::ir::{Gate, Instruction};
use crate::linalg::{max_abs_diff, Matrix, C64, ZERO};

const EXACT: f64 = 1e-12;

/// Drops only true identities (multiples of 4π). A 2π rotation is -I, which
/// stops being a global phase once this sequence is itself controlled.
fn push_rot(out: &mut Vec<Instruction>, g: Gate, q: usize, t: f64) {
    if !is_trivial_angle(t / 2.0) {
        out.push(Instruction::rot(g, q, t));
    }
}

fn pauli_x() -> Matrix {
    Gate::X.matrix(&[]).unwrap()
}

/// Gate sequence (time order) implementing `u` on `target` conditioned on all
/// `controls` being 1. Exact, including the relative phase.
pub fn controlled_unitary(u: &Matrix, controls: &[usize], target: usize) -> Vec<Instruction> {
    assert_eq!(u.shape(), (2, 2));
    match controls {
        [] => zyz_circuit(u, target),
        [ctl] => single_control(u, *ctl, target),
        _ if max_abs_diff(u, &pauli_x()) < EXACT => multi_x(controls, target),
        _ => {
            let (&last, rest) = controls.split_last().unwrap();
            let v = sqrt_2x2(u);
            let vd = v.adjoint();
            let mut out = single_control(&v, last, target);
            out.extend(multi_x(rest, last));
            out.extend(single_control(&vd, last, target));
            out.extend(multi_x(rest, last));
            out.extend(controlled_unitary(&v, rest, target));
            out
        }
    }
}

/// Multi-controlled X (exact).
pub fn multi_x(controls: &[usize], target: usize) -> Vec<Instruction> {
    match controls {
        [] => vec![Instruction::one(Gate::X, target)],
        [ctl] => vec![Instruction::cx(*ctl, target)],
        [a, b] => toffoli(*a, *b, target),
        _ => controlled_unitary(&pauli_x(), controls, target),
    }
}

/// Standard 6-CX Toffoli.
fn toffoli(a: usize, b: usize, t: usize) -> Vec<Instruction> {
    use Gate::*;
    vec![
        Instruction::one(H, t),
        Instruction::cx(b, t),
        Instruction::one(Tdg, t),
        Instruction::cx(a, t),
        Instruction::one(T, t),
        Instruction::cx(b, t),
        Instruction::one(Tdg, t),
        Instruction::cx(a, t),
        Instruction::one(T, b),
        Instruction::one(T, t),
        Instruction::one(H, t),
        Instruction::cx(a, b),
        Instruction::one(T, a),
        Instruction::one(Tdg, b),
        Instruction::cx(a, b),
    ]
}

fn single_control(u: &Matrix, ctl: usize, t: usize) -> Vec<Instruction> {
    if max_abs_diff(u, &pauli_x()) < EXACT {
        return vec![Instruction::cx(ctl, t)];
    }
    let a = zyz_angles(u);
    let mut out = Vec::new();
    // C = Rz((δ-β)/2)
    push_rot(&mut out, Gate::Rz, t, (a.delta - a.beta) / 2.0);
    out.push(Instruction::cx(ctl, t));
    // B = Ry(-γ/2) Rz(-(δ+β)/2)
    push_rot(&mut out, Gate::Rz, t, -(a.delta + a.beta) / 2.0);
    push_rot(&mut out, Gate::Ry, t, -a.gamma / 2.0);
    out.push(Instruction::cx(ctl, t));
    // A = Rz(β) Ry(γ/2)
    push_rot(&mut out, Gate::Ry, t, a.gamma / 2.0);
    push_rot(&mut out, Gate::Rz, t, a.beta);
    // diag(1, e^{iα}) on the control, up to global phase
    push_rot(&mut out, Gate::Rz, ctl, a.alpha);
    out
}

/// Principal square root of a 2x2 unitary via its eigendecomposition.
pub fn sqrt_2x2(u: &Matrix) -> Matrix {
    let (a, b, cc, d) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let tr = a + d;
    let dt = a * d - b * cc;
    let disc = (tr * tr - dt * 4.0).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    if (l1 - l2).norm() < 1e-12 {
        return Matrix::identity(2, 2) * l1.sqrt();
    }
    // Eigenvector for eigenvalue l: (b, l - a) or (l - d, cc).
    let vec_for = |l: C64| -> (C64, C64) {
        let (x, y) = if b.norm() + (l - a).norm() > cc.norm() + (l - d).norm() {
            (b, l - a)
        } else {
            (l - d, cc)
        };
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        (x / n, y / n)
    };
    let (x1, y1) = vec_for(l1);
    let (x2, y2) = vec_for(l2);
    let w = Matrix::from_row_slice(2, 2, &[x1, x2, y1, y2]);
    let s = Matrix::from_row_slice(2, 2, &[l1.sqrt(), ZERO, ZERO, l2.sqrt()]);
    // Normal matrix: eigenvectors are orthonormal, so W^{-1} = W†.
    &w * s * w.adjoint()
}
