//! Two-qubit KAK (Cartan) decomposition.
//!
//! `U = e^{ig} (A1 ⊗ B1) exp(i(a XX + b YY + c ZZ)) (A2 ⊗ B2)` with the
//! interaction coefficients canonicalised to `π/4 ≥ a ≥ b ≥ |c|`. The core is
//! then emitted with 0 to 3 CX gates.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{DMatrix, SymmetricEigen};

use super::zyz::zyz_circuit;
use crate::ir::{Gate, Instruction};
use crate::linalg::{c, det, kron, Matrix, C64, I, ONE, ZERO};

/// Coefficient tolerance used to pick a cheaper core circuit.
const CLASSIFY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct KakDecomposition {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Local factors applied after the core, `(on q0, on q1)`.
    pub k1: (Matrix, Matrix),
    /// Local factors applied before the core.
    pub k2: (Matrix, Matrix),
}

impl KakDecomposition {
    pub fn cx_count(&self) -> usize {
        let z = |x: f64| x.abs() < CLASSIFY_TOL;
        if z(self.a) && z(self.b) && z(self.c) {
            0
        } else if (self.a - FRAC_PI_4).abs() < CLASSIFY_TOL && z(self.b) && z(self.c) {
            1
        } else if z(self.c) {
            2
        } else {
            3
        }
    }

    /// Rebuilds the unitary (up to global phase).
    pub fn matrix(&self) -> Matrix {
        kron(&self.k1.0, &self.k1.1) * interaction(self.a, self.b, self.c) * kron(&self.k2.0, &self.k2.1)
    }
}

fn magic() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_row_slice(
        4,
        4,
        &[ONE, ZERO, ZERO, I, ZERO, I, ONE, ZERO, ZERO, I, -ONE, ZERO, ONE, ZERO, ZERO, -I],
    ) * c(s, 0.0)
}

fn pauli(g: Gate) -> Matrix {
    g.matrix(&[]).unwrap()
}

fn pp(g: Gate) -> Matrix {
    kron(&pauli(g), &pauli(g))
}

/// `exp(i(a XX + b YY + c ZZ))`. The three terms commute.
pub fn interaction(a: f64, b: f64, cc: f64) -> Matrix {
    let e = |t: f64, p: Matrix| Matrix::identity(4, 4) * c(t.cos(), 0.0) + p * c(0.0, t.sin());
    e(a, pp(Gate::X)) * e(b, pp(Gate::Y)) * e(cc, pp(Gate::Z))
}

/// Splits a 4x4 `K ≈ e^{iφ} A ⊗ B` into `(A, B)` with `det B = 1`; the phase
/// is folded into `A`.
fn split_local(k: &Matrix) -> (Matrix, Matrix) {
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..2 {
        for j in 0..2 {
            let n: f64 = k.view((2 * i, 2 * j), (2, 2)).iter().map(|z| z.norm_sqr()).sum();
            if n > best {
                (bi, bj, best) = (i, j, n);
            }
        }
    }
    let block: Matrix = k.view((2 * bi, 2 * bj), (2, 2)).into_owned();
    let b = &block / det(&block).sqrt();
    let bd = b.adjoint();
    let a = Matrix::from_fn(2, 2, |i, j| {
        let blk: Matrix = k.view((2 * i, 2 * j), (2, 2)).into_owned();
        (&bd * blk).trace() / 2.0
    });
    (a, b)
}

/// Real orthogonal `P` (det +1) diagonalising the complex symmetric unitary `m`.
fn diagonalise_symmetric_unitary(m: &Matrix) -> Matrix {
    let re = DMatrix::from_fn(4, 4, |i, j| m[(i, j)].re);
    let im = DMatrix::from_fn(4, 4, |i, j| m[(i, j)].im);
    // Re and Im commute; a generic real combination shares their eigenvectors.
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for k in 0..16 {
        let t = 0.377 + 0.911 * k as f64;
        let mix = &re * t.cos() + &im * t.sin();
        let p = SymmetricEigen::new(mix).eigenvectors;
        let pc = p.map(|x| c(x, 0.0));
        let d = pc.transpose() * m * &pc;
        let off = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| d[(i, j)].norm())
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(e, _)| off < *e) {
            best = Some((off, p));
        }
        if off < 1e-13 {
            break;
        }
    }
    let mut p = best.unwrap().1;
    if p.determinant() < 0.0 {
        p.column_mut(0).neg_mut();
    }
    p.map(|x| c(x, 0.0))
}

/// Full decomposition of a 4x4 unitary. The caller checks unitarity.
pub fn kak_decompose(u: &Matrix) -> KakDecomposition {
    assert_eq!(u.shape(), (4, 4), "kak needs a 4x4 matrix");
    let su = u / det(u).powf(0.25);
    let bm = magic();
    let bd = bm.adjoint();
    let up = &bd * &su * &bm;
    let m2 = up.transpose() * &up;
    let p = diagonalise_symmetric_unitary(&m2);
    let d = p.transpose() * &m2 * &p;
    let mut phi: Vec<f64> = (0..4).map(|k| d[(k, k)].arg()).collect();
    let half = |phi: &[f64]| Matrix::from_diagonal(&nalgebra::DVector::from_iterator(4, phi.iter().map(|t| C64::from_polar(1.0, t / 2.0))));
    let mut k1p = &up * &p * half(&phi).adjoint();
    if det(&k1p).re < 0.0 {
        phi[0] += 2.0 * std::f64::consts::PI;
        k1p = &up * &p * half(&phi).adjoint();
    }
    let mut k1 = &bm * &k1p * &bd;
    let mut k2 = &bm * p.transpose() * &bd;

    // Solve φ/2 = a dXX + b dYY + c dZZ + g for the magic-basis diagonals.
    let diag = |g: Gate| -> Vec<f64> {
        let m = &bd * pp(g) * &bm;
        (0..4).map(|k| m[(k, k)].re).collect()
    };
    let (dx, dy, dz) = (diag(Gate::X), diag(Gate::Y), diag(Gate::Z));
    let sys = DMatrix::from_fn(4, 4, |i, j| match j {
        0 => dx[i],
        1 => dy[i],
        2 => dz[i],
        _ => 1.0,
    });
    let rhs = nalgebra::DVector::from_iterator(4, phi.iter().map(|t| t / 2.0));
    let sol = sys.lu().solve(&rhs).expect("magic-basis Pauli diagonals are independent");
    let mut coef = [sol[0], sol[1], sol[2]];

    canonicalise(&mut coef, &mut k1, &mut k2);
    let (a1, b1) = split_local(&k1);
    let (a2, b2) = split_local(&k2);
    KakDecomposition {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        k1: (a1, b1),
        k2: (a2, b2),
    }
}

/// Moves `(a, b, c)` into the Weyl chamber, absorbing the required local
/// gates into `k1`/`k2` so that `k1 · A(a,b,c) · k2` is unchanged.
fn canonicalise(coef: &mut [f64; 3], k1: &mut Matrix, k2: &mut Matrix) {
    let paulis = [Gate::X, Gate::Y, Gate::Z];
    let id2 = Matrix::identity(2, 2);

    // A(.., t, ..) = A(.., t - π/2, ..) · (i PP)
    for (idx, g) in paulis.iter().enumerate() {
        let shift = ((coef[idx] + FRAC_PI_4) / FRAC_PI_2).floor();
        if shift != 0.0 {
            coef[idx] -= shift * FRAC_PI_2;
            let n = shift as i64;
            let step = pp(*g) * I;
            let mut l = Matrix::identity(4, 4);
            for _ in 0..n.rem_euclid(4) {
                l = &l * &step;
            }
            *k2 = &l * &*k2;
        }
    }

    // Swaps: L A(perm) L† = A. For S⊗S: (S⊗S) A(a,b,c) (S⊗S)† = A(b,a,c).
    let s = pauli(Gate::S);
    let h = pauli(Gate::H);
    let r = Gate::Rx.matrix(&[FRAC_PI_2]).unwrap();
    let swap = |coef: &mut [f64; 3], i: usize, j: usize, k1: &mut Matrix, k2: &mut Matrix| {
        // L maps the (i, j) pair onto each other under conjugation.
        let l = match (i, j) {
            (0, 1) => kron(&s, &s),
            (0, 2) => kron(&h, &h),
            _ => kron(&r, &r),
        };
        coef.swap(i, j);
        // A(old) = L† A(new) L
        *k1 = &*k1 * l.adjoint();
        *k2 = &l * &*k2;
    };
    // Sort by |value|, descending.
    for _ in 0..3 {
        for i in 0..2 {
            if coef[i].abs() < coef[i + 1].abs() - 1e-15 {
                swap(coef, i, i + 1, k1, k2);
            }
        }
    }

    // Sign flips: (P⊗I) conjugation negates the two terms that anticommute with P.
    let flip = |coef: &mut [f64; 3], p: Gate, k1: &mut Matrix, k2: &mut Matrix| {
        let l = kron(&pauli(p), &id2);
        let (i, j) = match p {
            Gate::Z => (0, 1),
            Gate::Y => (0, 2),
            _ => (1, 2),
        };
        coef[i] = -coef[i];
        coef[j] = -coef[j];
        *k1 = &*k1 * &l;
        *k2 = &l * &*k2;
    };
    if coef[0] < 0.0 && coef[1] < 0.0 {
        flip(coef, Gate::Z, k1, k2);
    } else if coef[0] < 0.0 {
        flip(coef, Gate::Y, k1, k2);
    }
    if coef[1] < 0.0 {
        flip(coef, Gate::X, k1, k2);
    }
}

/// Core circuit for `A(a, b, c)` on `(q0, q1)`, exact up to global phase.
fn core_circuit(k: &KakDecomposition, q0: usize, q1: usize) -> Vec<Instruction> {
    use Gate::*;
    let (a, b, cc) = (k.a, k.b, k.c);
    match k.cx_count() {
        0 => vec![],
        1 => vec![
            // (H⊗H) CZ (Sdg⊗Sdg) (H⊗H), with CZ = (I⊗H) CX (I⊗H)
            Instruction::one(H, q0),
            Instruction::cx(q0, q1),
            Instruction::one(H, q1),
            Instruction::one(Sdg, q0),
            Instruction::one(Sdg, q1),
            Instruction::one(H, q0),
            Instruction::one(H, q1),
        ],
        // exp(i(a XX + b YY)) = (R⊗R) exp(i(a XX + b ZZ)) (R⊗R)†, R = Rx(π/2)
        2 => vec![
            Instruction::rot(Rx, q0, -FRAC_PI_2),
            Instruction::rot(Rx, q1, -FRAC_PI_2),
            Instruction::cx(q0, q1),
            Instruction::rot(Rx, q0, -2.0 * a),
            Instruction::rot(Rz, q1, -2.0 * b),
            Instruction::cx(q0, q1),
            Instruction::rot(Rx, q0, FRAC_PI_2),
            Instruction::rot(Rx, q1, FRAC_PI_2),
        ],
        _ => vec![
            Instruction::rot(Rz, q1, -FRAC_PI_2),
            Instruction::cx(q1, q0),
            Instruction::rot(Rz, q0, -2.0 * cc - FRAC_PI_2),
            Instruction::rot(Ry, q1, 2.0 * a + FRAC_PI_2),
            Instruction::cx(q0, q1),
            Instruction::rot(Ry, q1, -2.0 * b - FRAC_PI_2),
            Instruction::cx(q1, q0),
            Instruction::rot(Rz, q0, FRAC_PI_2),
        ],
    }
}

/// Gate sequence for a 4x4 unitary on `(q0, q1)`, `q0` most significant.
pub fn kak_circuit(u: &Matrix, q0: usize, q1: usize) -> Vec<Instruction> {
    let k = kak_decompose(u);
    let mut out = Vec::new();
    if k.cx_count() == 0 {
        let (a, b) = split_local(&k.matrix());
        out.extend(zyz_circuit(&a, q0));
        out.extend(zyz_circuit(&b, q1));
        return out;
    }
    out.extend(zyz_circuit(&k.k2.0, q0));
    out.extend(zyz_circuit(&k.k2.1, q1));
    out.extend(core_circuit(&k, q0, q1));
    out.extend(zyz_circuit(&k.k1.0, q0));
    out.extend(zyz_circuit(&k.k1.1, q1));
    out
}
