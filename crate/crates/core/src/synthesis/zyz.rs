//! Single-qubit Euler decomposition `u = e^{iα} Rz(β) Ry(γ) Rz(δ)`.

use std::f64::consts::PI;

use crate::ir::{Gate, Instruction};
use crate::linalg::{det, Matrix, C64};

/// Angles below this are treated as zero.
const SNAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZyzAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

fn snap(x: f64) -> f64 {
    if x.abs() < SNAP {
        0.0
    } else {
        x
    }
}

/// Euler angles of a 2x2 unitary.
pub fn zyz_angles(u: &Matrix) -> ZyzAngles {
    assert_eq!(u.shape(), (2, 2), "zyz needs a 2x2 matrix");
    let alpha = det(u).arg() / 2.0;
    let v = u * C64::from_polar(1.0, -alpha);
    let (c, s) = (v[(0, 0)].norm(), v[(1, 0)].norm());
    let gamma = 2.0 * s.atan2(c);
    let (beta, delta) = if s < SNAP {
        (2.0 * v[(1, 1)].arg(), 0.0)
    } else if c < SNAP {
        (2.0 * v[(1, 0)].arg(), 0.0)
    } else {
        let sum = 2.0 * v[(1, 1)].arg();
        let diff = 2.0 * v[(1, 0)].arg();
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    ZyzAngles {
        alpha: snap(alpha),
        beta: snap(beta),
        gamma: snap(gamma),
        delta: snap(delta),
    }
}

/// True when `theta` is a multiple of 2π, where `Rz`/`Ry` is ±I.
pub fn is_trivial_angle(theta: f64) -> bool {
    let r = theta.rem_euclid(2.0 * PI);
    r < SNAP || 2.0 * PI - r < SNAP
}

/// Gate sequence, in time order, equal to `u` up to global phase.
pub fn zyz_circuit(u: &Matrix, q: usize) -> Vec<Instruction> {
    let a = zyz_angles(u);
    let mut out = Vec::new();
    for (g, t) in [(Gate::Rz, a.delta), (Gate::Ry, a.gamma), (Gate::Rz, a.beta)] {
        if !is_trivial_angle(t) {
            out.push(Instruction::rot(g, q, t));
        }
    }
    out
}
