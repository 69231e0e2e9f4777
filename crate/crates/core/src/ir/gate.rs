use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{c, from_rows, Matrix, C64, I, ONE, ZERO};

/// The built-in gate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    CX,
    CY,
    CZ,
    Swap,
    FSim,
    CRz,
    CPhase,
    Measure,
    Reset,
}

impl Gate {
    pub const ALL: [Gate; 20] = [
        Gate::H,
        Gate::X,
        Gate::Y,
        Gate::Z,
        Gate::S,
        Gate::Sdg,
        Gate::T,
        Gate::Tdg,
        Gate::Rx,
        Gate::Ry,
        Gate::Rz,
        Gate::CX,
        Gate::CY,
        Gate::CZ,
        Gate::Swap,
        Gate::FSim,
        Gate::CRz,
        Gate::CPhase,
        Gate::Measure,
        Gate::Reset,
    ];

    /// Name as written in kernel source.
    pub fn name(self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::S => "S",
            Gate::Sdg => "Sdg",
            Gate::T => "T",
            Gate::Tdg => "Tdg",
            Gate::Rx => "Rx",
            Gate::Ry => "Ry",
            Gate::Rz => "Rz",
            Gate::CX => "CX",
            Gate::CY => "CY",
            Gate::CZ => "CZ",
            Gate::Swap => "Swap",
            Gate::FSim => "fSim",
            Gate::CRz => "CRz",
            Gate::CPhase => "CPhase",
            Gate::Measure => "Measure",
            Gate::Reset => "Reset",
        }
    }

    /// Resolves a source-level name, including the `CNOT` and `Mz` aliases.
    pub fn from_name(name: &str) -> Option<Gate> {
        match name {
            "CNOT" => Some(Gate::CX),
            "Mz" => Some(Gate::Measure),
            _ => Gate::ALL.iter().copied().find(|g| g.name() == name),
        }
    }

    pub fn num_targets(self) -> usize {
        match self {
            Gate::CX | Gate::CY | Gate::CZ | Gate::Swap | Gate::FSim | Gate::CRz | Gate::CPhase => 2,
            _ => 1,
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            Gate::Rx | Gate::Ry | Gate::Rz | Gate::CRz | Gate::CPhase => 1,
            Gate::FSim => 2,
            _ => 0,
        }
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, Gate::Measure | Gate::Reset)
    }

    /// Gates equal to their own inverse.
    pub fn is_self_inverse(self) -> bool {
        matches!(
            self,
            Gate::H | Gate::X | Gate::Y | Gate::Z | Gate::CX | Gate::CY | Gate::CZ | Gate::Swap
        )
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, Gate::Rx | Gate::Ry | Gate::Rz | Gate::CRz | Gate::CPhase)
    }

    /// Matrix of the gate on its own targets (no controls). `None` for
    /// non-unitary gates or a wrong parameter count.
    pub fn matrix(self, params: &[f64]) -> Option<Matrix> {
        if params.len() != self.num_params() || !self.is_unitary() {
            return None;
        }
        let h = FRAC_1_SQRT_2;
        let m = match self {
            Gate::H => from_rows(&[&[c(h, 0.0), c(h, 0.0)], &[c(h, 0.0), c(-h, 0.0)]]),
            Gate::X => from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
            Gate::Y => from_rows(&[&[ZERO, -I], &[I, ZERO]]),
            Gate::Z => diag(&[ONE, -ONE]),
            Gate::S => diag(&[ONE, I]),
            Gate::Sdg => diag(&[ONE, -I]),
            Gate::T => diag(&[ONE, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]),
            Gate::Tdg => diag(&[ONE, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]),
            Gate::Rx => {
                let (s, co) = (params[0] / 2.0).sin_cos();
                from_rows(&[&[c(co, 0.0), c(0.0, -s)], &[c(0.0, -s), c(co, 0.0)]])
            }
            Gate::Ry => {
                let (s, co) = (params[0] / 2.0).sin_cos();
                from_rows(&[&[c(co, 0.0), c(-s, 0.0)], &[c(s, 0.0), c(co, 0.0)]])
            }
            Gate::Rz => {
                let t = params[0] / 2.0;
                diag(&[C64::from_polar(1.0, -t), C64::from_polar(1.0, t)])
            }
            Gate::CX => controlled_block(&Gate::X.matrix(&[])?),
            Gate::CY => controlled_block(&Gate::Y.matrix(&[])?),
            Gate::CZ => diag(&[ONE, ONE, ONE, -ONE]),
            Gate::Swap => Matrix::from_fn(4, 4, |i, j| {
                let swapped = [0, 2, 1, 3][j];
                if i == swapped {
                    ONE
                } else {
                    ZERO
                }
            }),
            Gate::FSim => {
                let (s, co) = params[0].sin_cos();
                let mut m = Matrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(1, 1)] = c(co, 0.0);
                m[(1, 2)] = c(0.0, -s);
                m[(2, 1)] = c(0.0, -s);
                m[(2, 2)] = c(co, 0.0);
                m[(3, 3)] = C64::from_polar(1.0, -params[1]);
                m
            }
            Gate::CRz => {
                let t = params[0] / 2.0;
                diag(&[ONE, ONE, C64::from_polar(1.0, -t), C64::from_polar(1.0, t)])
            }
            Gate::CPhase => diag(&[ONE, ONE, ONE, C64::from_polar(1.0, params[0])]),
            Gate::Measure | Gate::Reset => return None,
        };
        Some(m)
    }

    /// The gate and parameters implementing the inverse, without an adjoint
    /// flag. `None` when the inverse is not a gate of the same family.
    pub fn inverse(self, params: &[f64]) -> Option<(Gate, Vec<f64>)> {
        if self.is_self_inverse() {
            return Some((self, params.to_vec()));
        }
        match self {
            Gate::S => Some((Gate::Sdg, vec![])),
            Gate::Sdg => Some((Gate::S, vec![])),
            Gate::T => Some((Gate::Tdg, vec![])),
            Gate::Tdg => Some((Gate::T, vec![])),
            Gate::Rx | Gate::Ry | Gate::Rz | Gate::CRz | Gate::CPhase | Gate::FSim => {
                Some((self, params.iter().map(|p| -p).collect()))
            }
            Gate::Measure | Gate::Reset => None,
            _ => unreachable!("self-inverse gates handled above"),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn diag(d: &[C64]) -> Matrix {
    let mut m = Matrix::zeros(d.len(), d.len());
    for (i, v) in d.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

/// `|0><0| ⊗ I + |1><1| ⊗ U` for a single control on the most significant bit.
pub fn controlled_block(u: &Matrix) -> Matrix {
    let n = u.nrows();
    let mut m = Matrix::identity(2 * n, 2 * n);
    m.view_mut((n, n), (n, n)).copy_from(u);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_error};

    #[test]
    fn aliases_resolve() {
        assert_eq!(Gate::from_name("CNOT"), Some(Gate::CX));
        assert_eq!(Gate::from_name("Mz"), Some(Gate::Measure));
        assert_eq!(Gate::from_name("fSim"), Some(Gate::FSim));
        assert_eq!(Gate::from_name("Toffoli"), None);
    }

    #[test]
    fn every_unitary_gate_is_unitary() {
        for g in Gate::ALL {
            if !g.is_unitary() {
                assert!(g.matrix(&[]).is_none());
                continue;
            }
            let params: Vec<f64> = (0..g.num_params()).map(|k| 0.37 + k as f64).collect();
            let m = g.matrix(&params).unwrap();
            assert_eq!(m.nrows(), 1 << g.num_targets());
            assert!(unitarity_error(&m) < 1e-14, "{g}");
        }
    }

    #[test]
    fn inverse_table_is_correct() {
        for g in Gate::ALL.into_iter().filter(|g| g.is_unitary()) {
            let params: Vec<f64> = (0..g.num_params()).map(|k| 0.81 - k as f64).collect();
            let m = g.matrix(&params).unwrap();
            let (ig, ip) = g.inverse(&params).unwrap();
            let inv = ig.matrix(&ip).unwrap();
            let prod = &m * &inv;
            assert!(max_abs_diff(&prod, &Matrix::identity(m.nrows(), m.nrows())) < 1e-14, "{g}");
        }
    }

    #[test]
    fn rz_has_no_extra_phase() {
        let m = Gate::Rz.matrix(&[std::f64::consts::PI]).unwrap();
        assert!((m[(0, 0)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((m[(1, 1)] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn cx_is_controlled_x() {
        let m = Gate::CX.matrix(&[]).unwrap();
        assert_eq!(m[(2, 3)], ONE);
        assert_eq!(m[(3, 2)], ONE);
        assert_eq!(m[(0, 0)], ONE);
    }
}
